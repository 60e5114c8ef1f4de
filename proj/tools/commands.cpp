#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "bench.hpp"
#include "edn/layers.hpp"
#include "edn/losses.hpp"
#include "edn/metrics.hpp"
#include "edn/model.hpp"
#include "edn/netpbm.hpp"
#include "edn/run_config.hpp"
#include "edn/weights.hpp"

namespace edn::cli {

void keep_freed_memory() noexcept {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

std::string format_number(std::optional<double> v) {
  if (!v || std::isnan(*v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

namespace {

std::size_t thread_count(std::size_t requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Stem -> path of every *.pgm directly inside `dir`.
std::map<std::string, fs::path> list_maps(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    out.emplace(entry.path().stem().string(), entry.path());
  }
  return out;
}

// Exact-stem pairing. Lists every unmatched name and returns false if any.
bool pair_names(const std::vector<std::pair<std::string, const std::map<std::string, fs::path>*>>& sets,
                std::vector<std::string>& names, std::ostream& log) {
  std::set<std::string> all;
  for (const auto& [label, set] : sets) {
    for (const auto& [stem, path] : *set) all.insert(stem);
  }
  bool ok = true;
  for (const auto& stem : all) {
    for (const auto& [label, set] : sets) {
      if (!set->contains(stem)) {
        log << "unmatched: '" << stem << "' has no file in " << label << "\n";
        ok = false;
      }
    }
  }
  if (!ok) return false;
  names.assign(all.begin(), all.end());
  if (names.empty()) {
    log << "error: no .pgm files to evaluate\n";
    return false;
  }
  return true;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SaliencyMap map_at_size(const Tensor4& p, std::size_t h, std::size_t w) {
  const Tensor4 resized = (p.h() == h && p.w() == w) ? p : upsample_bilinear(p, h, w);
  std::vector<double> v(resized.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(static_cast<double>(resized.data()[i]), 0.0, 1.0);
  return SaliencyMap(h, w, std::move(v));
}

}  // namespace

int infer(const InferArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    EdnModel model = build_model(load_run_config(args.config));
    load_weights(model, args.weights);
    const Image8 rgb = read_netpbm(args.image);
    const ForwardOutputs out = forward(model, to_input_tensor(rgb, model.config.input_side));
    save_map_pgm(map_at_size(out.predictions[0], rgb.h, rgb.w), args.out);
    if (args.all_sides) {
      fs::create_directories(*args.all_sides);
      const std::string stem = args.image.stem().string();
      for (std::size_t i = 0; i < kStages; ++i) {
        save_map_pgm(map_at_size(out.predictions[i], rgb.h, rgb.w),
                     *args.all_sides / (stem + "_P" + std::to_string(i + 1) + ".pgm"));
      }
    }
    return kExitOk;
  });
}

int init_weights(const InitWeightsArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    save_weights(build_model(load_run_config(args.config)), args.out);
    return kExitOk;
  });
}

namespace {

const char* const kEvalHeader = "image,mae,f_max,f_weighted,s_measure,e_max,e_mean";

std::string metrics_row(const std::string& name, const std::optional<ImageMetrics>& m) {
  std::string row = name;
  const auto field = [&](std::optional<double> v) { row += "," + format_number(v); };
  if (!m) {
    for (int i = 0; i < 6; ++i) field(std::nullopt);
  } else {
    field(m->mae);
    field(m->f_max);
    field(m->f_weighted);
    field(m->s_measure);
    field(m->e_max);
    field(m->e_mean);
  }
  return row + "\n";
}

}  // namespace

int eval(const EvalArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const auto preds = list_maps(args.pred);
    const auto gts = list_maps(args.gt);
    std::vector<std::string> names;
    if (!pair_names({{"--pred", &preds}, {"--gt", &gts}}, names, log)) return kExitValidation;

    std::vector<EvalItem> items;
    items.reserve(names.size());
    for (const auto& name : names) {
      items.push_back({name, load_map_pgm(preds.at(name)), load_mask_pgm(gts.at(name))});
    }
    const MetricsReport report = evaluate_all(items, thread_count(args.threads));

    std::string csv = std::string(kEvalHeader) + "\n";
    for (const auto& r : report.per_image) {
      if (!r.metrics) log << "warning: " << r.name << ": " << r.skip_reason << ", skipped\n";
      csv += metrics_row(r.name, r.metrics);
    }
    csv += metrics_row("ALL", report.evaluated ? std::optional(report.aggregate) : std::nullopt);
    write_text(args.out, csv);
    return kExitOk;
  });
}

namespace {

struct RegionRow {
  RegionMae a, b;
};

std::optional<double> improvement(std::optional<double> base, std::optional<double> improved) {
  if (!base || !improved || *base <= 0.0) return std::nullopt;
  return relative_improvement(*base, *improved);
}

std::string region_row(const std::string& name, const std::optional<RegionRow>& r) {
  std::string row = name;
  const auto field = [&](std::optional<double> v) { row += "," + format_number(v); };
  if (!r) {
    for (int i = 0; i < 9; ++i) field(std::nullopt);
    return row + "\n";
  }
  for (const RegionMae* m : {&r->a, &r->b}) {
    field(m->center);
    field(m->boundary);
    field(m->other);
  }
  field(improvement(r->a.center, r->b.center));
  field(improvement(r->a.boundary, r->b.boundary));
  field(improvement(r->a.other, r->b.other));
  return row + "\n";
}

}  // namespace

int partition_eval(const PartitionEvalArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const auto pa = list_maps(args.pred_a);
    const auto pb = list_maps(args.pred_b);
    const auto gts = list_maps(args.gt);
    std::vector<std::string> names;
    if (!pair_names({{"--pred-a", &pa}, {"--pred-b", &pb}, {"--gt", &gts}}, names, log)) return kExitValidation;

    std::vector<EvalItem> items_a, items_b;
    for (const auto& name : names) {
      const GtMask g = load_mask_pgm(gts.at(name));
      items_a.push_back({name, load_map_pgm(pa.at(name)), g});
      items_b.push_back({name, load_map_pgm(pb.at(name)), g});
    }
    const std::size_t threads = thread_count(args.threads);
    const MetricsReport ra = evaluate_all(items_a, threads);
    const MetricsReport rb = evaluate_all(items_b, threads);

    std::string csv =
        "image,center_a,boundary_a,other_a,center_b,boundary_b,other_b,"
        "improvement_center,improvement_boundary,improvement_other\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& a = ra.per_image[i];
      const auto& b = rb.per_image[i];
      if (!a.metrics) {
        log << "warning: " << a.name << ": " << a.skip_reason << ", skipped\n";
        csv += region_row(a.name, std::nullopt);
      } else {
        csv += region_row(a.name, RegionRow{a.metrics->region, b.metrics->region});
      }
    }
    csv += region_row("ALL", ra.evaluated ? std::optional(RegionRow{ra.aggregate.region, rb.aggregate.region})
                                          : std::nullopt);
    write_text(args.out, csv);
    return kExitOk;
  });
}

int gradcheck(const GradcheckArgs& args, std::ostream& out) {
  return guarded(out, [&] {
    const GradCheckOptions opt;
    const GradCheckReport r = gradient_check(args.seed, opt);
    char buf[160];
    std::snprintf(buf, sizeof buf, "instances=%zu max_relative_error=%.3e tolerance=%.1e %s\n", r.instances,
                  r.max_relative_error, opt.tolerance, r.passed ? "PASS" : "FAIL");
    out << buf;
    return r.passed ? kExitOk : kExitValidation;
  });
}

int bench(const BenchArgs& args, std::ostream& out) {
  return guarded(out, [&] {
    const NetworkConfig cfg = args.config ? load_run_config(*args.config) : NetworkConfig{};
    const BenchReport r = run_bench(cfg, args.repeat);
    out << "variant,macs,params,best_seconds,mean_seconds\n";
    for (const BenchRow* row : {&r.full, &r.lite}) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%.6f,%.6f\n", row->variant.c_str(),
                    static_cast<unsigned long long>(row->macs), static_cast<unsigned long long>(row->params),
                    row->best_seconds, row->mean_seconds);
      out << buf;
    }
    return kExitOk;
  });
}

}  // namespace edn::cli
