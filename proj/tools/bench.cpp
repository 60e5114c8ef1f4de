#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "commands.hpp"

namespace edn::cli {

BenchReport run_bench(NetworkConfig config, std::size_t repeat) {
  keep_freed_memory();
  repeat = std::max<std::size_t>(repeat, 1);
  config.lite = false;
  const EdnModel full = build_model(config);
  config.lite = true;
  const EdnModel lite = build_model(config);

  Tensor4 image({1, 3, config.input_side, config.input_side});
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (float& v : image.data()) v = unit(rng);

  BenchReport report{{"full", total_macs(full), total_params(full), 0.0, 0.0},
                     {"lite", total_macs(lite), total_params(lite), 0.0, 0.0}};
  const auto time_one = [&image](const EdnModel& m) {
    const auto t0 = std::chrono::steady_clock::now();
    const ForwardOutputs out = forward(m, image);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::vector<double> tf, tl;
  for (std::size_t i = 0; i < repeat; ++i) {
    tf.push_back(time_one(full));
    tl.push_back(time_one(lite));
  }
  const auto fill = [repeat](BenchRow& row, const std::vector<double>& t) {
    row.best_seconds = *std::min_element(t.begin(), t.end());
    double sum = 0.0;
    for (double s : t) sum += s;
    row.mean_seconds = sum / static_cast<double>(repeat);
  };
  fill(report.full, tf);
  fill(report.lite, tl);
  return report;
}

}  // namespace edn::cli
