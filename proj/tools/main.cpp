#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  namespace cli = edn::cli;
  cli::keep_freed_memory();
  CLI::App app{"EDN saliency inference and evaluation"};
  app.require_subcommand(1);

  cli::InferArgs infer;
  std::string all_sides;
  auto* c_infer = app.add_subcommand("infer", "Predict a saliency map (P1) for one PPM image");
  c_infer->add_option("--config", infer.config, "Run config file")->required();
  c_infer->add_option("--weights", infer.weights, "EDNW weights file")->required();
  c_infer->add_option("--image", infer.image, "Input P6 image")->required();
  c_infer->add_option("--out", infer.out, "Output P5 map")->required();
  c_infer->add_option("--all-sides", all_sides, "Also write P1..P5 into this directory");

  cli::InitWeightsArgs init;
  auto* c_init = app.add_subcommand("init-weights", "Write the seeded initial weights of a config");
  c_init->add_option("--config", init.config, "Run config file")->required();
  c_init->add_option("--out", init.out, "Output EDNW file")->required();

  cli::EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Score predictions against ground truth");
  c_eval->add_option("--pred", ev.pred, "Directory of predicted P5 maps")->required();
  c_eval->add_option("--gt", ev.gt, "Directory of P5 ground-truth masks")->required();
  c_eval->add_option("--out", ev.out, "CSV report")->required();
  c_eval->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");

  cli::PartitionEvalArgs pe;
  auto* c_pe = app.add_subcommand("partition-eval", "Per-region MAE of two prediction sets");
  c_pe->add_option("--pred-a", pe.pred_a, "Baseline predictions")->required();
  c_pe->add_option("--pred-b", pe.pred_b, "Compared predictions")->required();
  c_pe->add_option("--gt", pe.gt, "Ground-truth masks")->required();
  c_pe->add_option("--out", pe.out, "CSV report")->required();
  c_pe->add_option("--threads", pe.threads, "Worker threads (0 = all cores)");

  cli::GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradient");
  c_gc->add_option("--seed", gc.seed, "RNG seed");

  cli::BenchArgs bench;
  std::string bench_config;
  auto* c_bench = app.add_subcommand("bench", "Forward time and MACs, full vs lite");
  c_bench->add_option("--config", bench_config, "Run config file (default config when absent)");
  c_bench->add_option("--repeat", bench.repeat, "Timed forwards per variant")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }

  if (*c_infer) {
    if (!all_sides.empty()) infer.all_sides = all_sides;
    return cli::infer(infer, std::cerr);
  }
  if (*c_init) return cli::init_weights(init, std::cerr);
  if (*c_eval) return cli::eval(ev, std::cerr);
  if (*c_pe) return cli::partition_eval(pe, std::cerr);
  if (*c_gc) return cli::gradcheck(gc, std::cout);
  if (!bench_config.empty()) bench.config = bench_config;
  return cli::bench(bench, std::cout);
}
