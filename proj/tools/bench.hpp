#pragma once

#include <cstdint>
#include <string>

#include "edn/model.hpp"

namespace edn::cli {

struct BenchRow {
  std::string variant;
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
  double best_seconds = 0.0;
  double mean_seconds = 0.0;
};

struct BenchReport {
  BenchRow full, lite;
};

// Times `repeat` forwards of `config` with lite off and on, alternating the
// two so drift in machine load hits both alike. The input is a fixed seeded
// noise image.
BenchReport run_bench(NetworkConfig config, std::size_t repeat);

}  // namespace edn::cli
