#pragma once

// Subcommand bodies of the `edn` tool, callable without a process.
// Each returns the process exit code: 0 success, 1 validation failure,
// 2 io or format error.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "edn/error.hpp"

namespace edn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

namespace fs = std::filesystem;

struct InferArgs {
  fs::path config, weights, image, out;
  std::optional<fs::path> all_sides;
};

struct InitWeightsArgs {
  fs::path config, out;
};

struct EvalArgs {
  fs::path pred, gt, out;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct PartitionEvalArgs {
  fs::path pred_a, pred_b, gt, out;
  std::size_t threads = 0;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::optional<fs::path> config;
  std::size_t repeat = 10;
};

int infer(const InferArgs& args, std::ostream& log);
int init_weights(const InitWeightsArgs& args, std::ostream& log);
int eval(const EvalArgs& args, std::ostream& log);
int partition_eval(const PartitionEvalArgs& args, std::ostream& log);
int gradcheck(const GradcheckArgs& args, std::ostream& out);
int bench(const BenchArgs& args, std::ostream& out);

// Runs `body`, reporting library exceptions on `log` and mapping them to
// exit codes.
template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

// Asks the allocator to keep freed feature maps instead of returning them to
// the OS after every layer. No-op outside glibc.
void keep_freed_memory() noexcept;

// "%.6f"; "nan" for a missing value.
std::string format_number(std::optional<double> v);

}  // namespace edn::cli
