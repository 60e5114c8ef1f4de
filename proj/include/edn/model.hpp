#pragma once

// EDN graph: toy 5-stage backbone, extremely-downsampled block (EDB),
// scale-correlated pyramid convolutions (SCPC), top-down decoder and the
// deep-supervision heads P1..P5.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "edn/layers.hpp"
#include "edn/tensor.hpp"

namespace edn {

inline constexpr std::size_t kScpcBranches = 4;
inline constexpr std::size_t kStages = 5;
// Initial batch-norm gamma of the last 1x1 in every SCPC block.
inline constexpr float kResidualBranchGamma = 0.1f;

using RateSet = std::array<std::size_t, kScpcBranches>;

enum class RateGroup { kLow, kHigh, kExtraHigh };
std::string_view name(RateGroup g) noexcept;

struct RateGroups {
  RateSet low{1, 2, 4, 8};        // stages 1-2
  RateSet high{1, 2, 3, 4};       // stages 3-5
  RateSet extra_high{1, 1, 1, 1}; // both SCPC sites inside the EDB

  const RateSet& operator[](RateGroup g) const noexcept;
  friend bool operator==(const RateGroups&, const RateGroups&) = default;
};

struct NetworkConfig {
  std::array<std::size_t, kStages> backbone_widths{16, 32, 64, 128, 128};
  std::size_t decoder_width = 32;
  std::size_t edb_width = 256;
  std::size_t scpc_branches = kScpcBranches;
  RateGroups rates;
  bool lite = false;
  std::size_t input_side = 384;
  std::uint64_t seed = 0;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

// Throws ConfigError naming the first offending field.
void validate(const NetworkConfig& config);

// A convolution in the graph. out_h/out_w are the spatial extents the layer
// produces for the configured input side (0 when unknown).
struct Layer {
  ConvSpec spec;
  LayerParams params;
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  friend bool operator==(const Layer&, const Layer&) = default;
};

// Layers keyed by dotted path ("decoder.stage3.h.scpc1.branch2").
class ParamStore {
 public:
  void add(std::string path, Layer layer);
  const Layer& at(std::string_view path) const;
  Layer& at(std::string_view path);
  bool contains(std::string_view path) const { return layers_.find(path) != layers_.end(); }
  std::size_t size() const noexcept { return layers_.size(); }

  auto begin() const { return layers_.begin(); }
  auto end() const { return layers_.end(); }
  auto begin() { return layers_.begin(); }
  auto end() { return layers_.end(); }

  friend bool operator==(const ParamStore&, const ParamStore&) = default;

 private:
  std::map<std::string, Layer, std::less<>> layers_;
};

// Deterministic per-layer seed derived from the global seed and the path.
std::uint64_t layer_seed(std::uint64_t seed, std::string_view path) noexcept;

// Registers the layers of one SCPC block under `path`.
void add_scpc_layers(ParamStore& store, const std::string& path, std::size_t channels, const RateSet& rates,
                     bool lite, std::uint64_t seed, std::size_t side = 0);
// Two stacked SCPC blocks: `path`.scpc1 and `path`.scpc2.
void add_stacked_scpc_layers(ParamStore& store, const std::string& path, std::size_t channels,
                             const RateSet& rates, bool lite, std::uint64_t seed, std::size_t side = 0);

struct ScpcSite {
  std::string path;
  RateGroup group;
  RateSet rates;
  std::size_t channels;
  std::size_t side;
};

struct EdnModel {
  NetworkConfig config;
  ParamStore params;
  std::vector<ScpcSite> sites;
};

EdnModel build_model(const NetworkConfig& config);

std::uint64_t total_macs(const EdnModel& model) noexcept;
std::uint64_t total_params(const EdnModel& model) noexcept;

// conv -> [bn] -> [relu] using the layer's parameters.
Tensor4 conv_block(const Tensor4& x, const Layer& layer, bool apply_relu);

// One SCPC block. Preserves dims. Lite blocks use depthwise-separable 3x3s.
Tensor4 scpc(const Tensor4& x, const RateSet& rates, const ParamStore& params, std::string_view path,
             bool lite);

Tensor4 stacked_scpc(const Tensor4& x, const RateSet& rates, const ParamStore& params, std::string_view path,
                     bool lite);

enum class EdbAttention {
  kComputed,   // X3 = sigmoid(GAP(X2))
  kForceOnes,  // X3 replaced by the all-ones vector
  kDisabled,   // recalibration skipped entirely
};

struct EdbTrace {
  Tensor4 x1, x2;
  std::vector<ChannelVector> attention;  // one per batch item
};

Tensor4 edb(const Tensor4& e5, const EdnModel& model, EdbAttention attention = EdbAttention::kComputed,
            EdbTrace* trace = nullptr);

struct ForwardOutputs {
  std::array<Tensor4, kStages> stage_features;      // E1..E5
  std::array<Tensor4, kStages + 1> decoder_features; // D1..D6
  std::array<Tensor4, kStages> predictions;         // P1..P5, each (n,1,s,s)
  std::vector<std::string> scpc_sites_visited;
};

ForwardOutputs forward(const EdnModel& model, const Tensor4& image);

}  // namespace edn
