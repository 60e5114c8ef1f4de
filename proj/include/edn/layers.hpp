#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edn/tensor.hpp"

namespace edn {

// Square 2-D convolution geometry. `dilation` is the atrous rate.
struct ConvSpec {
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t k = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::size_t dilation = 1;
  std::size_t groups = 1;

  std::size_t fan_in() const noexcept { return (c_in / groups) * k * k; }
  Shape4 weight_shape() const noexcept { return {c_out, c_in / groups, k, k}; }
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Throws DimensionError if the spec violates its own invariants.
void validate(const ConvSpec& spec);

// Output extent along one axis; 0 when the kernel does not fit.
std::size_t conv_output_extent(std::size_t in, const ConvSpec& spec) noexcept;

struct BatchNormParams {
  std::vector<float> gamma, beta, mean, var;
  friend bool operator==(const BatchNormParams&, const BatchNormParams&) = default;
};

struct LayerParams {
  std::string name;
  Tensor4 weight;
  std::optional<std::vector<float>> bias;
  std::optional<BatchNormParams> bn;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

inline constexpr float kBatchNormEps = 1e-5f;

Tensor4 conv2d(const Tensor4& x, const ConvSpec& spec, const LayerParams& p);

// Depthwise (groups = c_in) k x k convolution followed by a 1x1 pointwise
// convolution c_in -> c_out. `spec` describes the combined layer; p_dw and
// p_pw carry the two stages' weights. Batch norm is not applied here.
Tensor4 depthwise_separable_conv(const Tensor4& x, const ConvSpec& spec, const LayerParams& p_dw,
                                 const LayerParams& p_pw);
ConvSpec depthwise_part(const ConvSpec& spec) noexcept;
ConvSpec pointwise_part(const ConvSpec& spec) noexcept;

Tensor4 batchnorm_inference(const Tensor4& x, const LayerParams& p, float eps = kBatchNormEps);
void batchnorm_inplace(Tensor4& x, const LayerParams& p, float eps = kBatchNormEps);

Tensor4 relu(const Tensor4& x);
void relu_inplace(Tensor4& x);
Tensor4 sigmoid(const Tensor4& x);
float sigmoid(float v) noexcept;

// 2x2 window, stride 2, floor on odd extents.
Tensor4 maxpool2(const Tensor4& x);

// Per-channel spatial mean of batch item `item`.
ChannelVector global_avg_pool(const Tensor4& x, std::size_t item = 0);

// Half-pixel-center bilinear resize (align_corners = false).
Tensor4 upsample_bilinear(const Tensor4& x, std::size_t out_h, std::size_t out_w);

struct InitOptions {
  bool bias = false;
  bool batch_norm = false;
};

// He-normal weights (variance 2 / fan_in), zero bias, identity batch norm.
// Deterministic for a given seed.
LayerParams init_params(const ConvSpec& spec, std::uint64_t seed, InitOptions options = {},
                        std::string name = {});

std::uint64_t count_macs(const ConvSpec& spec, std::size_t out_h, std::size_t out_w) noexcept;

}  // namespace edn
