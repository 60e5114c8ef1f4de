#include "edn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "edn/simd/kernels.hpp"

namespace edn {

void validate(const ConvSpec& s) {
  if (s.c_in == 0 || s.c_out == 0) throw DimensionError("conv: channel counts must be >= 1");
  if (s.k == 0 || s.stride == 0 || s.dilation == 0) {
    throw DimensionError("conv: kernel, stride and dilation must be >= 1");
  }
  if (s.groups == 0 || s.c_in % s.groups != 0 || s.c_out % s.groups != 0) {
    throw DimensionError("conv: groups=" + std::to_string(s.groups) + " must divide c_in=" +
                         std::to_string(s.c_in) + " and c_out=" + std::to_string(s.c_out));
  }
}

std::size_t conv_output_extent(std::size_t in, const ConvSpec& s) noexcept {
  const std::size_t span = s.dilation * (s.k - 1) + 1;
  const std::size_t padded = in + 2 * s.pad;
  if (padded < span) return 0;
  return (padded - span) / s.stride + 1;
}

namespace {

void check_weights(const ConvSpec& spec, const LayerParams& p) {
  if (p.weight.shape() != spec.weight_shape()) {
    throw DimensionError("conv '" + p.name + "': weight dims " + to_string(p.weight.shape()) + ", expected " +
                         to_string(spec.weight_shape()));
  }
  if (p.bias && p.bias->size() != spec.c_out) {
    throw DimensionError("conv '" + p.name + "': bias length " + std::to_string(p.bias->size()) +
                         ", expected " + std::to_string(spec.c_out));
  }
}

// Range of output columns [lo, hi) whose tap at input offset `off` + x*stride
// lands inside [0, in).
std::pair<std::ptrdiff_t, std::ptrdiff_t> valid_range(std::ptrdiff_t off, std::ptrdiff_t stride,
                                                      std::ptrdiff_t in, std::ptrdiff_t out) {
  std::ptrdiff_t lo = 0;
  if (off < 0) lo = (-off + stride - 1) / stride;
  std::ptrdiff_t hi = 0;
  if (in - 1 - off >= 0) hi = (in - 1 - off) / stride + 1;
  return {std::min(lo, out), std::min(std::max(hi, lo), out)};
}

}  // namespace

// Direct convolution. Each output element accumulates bias first, then taps in
// (input channel, ky, kx) order; taps that fall in the zero padding are skipped.
Tensor4 conv2d(const Tensor4& x, const ConvSpec& spec, const LayerParams& p) {
  validate(spec);
  if (x.c() != spec.c_in) {
    throw DimensionError("conv '" + p.name + "': input has " + std::to_string(x.c()) + " channels, expected " +
                         std::to_string(spec.c_in));
  }
  check_weights(spec, p);
  const std::size_t out_h = conv_output_extent(x.h(), spec);
  const std::size_t out_w = conv_output_extent(x.w(), spec);
  if (out_h == 0 || out_w == 0) {
    throw DimensionError("conv '" + p.name + "': kernel does not fit input " + to_string(x.shape()));
  }

  const auto& kern = simd::active();
  Tensor4 out({x.n(), spec.c_out, out_h, out_w});
  const std::size_t cin_g = spec.c_in / spec.groups;
  const std::size_t cout_g = spec.c_out / spec.groups;
  const auto stride = static_cast<std::ptrdiff_t>(spec.stride);
  const auto in_h = static_cast<std::ptrdiff_t>(x.h());
  const auto in_w = static_cast<std::ptrdiff_t>(x.w());
  const auto pad = static_cast<std::ptrdiff_t>(spec.pad);
  const auto dil = static_cast<std::ptrdiff_t>(spec.dilation);

  // Output rows are processed in blocks of about 2048 floats so the
  // accumulators stay in L1 across all taps, and every output channel is
  // computed for a block before moving on so its input rows stay cached.
  // Per element the order is still bias, then (input channel, ky, kx).
  const auto ow = static_cast<std::ptrdiff_t>(out_w);
  const auto oh = static_cast<std::ptrdiff_t>(out_h);
  const std::ptrdiff_t block = std::max<std::ptrdiff_t>(1, 2048 / ow);
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::ptrdiff_t b0 = 0; b0 < oh; b0 += block) {
      const std::ptrdiff_t b1 = std::min(oh, b0 + block);
      for (std::size_t oc = 0; oc < spec.c_out; ++oc) {
        auto dst = out.plane(n, oc);
        std::fill(dst.begin() + b0 * ow, dst.begin() + b1 * ow, p.bias ? (*p.bias)[oc] : 0.0f);
        const std::size_t group = oc / cout_g;
        for (std::size_t icg = 0; icg < cin_g; ++icg) {
          const auto src = x.plane(n, group * cin_g + icg);
          for (std::size_t ky = 0; ky < spec.k; ++ky) {
            const std::ptrdiff_t row_off = static_cast<std::ptrdiff_t>(ky) * dil - pad;
            const auto [vy0, vy1] = valid_range(row_off, stride, in_h, oh);
            const std::ptrdiff_t y0 = std::max(vy0, b0), y1 = std::min(vy1, b1);
            if (y1 <= y0) continue;
            for (std::size_t kx = 0; kx < spec.k; ++kx) {
              const float wv = p.weight.at(oc, icg, ky, kx);
              const std::ptrdiff_t col_off = static_cast<std::ptrdiff_t>(kx) * dil - pad;
              const auto [x0, x1] = valid_range(col_off, stride, in_w, ow);
              if (x1 <= x0) continue;
              float* drow = dst.data() + y0 * ow + x0;
              const float* srow = src.data() + (y0 * stride + row_off) * in_w + x0 * stride + col_off;
              kern.axpy_rows(drow, out_w, srow, static_cast<std::size_t>(stride * in_w), spec.stride, wv,
                             static_cast<std::size_t>(y1 - y0), static_cast<std::size_t>(x1 - x0));
            }
          }
        }
      }
    }
  }
  return out;
}

ConvSpec depthwise_part(const ConvSpec& s) noexcept {
  return {s.c_in, s.c_in, s.k, s.stride, s.pad, s.dilation, s.c_in};
}

ConvSpec pointwise_part(const ConvSpec& s) noexcept { return {s.c_in, s.c_out, 1, 1, 0, 1, 1}; }

Tensor4 depthwise_separable_conv(const Tensor4& x, const ConvSpec& spec, const LayerParams& p_dw,
                                 const LayerParams& p_pw) {
  return conv2d(conv2d(x, depthwise_part(spec), p_dw), pointwise_part(spec), p_pw);
}

void batchnorm_inplace(Tensor4& x, const LayerParams& p, float eps) {
  if (!p.bn) throw DimensionError("layer '" + p.name + "' carries no batch-norm parameters");
  const auto& bn = *p.bn;
  if (bn.gamma.size() != x.c() || bn.beta.size() != x.c() || bn.mean.size() != x.c() ||
      bn.var.size() != x.c()) {
    throw DimensionError("batch norm '" + p.name + "': parameter length does not match " +
                         std::to_string(x.c()) + " channels");
  }
  const auto& kern = simd::active();
  for (std::size_t c = 0; c < x.c(); ++c) {
    const float s = bn.gamma[c] / std::sqrt(bn.var[c] + eps);
    const float b = bn.beta[c] - bn.mean[c] * s;
    for (std::size_t n = 0; n < x.n(); ++n) {
      float* plane = x.plane(n, c).data();
      kern.scale_shift(plane, plane, s, b, x.shape().plane());
    }
  }
}

Tensor4 batchnorm_inference(const Tensor4& x, const LayerParams& p, float eps) {
  Tensor4 out = x;
  batchnorm_inplace(out, p, eps);
  return out;
}

void relu_inplace(Tensor4& x) { simd::active().relu(x.data().data(), x.data().data(), x.size()); }

Tensor4 relu(const Tensor4& x) {
  Tensor4 out = x;
  relu_inplace(out);
  return out;
}

float sigmoid(float v) noexcept {
  // Evaluated on the side where exp() cannot overflow.
  if (v >= 0.0f) return 1.0f / (1.0f + std::exp(-v));
  const float e = std::exp(v);
  return e / (1.0f + e);
}

Tensor4 sigmoid(const Tensor4& x) {
  Tensor4 out(x.shape());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(), [](float v) { return sigmoid(v); });
  return out;
}

Tensor4 maxpool2(const Tensor4& x) {
  if (x.h() < 2 || x.w() < 2) throw DimensionError("maxpool2 needs h,w >= 2, got " + to_string(x.shape()));
  const std::size_t oh = x.h() / 2;
  const std::size_t ow = x.w() / 2;
  Tensor4 out({x.n(), x.c(), oh, ow});
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const auto src = x.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < oh; ++y) {
        const float* r0 = src.data() + (2 * y) * x.w();
        const float* r1 = r0 + x.w();
        for (std::size_t xx = 0; xx < ow; ++xx) {
          dst[y * ow + xx] = std::max(std::max(r0[2 * xx], r0[2 * xx + 1]), std::max(r1[2 * xx], r1[2 * xx + 1]));
        }
      }
    }
  }
  return out;
}

ChannelVector global_avg_pool(const Tensor4& x, std::size_t item) {
  if (item >= x.n()) throw DimensionError("global_avg_pool: batch item out of range");
  std::vector<float> v(x.c());
  for (std::size_t c = 0; c < x.c(); ++c) {
    double acc = 0.0;
    for (float e : x.plane(item, c)) acc += e;
    v[c] = static_cast<float>(acc / static_cast<double>(x.shape().plane()));
  }
  return ChannelVector(std::move(v));
}

namespace {

struct Tap {
  std::size_t i0, i1;
  float frac;
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t d = 0; d < out; ++d) {
    const double s = std::clamp((static_cast<double>(d) + 0.5) * ratio - 0.5, 0.0, last);
    const auto i0 = static_cast<std::size_t>(s);
    taps[d] = {i0, std::min(i0 + 1, in - 1), static_cast<float>(s - static_cast<double>(i0))};
  }
  return taps;
}

}  // namespace

Tensor4 upsample_bilinear(const Tensor4& x, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw DimensionError("upsample_bilinear: output dims must be >= 1");
  const auto ty = bilinear_taps(x.h(), out_h);
  const auto tx = bilinear_taps(x.w(), out_w);
  Tensor4 out({x.n(), x.c(), out_h, out_w});
  for (std::size_t n = 0; n < x.n(); ++n) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const auto src = x.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < out_h; ++y) {
        const float* r0 = src.data() + ty[y].i0 * x.w();
        const float* r1 = src.data() + ty[y].i1 * x.w();
        for (std::size_t xx = 0; xx < out_w; ++xx) {
          const Tap& t = tx[xx];
          // a + f*(b - a) keeps constants exact.
          const float top = r0[t.i0] + t.frac * (r0[t.i1] - r0[t.i0]);
          const float bot = r1[t.i0] + t.frac * (r1[t.i1] - r1[t.i0]);
          dst[y * out_w + xx] = top + ty[y].frac * (bot - top);
        }
      }
    }
  }
  return out;
}

LayerParams init_params(const ConvSpec& spec, std::uint64_t seed, InitOptions options, std::string name) {
  validate(spec);
  LayerParams p{std::move(name), Tensor4(spec.weight_shape()), std::nullopt, std::nullopt};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(spec.fan_in())));
  for (float& w : p.weight.data()) w = static_cast<float>(dist(rng));
  if (options.bias) p.bias = std::vector<float>(spec.c_out, 0.0f);
  if (options.batch_norm) {
    p.bn = BatchNormParams{std::vector<float>(spec.c_out, 1.0f), std::vector<float>(spec.c_out, 0.0f),
                           std::vector<float>(spec.c_out, 0.0f), std::vector<float>(spec.c_out, 1.0f)};
  }
  return p;
}

std::uint64_t count_macs(const ConvSpec& spec, std::size_t out_h, std::size_t out_w) noexcept {
  return static_cast<std::uint64_t>(spec.c_out) * (spec.c_in / spec.groups) * spec.k * spec.k * out_h * out_w;
}

}  // namespace edn
