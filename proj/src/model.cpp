#include "edn/model.hpp"

#include <algorithm>

namespace edn {

std::string_view name(RateGroup g) noexcept {
  switch (g) {
    case RateGroup::kLow:
      return "L";
    case RateGroup::kHigh:
      return "H";
    case RateGroup::kExtraHigh:
      return "EH";
  }
  return "?";
}

const RateSet& RateGroups::operator[](RateGroup g) const noexcept {
  switch (g) {
    case RateGroup::kLow:
      return low;
    case RateGroup::kHigh:
      return high;
    case RateGroup::kExtraHigh:
      break;
  }
  return extra_high;
}

void validate(const NetworkConfig& cfg) {
  for (std::size_t i = 0; i < kStages; ++i) {
    if (cfg.backbone_widths[i] == 0) {
      throw ConfigError("backbone_widths: stage " + std::to_string(i + 1) + " width must be >= 1");
    }
  }
  if (cfg.scpc_branches != kScpcBranches) {
    throw ConfigError("scpc_branches: must be " + std::to_string(kScpcBranches));
  }
  if (cfg.decoder_width == 0 || cfg.decoder_width % cfg.scpc_branches != 0) {
    throw ConfigError("decoder_width: " + std::to_string(cfg.decoder_width) + " is not a positive multiple of " +
                      std::to_string(cfg.scpc_branches));
  }
  if (cfg.edb_width == 0 || cfg.edb_width % cfg.scpc_branches != 0) {
    throw ConfigError("edb_width: " + std::to_string(cfg.edb_width) + " is not a positive multiple of " +
                      std::to_string(cfg.scpc_branches));
  }
  const std::pair<const char*, const RateSet*> groups[] = {
      {"rates_L", &cfg.rates.low}, {"rates_H", &cfg.rates.high}, {"rates_EH", &cfg.rates.extra_high}};
  for (const auto& [key, rates] : groups) {
    for (std::size_t r : *rates) {
      if (r == 0) throw ConfigError(std::string(key) + ": atrous rates must be >= 1");
    }
  }
  if (cfg.input_side == 0 || cfg.input_side % 64 != 0) {
    throw ConfigError("input_side: " + std::to_string(cfg.input_side) + " is not a positive multiple of 64");
  }
}

void ParamStore::add(std::string path, Layer layer) {
  if (layer.params.name.empty()) layer.params.name = path;
  const auto [it, inserted] = layers_.emplace(std::move(path), std::move(layer));
  if (!inserted) throw ValidationError("duplicate layer path '" + it->first + "'");
}

const Layer& ParamStore::at(std::string_view path) const {
  const auto it = layers_.find(path);
  if (it == layers_.end()) throw ValidationError("missing layer '" + std::string(path) + "'");
  return it->second;
}

Layer& ParamStore::at(std::string_view path) {
  const auto it = layers_.find(path);
  if (it == layers_.end()) throw ValidationError("missing layer '" + std::string(path) + "'");
  return it->second;
}

// FNV-1a over the seed bytes followed by the path.
std::uint64_t layer_seed(std::uint64_t seed, std::string_view path) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(seed >> (8 * i)));
  for (char ch : path) mix(static_cast<std::uint8_t>(ch));
  return h;
}

namespace {

ConvSpec conv3x3(std::size_t c_in, std::size_t c_out, std::size_t dilation = 1) {
  return {c_in, c_out, 3, 1, dilation, dilation, 1};
}

ConvSpec conv1x1(std::size_t c_in, std::size_t c_out) { return {c_in, c_out, 1, 1, 0, 1, 1}; }

void add_conv(ParamStore& store, const std::string& path, const ConvSpec& spec, std::uint64_t seed,
              InitOptions options, std::size_t side) {
  store.add(path, Layer{spec, init_params(spec, layer_seed(seed, path), options, path), side, side});
}

constexpr InitOptions kBnRelu{false, true};

std::string branch_path(std::string_view path, std::size_t b) {
  return std::string(path) + ".branch" + std::to_string(b + 1);
}

}  // namespace

void add_scpc_layers(ParamStore& store, const std::string& path, std::size_t channels, const RateSet& rates,
                     bool lite, std::uint64_t seed, std::size_t side) {
  if (channels == 0 || channels % kScpcBranches != 0) {
    throw ConfigError("scpc '" + path + "': channel count " + std::to_string(channels) +
                      " is not divisible by " + std::to_string(kScpcBranches));
  }
  const std::size_t part = channels / kScpcBranches;
  add_conv(store, path + ".transition", conv1x1(channels, channels), seed, kBnRelu, side);
  for (std::size_t b = 0; b < kScpcBranches; ++b) {
    const ConvSpec spec = conv3x3(part, part, rates[b]);
    const std::string bp = branch_path(path, b);
    if (lite) {
      add_conv(store, bp + ".dw", depthwise_part(spec), seed, {}, side);
      add_conv(store, bp + ".pw", pointwise_part(spec), seed, kBnRelu, side);
    } else {
      add_conv(store, bp, spec, seed, kBnRelu, side);
    }
  }
  add_conv(store, path + ".fuse", conv1x1(channels, channels), seed, kBnRelu, side);
  // Identity batch-norm statistics do not renormalize, so unscaled residual
  // branches compound across the 14 chained blocks and saturate the heads.
  for (float& g : store.at(path + ".fuse").params.bn->gamma) g = kResidualBranchGamma;
}

void add_stacked_scpc_layers(ParamStore& store, const std::string& path, std::size_t channels,
                             const RateSet& rates, bool lite, std::uint64_t seed, std::size_t side) {
  add_scpc_layers(store, path + ".scpc1", channels, rates, lite, seed, side);
  add_scpc_layers(store, path + ".scpc2", channels, rates, lite, seed, side);
}

namespace {

std::string stage_path(std::string_view prefix, std::size_t stage) {
  return std::string(prefix) + ".stage" + std::to_string(stage + 1);
}

std::string head_path(std::size_t stage) { return "head" + std::to_string(stage + 1); }

}  // namespace

// Layer map (s = input side):
//   backbone.stage{i}.conv{1,2}     3x3 + bn + relu, at s/2^(i-1)
//   edb.down{1,2}.conv{1,2}         3x3 + bn + relu to edb_width
//   edb.deep                        H on X2' (EH rates)
//   edb.x2_proj, edb.x1_proj        1x1 + bn + relu to decoder_width/2
//   edb.fuse                        H on the concatenation (EH rates)
//   decoder.stage{i}.top            1x1 + bn + relu on D(i+1), decoder_width/2
//   decoder.stage{i}.lateral        1x1 + bn + relu on E(i), decoder_width/2
//   decoder.stage{i}.h              H (L rates for stages 1-2, H rates for 3-5)
//   head{i}                         1x1 to one channel with bias, no bn
EdnModel build_model(const NetworkConfig& cfg) {
  validate(cfg);
  EdnModel model{cfg, {}, {}};
  ParamStore& store = model.params;
  const std::uint64_t seed = cfg.seed;
  const std::size_t s = cfg.input_side;
  const std::size_t dw = cfg.decoder_width;
  const std::size_t half = dw / 2;

  std::size_t c_prev = 3;
  for (std::size_t i = 0; i < kStages; ++i) {
    const std::size_t side = s >> i;
    const std::size_t width = cfg.backbone_widths[i];
    const std::string sp = stage_path("backbone", i);
    add_conv(store, sp + ".conv1", conv3x3(c_prev, width), seed, kBnRelu, side);
    add_conv(store, sp + ".conv2", conv3x3(width, width), seed, kBnRelu, side);
    c_prev = width;
  }

  const std::size_t ew = cfg.edb_width;
  const std::size_t x1_side = s / 32;
  const std::size_t x2_side = s / 64;
  add_conv(store, "edb.down1.conv1", conv3x3(cfg.backbone_widths[4], ew), seed, kBnRelu, x1_side);
  add_conv(store, "edb.down1.conv2", conv3x3(ew, ew), seed, kBnRelu, x1_side);
  add_conv(store, "edb.down2.conv1", conv3x3(ew, ew), seed, kBnRelu, x2_side);
  add_conv(store, "edb.down2.conv2", conv3x3(ew, ew), seed, kBnRelu, x2_side);
  const RateSet& eh = cfg.rates.extra_high;
  add_stacked_scpc_layers(store, "edb.deep", ew, eh, cfg.lite, seed, x2_side);
  model.sites.push_back({"edb.deep", RateGroup::kExtraHigh, eh, ew, x2_side});
  add_conv(store, "edb.x2_proj", conv1x1(ew, half), seed, kBnRelu, x2_side);
  add_conv(store, "edb.x1_proj", conv1x1(ew, half), seed, kBnRelu, x1_side);
  add_stacked_scpc_layers(store, "edb.fuse", dw, eh, cfg.lite, seed, x1_side);
  model.sites.push_back({"edb.fuse", RateGroup::kExtraHigh, eh, dw, x1_side});

  for (std::size_t i = kStages; i-- > 0;) {
    const std::size_t side = s >> i;
    const std::string sp = stage_path("decoder", i);
    const RateGroup group = i < 2 ? RateGroup::kLow : RateGroup::kHigh;
    add_conv(store, sp + ".top", conv1x1(dw, half), seed, kBnRelu, side / 2);
    add_conv(store, sp + ".lateral", conv1x1(cfg.backbone_widths[i], half), seed, kBnRelu, side);
    add_stacked_scpc_layers(store, sp + ".h", dw, cfg.rates[group], cfg.lite, seed, side);
    model.sites.push_back({sp + ".h", group, cfg.rates[group], dw, side});
    add_conv(store, head_path(i), conv1x1(dw, 1), seed, InitOptions{true, false}, side);
  }
  return model;
}

std::uint64_t total_macs(const EdnModel& model) noexcept {
  std::uint64_t total = 0;
  for (const auto& [path, layer] : model.params) total += count_macs(layer.spec, layer.out_h, layer.out_w);
  return total;
}

std::uint64_t total_params(const EdnModel& model) noexcept {
  std::uint64_t total = 0;
  for (const auto& [path, layer] : model.params) {
    total += layer.params.weight.size();
    if (layer.params.bias) total += layer.params.bias->size();
    if (layer.params.bn) total += layer.params.bn->gamma.size() + layer.params.bn->beta.size();
  }
  return total;
}

Tensor4 conv_block(const Tensor4& x, const Layer& layer, bool apply_relu) {
  Tensor4 y = conv2d(x, layer.spec, layer.params);
  if (layer.params.bn) batchnorm_inplace(y, layer.params);
  if (apply_relu) relu_inplace(y);
  return y;
}

namespace {

Tensor4 branch_conv(const Tensor4& x, const ParamStore& params, const std::string& bp, bool lite) {
  if (!lite) return conv_block(x, params.at(bp), true);
  const Layer& dw = params.at(bp + ".dw");
  const Layer& pw = params.at(bp + ".pw");
  const ConvSpec combined{dw.spec.c_in, pw.spec.c_out, dw.spec.k, dw.spec.stride, dw.spec.pad, dw.spec.dilation, 1};
  Tensor4 y = depthwise_separable_conv(x, combined, dw.params, pw.params);
  if (pw.params.bn) batchnorm_inplace(y, pw.params);
  relu_inplace(y);
  return y;
}

void check_rates(const Tensor4& x, const RateSet& rates, const ParamStore& params, const std::string& path,
                 bool lite) {
  for (std::size_t b = 0; b < kScpcBranches; ++b) {
    const std::string bp = branch_path(path, b) + (lite ? ".dw" : "");
    const ConvSpec& spec = params.at(bp).spec;
    if (spec.dilation != rates[b]) {
      throw ConfigError("scpc '" + path + "': branch " + std::to_string(b + 1) + " built with rate " +
                        std::to_string(spec.dilation) + ", asked for " + std::to_string(rates[b]));
    }
    if (spec.c_in * kScpcBranches != x.c()) {
      throw ConfigError("scpc '" + path + "': input has " + std::to_string(x.c()) + " channels, block built for " +
                        std::to_string(spec.c_in * kScpcBranches));
    }
  }
}

}  // namespace

// M1 = transition(x); M2 = split(M1, 4);
// M3[0] = branch0(M2[0]); M3[i] = branch_i(M2[i] + M3[i-1]);
// out = relu(bn(fuse(concat(M3))) + x)
Tensor4 scpc(const Tensor4& x, const RateSet& rates, const ParamStore& params, std::string_view path,
             bool lite) {
  const std::string p(path);
  if (x.c() % kScpcBranches != 0) {
    throw ConfigError("scpc '" + p + "': " + std::to_string(x.c()) + " channels not divisible by " +
                      std::to_string(kScpcBranches));
  }
  check_rates(x, rates, params, p, lite);
  const Tensor4 m1 = conv_block(x, params.at(p + ".transition"), true);
  const auto m2 = split_channels_even(m1, kScpcBranches);
  std::vector<Tensor4> m3;
  m3.reserve(kScpcBranches);
  for (std::size_t b = 0; b < kScpcBranches; ++b) {
    const Tensor4 in = b == 0 ? m2[0] : add(m2[b], m3.back());
    m3.push_back(branch_conv(in, params, branch_path(p, b), lite));
  }
  Tensor4 fused = conv_block(concat_channels(m3), params.at(p + ".fuse"), false);
  add_inplace(fused, x);
  relu_inplace(fused);
  return fused;
}

Tensor4 stacked_scpc(const Tensor4& x, const RateSet& rates, const ParamStore& params, std::string_view path,
                     bool lite) {
  const std::string p(path);
  return scpc(scpc(x, rates, params, p + ".scpc1", lite), rates, params, p + ".scpc2", lite);
}

namespace {

void expect_side(const Tensor4& t, std::size_t side, const std::string& what) {
  if (t.h() != side || t.w() != side) {
    throw DimensionError("scale ledger: " + what + " is " + std::to_string(t.h()) + "x" + std::to_string(t.w()) +
                         ", expected " + std::to_string(side) + "x" + std::to_string(side));
  }
}

std::vector<ChannelVector> attention_vectors(const Tensor4& x2, EdbAttention mode) {
  std::vector<ChannelVector> out;
  out.reserve(x2.n());
  for (std::size_t n = 0; n < x2.n(); ++n) {
    if (mode == EdbAttention::kForceOnes) {
      out.emplace_back(x2.c(), 1.0f);
      continue;
    }
    const ChannelVector gap = global_avg_pool(x2, n);
    std::vector<float> v(gap.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = sigmoid(gap[c]);
    out.emplace_back(std::move(v));
  }
  return out;
}

}  // namespace

Tensor4 edb(const Tensor4& e5, const EdnModel& model, EdbAttention attention, EdbTrace* trace) {
  if (e5.h() < 4 || e5.w() < 4) {
    throw DimensionError("edb: input " + to_string(e5.shape()) + " too small to downsample twice");
  }
  const ParamStore& params = model.params;
  const bool lite = model.config.lite;
  const RateSet& eh = model.config.rates.extra_high;

  const Tensor4 x1 = conv_block(conv_block(maxpool2(e5), params.at("edb.down1.conv1"), true),
                                params.at("edb.down1.conv2"), true);
  const Tensor4 x2 = conv_block(conv_block(maxpool2(x1), params.at("edb.down2.conv1"), true),
                                params.at("edb.down2.conv2"), true);

  Tensor4 x1r = x1;
  Tensor4 x2r = x2;
  std::vector<ChannelVector> x3;
  if (attention != EdbAttention::kDisabled) {
    x3 = attention_vectors(x2, attention);
    x2r = elementwise_mul_broadcast(x2, x3);
    x1r = elementwise_mul_broadcast(x1, x3);
  }

  const Tensor4 deep = stacked_scpc(x2r, eh, params, "edb.deep", lite);
  const Tensor4 x2u = upsample_bilinear(conv_block(deep, params.at("edb.x2_proj"), true), x1.h(), x1.w());
  const Tensor4 y = stacked_scpc(concat_channels(conv_block(x1r, params.at("edb.x1_proj"), true), x2u), eh,
                                 params, "edb.fuse", lite);
  if (trace) *trace = EdbTrace{x1, x2, std::move(x3)};
  return y;
}

ForwardOutputs forward(const EdnModel& model, const Tensor4& image) {
  const NetworkConfig& cfg = model.config;
  const std::size_t s = cfg.input_side;
  if (image.c() != 3 || image.h() != s || image.w() != s) {
    throw ConfigError("forward: image " + to_string(image.shape()) + " does not match input_side " +
                      std::to_string(s) + " with 3 channels");
  }
  const ParamStore& params = model.params;
  ForwardOutputs out;

  Tensor4 x = image;
  for (std::size_t i = 0; i < kStages; ++i) {
    if (i > 0) x = maxpool2(x);
    const std::string sp = stage_path("backbone", i);
    x = conv_block(conv_block(x, params.at(sp + ".conv1"), true), params.at(sp + ".conv2"), true);
    expect_side(x, s >> i, "E" + std::to_string(i + 1));
    out.stage_features[i] = x;
  }

  out.decoder_features[kStages] = edb(out.stage_features[kStages - 1], model);
  out.scpc_sites_visited = {"edb.deep", "edb.fuse"};
  expect_side(out.decoder_features[kStages], s / 32, "D6");

  for (std::size_t i = kStages; i-- > 0;) {
    const Tensor4& e = out.stage_features[i];
    const std::string sp = stage_path("decoder", i);
    const RateGroup group = i < 2 ? RateGroup::kLow : RateGroup::kHigh;
    const Tensor4 top =
        upsample_bilinear(conv_block(out.decoder_features[i + 1], params.at(sp + ".top"), true), e.h(), e.w());
    const Tensor4 lateral = conv_block(e, params.at(sp + ".lateral"), true);
    out.decoder_features[i] = stacked_scpc(concat_channels(lateral, top), cfg.rates[group], params, sp + ".h", cfg.lite);
    out.scpc_sites_visited.push_back(sp + ".h");
    expect_side(out.decoder_features[i], s >> i, "D" + std::to_string(i + 1));

    const Tensor4 logits = conv_block(out.decoder_features[i], params.at(head_path(i)), false);
    out.predictions[i] = sigmoid(upsample_bilinear(logits, s, s));
  }
  return out;
}

}  // namespace edn
