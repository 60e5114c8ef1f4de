#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <unistd.h>
#include <fstream>

#include "edn/netpbm.hpp"
#include "edn/run_config.hpp"
#include "edn/weights.hpp"

using namespace edn;
namespace fs = std::filesystem;

namespace {

NetworkConfig tiny_config() {
  NetworkConfig c;
  c.backbone_widths = {4, 4, 8, 8, 8};
  c.decoder_width = 8;
  c.edb_width = 16;
  c.input_side = 64;
  c.seed = 5;
  return c;
}

std::string raw(std::initializer_list<int> bytes) {
  std::string s;
  for (int b : bytes) s.push_back(static_cast<char>(b));
  return s;
}

fs::path temp_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / ("edn_io_" + std::string(name) + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Netpbm, TwoByTwoGray) {
  const Image8 img = decode_netpbm("P5\n2 2\n255\n" + raw({0, 128, 200, 255}));
  ASSERT_EQ(img.channels, 1u);
  ASSERT_EQ(img.h, 2u);
  const SaliencyMap m = to_saliency_map(img);
  EXPECT_EQ(m[0], 0.0);
  EXPECT_DOUBLE_EQ(m[1], 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(m[2], 200.0 / 255.0);
  EXPECT_EQ(m[3], 1.0);
  const GtMask g = to_gt_mask(img);
  EXPECT_EQ(std::vector<std::uint8_t>(g.values().begin(), g.values().end()), (std::vector<std::uint8_t>{0, 1, 1, 1}));
  EXPECT_EQ(to_gt_mask(decode_netpbm("P5 1 1 255 " + raw({127})))[0], 0);
}

TEST(Netpbm, CommentsAndRoundTrip) {
  const Image8 img = decode_netpbm("P6\n# made by hand\n1 2\n# again\n255\n" + raw({1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(img.channels, 3u);
  EXPECT_EQ(img.w, 1u);
  EXPECT_EQ(img.h, 2u);
  EXPECT_EQ(decode_netpbm(encode_netpbm(img)).pixels, img.pixels);
  const Tensor4 t = to_input_tensor(img, 0);
  EXPECT_FLOAT_EQ(t.at(0, 2, 1, 0), 6.0f / 255.0f);
  EXPECT_EQ(to_input_tensor(img, 8).shape().w, 8u);
}

TEST(Netpbm, Quantize) {
  EXPECT_EQ(quantize(0.0), 0);
  EXPECT_EQ(quantize(1.0), 255);
  EXPECT_EQ(quantize(0.5), 128);
  EXPECT_EQ(quantize(-3.0), 0);
  EXPECT_EQ(quantize(7.0), 255);
  for (int v = 0; v < 256; ++v) EXPECT_EQ(quantize(v / 255.0), v);
}

TEST(Netpbm, FormatErrorsCarryOffsets) {
  try {
    decode_netpbm("P3\n1 1\n255\n" + raw({0}));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  try {
    decode_netpbm("P5\n1 1\n65535\n" + raw({0, 0}));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 7u);
    EXPECT_NE(std::string(e.what()).find("maxval"), std::string::npos);
  }
  try {
    decode_netpbm("P5\n4 4\n255\n" + raw({1, 2, 3}));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 14u);
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
  EXPECT_THROW(decode_netpbm("P5\nx 1\n255\n"), FormatError);
  EXPECT_THROW(read_netpbm("/nonexistent/edn/file.pgm"), IoError);
  EXPECT_THROW(to_gt_mask(decode_netpbm("P6 1 1 255 " + raw({1, 2, 3}))), FormatError);
}

TEST(Netpbm, FileErrorsNameThePath) {
  const fs::path d = temp_dir("bad");
  {
    std::ofstream(d / "bad.pgm", std::ios::binary) << "P7\n";
  }
  try {
    read_netpbm(d / "bad.pgm");
    FAIL();
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bad.pgm"), std::string::npos);
    EXPECT_EQ(what.find("offset"), what.rfind("offset")) << what;
  }
  fs::remove_all(d);
}

TEST(Netpbm, SaveLoadMap) {
  const fs::path d = temp_dir("map");
  const SaliencyMap m(2, 3, std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0, 0.1});
  save_map_pgm(m, d / "m.pgm");
  const SaliencyMap back = load_map_pgm(d / "m.pgm");
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(back[i], quantize(m[i]) / 255.0);
  fs::remove_all(d);
}

TEST(Weights, EncodeDecodeRoundTrip) {
  const EdnModel m = build_model(tiny_config());
  const auto entries = collect_entries(m.params);
  ASSERT_FALSE(entries.empty());
  EXPECT_TRUE(std::is_sorted(entries.begin(), entries.end(),
                             [](const auto& a, const auto& b) { return a.name < b.name; }));
  const std::string bytes = encode_weights(entries);
  EXPECT_EQ(bytes.substr(0, 4), "EDNW");
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  EXPECT_EQ(version, kWeightsVersion);
  EXPECT_EQ(decode_weights(bytes), entries);
}

TEST(Weights, FileRoundTripGivesIdenticalForward) {
  const fs::path d = temp_dir("w");
  NetworkConfig cfg = tiny_config();
  const EdnModel a = build_model(cfg);
  save_weights(a, d / "a.ednw");
  cfg.seed = 99;
  EdnModel b = build_model(cfg);
  EXPECT_FALSE(a.params == b.params);
  load_weights(b, d / "a.ednw");
  EXPECT_TRUE(a.params == b.params);
  Tensor4 x({1, 3, 64, 64});
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(i % 17) / 17.0f;
  const ForwardOutputs fa = forward(a, x), fb = forward(b, x);
  for (std::size_t k = 0; k < kStages; ++k) {
    ASSERT_EQ(fa.predictions[k].size(), fb.predictions[k].size());
    EXPECT_EQ(std::memcmp(fa.predictions[k].data().data(), fb.predictions[k].data().data(), fa.predictions[k].size() * 4), 0);
  }
  fs::remove_all(d);
}

TEST(Weights, CorruptFilesAreRejected) {
  const EdnModel m = build_model(tiny_config());
  const std::string bytes = encode_weights(collect_entries(m.params));
  std::string bad = bytes;
  bad[0] = 'X';
  try {
    decode_weights(bad);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_weights(bad), FormatError);
  EXPECT_THROW(decode_weights(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(decode_weights(bytes + "z"), FormatError);
  auto entries = decode_weights(bytes);
  entries.push_back(entries.front());
  EXPECT_THROW(decode_weights(encode_weights(entries)), FormatError);
}

TEST(Weights, ApplyRejectsMismatches) {
  EdnModel m = build_model(tiny_config());
  const auto entries = collect_entries(m.params);

  auto missing = entries;
  const std::string dropped = missing[3].name;
  missing.erase(missing.begin() + 3);
  try {
    apply_entries(m.params, missing);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string layer = dropped.substr(0, dropped.rfind('.'));
    EXPECT_NE(std::string(e.what()).find(layer), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }

  auto shaped = entries;
  shaped[0].dims.back() += 1;
  shaped[0].values.resize(shaped[0].values.size() / (shaped[0].dims.back() - 1) * shaped[0].dims.back());
  EXPECT_THROW(apply_entries(m.params, shaped), ValidationError);

  auto unknown = entries;
  unknown.push_back({"no.such.layer.weight", {1}, {0.0f}});
  EXPECT_THROW(apply_entries(m.params, unknown), ValidationError);

  auto var = entries;
  for (auto& e : var)
    if (e.name.ends_with(".bn_var")) {
      e.values[0] = 0.0f;
      break;
    }
  EXPECT_THROW(apply_entries(m.params, var), ValidationError);

  EXPECT_NO_THROW(apply_entries(m.params, entries));
}

TEST(RunConfig, ParseFormatRoundTrip) {
  const NetworkConfig d = parse_run_config("");
  EXPECT_EQ(d, NetworkConfig{});
  NetworkConfig c = tiny_config();
  c.lite = true;
  c.rates.high = {1, 3, 5, 7};
  EXPECT_EQ(parse_run_config(format_run_config(c)), c);
  const NetworkConfig p = parse_run_config(
      "# comment\n"
      "  decoder_width = 16   # trailing\n"
      "rates_L = 1,2, 3 ,4\n"
      "lite = 1\n");
  EXPECT_EQ(p.decoder_width, 16u);
  EXPECT_EQ(p.rates.low, (RateSet{1, 2, 3, 4}));
  EXPECT_TRUE(p.lite);
}

TEST(RunConfig, ErrorsNameTheKey) {
  const auto message = [](std::string_view text) {
    try {
      parse_run_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message("color = red\n").rfind("color:", 0), 0u);
  EXPECT_EQ(message("lite = maybe\n").rfind("lite:", 0), 0u);
  EXPECT_EQ(message("decoder_width = -4\n").rfind("decoder_width:", 0), 0u);
  EXPECT_EQ(message("rates_H = 1, 2\n").rfind("rates_H:", 0), 0u);
  EXPECT_EQ(message("seed = 1\nseed = 2\n").rfind("seed:", 0), 0u);
  EXPECT_NE(message("decoder_width = 30\n").find("decoder_width"), std::string::npos);
  EXPECT_FALSE(message("just words\n").empty());
  EXPECT_THROW(load_run_config("/nonexistent/edn.cfg"), IoError);
}
