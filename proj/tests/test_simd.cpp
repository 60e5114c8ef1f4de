#include <gtest/gtest.h>

#include <cmath>

#include "edn/layers.hpp"
#include "edn/model.hpp"
#include "edn/simd/kernels.hpp"
#include "oracles.hpp"

using namespace edn;
namespace sd = edn::simd;

namespace {

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<float> u(-3.0f, 3.0f);
  std::vector<float> v(n);
  for (float& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Simd, ScalarTableAlwaysAvailable) {
  EXPECT_EQ(sd::kernels_for(sd::Level::kScalar).level, sd::Level::kScalar);
  if (!sd::avx2_available()) EXPECT_THROW(sd::kernels_for(sd::Level::kAvx2), DomainError);
}

TEST(Simd, ScopedLevelRestores) {
  const sd::Level before = sd::active_level();
  {
    sd::ScopedLevel guard(sd::Level::kScalar);
    EXPECT_EQ(sd::active_level(), sd::Level::kScalar);
  }
  EXPECT_EQ(sd::active_level(), before);
}

// Every length from 0 to 40 covers the vector body and all tail sizes.
TEST(Simd, KernelsAgreeWithScalar) {
  if (!sd::avx2_available()) GTEST_SKIP() << "AVX2 not available";
  const auto& s = sd::kernels_for(sd::Level::kScalar);
  const auto& v = sd::kernels_for(sd::Level::kAvx2);
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n <= 40; ++n) {
    const auto x = random_floats(rng, n * 3 + 1);
    const auto y0 = random_floats(rng, n + 1);
    const auto b = random_floats(rng, n + 1);

    auto ys = y0, yv = y0;
    s.axpy(ys.data(), x.data(), 0.7f, n);
    v.axpy(yv.data(), x.data(), 0.7f, n);
    for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(ys[i], yv[i], 1e-5f * (1 + std::fabs(ys[i])));
    EXPECT_EQ(ys[n], y0[n]);
    EXPECT_EQ(yv[n], y0[n]);

    for (std::size_t stride : {1u, 2u, 3u}) {
      ys = y0;
      yv = y0;
      s.axpy_strided(ys.data(), x.data(), stride, -1.3f, n);
      v.axpy_strided(yv.data(), x.data(), stride, -1.3f, n);
      for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(ys[i], yv[i], 1e-5f * (1 + std::fabs(ys[i])));
    }

    std::vector<float> os(n + 1, 9.0f), ov(n + 1, 9.0f);
    s.scale(os.data(), x.data(), 1.5f, n);
    v.scale(ov.data(), x.data(), 1.5f, n);
    EXPECT_EQ(os, ov);
    s.add(os.data(), x.data(), b.data(), n);
    v.add(ov.data(), x.data(), b.data(), n);
    EXPECT_EQ(os, ov);
    s.relu(os.data(), x.data(), n);
    v.relu(ov.data(), x.data(), n);
    EXPECT_EQ(os, ov);
    s.scale_shift(os.data(), x.data(), 0.3f, -0.2f, n);
    v.scale_shift(ov.data(), x.data(), 0.3f, -0.2f, n);
    for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(os[i], ov[i], 1e-6f);
  }
}

// A row processed in one call gives the same values as the same row split at
// arbitrary points, since every lane does identical arithmetic.
TEST(Simd, AxpyRowsMatchesRowByRow) {
  std::mt19937_64 rng(13);
  std::vector<const sd::KernelTable*> tables{&sd::scalar_kernels()};
  if (sd::avx2_available()) tables.push_back(&sd::kernels_for(sd::Level::kAvx2));
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 12u, 17u, 24u, 33u}) {
    for (std::size_t stride : {1u, 2u}) {
      const std::size_t rows = 5, y_step = n + 3, x_step = n * stride + 4;
      const auto x = random_floats(rng, rows * x_step + n * stride + 1);
      const auto y0 = random_floats(rng, rows * y_step);
      std::vector<std::vector<float>> results;
      for (const auto* k : tables) {
        auto a = y0, b = y0;
        k->axpy_rows(a.data(), y_step, x.data(), x_step, stride, 0.3f, rows, n);
        for (std::size_t r = 0; r < rows; ++r) k->axpy_strided(b.data() + r * y_step, x.data() + r * x_step, stride, 0.3f, n);
        EXPECT_EQ(a, b) << sd::name(k->level) << " n=" << n << " stride=" << stride;
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = n; i < y_step; ++i) EXPECT_EQ(a[r * y_step + i], y0[r * y_step + i]);
        results.push_back(a);
      }
      for (std::size_t i = 0; results.size() == 2 && i < y0.size(); ++i)
        EXPECT_NEAR(results[0][i], results[1][i], 1e-5f * (1 + std::fabs(results[0][i])));
    }
  }
}

TEST(Simd, ResultsIndependentOfRowSplit) {
  if (!sd::avx2_available()) GTEST_SKIP() << "AVX2 not available";
  const auto& v = sd::kernels_for(sd::Level::kAvx2);
  std::mt19937_64 rng(12);
  const auto x = random_floats(rng, 37);
  const auto y0 = random_floats(rng, 37);
  auto whole = y0, pieces = y0;
  v.axpy(whole.data(), x.data(), 0.9f, 37);
  v.axpy(pieces.data(), x.data(), 0.9f, 5);
  v.axpy(pieces.data() + 5, x.data() + 5, 0.9f, 19);
  v.axpy(pieces.data() + 24, x.data() + 24, 0.9f, 13);
  EXPECT_EQ(whole, pieces);
}

TEST(Simd, ConvAndForwardAgreeAcrossLevels) {
  if (!sd::avx2_available()) GTEST_SKIP() << "AVX2 not available";
  std::mt19937_64 rng(13);
  const ConvSpec spec{6, 4, 3, 1, 2, 2, 2};
  const Tensor4 x = oracle::random_tensor(rng, {1, 6, 11, 9});
  const LayerParams p = oracle::random_params(rng, spec, true);
  Tensor4 a, b;
  {
    sd::ScopedLevel g(sd::Level::kScalar);
    a = conv2d(x, spec, p);
  }
  {
    sd::ScopedLevel g(sd::Level::kAvx2);
    b = conv2d(x, spec, p);
  }
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-5);

  NetworkConfig cfg;
  cfg.input_side = 64;
  const EdnModel m = build_model(cfg);
  const Tensor4 img = oracle::random_tensor(rng, {1, 3, 64, 64}, 0.0f, 1.0f);
  ForwardOutputs fa, fb;
  {
    sd::ScopedLevel g(sd::Level::kScalar);
    fa = forward(m, img);
  }
  {
    sd::ScopedLevel g(sd::Level::kAvx2);
    fb = forward(m, img);
  }
  for (std::size_t s = 0; s < kStages; ++s)
    for (std::size_t i = 0; i < fa.predictions[s].size(); ++i)
      EXPECT_NEAR(fa.predictions[s].data()[i], fb.predictions[s].data()[i], 1e-4);
}
