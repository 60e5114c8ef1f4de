#include <gtest/gtest.h>

#include "edn/edt.hpp"
#include "oracles.hpp"

using namespace edn;

namespace {

GtMask from_rows(const std::vector<std::string>& rows) {
  std::vector<std::uint8_t> v;
  for (const auto& r : rows)
    for (char c : r) v.push_back(c == '#' ? 1 : 0);
  return GtMask(rows.size(), rows[0].size(), std::move(v));
}

}  // namespace

TEST(Edt, SinglePixelAndEmpty) {
  const auto d = exact_edt(from_rows({"...", ".#.", "..."}));
  EXPECT_EQ(d[4], 1.0);
  for (double v : exact_edt(GtMask(5, 4))) EXPECT_EQ(v, 0.0);
  for (double v : exact_edt(GtMask(3, 3, std::uint8_t{1}))) EXPECT_EQ(v, kNoSite);
}

TEST(Edt, RandomMasksMatchBruteForce) {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<std::size_t> side(1, 32);
  std::uniform_real_distribution<double> density(0.05, 0.98);
  for (int i = 0; i < 200; ++i) {
    const GtMask g = oracle::random_mask(rng, side(rng), side(rng), density(rng), false);
    ASSERT_EQ(exact_edt(g), oracle::brute_edt(g)) << "mask " << i;
  }
}

TEST(Edt, AdversarialPatterns) {
  for (std::size_t h : {1u, 7u, 32u})
    for (std::size_t w : {1u, 9u, 32u})
      for (int pattern = 0; pattern < 5; ++pattern) {
        std::vector<std::uint8_t> v(h * w);
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            bool fg = false;
            switch (pattern) {
              case 0: fg = (x + y) % 2 == 0; break;        // checkerboard
              case 1: fg = x % 3 != 0; break;              // vertical stripes
              case 2: fg = y % 4 != 1; break;              // horizontal stripes
              case 3: fg = !(x == w / 2 && y == h / 2); break;  // single hole
              case 4: fg = (x + 2 * y) % 5 != 0; break;    // diagonal lines
            }
            v[y * w + x] = fg ? 1 : 0;
          }
        const GtMask g(h, w, std::move(v));
        ASSERT_EQ(exact_edt(g), oracle::brute_edt(g)) << h << "x" << w << " pattern " << pattern;
      }
}

TEST(Edt, NearestIndexPointsAtASiteAtThatDistance) {
  std::mt19937_64 rng(72);
  for (int i = 0; i < 50; ++i) {
    const std::size_t h = 1 + rng() % 20, w = 1 + rng() % 20;
    const GtMask sites = oracle::random_mask(rng, h, w, 0.1, false);
    const DistanceField f = distance_to_sites(sites.values(), h, w);
    for (std::size_t p = 0; p < h * w; ++p) {
      if (sites.foreground_count() == 0) {
        EXPECT_EQ(f.nearest[p], kNoIndex);
        continue;
      }
      const std::size_t s = f.nearest[p];
      ASSERT_LT(s, h * w);
      EXPECT_EQ(sites[s], 1);
      const auto dy = static_cast<std::int64_t>(p / w) - static_cast<std::int64_t>(s / w);
      const auto dx = static_cast<std::int64_t>(p % w) - static_cast<std::int64_t>(s % w);
      EXPECT_EQ(f.squared[p], dy * dy + dx * dx);
    }
  }
}
