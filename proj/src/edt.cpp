#include "edn/edt.hpp"

#include <cmath>
#include <string>

#include "edn/error.hpp"

namespace edn {

namespace {

constexpr std::int64_t kNone = -1;

// Lower envelope of the parabolas (q - site)^2 + f[site] over the finite
// entries of f. Writes the minimum and the arg-min site for every q.
void envelope_1d(std::span<const std::int64_t> f, std::vector<std::size_t>& v, std::vector<double>& z,
                 std::span<std::int64_t> out, std::span<std::size_t> arg) {
  const std::size_t n = f.size();
  std::size_t k = 0;
  bool any = false;
  const auto intersect = [&f](std::size_t p, std::size_t q) {
    const auto pi = static_cast<std::int64_t>(p);
    const auto qi = static_cast<std::int64_t>(q);
    return static_cast<double>((f[q] + qi * qi) - (f[p] + pi * pi)) / static_cast<double>(2 * (qi - pi));
  };
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kNone) continue;
    if (!any) {
      any = true;
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    double s = intersect(v[k], q);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k], q);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (!any) {
    std::fill(out.begin(), out.end(), kNone);
    std::fill(arg.begin(), arg.end(), kNoIndex);
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const auto d = static_cast<std::int64_t>(q) - static_cast<std::int64_t>(v[k]);
    out[q] = d * d + f[v[k]];
    arg[q] = v[k];
  }
}

}  // namespace

DistanceField distance_to_sites(std::span<const std::uint8_t> sites, std::size_t h, std::size_t w) {
  if (sites.size() != h * w) throw DimensionError("distance transform: mask length does not match dims");
  DistanceField field{h, w, std::vector<std::int64_t>(h * w), std::vector<double>(h * w),
                      std::vector<std::size_t>(h * w)};

  // Pass 1: nearest site within each column.
  std::vector<std::int64_t> col_sq(h * w, kNone);
  std::vector<std::size_t> col_row(h * w, kNoIndex);
  for (std::size_t x = 0; x < w; ++x) {
    std::size_t last = kNoIndex;
    for (std::size_t y = 0; y < h; ++y) {
      if (sites[y * w + x]) last = y;
      if (last != kNoIndex) {
        col_row[y * w + x] = last;
        const auto d = static_cast<std::int64_t>(y - last);
        col_sq[y * w + x] = d * d;
      }
    }
    last = kNoIndex;
    for (std::size_t y = h; y-- > 0;) {
      if (sites[y * w + x]) last = y;
      if (last == kNoIndex) continue;
      const auto d = static_cast<std::int64_t>(last - y);
      const std::int64_t cur = col_sq[y * w + x];
      // Ties keep the upper site.
      if (cur == kNone || d * d < cur) {
        col_sq[y * w + x] = d * d;
        col_row[y * w + x] = last;
      }
    }
  }

  // Pass 2: rows.
  std::vector<std::size_t> v(w);
  std::vector<double> z(w + 1);
  std::vector<std::size_t> arg(w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::span<const std::int64_t> f(col_sq.data() + y * w, w);
    const std::span<std::int64_t> out(field.squared.data() + y * w, w);
    envelope_1d(f, v, z, out, arg);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (out[x] == kNone) {
        field.distance[i] = kNoSite;
        field.nearest[i] = kNoIndex;
      } else {
        field.distance[i] = std::sqrt(static_cast<double>(out[x]));
        field.nearest[i] = col_row[y * w + arg[x]] * w + arg[x];
      }
    }
  }
  return field;
}

std::vector<double> exact_edt(const GtMask& g) {
  std::vector<std::uint8_t> background(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) background[i] = g[i] ? 0 : 1;
  return distance_to_sites(background, g.h(), g.w()).distance;
}

}  // namespace edn
