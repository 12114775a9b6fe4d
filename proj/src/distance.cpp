#include "spd/distance.hpp"

#include <cmath>

namespace spd {

namespace {

// 1-D squared distance transform of sampled function f over positions
// k * step. Only finite samples take part in the envelope.
void transform_1d(const std::vector<double>& f, double step, std::vector<double>& out,
                  std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.assign(static_cast<std::size_t>(n), kInfiniteDistance);

  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const double pq = q * step;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInfiniteDistance;
      z[1] = kInfiniteDistance;
      continue;
    }
    auto intersect = [&](int a) {
      const double pa = a * step;
      return ((f[q] + pq * pq) - (f[a] + pa * pa)) / (2.0 * (pq - pa));
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {  // z[0] is -inf, so this stops at k == 0
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInfiniteDistance;
  }
  if (k < 0) return;

  int j = 0;
  for (int q = 0; q < n; ++q) {
    const double pq = q * step;
    while (z[j + 1] < pq) ++j;
    const double d = pq - v[j] * step;
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const BinaryMask& features, double spacing_x,
                                               double spacing_y) {
  const int w = features.width();
  const int h = features.height();
  std::vector<double> grid(features.size(), kInfiniteDistance);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i]) grid[i] = 0.0;
  }

  std::vector<double> line, out, z;
  std::vector<int> v;
  line.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) line[y] = grid[features.index(x, y)];
    transform_1d(line, spacing_y, out, v, z);
    for (int y = 0; y < h; ++y) grid[features.index(x, y)] = out[y];
  }
  line.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) line[x] = grid[features.index(x, y)];
    transform_1d(line, spacing_x, out, v, z);
    for (int x = 0; x < w; ++x) grid[features.index(x, y)] = out[x];
  }
  return grid;
}

std::vector<Pixel> extract_boundary(const BinaryMask& mask) {
  std::vector<Pixel> out;
  const int w = mask.width();
  const int h = mask.height();
  auto bg = [&](int x, int y) { return !mask.contains(x, y) || mask(x, y) == 0; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      if (bg(x - 1, y) || bg(x + 1, y) || bg(x, y - 1) || bg(x, y + 1)) out.push_back({x, y});
    }
  }
  return out;
}

}  // namespace spd
