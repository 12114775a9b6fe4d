#pragma once

// Random instance builders and brute-force reference implementations used
// as ground truth by the unit and acceptance tests. Nothing here calls the
// library routine it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "spd/volcore.hpp"

namespace spd::test {

using Engine = std::mt19937_64;

inline ProbMap random_prob_map(Engine& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) x = u(rng);
  return ProbMap(w, h, std::move(v));
}

inline BinaryMask random_mask(Engine& rng, int w, int h, double p = 0.5) {
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) x = b(rng) ? 1 : 0;
  return BinaryMask(w, h, std::move(v));
}

// Union of a few random filled rectangles; usually connected-ish shapes
// with realistic boundaries.
inline BinaryMask random_blobs(Engine& rng, int w, int h, int count) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h, 0);
  std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1), us(1, std::max(1, std::min(w, h) / 3));
  for (int k = 0; k < count; ++k) {
    const int x0 = ux(rng), y0 = uy(rng), sw = us(rng), sh = us(rng);
    for (int y = y0; y < std::min(h, y0 + sh); ++y)
      for (int x = x0; x < std::min(w, x0 + sw); ++x) v[static_cast<std::size_t>(y) * w + x] = 1;
  }
  return BinaryMask(w, h, std::move(v));
}

inline std::vector<Pixel> as_vector(std::span<const Pixel> s) { return {s.begin(), s.end()}; }

// --- metric oracles -------------------------------------------------------

inline std::vector<Pixel> boundary_oracle(const BinaryMask& m) {
  std::vector<Pixel> out;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1;
      if (edge || !m(x - 1, y) || !m(x + 1, y) || !m(x, y - 1) || !m(x, y + 1)) out.push_back({x, y});
    }
  }
  return out;
}

inline std::vector<double> directed_oracle(const std::vector<Pixel>& from, const std::vector<Pixel>& to, double sx,
                                           double sy) {
  std::vector<double> d;
  for (const auto& a : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : to) {
      const double dx = (a.x - b.x) * sx, dy = (a.y - b.y) * sy;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    d.push_back(best);
  }
  return d;
}

inline double percentile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double r = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(r));
  const auto hi = static_cast<std::size_t>(std::ceil(r));
  return v[lo] + (r - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::optional<double> hd95_oracle(const BinaryMask& a, const BinaryMask& b, double sx = 1, double sy = 1) {
  const auto ba = boundary_oracle(a), bb = boundary_oracle(b);
  if (ba.empty() || bb.empty()) return std::nullopt;
  return std::max(percentile_oracle(directed_oracle(ba, bb, sx, sy), 0.95),
                  percentile_oracle(directed_oracle(bb, ba, sx, sy), 0.95));
}

inline std::optional<double> asd_oracle(const BinaryMask& a, const BinaryMask& b, double sx = 1, double sy = 1) {
  const auto ba = boundary_oracle(a), bb = boundary_oracle(b);
  if (ba.empty() || bb.empty()) return std::nullopt;
  const auto d1 = directed_oracle(ba, bb, sx, sy), d2 = directed_oracle(bb, ba, sx, sy);
  double s = 0;
  for (double d : d1) s += d;
  for (double d : d2) s += d;
  return s / static_cast<double>(d1.size() + d2.size());
}

inline double hausdorff_oracle(const BinaryMask& a, const BinaryMask& b) {
  const auto ba = boundary_oracle(a), bb = boundary_oracle(b);
  double m = 0;
  for (double d : directed_oracle(ba, bb, 1, 1)) m = std::max(m, d);
  for (double d : directed_oracle(bb, ba, 1, 1)) m = std::max(m, d);
  return m;
}

// --- distillation oracle ----------------------------------------------------

// Literal set-builder transcription of the distillation rules:
//   local_t = {p in P_t : S_t(p) > tau}
//   cand_t  = U_{j in [t-n, t+n] n [0, D), j != t} {p in P_j : S_j(p) > tau}
//   ctx_t   = {p in cand_t : S_t(p) > tau}
//   P*_t    = local_t U ctx_t
using PointSet = std::set<std::pair<int, int>>;

inline std::map<int, PointSet> distill_oracle(const std::map<int, std::vector<Pixel>>& prompts,
                                              const std::vector<ProbMap>& sal, double tau, int n) {
  const int depth = static_cast<int>(sal.size());
  std::map<int, PointSet> out;
  auto prompts_of = [&](int j) -> std::vector<Pixel> {
    auto it = prompts.find(j);
    return it == prompts.end() ? std::vector<Pixel>{} : it->second;
  };
  for (int t = 0; t < depth; ++t) {
    PointSet local, cand, ctx;
    for (const auto& p : prompts_of(t))
      if (sal[t](p.x, p.y) > tau) local.insert({p.x, p.y});
    for (int j = 0; j < depth; ++j) {
      if (j == t || std::abs(j - t) > n) continue;
      for (const auto& p : prompts_of(j))
        if (sal[j](p.x, p.y) > tau) cand.insert({p.x, p.y});
    }
    for (const auto& [x, y] : cand)
      if (sal[t](x, y) > tau) ctx.insert({x, y});
    PointSet all = local;
    all.insert(ctx.begin(), ctx.end());
    if (!all.empty()) out[t] = std::move(all);
  }
  return out;
}

inline std::map<int, PointSet> as_point_sets(const PromptSet& ps) {
  std::map<int, PointSet> out;
  for (const auto& [t, pts] : ps.slices()) {
    PointSet s;
    for (const auto& p : pts) s.insert({p.x, p.y});
    if (!s.empty()) out[t] = std::move(s);
  }
  return out;
}

// --- flood fill oracle -------------------------------------------------------

// Pixels reachable from `seed` through 4-connected pixels satisfying pred.
template <typename Pred>
inline std::vector<std::uint8_t> flood_oracle(int w, int h, Pixel seed, Pred pred) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
  if (!pred(seed.x, seed.y)) return out;
  std::deque<Pixel> q{seed};
  out[static_cast<std::size_t>(seed.y) * w + seed.x] = 1;
  while (!q.empty()) {
    const auto p = q.front();
    q.pop_front();
    const int nx[4] = {p.x + 1, p.x - 1, p.x, p.x};
    const int ny[4] = {p.y, p.y, p.y + 1, p.y - 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
      auto& o = out[static_cast<std::size_t>(ny[k]) * w + nx[k]];
      if (o || !pred(nx[k], ny[k])) continue;
      o = 1;
      q.push_back({nx[k], ny[k]});
    }
  }
  return out;
}

}  // namespace spd::test
