#include "spd/promptsim.hpp"

#include <cmath>

#include "spd/distance.hpp"
#include "spd/rng.hpp"

namespace spd {

namespace {

std::vector<std::size_t> band_indices(const BinaryMask& mask, int radius) {
  const auto d2 = squared_distance_transform(mask, 1.0, 1.0);
  const double r2 = static_cast<double>(radius) * radius;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] && d2[i] <= r2) out.push_back(i);
  }
  return out;
}

PromptPoint point_at(const BinaryMask& mask, std::size_t index) {
  const auto w = static_cast<std::size_t>(mask.width());
  return {static_cast<int>(index % w), static_cast<int>(index / w)};
}

}  // namespace

void SimConfig::validate() const {
  if (min_extra < 0 || max_extra < min_extra) {
    throw ValidationError("sim config needs 0 <= min_extra <= max_extra");
  }
  if (band_radius < 0) throw ValidationError("sim band_radius must be non-negative");
}

std::map<int, std::vector<PromptPoint>> draw_noisy_prompts(std::span<const BinaryMask> gt,
                                                           const SimConfig& cfg) {
  cfg.validate();
  bool any_foreground = false;
  for (const auto& m : gt) any_foreground = any_foreground || m.any();
  if (!any_foreground) {
    throw ValidationError("prompt simulation needs at least one slice with foreground");
  }

  Rng rng(cfg.seed);
  std::map<int, std::vector<PromptPoint>> out;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const auto& mask = gt[t];
    if (mask.size() == 0) continue;
    std::vector<std::size_t> fg;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) fg.push_back(i);
    }
    if (fg.empty() && !cfg.per_slice) continue;

    auto& points = out[static_cast<int>(t)];
    if (!fg.empty()) points.push_back(point_at(mask, fg[rng.uniform_index(fg.size())]));

    const auto k = static_cast<int>(rng.uniform_int(cfg.min_extra, cfg.max_extra));
    std::vector<std::size_t> band;
    if (cfg.band_radius > 0 && !fg.empty()) band = band_indices(mask, cfg.band_radius);
    for (int e = 0; e < k; ++e) {
      if (!band.empty()) {
        points.push_back(point_at(mask, band[rng.uniform_index(band.size())]));
      } else {
        points.push_back(point_at(mask, rng.uniform_index(mask.size())));
      }
    }
  }
  return out;
}

PromptSet simulate_noisy_prompts(std::span<const BinaryMask> gt, const SimConfig& cfg) {
  PromptSet set(static_cast<int>(gt.size()));
  for (const auto& [t, points] : draw_noisy_prompts(gt, cfg)) set.insert_all(t, points);
  return set;
}

}  // namespace spd
