#include "spd/segmenter.hpp"

#include <cmath>
#include <deque>

namespace spd {

void RegionGrowConfig::validate() const {
  if (!(delta > 0)) throw ValidationError("region-grow delta must be positive");
  if (!(max_fraction > 0 && max_fraction <= 1)) throw ValidationError("region-grow cap must lie in (0,1]");
  if (connectivity != 4 && connectivity != 8) throw ValidationError("region-grow connectivity must be 4 or 8");
}

RegionGrowSegmenter::RegionGrowSegmenter(RegionGrowConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<std::size_t> RegionGrowSegmenter::grow(const Image& slice, const PromptPoint& prompt) const {
  if (!slice.contains(prompt)) {
    throw CoordinateError("prompt " + to_string(prompt) + " outside " + std::to_string(slice.width()) + "x" +
                          std::to_string(slice.height()) + " slice");
  }
  const int w = slice.width(), h = slice.height();
  double sum = 0.0;
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (slice.contains(prompt.x + dx, prompt.y + dy)) {
        sum += slice(prompt.x + dx, prompt.y + dy);
        ++n;
      }
    }
  }
  const double ref = sum / n;
  auto admissible = [&](int x, int y) { return std::abs(slice(x, y) - ref) < cfg_.delta; };
  if (!admissible(prompt.x, prompt.y)) return {};

  const auto cap = static_cast<std::size_t>(std::floor(cfg_.max_fraction * static_cast<double>(slice.size())));
  std::vector<std::uint8_t> visited(slice.size(), 0);
  std::vector<std::size_t> region;
  std::deque<Pixel> queue{prompt};
  visited[slice.index(prompt.x, prompt.y)] = 1;
  static constexpr int kOffsets[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    region.push_back(slice.index(p.x, p.y));
    if (region.size() > cap) return {};
    for (int k = 0; k < cfg_.connectivity; ++k) {
      const int x = p.x + kOffsets[k][0], y = p.y + kOffsets[k][1];
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      const std::size_t i = slice.index(x, y);
      if (visited[i] || !admissible(x, y)) continue;
      visited[i] = 1;
      queue.push_back({x, y});
    }
  }
  return region;
}

ProbMap RegionGrowSegmenter::segment(const Image& slice, std::span<const PromptPoint> prompts) const {
  std::vector<double> out(slice.size(), 0.0);
  for (const auto& p : prompts) {
    for (std::size_t i : grow(slice, p)) out[i] = 1.0;
  }
  return ProbMap(slice.width(), slice.height(), std::move(out));
}

std::unique_ptr<Segmenter> make_segmenter(const std::string& name, const RegionGrowConfig& cfg) {
  if (name == "region-grow") return std::make_unique<RegionGrowSegmenter>(cfg);
  throw ValidationError("unknown segmenter '" + name + "' (available: region-grow)");
}

std::vector<ProbMap> segment_volume(const Volume& volume, const PromptSet& prompts, const Segmenter& segmenter) {
  prompts.validate(volume.depth(), volume.width(), volume.height());
  std::vector<ProbMap> out;
  out.reserve(static_cast<std::size_t>(volume.depth()));
  for (int t = 0; t < volume.depth(); ++t) out.push_back(segmenter.segment(volume.slice(t), prompts.at(t)));
  return out;
}

}  // namespace spd
