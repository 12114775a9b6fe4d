#include "spd/volcore.hpp"

#include <algorithm>
#include <cmath>

namespace spd {

namespace {

void check_unit_interval(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0 && v <= 1.0)) {  // also rejects NaN
      throw ValidationError(std::string(what) + " value " + std::to_string(v) + " at index " +
                            std::to_string(i) + " outside [0,1]");
    }
  }
}

}  // namespace

std::string to_string(const Pixel& p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

Image::Image(int width, int height, double fill) : Grid<double>(width, height, fill) {
  check_unit_interval(values(), "intensity");
}

Image::Image(int width, int height, std::vector<double> values)
    : Grid<double>(width, height, std::move(values)) {
  check_unit_interval(this->values(), "intensity");
}

ProbMap::ProbMap(int width, int height, double fill) : Grid<double>(width, height, fill) {
  check_unit_interval(values(), "probability");
}

ProbMap::ProbMap(int width, int height, std::vector<double> values)
    : Grid<double>(width, height, std::move(values)) {
  check_unit_interval(this->values(), "probability");
}

BinaryMask::BinaryMask(int width, int height, std::uint8_t fill)
    : Grid<std::uint8_t>(width, height, fill) {
  if (fill > 1) throw ValidationError("binary mask fill value must be 0 or 1");
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> values)
    : Grid<std::uint8_t>(width, height, std::move(values)) {
  const auto v = this->values();
  const auto bad = std::find_if(v.begin(), v.end(), [](std::uint8_t b) { return b > 1; });
  if (bad != v.end()) {
    throw ValidationError("binary mask value " + std::to_string(*bad) + " at index " +
                          std::to_string(bad - v.begin()) + " is not 0 or 1");
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(values().begin(), values().end(), std::uint8_t{1}));
}

BinaryMask threshold(const ProbMap& map, double threshold) {
  std::vector<std::uint8_t> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = map[i] > threshold ? 1 : 0;
  return BinaryMask(map.width(), map.height(), std::move(out));
}

ProbMap to_prob_map(const BinaryMask& mask) {
  std::vector<double> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i];
  return ProbMap(mask.width(), mask.height(), std::move(out));
}

Volume::Volume(std::vector<Image> slices, Spacing spacing)
    : spacing_(spacing), slices_(std::move(slices)) {
  if (slices_.empty()) throw ValidationError("volume must have at least one slice");
  width_ = slices_.front().width();
  height_ = slices_.front().height();
  for (std::size_t t = 0; t < slices_.size(); ++t) {
    if (slices_[t].width() != width_ || slices_[t].height() != height_) {
      throw DimensionError("slice " + std::to_string(t) + " is " +
                           std::to_string(slices_[t].width()) + "x" +
                           std::to_string(slices_[t].height()) + ", expected " +
                           std::to_string(width_) + "x" + std::to_string(height_));
    }
  }
  for (int k = 0; k < 3; ++k) {
    if (!(spacing_[k] > 0.0) || !std::isfinite(spacing_[k])) {
      throw ValidationError("spacing component " + std::to_string(k) + " must be positive");
    }
  }
}

const Image& Volume::slice(int t) const {
  if (t < 0 || t >= depth()) {
    throw IndexError("slice index " + std::to_string(t) + " outside [0, " +
                     std::to_string(depth()) + ")");
  }
  return slices_[static_cast<std::size_t>(t)];
}

void require_same_shape(int w1, int h1, int w2, int h2, const std::string& what) {
  if (w1 != w2 || h1 != h2) {
    throw DimensionError(what + ": " + std::to_string(w1) + "x" + std::to_string(h1) + " vs " +
                         std::to_string(w2) + "x" + std::to_string(h2));
  }
}

double saliency_at(const ProbMap& map, const PromptPoint& p, int slice) {
  if (!map.contains(p)) {
    std::string where = slice >= 0 ? "slice " + std::to_string(slice) + ": " : std::string();
    throw CoordinateError(where + "point " + to_string(p) + " outside " +
                          std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                          " map");
  }
  return map(p.x, p.y);
}

bool PromptSet::insert(int t, const PromptPoint& p) {
  if (t < 0 || (depth_ > 0 && t >= depth_)) {
    throw IndexError("prompt slice index " + std::to_string(t) + " outside [0, " +
                     std::to_string(depth_) + ")");
  }
  auto& list = slices_[t];
  if (std::find(list.begin(), list.end(), p) != list.end()) return false;
  list.push_back(p);
  return true;
}

void PromptSet::insert_all(int t, std::span<const PromptPoint> points) {
  touch(t);
  for (const auto& p : points) insert(t, p);
}

void PromptSet::touch(int t) {
  if (t < 0 || (depth_ > 0 && t >= depth_)) {
    throw IndexError("prompt slice index " + std::to_string(t) + " outside [0, " +
                     std::to_string(depth_) + ")");
  }
  slices_[t];
}

std::span<const PromptPoint> PromptSet::at(int t) const {
  auto it = slices_.find(t);
  if (it == slices_.end()) return {};
  return it->second;
}

std::size_t PromptSet::total() const {
  std::size_t n = 0;
  for (const auto& [t, list] : slices_) n += list.size();
  return n;
}

void PromptSet::validate(int depth, int width, int height) const {
  for (const auto& [t, list] : slices_) {
    if (t < 0 || t >= depth) {
      throw IndexError("prompt slice index " + std::to_string(t) + " outside [0, " +
                       std::to_string(depth) + ")");
    }
    for (const auto& p : list) {
      if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
        throw CoordinateError("slice " + std::to_string(t) + ": point " + to_string(p) +
                              " outside " + std::to_string(width) + "x" +
                              std::to_string(height) + " slice");
      }
    }
  }
}

NeighborWindow neighbor_window(int t, int radius, int depth) {
  if (t < 0 || t >= depth) {
    throw IndexError("window center " + std::to_string(t) + " outside [0, " +
                     std::to_string(depth) + ")");
  }
  if (radius < 0) throw ValidationError("window radius must be non-negative");
  NeighborWindow w{t, radius, {}};
  const int lo = std::max(0, t - radius);
  const int hi = radius >= depth ? depth - 1 : std::min(depth - 1, t + radius);
  for (int j = lo; j <= hi; ++j) {
    if (j != t) w.indices.push_back(j);
  }
  return w;
}

}  // namespace spd
