#pragma once

// Volumetric data model shared by every other module: intensity slices,
// binary masks, probability maps, point prompts and slice neighbourhoods.
// All types are immutable once constructed.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spd/errors.hpp"

namespace spd {

struct Pixel {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

// Point prompts are voxel-aligned integer coordinates.
using PromptPoint = Pixel;

std::string to_string(const Pixel& p);

// Row-major 2-D grid of values. Read-only after construction.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    check_dims(width, height);
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw DimensionError("grid of " + std::to_string(width) + "x" + std::to_string(height) +
                           " given " + std::to_string(values_.size()) + " values");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(const Pixel& p) const { return contains(p.x, p.y); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  // Unchecked.
  const T& operator()(int x, int y) const { return values_[index(x, y)]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<const T> values() const { return values_; }

  bool same_shape(const Grid& other) const { return width_ == other.width_ && height_ == other.height_; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 0 || height < 0) {
      throw DimensionError("negative grid dimensions " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

// One intensity slice; values normalised to [0,1].
class Image : public Grid<double> {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> values);
};

// Per-pixel probability field in [0,1]; NaN forbidden.
class ProbMap : public Grid<double> {
 public:
  ProbMap() = default;
  ProbMap(int width, int height, double fill = 0.0);
  ProbMap(int width, int height, std::vector<double> values);
};

// Strictly binary per-pixel field (0 background, 1 foreground).
class BinaryMask : public Grid<std::uint8_t> {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::uint8_t fill = 0);
  BinaryMask(int width, int height, std::vector<std::uint8_t> values);

  std::size_t count() const;
  bool any() const { return count() > 0; }
};

// Hard threshold: value > threshold becomes foreground.
BinaryMask threshold(const ProbMap& map, double threshold);
ProbMap to_prob_map(const BinaryMask& mask);

using Spacing = std::array<double, 3>;

// Depth-ordered stack of equally sized slices with millimetre spacing.
class Volume {
 public:
  Volume() = default;
  Volume(std::vector<Image> slices, Spacing spacing = {1.0, 1.0, 1.0});

  int width() const { return width_; }
  int height() const { return height_; }
  int depth() const { return static_cast<int>(slices_.size()); }
  const Spacing& spacing() const { return spacing_; }

  const Image& slice(int t) const;
  std::span<const Image> slices() const { return slices_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  Spacing spacing_{1.0, 1.0, 1.0};
  std::vector<Image> slices_;
};

void require_same_shape(int w1, int h1, int w2, int h2, const std::string& what);
template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const std::string& what) {
  require_same_shape(a.width(), a.height(), b.width(), b.height(), what);
}

// Exact-pixel saliency lookup. `slice` is only used to label errors.
double saliency_at(const ProbMap& map, const PromptPoint& p, int slice = -1);

// Per-slice ordered, duplicate-free prompt lists.
class PromptSet {
 public:
  using SliceMap = std::map<int, std::vector<PromptPoint>>;

  PromptSet() = default;
  explicit PromptSet(int depth) : depth_(depth) {}

  // Appends p to slice t unless that coordinate is already present.
  // Returns false for a duplicate.
  bool insert(int t, const PromptPoint& p);
  void insert_all(int t, std::span<const PromptPoint> points);
  // Creates an (empty) entry for t if it does not exist.
  void touch(int t);

  // Prompts of slice t, or an empty span if the slice has no entry.
  std::span<const PromptPoint> at(int t) const;
  bool has(int t) const { return slices_.count(t) > 0; }
  const SliceMap& slices() const { return slices_; }
  std::size_t total() const;

  // Upper bound on valid slice indices; 0 means unknown (unchecked).
  int depth() const { return depth_; }

  // Checks every slice index against depth and every point against the
  // given slice dimensions.
  void validate(int depth, int width, int height) const;

  friend bool operator==(const PromptSet& a, const PromptSet& b) { return a.slices_ == b.slices_; }

 private:
  int depth_ = 0;
  SliceMap slices_;
};

struct NeighborWindow {
  int center = 0;
  int radius = 0;
  std::vector<int> indices;
};

// {t-n..t-1, t+1..t+n} clipped to [0, depth), ascending.
NeighborWindow neighbor_window(int t, int radius, int depth);

}  // namespace spd
