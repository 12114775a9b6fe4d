#pragma once

// Prompt-conditioned segmenter interface and the region-growing reference
// implementation used as a stand-in for a promptable foundation model.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spd/volcore.hpp"

namespace spd {

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  // Empty prompt list must yield an all-zero map.
  virtual ProbMap segment(const Image& slice, std::span<const PromptPoint> prompts) const = 0;
  virtual std::string name() const = 0;
};

struct RegionGrowConfig {
  double delta = 0.2;       // admit |I - seed 3x3 mean| < delta
  double max_fraction = 0.5;  // per-prompt region cap as a fraction of the slice
  int connectivity = 4;

  void validate() const;
};

class RegionGrowSegmenter final : public Segmenter {
 public:
  explicit RegionGrowSegmenter(RegionGrowConfig cfg = {});

  ProbMap segment(const Image& slice, std::span<const PromptPoint> prompts) const override;
  std::string name() const override { return "region-grow"; }

  // Region admitted for a single prompt; empty when the growth hits the cap.
  std::vector<std::size_t> grow(const Image& slice, const PromptPoint& prompt) const;

  const RegionGrowConfig& config() const { return cfg_; }

 private:
  RegionGrowConfig cfg_;
};

std::unique_ptr<Segmenter> make_segmenter(const std::string& name, const RegionGrowConfig& cfg = {});

// Slices without prompts yield all-zero maps.
std::vector<ProbMap> segment_volume(const Volume& volume, const PromptSet& prompts, const Segmenter& segmenter);

}  // namespace spd
