#pragma once

// Noisy point-prompt simulation: per targeted slice one point drawn from the
// ground-truth foreground, then k ~ U{min_extra..max_extra} points drawn from
// the whole slice (or, in band mode, from a ring just outside the
// foreground).
//
// Draw order per slice, in ascending slice order, from a single Rng(seed):
//   1. foreground point: uniform_index(|F|) into the row-major foreground list
//   2. k = min_extra + uniform_index(max_extra - min_extra + 1)
//   3. k extra points: uniform_index(|A|) into the row-major candidate area A

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "spd/volcore.hpp"

namespace spd {

struct SimConfig {
  std::uint64_t seed = 0;
  int min_extra = 2;
  int max_extra = 5;
  // Also simulate on slices without foreground; those receive only the
  // k extra points. Off: only foreground slices get an entry.
  bool per_slice = false;
  // > 0 draws the extra points from background pixels within this
  // Euclidean distance of the foreground (centreline-style spill into
  // neighbouring anatomy). Falls back to the whole slice if the band is empty.
  int band_radius = 0;

  void validate() const;
};

// Raw draws per slice before de-duplication.
std::map<int, std::vector<PromptPoint>> draw_noisy_prompts(std::span<const BinaryMask> gt,
                                                           const SimConfig& cfg);

PromptSet simulate_noisy_prompts(std::span<const BinaryMask> gt, const SimConfig& cfg);

}  // namespace spd
