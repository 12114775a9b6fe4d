#pragma once

// Deterministic synthetic volumes with known ground truth, and a saliency
// corruption model that turns ground truth into a bimodal probability map.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spd/volcore.hpp"

namespace spd {

enum class PhantomKind { Tube, Ellipsoid, MultiBlob };

PhantomKind parse_phantom_kind(const std::string& name);
std::string to_string(PhantomKind kind);

struct PhantomSpec {
  PhantomKind kind = PhantomKind::Tube;
  int width = 64;
  int height = 64;
  int depth = 12;
  Spacing spacing{1.0, 1.0, 1.0};

  // Tube: circular cross-section whose centre and radius drift smoothly
  // over slices [tube_first, tube_last]. The centre is placed at random in
  // the left part of the slice unless tube_center_x/y are >= 0.
  int tube_first = 2;
  int tube_last = 9;
  double tube_radius_min = 5.0;
  double tube_radius_max = 7.0;
  double tube_drift = 2.0;  // peak centre displacement in pixels
  double tube_center_x = -1.0;
  double tube_center_y = -1.0;

  // Ellipsoid (and each multi-blob component): semi-axes in voxels.
  // Centre defaults to the volume centre when negative.
  double ellipsoid_cx = -1.0;
  double ellipsoid_cy = -1.0;
  double ellipsoid_cz = -1.0;
  double ellipsoid_rx = 10.0;
  double ellipsoid_ry = 8.0;
  double ellipsoid_rz = 4.0;
  int blob_count = 3;

  // Non-target structures with target-like intensity in the right part of
  // the slice (neighbouring anatomy that noisy prompts spill into).
  int distractors = 3;
  double distractor_radius_min = 5.0;
  double distractor_radius_max = 8.0;

  double fg_mean = 0.7;
  double bg_mean = 0.3;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  Volume volume;
  std::vector<BinaryMask> masks;
};

Phantom make_phantom(const PhantomSpec& spec);

struct SaliencyCorruption {
  int blur_radius = 0;
  int fp_blob_count = 0;  // per slice
  int fp_blob_radius = 2;
  int erosion_radius = 0;
  double low_min = 0.10, low_max = 0.20;
  double high_min = 0.80, high_max = 1.00;

  void validate() const;

  static SaliencyCorruption none() { return {}; }
  // One small spurious blob per slice. No blur, so the output keeps an
  // empty mid band; no erosion, which on 5-7 px tubes would already drop a
  // third of the structure.
  static SaliencyCorruption mild() {
    SaliencyCorruption c;
    c.fp_blob_count = 1;
    c.fp_blob_radius = 2;
    return c;
  }
};

// Erode, add false-positive blobs, squash to the low/high bands, blur.
std::vector<ProbMap> corrupt_saliency(const std::vector<BinaryMask>& gt, const SaliencyCorruption& c,
                                      std::uint64_t seed);

}  // namespace spd
