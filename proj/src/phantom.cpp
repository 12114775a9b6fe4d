#include "spd/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spd/distance.hpp"
#include "spd/filters.hpp"
#include "spd/rng.hpp"

namespace spd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Disk {
  double cx, cy, r;
};

struct Ellipsoid {
  double cx, cy, cz, rx, ry, rz;

  bool contains(double x, double y, double z) const {
    if (rx <= 0 || ry <= 0 || rz <= 0) return false;
    const double dx = (x - cx) / rx, dy = (y - cy) / ry, dz = (z - cz) / rz;
    return dx * dx + dy * dy + dz * dz <= 1.0;
  }
};

// Uniform in [lo, hi]; collapses to the midpoint when the range is empty.
double draw_range(Rng& rng, double lo, double hi) {
  if (hi <= lo) return 0.5 * (lo + hi);
  return rng.uniform(lo, hi);
}

void paint_disk(std::vector<std::uint8_t>& mask, int w, int h, const Disk& d) {
  const int x0 = std::max(0, static_cast<int>(std::floor(d.cx - d.r)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(d.cx + d.r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(d.cy - d.r)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(d.cy + d.r)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - d.cx, dy = y - d.cy;
      if (dx * dx + dy * dy <= d.r * d.r) mask[static_cast<std::size_t>(y) * w + x] = 1;
    }
  }
}

// Per-slice target disks of a tube; empty outside [first, last].
std::vector<std::vector<Disk>> tube_disks(const PhantomSpec& s, Rng& rng) {
  const double reach = s.tube_radius_max + s.tube_drift;
  const double cx0 = s.tube_center_x >= 0 ? s.tube_center_x : draw_range(rng, reach + 1.0, 0.5 * s.width - reach - 1.0);
  const double cy0 = s.tube_center_y >= 0 ? s.tube_center_y : draw_range(rng, reach + 1.0, s.height - reach - 2.0);
  const double phase_x = rng.uniform(0.0, kTwoPi);
  const double phase_y = rng.uniform(0.0, kTwoPi);
  const double phase_r = rng.uniform(0.0, kTwoPi);
  std::vector<std::vector<Disk>> out(static_cast<std::size_t>(s.depth));
  for (int z = s.tube_first; z <= s.tube_last; ++z) {
    const double u = static_cast<double>(z - s.tube_first);
    const double cx = cx0 + s.tube_drift * std::sin(kTwoPi * u / 16.0 + phase_x);
    const double cy = cy0 + s.tube_drift * std::cos(kTwoPi * u / 20.0 + phase_y);
    const double r = s.tube_radius_min +
                     (s.tube_radius_max - s.tube_radius_min) * (0.5 + 0.5 * std::sin(kTwoPi * u / 12.0 + phase_r));
    out[z].push_back({cx, cy, r});
  }
  return out;
}

std::vector<Ellipsoid> target_ellipsoids(const PhantomSpec& s, Rng& rng) {
  if (s.kind == PhantomKind::Ellipsoid) {
    return {{s.ellipsoid_cx >= 0 ? s.ellipsoid_cx : 0.5 * (s.width - 1),
             s.ellipsoid_cy >= 0 ? s.ellipsoid_cy : 0.5 * (s.height - 1),
             s.ellipsoid_cz >= 0 ? s.ellipsoid_cz : 0.5 * (s.depth - 1), s.ellipsoid_rx, s.ellipsoid_ry,
             s.ellipsoid_rz}};
  }
  std::vector<Ellipsoid> blobs;
  for (int b = 0; b < s.blob_count; ++b) {
    const double scale = rng.uniform(0.5, 1.0);
    const double rx = s.ellipsoid_rx * scale, ry = s.ellipsoid_ry * scale, rz = s.ellipsoid_rz * scale;
    const double cx = draw_range(rng, rx + 1.0, 0.5 * s.width - rx - 1.0);
    const double cy = draw_range(rng, ry + 1.0, s.height - ry - 2.0);
    const double cz = draw_range(rng, 0.0, s.depth - 1.0);
    blobs.push_back({cx, cy, cz, rx, ry, rz});
  }
  return blobs;
}

}  // namespace

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "tube") return PhantomKind::Tube;
  if (name == "ellipsoid") return PhantomKind::Ellipsoid;
  if (name == "multi-blob" || name == "multiblob") return PhantomKind::MultiBlob;
  throw ValidationError("unknown phantom kind '" + name + "' (expected tube, ellipsoid, multi-blob)");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Tube: return "tube";
    case PhantomKind::Ellipsoid: return "ellipsoid";
    case PhantomKind::MultiBlob: return "multi-blob";
  }
  return "tube";
}

void PhantomSpec::validate() const {
  if (width <= 0 || height <= 0 || depth <= 0) throw ValidationError("phantom dimensions must be positive");
  for (double sp : spacing) {
    if (!(sp > 0)) throw ValidationError("phantom spacing must be positive");
  }
  if (!(fg_mean >= 0 && fg_mean <= 1 && bg_mean >= 0 && bg_mean <= 1)) {
    throw ValidationError("phantom contrast means must lie in [0,1]");
  }
  if (noise_sigma < 0) throw ValidationError("phantom noise sigma must be non-negative");
  if (distractors < 0 || distractor_radius_min < 0 || distractor_radius_max < distractor_radius_min) {
    throw ValidationError("phantom distractor parameters are inconsistent");
  }
  if (kind == PhantomKind::Tube) {
    if (tube_first < 0 || tube_last >= depth || tube_first > tube_last) {
      throw ValidationError("tube slice range [" + std::to_string(tube_first) + ", " + std::to_string(tube_last) +
                            "] does not fit a depth of " + std::to_string(depth));
    }
    if (tube_radius_min < 1.0 || tube_radius_max < tube_radius_min || tube_drift < 0) {
      throw ValidationError("tube needs 1 <= radius_min <= radius_max and drift >= 0");
    }
    const double reach = tube_radius_max + tube_drift;
    if (2.0 * reach + 2.0 > std::min(width, height)) {
      throw ValidationError("tube of radius " + std::to_string(tube_radius_max) + " does not fit the slice");
    }
    if (tube_center_x >= 0 && (tube_center_x - reach < 0 || tube_center_x + reach > width - 1)) {
      throw ValidationError("tube centre x places foreground outside the volume");
    }
    if (tube_center_y >= 0 && (tube_center_y - reach < 0 || tube_center_y + reach > height - 1)) {
      throw ValidationError("tube centre y places foreground outside the volume");
    }
  } else {
    if (ellipsoid_rx < 0 || ellipsoid_ry < 0 || ellipsoid_rz < 0) {
      throw ValidationError("ellipsoid semi-axes must be non-negative");
    }
    if (kind == PhantomKind::MultiBlob && blob_count < 1) throw ValidationError("multi-blob needs blob_count >= 1");
  }
}

Phantom make_phantom(const PhantomSpec& spec) {
  spec.validate();
  const int w = spec.width, h = spec.height, d = spec.depth;
  Rng geometry(derive_seed(spec.seed, 1));
  Rng noise(derive_seed(spec.seed, 2));

  std::vector<std::vector<std::uint8_t>> target(static_cast<std::size_t>(d),
                                                std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0));
  if (spec.kind == PhantomKind::Tube) {
    const auto disks = tube_disks(spec, geometry);
    for (int z = 0; z < d; ++z) {
      for (const auto& disk : disks[z]) paint_disk(target[z], w, h, disk);
    }
  } else {
    const auto shapes = target_ellipsoids(spec, geometry);
    for (int z = 0; z < d; ++z) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          for (const auto& e : shapes) {
            if (e.contains(x, y, z)) target[z][static_cast<std::size_t>(y) * w + x] = 1;
          }
        }
      }
    }
  }

  // Distractors: slowly drifting tubes spanning the whole depth, kept at
  // least two pixels away from the target.
  struct Distractor {
    double cx, cy, r, phase;
  };
  std::vector<Distractor> distractors;
  for (int k = 0; k < spec.distractors; ++k) {
    const double r = draw_range(geometry, spec.distractor_radius_min, spec.distractor_radius_max);
    const double cx = draw_range(geometry, 0.6 * w + r, w - r - 2.0);
    const double cy = draw_range(geometry, r + 1.0, h - r - 2.0);
    distractors.push_back({cx, cy, r, geometry.uniform(0.0, kTwoPi)});
  }

  std::vector<Image> slices;
  std::vector<BinaryMask> masks;
  slices.reserve(static_cast<std::size_t>(d));
  masks.reserve(static_cast<std::size_t>(d));
  for (int z = 0; z < d; ++z) {
    BinaryMask gt(w, h, target[z]);
    std::vector<std::uint8_t> other(gt.size(), 0);
    for (const auto& dist : distractors) {
      paint_disk(other, w, h, {dist.cx + std::sin(kTwoPi * z / 24.0 + dist.phase), dist.cy, dist.r});
    }
    if (gt.any() && !distractors.empty()) {
      const auto d2 = squared_distance_transform(gt, 1.0, 1.0);
      for (std::size_t i = 0; i < other.size(); ++i) {
        if (d2[i] <= 4.0) other[i] = 0;
      }
    }
    std::vector<double> values(gt.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      double v = (gt[i] || other[i]) ? spec.fg_mean : spec.bg_mean;
      if (spec.noise_sigma > 0) v = noise.normal(v, spec.noise_sigma);
      values[i] = std::clamp(v, 0.0, 1.0);
    }
    slices.emplace_back(w, h, std::move(values));
    masks.push_back(std::move(gt));
  }
  return {Volume(std::move(slices), spec.spacing), std::move(masks)};
}

void SaliencyCorruption::validate() const {
  if (blur_radius < 0 || fp_blob_count < 0 || fp_blob_radius < 0 || erosion_radius < 0) {
    throw ValidationError("saliency corruption parameters must be non-negative");
  }
  if (!(0 <= low_min && low_min <= low_max && low_max <= 1 && 0 <= high_min && high_min <= high_max &&
        high_max <= 1)) {
    throw ValidationError("saliency bands must be ordered sub-intervals of [0,1]");
  }
}

std::vector<ProbMap> corrupt_saliency(const std::vector<BinaryMask>& gt, const SaliencyCorruption& c,
                                      std::uint64_t seed) {
  c.validate();
  Rng rng(seed);
  std::vector<ProbMap> out;
  out.reserve(gt.size());
  for (const auto& mask : gt) {
    const int w = mask.width(), h = mask.height();
    const BinaryMask eroded = erode(mask, c.erosion_radius);
    std::vector<std::uint8_t> bits(eroded.values().begin(), eroded.values().end());
    if (!mask.empty()) {
      for (int b = 0; b < c.fp_blob_count; ++b) {
        const double cx = static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(w)));
        const double cy = static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(h)));
        paint_disk(bits, w, h, {cx, cy, static_cast<double>(c.fp_blob_radius)});
      }
    }
    std::vector<double> values(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      values[i] = bits[i] ? rng.uniform(c.high_min, c.high_max) : rng.uniform(c.low_min, c.low_max);
    }
    if (c.blur_radius > 0) values = box_blur(Grid<double>(w, h, std::move(values)), c.blur_radius);
    for (auto& v : values) v = std::clamp(v, 0.0, 1.0);
    out.emplace_back(w, h, std::move(values));
  }
  return out;
}

}  // namespace spd
