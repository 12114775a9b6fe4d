#pragma once

// Pipeline configuration. JSON schema (every key optional, defaults shown
// by `spd run --out DIR` in DIR/resolved_config.json):
//
//   seed, jobs, segmenter, saliency_source ("oracle" | "learned"), suite_size,
//   train_cases, cpd{tau,n}, sim{min_extra,max_extra,per_slice,band_radius},
//   loss{lambda_dice,lambda_focal,lambda_psc,gamma,epsilon},
//   train{learning_rate,epochs,batch_slices,use_psc,psc_mode},
//   region_grow{delta,max_fraction,connectivity},
//   phantom{kind,width,height,depth,spacing,tube_*,ellipsoid_*,blob_count,
//           distractors,distractor_radius_*,fg_mean,bg_mean,noise_sigma},
//   corruption{blur_radius,fp_blob_count,fp_blob_radius,erosion_radius,
//              low_min,low_max,high_min,high_max},
//   sweep{tau[], n[], psc_modes[]}
//
// Unknown keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "spd/cpd.hpp"
#include "spd/losses.hpp"
#include "spd/phantom.hpp"
#include "spd/promptsim.hpp"
#include "spd/salearn.hpp"
#include "spd/segmenter.hpp"

namespace spd {

struct SweepSpec {
  std::vector<double> tau{0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<int> n{0, 1, 2, 3};
  std::vector<PscMode> psc_modes{PscMode::None, PscMode::Prev, PscMode::Next, PscMode::Bidirectional};
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string segmenter = "region-grow";
  std::string saliency_source = "oracle";
  int suite_size = 50;
  int train_cases = 10;

  CpdConfig cpd;
  SimConfig sim;
  LossWeights loss;
  TrainConfig train;
  RegionGrowConfig region_grow;
  PhantomSpec phantom;
  SaliencyCorruption corruption = SaliencyCorruption::mild();
  SweepSpec sweep;

  void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j, const std::string& source = "<config>");
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

}  // namespace spd
