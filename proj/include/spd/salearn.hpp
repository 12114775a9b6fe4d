#pragma once

// Per-pixel logistic saliency model over hand-crafted features, trained by
// plain gradient descent on the weighted Dice + focal objective (optionally
// with the pairwise slice consistency term) using the analytic loss
// gradients chained through the sigmoid.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spd/losses.hpp"
#include "spd/volcore.hpp"

namespace spd {

// Feature order: intensity, box blur r=2, box blur r=4, 3x3 variance,
// x / (w-1), y / (h-1), constant 1.
inline constexpr int kFeatureCount = 7;

struct FeatureStack {
  int width = 0;
  int height = 0;
  int features = kFeatureCount;
  std::vector<double> values;  // pixel-major: values[i * features + k]

  std::span<const double> at(std::size_t pixel) const {
    return std::span<const double>(values).subspan(pixel * static_cast<std::size_t>(features),
                                                   static_cast<std::size_t>(features));
  }
  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

FeatureStack extract_features(const Grid<double>& slice);

struct SaliencyModel {
  std::vector<double> weights = std::vector<double>(kFeatureCount, 0.0);
  std::vector<double> log;  // mean batch objective per epoch
};

ProbMap predict_saliency(const SaliencyModel& model, const FeatureStack& features);
std::vector<ProbMap> predict_volume(const SaliencyModel& model, const Volume& volume);

struct TrainConfig {
  double learning_rate = 20.0;
  int epochs = 200;
  int batch_slices = 0;  // consecutive slices per batch; 0 = whole volume
  LossWeights weights;
  bool use_psc = false;
  PscMode psc_mode = PscMode::Next;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> weight_grad;
};

// Batch objective and its gradient with respect to the model weights.
ObjectiveValue batch_objective(std::span<const double> weights, std::span<const FeatureStack> features,
                               std::span<const BinaryMask> gts, std::span<const std::pair<int, int>> pairing,
                               const LossWeights& w);

struct TrainingCase {
  const Volume* volume = nullptr;
  const std::vector<BinaryMask>* masks = nullptr;
};

SaliencyModel train_saliency(std::span<const TrainingCase> cases, const TrainConfig& cfg);

nlohmann::ordered_json model_to_json(const SaliencyModel& model);
SaliencyModel model_from_json(const nlohmann::json& j, const std::string& source = "<json>");

}  // namespace spd
