#include "spd/salearn.hpp"

#include <algorithm>
#include <cmath>

#include "spd/filters.hpp"
#include "spd/rng.hpp"

namespace spd {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> probabilities(std::span<const double> weights, const FeatureStack& f) {
  std::vector<double> out(f.pixels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto fi = f.at(i);
    double z = 0.0;
    for (int k = 0; k < f.features; ++k) z += weights[k] * fi[k];
    if (!std::isfinite(z)) throw NumericalError("non-finite logit at pixel " + std::to_string(i));
    out[i] = sigmoid(z);
  }
  return out;
}

struct Batch {
  std::size_t case_index;
  int first;
  int count;
};

}  // namespace

FeatureStack extract_features(const Grid<double>& slice) {
  const int w = slice.width(), h = slice.height();
  const auto blur2 = box_blur(slice, 2);
  const auto blur4 = box_blur(slice, 4);
  const auto var = local_variance(slice, 1);
  FeatureStack f{w, h, kFeatureCount, std::vector<double>(slice.size() * kFeatureCount)};
  const double sx = w > 1 ? 1.0 / (w - 1) : 0.0;
  const double sy = h > 1 ? 1.0 / (h - 1) : 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = slice.index(x, y);
      double* out = &f.values[i * kFeatureCount];
      out[0] = slice[i];
      out[1] = blur2[i];
      out[2] = blur4[i];
      out[3] = var[i];
      out[4] = x * sx;
      out[5] = y * sy;
      out[6] = 1.0;
    }
  }
  return f;
}

ProbMap predict_saliency(const SaliencyModel& model, const FeatureStack& features) {
  if (static_cast<int>(model.weights.size()) != features.features) {
    throw DimensionError("model has " + std::to_string(model.weights.size()) + " weights but features have " +
                         std::to_string(features.features) + " channels");
  }
  return ProbMap(features.width, features.height, probabilities(model.weights, features));
}

std::vector<ProbMap> predict_volume(const SaliencyModel& model, const Volume& volume) {
  std::vector<ProbMap> out;
  out.reserve(static_cast<std::size_t>(volume.depth()));
  for (const auto& s : volume.slices()) out.push_back(predict_saliency(model, extract_features(s)));
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be finite and non-negative");
  }
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_slices < 0) throw ValidationError("batch_slices must be non-negative");
  weights.validate();
}

ObjectiveValue batch_objective(std::span<const double> weights, std::span<const FeatureStack> features,
                               std::span<const BinaryMask> gts, std::span<const std::pair<int, int>> pairing,
                               const LossWeights& w) {
  std::vector<ProbMap> preds;
  preds.reserve(features.size());
  for (const auto& f : features) preds.emplace_back(f.width, f.height, probabilities(weights, f));
  const auto loss = total_loss(preds, gts, pairing, w);

  ObjectiveValue out{loss.value, std::vector<double>(weights.size(), 0.0)};
  for (std::size_t t = 0; t < features.size(); ++t) {
    const auto& f = features[t];
    const auto& g = loss.grads[t];
    for (std::size_t i = 0; i < f.pixels(); ++i) {
      const double s = preds[t][i];
      const double chain = g[i] * s * (1.0 - s);
      if (chain == 0.0) continue;
      const auto fi = f.at(i);
      for (int k = 0; k < f.features; ++k) out.weight_grad[k] += chain * fi[k];
    }
  }
  return out;
}

SaliencyModel train_saliency(std::span<const TrainingCase> cases, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<FeatureStack>> features(cases.size());
  bool any_foreground = false;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& vol = *cases[c].volume;
    const auto& masks = *cases[c].masks;
    if (static_cast<int>(masks.size()) != vol.depth()) {
      throw DimensionError("training case " + std::to_string(c) + ": " + std::to_string(masks.size()) +
                           " masks for " + std::to_string(vol.depth()) + " slices");
    }
    for (int t = 0; t < vol.depth(); ++t) {
      require_same_shape(vol.slice(t), masks[t], "training case " + std::to_string(c) + " slice " + std::to_string(t));
      features[c].push_back(extract_features(vol.slice(t)));
      any_foreground = any_foreground || masks[t].any();
    }
  }
  if (!any_foreground) throw ValidationError("training set contains no foreground pixel");

  std::vector<Batch> batches;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const int depth = cases[c].volume->depth();
    const int step = cfg.batch_slices > 0 ? cfg.batch_slices : depth;
    for (int first = 0; first < depth; first += step) batches.push_back({c, first, std::min(step, depth - first)});
  }

  LossWeights lw = cfg.weights;
  if (!cfg.use_psc || cfg.psc_mode == PscMode::None) lw.lambda_psc = 0.0;
  const PscMode mode = lw.lambda_psc > 0.0 ? cfg.psc_mode : PscMode::None;

  SaliencyModel model;
  Rng rng(cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates; a single batch is never reordered.
    for (std::size_t i = batches.size(); i > 1; --i) {
      std::swap(batches[i - 1], batches[rng.uniform_index(i)]);
    }
    double epoch_loss = 0.0;
    for (const auto& b : batches) {
      const auto& fs = features[b.case_index];
      const auto& ms = *cases[b.case_index].masks;
      const auto pairing = make_pairing(b.count, mode);
      const auto obj = batch_objective(model.weights, std::span(fs).subspan(b.first, b.count),
                                       std::span(ms).subspan(b.first, b.count), pairing, lw);
      if (!std::isfinite(obj.value)) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
      }
      for (std::size_t k = 0; k < model.weights.size(); ++k) {
        model.weights[k] -= cfg.learning_rate * obj.weight_grad[k];
        if (!std::isfinite(model.weights[k])) {
          throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": non-finite weight");
        }
      }
      epoch_loss += obj.value;
    }
    model.log.push_back(epoch_loss / static_cast<double>(batches.size()));
  }
  return model;
}

nlohmann::ordered_json model_to_json(const SaliencyModel& model) {
  nlohmann::ordered_json j;
  j["features"] = static_cast<int>(model.weights.size());
  j["weights"] = model.weights;
  j["log"] = model.log;
  return j;
}

SaliencyModel model_from_json(const nlohmann::json& j, const std::string& source) {
  SaliencyModel m;
  try {
    const int f = j.at("features").get<int>();
    m.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("log")) m.log = j.at("log").get<std::vector<double>>();
    if (f != kFeatureCount || static_cast<int>(m.weights.size()) != f) {
      throw ValidationError(source + ": expected " + std::to_string(kFeatureCount) + " weights");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw ValidationError(source + ": non-finite weight");
  }
  return m;
}

}  // namespace spd
