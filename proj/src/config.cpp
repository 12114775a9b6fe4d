#include "spd/config.hpp"

#include <set>

namespace spd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads optional keys from one JSON object and remembers which ones were
// consumed so leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ValidationError(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void PipelineConfig::validate() const {
  if (jobs < 1) throw ValidationError("config.jobs must be at least 1");
  if (saliency_source != "oracle" && saliency_source != "learned") {
    throw ValidationError("config.saliency_source must be 'oracle' or 'learned'");
  }
  if (suite_size < 1) throw ValidationError("config.suite_size must be at least 1");
  if (train_cases < 1) throw ValidationError("config.train_cases must be at least 1");
  cpd.validate();
  sim.validate();
  loss.validate();
  train.validate();
  region_grow.validate();
  phantom.validate();
  corruption.validate();
  if (sweep.tau.empty() || sweep.n.empty() || sweep.psc_modes.empty()) {
    throw ValidationError("config.sweep lists must be non-empty");
  }
  for (double t : sweep.tau) {
    if (!(t >= 0 && t <= 1)) throw ValidationError("config.sweep.tau entries must lie in [0,1]");
  }
  for (int n : sweep.n) {
    if (n < 0) throw ValidationError("config.sweep.n entries must be non-negative");
  }
}

PipelineConfig config_from_json(const json& j, const std::string& source) {
  PipelineConfig c;
  Section root(j, source);
  root.get("seed", c.seed);
  root.get("jobs", c.jobs);
  root.get("segmenter", c.segmenter);
  root.get("saliency_source", c.saliency_source);
  root.get("suite_size", c.suite_size);
  root.get("train_cases", c.train_cases);

  if (const auto* s = root.child("cpd")) {
    Section sec(*s, root.path("cpd"));
    sec.get("tau", c.cpd.tau);
    sec.get("n", c.cpd.n);
    sec.finish();
  }
  if (const auto* s = root.child("sim")) {
    Section sec(*s, root.path("sim"));
    sec.get("min_extra", c.sim.min_extra);
    sec.get("max_extra", c.sim.max_extra);
    sec.get("per_slice", c.sim.per_slice);
    sec.get("band_radius", c.sim.band_radius);
    sec.finish();
  }
  if (const auto* s = root.child("loss")) {
    Section sec(*s, root.path("loss"));
    sec.get("lambda_dice", c.loss.lambda_dice);
    sec.get("lambda_focal", c.loss.lambda_focal);
    sec.get("lambda_psc", c.loss.lambda_psc);
    sec.get("gamma", c.loss.gamma);
    sec.get("epsilon", c.loss.epsilon);
    sec.finish();
  }
  if (const auto* s = root.child("train")) {
    Section sec(*s, root.path("train"));
    sec.get("learning_rate", c.train.learning_rate);
    sec.get("epochs", c.train.epochs);
    sec.get("batch_slices", c.train.batch_slices);
    sec.get("use_psc", c.train.use_psc);
    std::string mode = to_string(c.train.psc_mode);
    sec.get("psc_mode", mode);
    c.train.psc_mode = parse_psc_mode(mode);
    sec.finish();
  }
  if (const auto* s = root.child("region_grow")) {
    Section sec(*s, root.path("region_grow"));
    sec.get("delta", c.region_grow.delta);
    sec.get("max_fraction", c.region_grow.max_fraction);
    sec.get("connectivity", c.region_grow.connectivity);
    sec.finish();
  }
  if (const auto* s = root.child("phantom")) {
    Section sec(*s, root.path("phantom"));
    auto& p = c.phantom;
    std::string kind = to_string(p.kind);
    sec.get("kind", kind);
    p.kind = parse_phantom_kind(kind);
    sec.get("width", p.width);
    sec.get("height", p.height);
    sec.get("depth", p.depth);
    std::vector<double> spacing(p.spacing.begin(), p.spacing.end());
    sec.get("spacing", spacing);
    if (spacing.size() != 3) throw ValidationError(sec.path("spacing") + ": expected 3 entries");
    for (int k = 0; k < 3; ++k) p.spacing[k] = spacing[k];
    sec.get("tube_first", p.tube_first);
    sec.get("tube_last", p.tube_last);
    sec.get("tube_radius_min", p.tube_radius_min);
    sec.get("tube_radius_max", p.tube_radius_max);
    sec.get("tube_drift", p.tube_drift);
    sec.get("tube_center_x", p.tube_center_x);
    sec.get("tube_center_y", p.tube_center_y);
    sec.get("ellipsoid_cx", p.ellipsoid_cx);
    sec.get("ellipsoid_cy", p.ellipsoid_cy);
    sec.get("ellipsoid_cz", p.ellipsoid_cz);
    sec.get("ellipsoid_rx", p.ellipsoid_rx);
    sec.get("ellipsoid_ry", p.ellipsoid_ry);
    sec.get("ellipsoid_rz", p.ellipsoid_rz);
    sec.get("blob_count", p.blob_count);
    sec.get("distractors", p.distractors);
    sec.get("distractor_radius_min", p.distractor_radius_min);
    sec.get("distractor_radius_max", p.distractor_radius_max);
    sec.get("fg_mean", p.fg_mean);
    sec.get("bg_mean", p.bg_mean);
    sec.get("noise_sigma", p.noise_sigma);
    sec.finish();
  }
  if (const auto* s = root.child("corruption")) {
    Section sec(*s, root.path("corruption"));
    auto& k = c.corruption;
    sec.get("blur_radius", k.blur_radius);
    sec.get("fp_blob_count", k.fp_blob_count);
    sec.get("fp_blob_radius", k.fp_blob_radius);
    sec.get("erosion_radius", k.erosion_radius);
    sec.get("low_min", k.low_min);
    sec.get("low_max", k.low_max);
    sec.get("high_min", k.high_min);
    sec.get("high_max", k.high_max);
    sec.finish();
  }
  if (const auto* s = root.child("sweep")) {
    Section sec(*s, root.path("sweep"));
    sec.get("tau", c.sweep.tau);
    sec.get("n", c.sweep.n);
    std::vector<std::string> modes;
    for (auto m : c.sweep.psc_modes) modes.push_back(to_string(m));
    sec.get("psc_modes", modes);
    c.sweep.psc_modes.clear();
    for (const auto& m : modes) c.sweep.psc_modes.push_back(parse_psc_mode(m));
    sec.finish();
  }
  root.finish();
  c.train.weights = c.loss;
  c.validate();
  return c;
}

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["segmenter"] = c.segmenter;
  j["saliency_source"] = c.saliency_source;
  j["suite_size"] = c.suite_size;
  j["train_cases"] = c.train_cases;
  j["cpd"] = {{"tau", c.cpd.tau}, {"n", c.cpd.n}};
  j["sim"] = {{"min_extra", c.sim.min_extra},
              {"max_extra", c.sim.max_extra},
              {"per_slice", c.sim.per_slice},
              {"band_radius", c.sim.band_radius}};
  j["loss"] = {{"lambda_dice", c.loss.lambda_dice}, {"lambda_focal", c.loss.lambda_focal},
               {"lambda_psc", c.loss.lambda_psc},   {"gamma", c.loss.gamma},
               {"epsilon", c.loss.epsilon}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"epochs", c.train.epochs},
                {"batch_slices", c.train.batch_slices},
                {"use_psc", c.train.use_psc},
                {"psc_mode", to_string(c.train.psc_mode)}};
  j["region_grow"] = {{"delta", c.region_grow.delta},
                      {"max_fraction", c.region_grow.max_fraction},
                      {"connectivity", c.region_grow.connectivity}};
  const auto& p = c.phantom;
  ordered_json ph;
  ph["kind"] = to_string(p.kind);
  ph["width"] = p.width;
  ph["height"] = p.height;
  ph["depth"] = p.depth;
  ph["spacing"] = {p.spacing[0], p.spacing[1], p.spacing[2]};
  ph["tube_first"] = p.tube_first;
  ph["tube_last"] = p.tube_last;
  ph["tube_radius_min"] = p.tube_radius_min;
  ph["tube_radius_max"] = p.tube_radius_max;
  ph["tube_drift"] = p.tube_drift;
  ph["tube_center_x"] = p.tube_center_x;
  ph["tube_center_y"] = p.tube_center_y;
  ph["ellipsoid_cx"] = p.ellipsoid_cx;
  ph["ellipsoid_cy"] = p.ellipsoid_cy;
  ph["ellipsoid_cz"] = p.ellipsoid_cz;
  ph["ellipsoid_rx"] = p.ellipsoid_rx;
  ph["ellipsoid_ry"] = p.ellipsoid_ry;
  ph["ellipsoid_rz"] = p.ellipsoid_rz;
  ph["blob_count"] = p.blob_count;
  ph["distractors"] = p.distractors;
  ph["distractor_radius_min"] = p.distractor_radius_min;
  ph["distractor_radius_max"] = p.distractor_radius_max;
  ph["fg_mean"] = p.fg_mean;
  ph["bg_mean"] = p.bg_mean;
  ph["noise_sigma"] = p.noise_sigma;
  j["phantom"] = std::move(ph);
  const auto& k = c.corruption;
  j["corruption"] = {{"blur_radius", k.blur_radius}, {"fp_blob_count", k.fp_blob_count},
                     {"fp_blob_radius", k.fp_blob_radius}, {"erosion_radius", k.erosion_radius},
                     {"low_min", k.low_min}, {"low_max", k.low_max},
                     {"high_min", k.high_min}, {"high_max", k.high_max}};
  ordered_json modes = ordered_json::array();
  for (auto m : c.sweep.psc_modes) modes.push_back(to_string(m));
  j["sweep"] = {{"tau", c.sweep.tau}, {"n", c.sweep.n}, {"psc_modes", modes}};
  return j;
}

}  // namespace spd
