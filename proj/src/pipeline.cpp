#include "spd/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "spd/io.hpp"
#include "spd/losses.hpp"
#include "spd/phantom.hpp"
#include "spd/promptsim.hpp"
#include "spd/rng.hpp"
#include "spd/segmenter.hpp"

namespace spd {

namespace {

constexpr std::uint64_t kPhantomSalt = 1;
constexpr std::uint64_t kCorruptionSalt = 2;
constexpr std::uint64_t kPromptSalt = 3;
constexpr std::uint64_t kTrainingSalt = 4;

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_stat(const MetricStats& s, bool mean) {
  if (s.count == 0) return "";
  return format_double(mean ? s.mean : s.std);
}

double mean_volumetric(const AggregateReport& r) {
  if (r.volumetric_dice.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [id, v] : r.volumetric_dice) sum += v;
  return sum / static_cast<double>(r.volumetric_dice.size());
}

std::string slice_label(int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slice_%04d", t);
  return buf;
}

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw ValidationError(std::string("missing required option ") + flag);
}

void write_resolved(const fs::path& out, const PipelineConfig& cfg) {
  io::write_json(out / "resolved_config.json", config_to_json(cfg));
}

void write_text(const fs::path& path, const std::string& text) { io::write_file_atomic(path, text); }

std::vector<std::vector<ProbMap>> oracle_saliency(const std::vector<SuiteCase>& suite) {
  std::vector<std::vector<ProbMap>> out;
  out.reserve(suite.size());
  for (const auto& c : suite) out.push_back(c.saliency);
  return out;
}

std::vector<std::vector<ProbMap>> load_saliency(const CommandPaths& p, const std::vector<SuiteCase>& suite) {
  return p.saliency.empty() ? oracle_saliency(suite) : read_saliency_dir(p.saliency, suite);
}

std::vector<PromptSet> consensus_sets(const std::vector<DistillResult>& results) {
  std::vector<PromptSet> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.consensus);
  return out;
}

double saliency_dice(const std::vector<SuiteCase>& suite, const std::vector<std::vector<ProbMap>>& pred) {
  double sum = 0.0;
  for (std::size_t c = 0; c < suite.size(); ++c) {
    std::vector<BinaryMask> hard;
    for (const auto& m : pred[c]) hard.push_back(threshold(m, 0.5));
    sum += volumetric_dice(hard, suite[c].gt);
  }
  return suite.empty() ? 0.0 : sum / static_cast<double>(suite.size());
}

}  // namespace

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard lock(mu);
        if (failure && failed_at < i) return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string case_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%03d", index);
  return buf;
}

std::uint64_t phantom_seed(std::uint64_t master, int index) {
  return volume_seed(derive_seed(master, kPhantomSalt), static_cast<std::uint64_t>(index));
}
std::uint64_t corruption_seed(std::uint64_t master, int index) {
  return volume_seed(derive_seed(master, kCorruptionSalt), static_cast<std::uint64_t>(index));
}
std::uint64_t prompt_seed(std::uint64_t master, int index) {
  return volume_seed(derive_seed(master, kPromptSalt), static_cast<std::uint64_t>(index));
}
std::uint64_t training_seed(std::uint64_t master) { return derive_seed(master, kTrainingSalt); }

SuiteCase make_case(const PipelineConfig& cfg, int index) {
  PhantomSpec spec = cfg.phantom;
  spec.seed = phantom_seed(cfg.seed, index);
  auto ph = make_phantom(spec);
  auto sal = corrupt_saliency(ph.masks, cfg.corruption, corruption_seed(cfg.seed, index));
  return {case_name(index), std::move(ph.volume), std::move(ph.masks), std::move(sal)};
}

std::vector<SuiteCase> make_suite(const PipelineConfig& cfg) {
  std::vector<SuiteCase> suite(static_cast<std::size_t>(cfg.suite_size));
  parallel_for(cfg.suite_size, cfg.jobs, [&](int i) { suite[i] = make_case(cfg, i); });
  return suite;
}

std::vector<PromptSet> simulate_suite(const std::vector<SuiteCase>& suite, const PipelineConfig& cfg) {
  std::vector<PromptSet> out(suite.size());
  parallel_for(static_cast<int>(suite.size()), cfg.jobs, [&](int i) {
    SimConfig sim = cfg.sim;
    sim.seed = prompt_seed(cfg.seed, i);
    try {
      out[i] = simulate_noisy_prompts(suite[i].gt, sim);
    } catch (const ValidationError& e) {
      throw ValidationError(suite[i].id + ": " + e.what());
    }
  });
  return out;
}

SaliencyModel train_on_suite(const std::vector<SuiteCase>& suite, const PipelineConfig& cfg) {
  const std::size_t n = std::min(suite.size(), static_cast<std::size_t>(cfg.train_cases));
  std::vector<TrainingCase> cases;
  for (std::size_t i = 0; i < n; ++i) cases.push_back({&suite[i].volume, &suite[i].gt});
  TrainConfig t = cfg.train;
  t.weights = cfg.loss;
  t.seed = training_seed(cfg.seed);
  return train_saliency(cases, t);
}

std::vector<std::vector<ProbMap>> predict_suite(const std::vector<SuiteCase>& suite, const SaliencyModel& model,
                                                int jobs) {
  std::vector<std::vector<ProbMap>> out(suite.size());
  parallel_for(static_cast<int>(suite.size()), jobs, [&](int i) { out[i] = predict_volume(model, suite[i].volume); });
  return out;
}

std::vector<DistillResult> distill_suite(const std::vector<PromptSet>& prompts,
                                         const std::vector<std::vector<ProbMap>>& saliency, const CpdConfig& cpd,
                                         int jobs) {
  if (prompts.size() != saliency.size()) {
    throw DimensionError(std::to_string(prompts.size()) + " prompt sets for " + std::to_string(saliency.size()) +
                         " saliency stacks");
  }
  std::vector<DistillResult> out(prompts.size());
  parallel_for(static_cast<int>(prompts.size()), jobs,
               [&](int i) { out[i] = distill_volume(prompts[i], saliency[i], cpd); });
  return out;
}

PromptSet local_prompts(const PromptSet& prompts, const std::vector<ProbMap>& saliency, double tau) {
  PromptSet out(static_cast<int>(saliency.size()));
  for (const auto& [t, pts] : prompts.slices()) {
    if (t < 0 || t >= static_cast<int>(saliency.size())) {
      throw MissingDataError("prompts reference slice " + std::to_string(t) + " without saliency");
    }
    const auto kept = validate_local(pts, saliency[t], tau, t);
    if (!kept.empty()) out.insert_all(t, kept);
  }
  return out;
}

std::vector<std::vector<BinaryMask>> segment_suite(const std::vector<SuiteCase>& suite,
                                                   const std::vector<PromptSet>& prompts,
                                                   const PipelineConfig& cfg) {
  if (prompts.size() != suite.size()) {
    throw DimensionError(std::to_string(prompts.size()) + " prompt sets for " + std::to_string(suite.size()) +
                         " cases");
  }
  const auto segmenter = make_segmenter(cfg.segmenter, cfg.region_grow);
  std::vector<std::vector<BinaryMask>> out(suite.size());
  parallel_for(static_cast<int>(suite.size()), cfg.jobs, [&](int i) {
    try {
      const auto maps = segment_volume(suite[i].volume, prompts[i], *segmenter);
      for (const auto& m : maps) out[i].push_back(threshold(m, 0.5));
    } catch (const ValidationError& e) {
      throw ValidationError(suite[i].id + ": " + e.what());
    }
  });
  return out;
}

SuiteEvaluation evaluate_suite(const std::vector<SuiteCase>& suite,
                               const std::vector<std::vector<BinaryMask>>& pred) {
  if (pred.size() != suite.size()) {
    throw DimensionError(std::to_string(pred.size()) + " predictions for " + std::to_string(suite.size()) +
                         " cases");
  }
  SuiteEvaluation ev;
  std::map<std::string, double> volumetric;
  for (std::size_t c = 0; c < suite.size(); ++c) {
    const auto& sc = suite[c];
    if (static_cast<int>(pred[c].size()) != sc.volume.depth()) {
      throw DimensionError(sc.id + ": " + std::to_string(pred[c].size()) + " predicted slices for depth " +
                           std::to_string(sc.volume.depth()));
    }
    const PlanarSpacing sp{sc.volume.spacing()[0], sc.volume.spacing()[1]};
    for (int t = 0; t < sc.volume.depth(); ++t) {
      ev.slices.push_back({sc.id + "/" + slice_label(t), evaluate_case(pred[c][t], sc.gt[t], sp)});
    }
    volumetric[sc.id] = volumetric_dice(pred[c], sc.gt);
  }
  ev.report = aggregate(ev.slices, volumetric);
  return ev;
}

std::vector<ConditionRow> compare_conditions(const std::vector<SuiteCase>& suite,
                                             const std::vector<PromptSet>& prompts,
                                             const std::vector<std::vector<ProbMap>>& saliency,
                                             const PipelineConfig& cfg) {
  std::vector<ConditionRow> rows;
  auto evaluate = [&](const std::string& name, int n, const std::vector<PromptSet>& sets) {
    rows.push_back({name, n, evaluate_suite(suite, segment_suite(suite, sets, cfg)).report});
  };
  evaluate("baseline", 0, prompts);

  std::vector<PromptSet> local(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) local[i] = local_prompts(prompts[i], saliency[i], cfg.cpd.tau);
  evaluate("local", 0, local);

  evaluate("consensus", cfg.cpd.n, consensus_sets(distill_suite(prompts, saliency, cfg.cpd, cfg.jobs)));

  for (int n : cfg.sweep.n) {
    CpdConfig cpd = cfg.cpd;
    cpd.n = n;
    evaluate("n_sweep", n, consensus_sets(distill_suite(prompts, saliency, cpd, cfg.jobs)));
  }
  return rows;
}

std::vector<TauRow> sweep_tau(const std::vector<PromptSet>& prompts,
                              const std::vector<std::vector<ProbMap>>& saliency, const PipelineConfig& cfg) {
  using Key = std::tuple<std::size_t, int, int, int>;
  auto pooled = [&](double tau) {
    CpdConfig cpd = cfg.cpd;
    cpd.tau = tau;
    const auto results = distill_suite(prompts, saliency, cpd, cfg.jobs);
    std::set<Key> keys;
    for (std::size_t c = 0; c < results.size(); ++c) {
      for (const auto& [t, pts] : results[c].consensus.slices()) {
        for (const auto& p : pts) keys.insert({c, t, p.x, p.y});
      }
    }
    return keys;
  };
  const auto reference = pooled(0.5);
  std::vector<TauRow> rows;
  for (double tau : cfg.sweep.tau) {
    const auto keys = tau == 0.5 ? reference : pooled(tau);
    std::size_t common = 0;
    for (const auto& k : keys) common += reference.count(k);
    const std::size_t uni = keys.size() + reference.size() - common;
    rows.push_back({tau, uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni), keys.size(),
                    reference.size()});
  }
  return rows;
}

double mean_adjacent_psc(const std::vector<std::vector<ProbMap>>& predictions) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& vol : predictions) {
    for (std::size_t t = 0; t + 1 < vol.size(); ++t) {
      sum += psc_loss(vol[t], vol[t + 1]).value;
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

ordered_json compare_to_json(const std::vector<ConditionRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["condition"] = r.condition;
    j["n"] = r.n;
    j["volumetric_dice_mean"] = mean_volumetric(r.report);
    auto rep = report_to_json(r.report);
    rep.erase("volumetric_dice");
    j["metrics"] = std::move(rep);
    out.push_back(std::move(j));
  }
  return out;
}

std::string compare_to_csv(const std::vector<ConditionRow>& rows) {
  std::string out =
      "condition,n,dsc_mean,dsc_std,iou_mean,iou_std,hd95_mean,hd95_std,asd_mean,asd_std,boundary_valid,"
      "volumetric_dice_mean\n";
  for (const auto& r : rows) {
    const auto& m = r.report;
    out += r.condition + "," + std::to_string(r.n) + "," + format_stat(m.dsc, true) + "," +
           format_stat(m.dsc, false) + "," + format_stat(m.iou, true) + "," + format_stat(m.iou, false) + "," +
           format_stat(m.hd95, true) + "," + format_stat(m.hd95, false) + "," + format_stat(m.asd, true) + "," +
           format_stat(m.asd, false) + "," + std::to_string(m.boundary_valid) + "," +
           format_double(mean_volumetric(m)) + "\n";
  }
  return out;
}

ordered_json sweep_to_json(const std::vector<TauRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    out.push_back({{"tau", r.tau}, {"jaccard", r.jaccard}, {"size", r.size}, {"reference_size", r.reference_size}});
  }
  return out;
}

std::string sweep_to_csv(const std::vector<TauRow>& rows) {
  std::string out = "tau,jaccard,size,reference_size\n";
  for (const auto& r : rows) {
    out += format_double(r.tau) + "," + format_double(r.jaccard) + "," + std::to_string(r.size) + "," +
           std::to_string(r.reference_size) + "\n";
  }
  return out;
}

void write_suite(const fs::path& dir, const std::vector<SuiteCase>& suite, const PipelineConfig& cfg) {
  const auto resolved = config_to_json(cfg);
  ordered_json manifest;
  manifest["seed"] = cfg.seed;
  manifest["phantom"] = resolved["phantom"];
  manifest["corruption"] = resolved["corruption"];
  ordered_json ids = ordered_json::array();
  for (const auto& c : suite) ids.push_back(c.id);
  manifest["cases"] = std::move(ids);
  parallel_for(static_cast<int>(suite.size()), cfg.jobs, [&](int i) {
    const auto& c = suite[i];
    io::write_volume(dir / c.id / "volume", c.volume);
    io::write_masks(dir / c.id / "gt", c.gt, c.volume.spacing());
    io::write_prob_maps(dir / c.id / "saliency", c.saliency, c.volume.spacing());
  });
  io::write_json(dir / "phantom-suite.json", manifest);
}

std::vector<SuiteCase> read_suite(const fs::path& dir) {
  const auto manifest_path = dir / "phantom-suite.json";
  const auto manifest = io::read_json(manifest_path);
  std::vector<std::string> ids;
  try {
    ids = manifest.at("cases").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(manifest_path.string() + ": field 'cases': " + e.what());
  }
  std::vector<SuiteCase> suite;
  for (const auto& id : ids) {
    SuiteCase c{id, io::read_volume(dir / id / "volume"), io::read_masks(dir / id / "gt"),
                io::read_prob_maps(dir / id / "saliency")};
    if (static_cast<int>(c.gt.size()) != c.volume.depth() || static_cast<int>(c.saliency.size()) != c.volume.depth()) {
      throw DimensionError(id + ": volume, gt and saliency depths differ");
    }
    for (int t = 0; t < c.volume.depth(); ++t) {
      require_same_shape(c.volume.slice(t), c.gt[t], id + " gt slice " + std::to_string(t));
      require_same_shape(c.volume.slice(t), c.saliency[t], id + " saliency slice " + std::to_string(t));
    }
    suite.push_back(std::move(c));
  }
  return suite;
}

std::vector<PromptSet> read_prompt_dir(const fs::path& dir, const std::vector<SuiteCase>& suite) {
  std::vector<PromptSet> out;
  for (const auto& c : suite) {
    fs::path path = dir / (c.id + ".json");
    if (!fs::exists(path)) path = dir / c.id / "prompts.json";
    if (!fs::exists(path)) throw IoError("no prompt file for " + c.id + " under " + dir.string());
    auto prompts = io::read_prompts(path);
    try {
      prompts.validate(c.volume.depth(), c.volume.width(), c.volume.height());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    out.push_back(std::move(prompts));
  }
  return out;
}

std::vector<std::vector<ProbMap>> read_saliency_dir(const fs::path& dir, const std::vector<SuiteCase>& suite) {
  std::vector<std::vector<ProbMap>> out;
  for (const auto& c : suite) {
    auto maps = io::read_prob_maps(dir / c.id);
    if (static_cast<int>(maps.size()) != c.volume.depth()) {
      throw DimensionError((dir / c.id).string() + ": " + std::to_string(maps.size()) + " saliency slices for depth " +
                           std::to_string(c.volume.depth()));
    }
    for (int t = 0; t < c.volume.depth(); ++t) {
      require_same_shape(c.volume.slice(t), maps[t], (dir / c.id).string() + " slice " + std::to_string(t));
    }
    out.push_back(std::move(maps));
  }
  return out;
}

void cmd_phantom(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.out, "--out");
  write_suite(p.out, make_suite(cfg), cfg);
  write_resolved(p.out, cfg);
}

void cmd_simulate(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  const auto prompts = simulate_suite(suite, cfg);
  for (std::size_t i = 0; i < suite.size(); ++i) io::write_prompts(p.out / (suite[i].id + ".json"), prompts[i]);
  write_resolved(p.out, cfg);
}

void cmd_train(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  io::write_json(p.out / "model.json", model_to_json(train_on_suite(suite, cfg)));
  write_resolved(p.out, cfg);
}

void cmd_predict(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.model, "--model");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  const auto model = model_from_json(io::read_json(p.model), p.model.string());
  const auto maps = predict_suite(suite, model, cfg.jobs);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    io::write_prob_maps(p.out / suite[i].id, maps[i], suite[i].volume.spacing());
  }
  write_resolved(p.out, cfg);
}

void cmd_distill(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.prompts, "--prompts");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  const auto results = distill_suite(read_prompt_dir(p.prompts, suite), load_saliency(p, suite), cfg.cpd, cfg.jobs);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    io::write_prompts(p.out / suite[i].id / "prompts.json", results[i].consensus);
    io::write_json(p.out / suite[i].id / "trace.json", trace_to_json(results[i].trace));
  }
  write_resolved(p.out, cfg);
}

void cmd_segment(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.prompts, "--prompts");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  const auto masks = segment_suite(suite, read_prompt_dir(p.prompts, suite), cfg);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    io::write_masks(p.out / suite[i].id, masks[i], suite[i].volume.spacing());
  }
  write_resolved(p.out, cfg);
}

void cmd_evaluate(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.pred, "--pred");
  require_path(p.out, "--out");
  std::vector<NamedCase> slices;
  AggregateReport report;
  if (!p.gt.empty()) {
    const auto gt = io::read_masks(p.gt);
    const auto pred = io::read_masks(p.pred);
    if (gt.size() != pred.size()) {
      throw DimensionError(p.pred.string() + ": " + std::to_string(pred.size()) + " slices but " + p.gt.string() +
                           " has " + std::to_string(gt.size()));
    }
    const auto meta = io::read_meta(p.gt);
    const PlanarSpacing sp{meta.spacing[0], meta.spacing[1]};
    for (std::size_t t = 0; t < gt.size(); ++t) {
      require_same_shape(pred[t], gt[t], p.pred.string() + " slice " + std::to_string(t));
      slices.push_back({slice_label(static_cast<int>(t)), evaluate_case(pred[t], gt[t], sp)});
    }
    report = aggregate(slices, {{"volume", volumetric_dice(pred, gt)}});
  } else {
    require_path(p.suite, "--suite (or --gt)");
    const auto suite = read_suite(p.suite);
    std::vector<std::vector<BinaryMask>> pred;
    for (const auto& c : suite) pred.push_back(io::read_masks(p.pred / c.id));
    auto ev = evaluate_suite(suite, pred);
    slices = std::move(ev.slices);
    report = std::move(ev.report);
  }
  write_text(p.out / "metrics.csv", cases_to_csv(slices));
  io::write_json(p.out / "summary.json", report_to_json(report));
  write_resolved(p.out, cfg);
}

void cmd_compare(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.prompts, "--prompts");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  const auto rows = compare_conditions(suite, read_prompt_dir(p.prompts, suite), load_saliency(p, suite), cfg);
  write_text(p.out / "compare.csv", compare_to_csv(rows));
  io::write_json(p.out / "compare.json", compare_to_json(rows));
  write_resolved(p.out, cfg);
}

void cmd_sweep_tau(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.suite, "--suite");
  require_path(p.prompts, "--prompts");
  require_path(p.out, "--out");
  const auto suite = read_suite(p.suite);
  const auto rows = sweep_tau(read_prompt_dir(p.prompts, suite), load_saliency(p, suite), cfg);
  write_text(p.out / "sweep_tau.csv", sweep_to_csv(rows));
  io::write_json(p.out / "sweep_tau.json", sweep_to_json(rows));
  write_resolved(p.out, cfg);
}

void cmd_run(const CommandPaths& p, const PipelineConfig& cfg) {
  require_path(p.out, "--out");
  const fs::path out = p.out;
  write_resolved(out, cfg);

  const auto suite = make_suite(cfg);
  write_suite(out / "suite", suite, cfg);

  const auto prompts = simulate_suite(suite, cfg);
  for (std::size_t i = 0; i < suite.size(); ++i) io::write_prompts(out / "prompts" / (suite[i].id + ".json"), prompts[i]);

  const auto model = train_on_suite(suite, cfg);
  io::write_json(out / "model.json", model_to_json(model));
  const auto learned = predict_suite(suite, model, cfg.jobs);
  if (cfg.saliency_source == "learned") {
    for (std::size_t i = 0; i < suite.size(); ++i) {
      io::write_prob_maps(out / "learned_saliency" / suite[i].id, learned[i], suite[i].volume.spacing());
    }
  }
  const auto saliency = cfg.saliency_source == "learned" ? learned : oracle_saliency(suite);

  const auto distilled = distill_suite(prompts, saliency, cfg.cpd, cfg.jobs);
  const auto consensus = consensus_sets(distilled);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    io::write_prompts(out / "consensus" / suite[i].id / "prompts.json", distilled[i].consensus);
    io::write_json(out / "consensus" / suite[i].id / "trace.json", trace_to_json(distilled[i].trace));
  }

  const auto masks = segment_suite(suite, consensus, cfg);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    io::write_masks(out / "pred" / suite[i].id, masks[i], suite[i].volume.spacing());
  }
  const auto ev = evaluate_suite(suite, masks);
  write_text(out / "eval" / "metrics.csv", cases_to_csv(ev.slices));
  io::write_json(out / "eval" / "summary.json", report_to_json(ev.report));

  const auto rows = compare_conditions(suite, prompts, saliency, cfg);
  write_text(out / "compare.csv", compare_to_csv(rows));
  io::write_json(out / "compare.json", compare_to_json(rows));

  const auto taus = sweep_tau(prompts, saliency, cfg);
  write_text(out / "sweep_tau.csv", sweep_to_csv(taus));
  io::write_json(out / "sweep_tau.json", sweep_to_json(taus));

  // Slice-consistency ablation of the saliency learner, one run per mode.
  const auto& modes = cfg.sweep.psc_modes;
  std::vector<ordered_json> ablation(modes.size());
  parallel_for(static_cast<int>(modes.size()), cfg.jobs, [&](int i) {
    PipelineConfig c = cfg;
    c.jobs = 1;
    c.train.use_psc = modes[i] != PscMode::None;
    c.train.psc_mode = modes[i] == PscMode::None ? PscMode::Next : modes[i];
    const auto m = train_on_suite(suite, c);
    const auto pred = predict_suite(suite, m, 1);
    ablation[i] = {{"psc_mode", to_string(modes[i])},
                   {"final_loss", m.log.back()},
                   {"mean_adjacent_psc", mean_adjacent_psc(pred)},
                   {"saliency_dice", saliency_dice(suite, pred)}};
  });

  ordered_json summary;
  summary["seed"] = cfg.seed;
  summary["cases"] = suite.size();
  summary["saliency_source"] = cfg.saliency_source;
  summary["cpd"] = {{"tau", cfg.cpd.tau}, {"n", cfg.cpd.n}};
  summary["evaluation"] = report_to_json(ev.report);
  summary["compare"] = compare_to_json(rows);
  summary["sweep_tau"] = sweep_to_json(taus);
  summary["saliency_model"] = {{"weights", model.weights},
                               {"initial_loss", model.log.front()},
                               {"final_loss", model.log.back()},
                               {"saliency_dice", saliency_dice(suite, learned)},
                               {"mean_adjacent_psc", mean_adjacent_psc(learned)}};
  ordered_json abl = ordered_json::array();
  for (auto& a : ablation) abl.push_back(std::move(a));
  summary["psc_ablation"] = std::move(abl);
  io::write_json(out / "summary.json", summary);
}

}  // namespace spd
