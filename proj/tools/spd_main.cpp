#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spd/errors.hpp"
#include "spd/io.hpp"
#include "spd/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> segmenter;
  spd::CommandPaths paths;
};

spd::PipelineConfig resolve(const Options& o) {
  spd::PipelineConfig cfg =
      o.config.empty() ? spd::config_from_json(nlohmann::json::object())
                       : spd::config_from_json(spd::io::read_json(o.config), o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.segmenter) cfg.segmenter = *o.segmenter;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saliency-guided prompt distillation toolkit"};
  app.require_subcommand(1);
  Options o;

  using Command = std::function<void(const spd::CommandPaths&, const spd::PipelineConfig&)>;
  Command selected;

  struct Flags {
    bool suite = false, prompts = false, saliency = false, model = false, pred = false, gt = false;
  };
  auto add = [&](const char* name, const char* help, Command cmd, Flags f) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed (u64)");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--segmenter", o.segmenter, "segmenter name (region-grow)");
    sub->add_option("--out", o.paths.out, "output directory")->required();
    if (f.suite) sub->add_option("--suite", o.paths.suite, "phantom suite directory");
    if (f.prompts) sub->add_option("--prompts", o.paths.prompts, "prompt directory")->required();
    if (f.saliency) sub->add_option("--saliency", o.paths.saliency, "saliency directory (default: suite oracle)");
    if (f.model) sub->add_option("--model", o.paths.model, "model.json from train-saliency")->required();
    if (f.pred) sub->add_option("--pred", o.paths.pred, "predicted mask directory")->required();
    if (f.gt) sub->add_option("--gt", o.paths.gt, "ground-truth mask directory (single volume)");
    sub->callback([&selected, cmd] { selected = cmd; });
  };

  add("phantom", "generate the phantom suite", spd::cmd_phantom, {});
  add("simulate-prompts", "simulate noisy prompts", spd::cmd_simulate, {.suite = true});
  add("train-saliency", "train the saliency learner", spd::cmd_train, {.suite = true});
  add("predict-saliency", "predict saliency maps", spd::cmd_predict, {.suite = true, .model = true});
  add("distill", "distill consensus prompts", spd::cmd_distill, {.suite = true, .prompts = true, .saliency = true});
  add("segment", "segment with prompts", spd::cmd_segment, {.suite = true, .prompts = true});
  add("evaluate", "evaluate predicted masks", spd::cmd_evaluate, {.suite = true, .pred = true, .gt = true});
  add("compare", "baseline / local / consensus comparison", spd::cmd_compare,
      {.suite = true, .prompts = true, .saliency = true});
  add("sweep-tau", "consensus stability across thresholds", spd::cmd_sweep_tau,
      {.suite = true, .prompts = true, .saliency = true});
  add("run", "full chain", spd::cmd_run, {});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    selected(o.paths, resolve(o));
  } catch (const spd::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const spd::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const spd::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
