#pragma once

// Experiment harness behind the CLI. In-memory operations work on a suite
// of phantom cases; the cmd_* functions wrap them with the on-disk layout:
//
//   suite dir  : phantom-suite.json, case_NNN/{volume,gt,saliency}/
//   prompts dir: case_NNN.json (raw) or case_NNN/prompts.json (distilled)
//   distill dir: case_NNN/{prompts.json,trace.json}
//   pred dir   : case_NNN/ mask stacks
//   saliency   : case_NNN/ probability stacks
//
// Every command writes resolved_config.json next to its outputs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spd/config.hpp"
#include "spd/cpd.hpp"
#include "spd/metrics.hpp"
#include "spd/salearn.hpp"
#include "spd/volcore.hpp"

namespace spd {

namespace fs = std::filesystem;

// Runs body(0..count-1) on up to `jobs` threads. The exception of the
// lowest failing index is rethrown after all workers stop.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

std::string case_name(int index);  // "case_007"

// Seed streams derived from the master seed.
std::uint64_t phantom_seed(std::uint64_t master, int index);
std::uint64_t corruption_seed(std::uint64_t master, int index);
std::uint64_t prompt_seed(std::uint64_t master, int index);
std::uint64_t training_seed(std::uint64_t master);

struct SuiteCase {
  std::string id;
  Volume volume;
  std::vector<BinaryMask> gt;
  std::vector<ProbMap> saliency;  // oracle (corrupted ground truth)
};

SuiteCase make_case(const PipelineConfig& cfg, int index);
std::vector<SuiteCase> make_suite(const PipelineConfig& cfg);

std::vector<PromptSet> simulate_suite(const std::vector<SuiteCase>& suite, const PipelineConfig& cfg);

SaliencyModel train_on_suite(const std::vector<SuiteCase>& suite, const PipelineConfig& cfg);
std::vector<std::vector<ProbMap>> predict_suite(const std::vector<SuiteCase>& suite, const SaliencyModel& model,
                                                int jobs);

std::vector<DistillResult> distill_suite(const std::vector<PromptSet>& prompts,
                                         const std::vector<std::vector<ProbMap>>& saliency, const CpdConfig& cpd,
                                         int jobs);

// Locally validated prompts only (no neighbour enrichment).
PromptSet local_prompts(const PromptSet& prompts, const std::vector<ProbMap>& saliency, double tau);

std::vector<std::vector<BinaryMask>> segment_suite(const std::vector<SuiteCase>& suite,
                                                   const std::vector<PromptSet>& prompts, const PipelineConfig& cfg);

struct SuiteEvaluation {
  std::vector<NamedCase> slices;  // "case_NNN/slice_TTTT"
  AggregateReport report;
};

SuiteEvaluation evaluate_suite(const std::vector<SuiteCase>& suite,
                               const std::vector<std::vector<BinaryMask>>& pred);

struct ConditionRow {
  std::string condition;  // baseline | local | consensus
  int n = 0;
  AggregateReport report;
};

// Baseline / Local / Consensus at the configured n, then consensus rows
// for each n in cfg.sweep.n.
std::vector<ConditionRow> compare_conditions(const std::vector<SuiteCase>& suite,
                                             const std::vector<PromptSet>& prompts,
                                             const std::vector<std::vector<ProbMap>>& saliency,
                                             const PipelineConfig& cfg);

struct TauRow {
  double tau = 0.0;
  double jaccard = 0.0;  // against the tau = 0.5 consensus
  std::size_t size = 0;
  std::size_t reference_size = 0;
};

std::vector<TauRow> sweep_tau(const std::vector<PromptSet>& prompts,
                              const std::vector<std::vector<ProbMap>>& saliency, const PipelineConfig& cfg);

// Mean soft-Dice dissimilarity between adjacent predicted slices.
double mean_adjacent_psc(const std::vector<std::vector<ProbMap>>& predictions);

nlohmann::ordered_json compare_to_json(const std::vector<ConditionRow>& rows);
std::string compare_to_csv(const std::vector<ConditionRow>& rows);
nlohmann::ordered_json sweep_to_json(const std::vector<TauRow>& rows);
std::string sweep_to_csv(const std::vector<TauRow>& rows);

// Disk layout.
void write_suite(const fs::path& dir, const std::vector<SuiteCase>& suite, const PipelineConfig& cfg);
std::vector<SuiteCase> read_suite(const fs::path& dir);
std::vector<PromptSet> read_prompt_dir(const fs::path& dir, const std::vector<SuiteCase>& suite);
std::vector<std::vector<ProbMap>> read_saliency_dir(const fs::path& dir, const std::vector<SuiteCase>& suite);

struct CommandPaths {
  fs::path out;
  fs::path suite;
  fs::path prompts;
  fs::path saliency;  // empty: the suite's oracle saliency
  fs::path model;
  fs::path pred;
  fs::path gt;        // evaluate on two plain mask directories when set
};

void cmd_phantom(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_simulate(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_train(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_predict(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_distill(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_segment(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_evaluate(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_compare(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_sweep_tau(const CommandPaths& p, const PipelineConfig& cfg);
void cmd_run(const CommandPaths& p, const PipelineConfig& cfg);

}  // namespace spd
