#pragma once

// Contextual prompt distillation: saliency-gated local validation, dual
// validated enrichment from neighbouring slices, and the consensus union.

#include <span>
#include <vector>

#include "json.hpp"
#include "spd/volcore.hpp"

namespace spd {

struct CpdConfig {
  double tau = 0.5;  // saliency threshold, strict S(p) > tau
  int n = 2;         // neighbouring slices per side

  void validate() const;
};

struct Candidate {
  PromptPoint point;
  int source = 0;  // slice the prompt came from
};

struct CandidateRecord {
  PromptPoint point;
  int source = 0;
  bool pass = false;  // survived cross-validation on the current slice
};

struct SliceTrace {
  int slice = 0;
  std::vector<PromptPoint> local_retained;
  std::vector<CandidateRecord> candidates;
  std::vector<PromptPoint> consensus;
  // Passing candidates that duplicated a retained local prompt and were
  // therefore fed to the segmenter once rather than twice.
  int collapsed = 0;
};

struct DistillTrace {
  std::vector<SliceTrace> slices;  // ascending slice index
};

struct DistillResult {
  PromptSet consensus;
  DistillTrace trace;
};

// {p in prompts | S_t(p) > tau}, input order preserved.
std::vector<PromptPoint> validate_local(std::span<const PromptPoint> prompts, const ProbMap& saliency,
                                        double tau, int slice = -1);

// Union over j in window of {p in P_j | S_j(p) > tau}, tagged with j.
// A coordinate seen from several neighbours is kept once, from the
// smallest j. `saliency` is indexed by slice.
std::vector<Candidate> collect_candidates(const PromptSet& prompts, std::span<const ProbMap> saliency,
                                          const NeighborWindow& window, double tau);

// {p in candidates | S_t(p) > tau}.
std::vector<PromptPoint> cross_validate(std::span<const Candidate> candidates, const ProbMap& saliency,
                                        double tau, int slice = -1);

// local U ctx as a coordinate set, local prompts first.
std::vector<PromptPoint> consensus(std::span<const PromptPoint> local, std::span<const PromptPoint> ctx);

// Per-slice distillation over every slice of the saliency stack. Slices
// whose consensus is empty get no entry in the output prompt set.
DistillResult distill_volume(const PromptSet& prompts, std::span<const ProbMap> saliency,
                             const CpdConfig& cfg);

nlohmann::ordered_json trace_to_json(const DistillTrace& trace);

}  // namespace spd
