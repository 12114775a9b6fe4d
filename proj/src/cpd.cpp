#include "spd/cpd.hpp"

#include <algorithm>
#include <set>

namespace spd {

void CpdConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("cpd tau must lie in [0,1]");
  if (n < 0) throw ValidationError("cpd n must be non-negative");
}

std::vector<PromptPoint> validate_local(std::span<const PromptPoint> prompts, const ProbMap& saliency,
                                        double tau, int slice) {
  std::vector<PromptPoint> out;
  for (const auto& p : prompts) {
    if (saliency_at(saliency, p, slice) > tau) out.push_back(p);
  }
  return out;
}

std::vector<Candidate> collect_candidates(const PromptSet& prompts, std::span<const ProbMap> saliency,
                                          const NeighborWindow& window, double tau) {
  std::vector<Candidate> out;
  std::set<PromptPoint> seen;
  std::vector<int> order = window.indices;
  std::sort(order.begin(), order.end());
  for (int j : order) {
    if (j < 0 || static_cast<std::size_t>(j) >= saliency.size()) {
      throw MissingDataError("no saliency map for neighbouring slice " + std::to_string(j) +
                             " of slice " + std::to_string(window.center));
    }
    for (const auto& p : prompts.at(j)) {
      if (saliency_at(saliency[j], p, j) > tau && seen.insert(p).second) out.push_back({p, j});
    }
  }
  return out;
}

std::vector<PromptPoint> cross_validate(std::span<const Candidate> candidates, const ProbMap& saliency,
                                        double tau, int slice) {
  std::vector<PromptPoint> out;
  for (const auto& c : candidates) {
    if (saliency_at(saliency, c.point, slice) > tau) out.push_back(c.point);
  }
  return out;
}

std::vector<PromptPoint> consensus(std::span<const PromptPoint> local, std::span<const PromptPoint> ctx) {
  std::vector<PromptPoint> out;
  std::set<PromptPoint> seen;
  for (const auto& p : local) {
    if (seen.insert(p).second) out.push_back(p);
  }
  for (const auto& p : ctx) {
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

DistillResult distill_volume(const PromptSet& prompts, std::span<const ProbMap> saliency,
                             const CpdConfig& cfg) {
  cfg.validate();
  const int depth = static_cast<int>(saliency.size());
  if (depth == 0) throw MissingDataError("distill_volume: no saliency maps");
  for (const auto& s : saliency) require_same_shape(s, saliency.front(), "saliency stack");
  prompts.validate(depth, saliency.front().width(), saliency.front().height());

  DistillResult result{PromptSet(depth), {}};
  result.trace.slices.reserve(static_cast<std::size_t>(depth));
  for (int t = 0; t < depth; ++t) {
    SliceTrace st;
    st.slice = t;
    st.local_retained = validate_local(prompts.at(t), saliency[t], cfg.tau, t);
    const auto window = neighbor_window(t, cfg.n, depth);
    const auto candidates = collect_candidates(prompts, saliency, window, cfg.tau);
    std::vector<PromptPoint> passed;
    for (const auto& c : candidates) {
      const bool pass = saliency_at(saliency[t], c.point, t) > cfg.tau;
      st.candidates.push_back({c.point, c.source, pass});
      if (pass) passed.push_back(c.point);
    }
    st.consensus = consensus(st.local_retained, passed);
    st.collapsed = static_cast<int>(st.local_retained.size() + passed.size() - st.consensus.size());
    if (!st.consensus.empty()) result.consensus.insert_all(t, st.consensus);
    result.trace.slices.push_back(std::move(st));
  }
  return result;
}

nlohmann::ordered_json trace_to_json(const DistillTrace& trace) {
  using nlohmann::ordered_json;
  auto points = [](const std::vector<PromptPoint>& ps) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : ps) arr.push_back({{"x", p.x}, {"y", p.y}});
    return arr;
  };
  ordered_json slices = ordered_json::array();
  for (const auto& st : trace.slices) {
    ordered_json cands = ordered_json::array();
    for (const auto& c : st.candidates) {
      cands.push_back({{"x", c.point.x}, {"y", c.point.y}, {"src", c.source}, {"pass", c.pass}});
    }
    ordered_json s;
    s["slice"] = st.slice;
    s["local_retained"] = points(st.local_retained);
    s["candidates"] = std::move(cands);
    s["consensus"] = points(st.consensus);
    s["collapsed"] = st.collapsed;
    slices.push_back(std::move(s));
  }
  ordered_json j;
  j["slices"] = std::move(slices);
  return j;
}

}  // namespace spd
