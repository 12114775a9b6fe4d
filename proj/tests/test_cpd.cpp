#include "doctest.h"
#include "spd/cpd.hpp"
#include "spd/errors.hpp"
#include "support.hpp"

using namespace spd;

namespace {

ProbMap with_values(int w, int h, double fill, std::initializer_list<std::pair<Pixel, double>> at) {
  std::vector<double> v(static_cast<std::size_t>(w) * h, fill);
  for (const auto& [p, s] : at) v[static_cast<std::size_t>(p.y) * w + p.x] = s;
  return ProbMap(w, h, std::move(v));
}

}  // namespace

TEST_CASE("local validation is strict") {
  const auto s = with_values(4, 4, 0.0, {{{1, 1}, 0.7}, {{2, 2}, 0.5}});
  const std::vector<PromptPoint> ps{{1, 1}, {2, 2}};
  CHECK(validate_local(ps, s, 0.5) == std::vector<PromptPoint>{{1, 1}});
  CHECK(validate_local({}, s, 0.5).empty());
  const std::vector<PromptPoint> outside{{4, 0}};
  CHECK_THROWS_AS(validate_local(outside, s, 0.5, 2), CoordinateError);
}

TEST_CASE("candidate collection gates on the neighbour saliency") {
  std::vector<ProbMap> sal{with_values(4, 4, 0.0, {{{1, 1}, 0.8}, {{2, 2}, 0.2}}), ProbMap(4, 4, 0.9),
                           ProbMap(4, 4, 0.0)};
  PromptSet ps(3);
  ps.insert(0, {1, 1});
  ps.insert(0, {2, 2});
  const auto c = collect_candidates(ps, sal, neighbor_window(1, 1, 3), 0.5);
  REQUIRE(c.size() == 1);
  CHECK(c[0].point == Pixel{1, 1});
  CHECK(c[0].source == 0);
  CHECK(collect_candidates(ps, sal, neighbor_window(1, 0, 3), 0.5).empty());
}

TEST_CASE("cross validation gates on the current slice") {
  const auto cur = with_values(4, 4, 0.0, {{{1, 1}, 0.3}, {{2, 2}, 0.9}});
  const std::vector<Candidate> cands{{{1, 1}, 0}, {{2, 2}, 2}};
  CHECK(cross_validate(cands, cur, 0.5) == std::vector<PromptPoint>{{2, 2}});
  CHECK(cross_validate({}, cur, 0.5).empty());
}

TEST_CASE("consensus is an ordered union") {
  const PromptPoint a{0, 0}, b{1, 1}, c{2, 2};
  CHECK(consensus(std::vector{a, b}, std::vector{b, c}) == std::vector{a, b, c});
  CHECK(consensus({}, {}).empty());
  CHECK(consensus({}, std::vector{c}) == std::vector{c});
}

TEST_CASE("distillation of a single slice uses local prompts only") {
  PromptSet ps(1);
  ps.insert(0, {1, 1});
  ps.insert(0, {0, 0});
  std::vector<ProbMap> sal{with_values(3, 3, 0.0, {{{1, 1}, 0.9}})};
  const auto r = distill_volume(ps, sal, {0.5, 2});
  CHECK(test::as_vector(r.consensus.at(0)) == std::vector<PromptPoint>{{1, 1}});
}

TEST_CASE("uniform saliency keeps every prompt in the window") {
  PromptSet ps(5);
  ps.insert(0, {0, 0});
  ps.insert(1, {1, 1});
  ps.insert(2, {2, 2});
  ps.insert(2, {1, 1});
  ps.insert(4, {3, 3});
  std::vector<ProbMap> sal(5, ProbMap(4, 4, 1.0));
  const auto r = distill_volume(ps, sal, {0.5, 1});
  CHECK(test::as_vector(r.consensus.at(0)) == std::vector<PromptPoint>{{0, 0}, {1, 1}});
  CHECK(test::as_vector(r.consensus.at(1)) == std::vector<PromptPoint>{{1, 1}, {0, 0}, {2, 2}});
  CHECK(test::as_vector(r.consensus.at(3)) == std::vector<PromptPoint>{{2, 2}, {1, 1}, {3, 3}});
  // slice 2 sees {1,1} locally and from slice 1: collapsed once.
  CHECK(r.trace.slices[2].collapsed == 1);
  CHECK(r.trace.slices.size() == 5);
}

TEST_CASE("trace JSON layout") {
  PromptSet ps(2);
  ps.insert(0, {1, 0});
  std::vector<ProbMap> sal(2, ProbMap(2, 2, 1.0));
  const auto j = trace_to_json(distill_volume(ps, sal, {0.5, 1}).trace);
  CHECK(j.dump() ==
        R"({"slices":[{"slice":0,"local_retained":[{"x":1,"y":0}],"candidates":[],"consensus":[{"x":1,"y":0}],)"
        R"("collapsed":0},{"slice":1,"local_retained":[],"candidates":[{"x":1,"y":0,"src":0,"pass":true}],)"
        R"("consensus":[{"x":1,"y":0}],"collapsed":0}]})");
}

TEST_CASE("distillation matches the set-builder oracle") {
  test::Engine rng(77);
  const double taus[] = {0.0, 0.3, 0.5, 0.8, 1.0};
  for (int k = 0; k < 300; ++k) {
    std::uniform_int_distribution<int> ud(1, 7), un(0, 3), up(0, 6), uxy(0, 5);
    const int depth = ud(rng), n = un(rng);
    const double tau = taus[k % 5];
    std::vector<ProbMap> sal;
    for (int t = 0; t < depth; ++t) sal.push_back(test::random_prob_map(rng, 6, 6));
    PromptSet ps(depth);
    std::map<int, std::vector<Pixel>> raw;
    for (int t = 0; t < depth; ++t) {
      const int count = up(rng);
      for (int i = 0; i < count; ++i) {
        const Pixel p{uxy(rng), uxy(rng)};
        ps.insert(t, p);
        raw[t].push_back(p);
      }
    }
    const auto got = distill_volume(ps, sal, {tau, n});
    CHECK(test::as_point_sets(got.consensus) == test::distill_oracle(raw, sal, tau, n));
  }
}

TEST_CASE("invalid configuration and missing saliency") {
  CHECK_THROWS_AS((CpdConfig{1.5, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((CpdConfig{0.5, -1}.validate()), ValidationError);
  PromptSet ps(3);
  ps.insert(2, {0, 0});
  std::vector<ProbMap> sal(2, ProbMap(2, 2, 1.0));
  CHECK_THROWS_AS(distill_volume(ps, sal, {0.5, 1}), IndexError);
  std::vector<ProbMap> short_stack(1, ProbMap(2, 2, 1.0));
  PromptSet ok(3);
  ok.insert(1, {0, 0});
  CHECK_THROWS_AS(collect_candidates(ok, short_stack, neighbor_window(0, 1, 3), 0.5), MissingDataError);
}
