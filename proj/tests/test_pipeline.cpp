#include <atomic>
#include <filesystem>

#include "doctest.h"
#include "spd/errors.hpp"
#include "spd/io.hpp"
#include "spd/pipeline.hpp"
#include "support.hpp"

using namespace spd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("spd_test_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.suite_size = 4;
  cfg.train_cases = 2;
  cfg.train.epochs = 20;
  return cfg;
}

}  // namespace

TEST_CASE("config defaults, overrides and unknown keys") {
  const auto d = config_from_json(nlohmann::json::object());
  CHECK(d.cpd.tau == 0.5);
  CHECK(d.cpd.n == 2);
  CHECK(d.loss.lambda_dice == 0.7);
  CHECK(d.loss.lambda_focal == 0.3);
  CHECK(d.loss.lambda_psc == 0.1);
  CHECK(d.sim.min_extra == 2);
  CHECK(d.sim.max_extra == 5);
  CHECK(d.suite_size == 50);

  const auto c = config_from_json(nlohmann::json::parse(
      R"({"seed":9,"cpd":{"n":1},"train":{"psc_mode":"prev"},"sweep":{"tau":[0.2]}})"));
  CHECK(c.seed == 9);
  CHECK(c.cpd.n == 1);
  CHECK(c.cpd.tau == 0.5);
  CHECK(c.train.psc_mode == PscMode::Prev);
  CHECK(c.sweep.tau == std::vector<double>{0.2});

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"cpd":{"tow":1}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"cpd":{"tau":"high"}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sweep":{"n":[]}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"jobs":0})")), ValidationError);

  // resolved config round-trips to the same effective values
  const auto again = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
  CHECK(config_to_json(again).dump() == config_to_json(c).dump());
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(50, 4, [&](int i) {
      if (i == 7 || i == 31) throw ValidationError("fail " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "fail 7");
  }
}

TEST_CASE("suite generation does not depend on the job count") {
  auto cfg = small_config();
  const auto a = make_suite(cfg);
  cfg.jobs = 3;
  const auto b = make_suite(cfg);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].id == case_name(i));
    CHECK(a[i].volume == b[i].volume);
    CHECK(a[i].saliency == b[i].saliency);
  }
  CHECK(simulate_suite(a, cfg) == simulate_suite(b, cfg));
}

TEST_CASE("cmd_distill reproduces distill_volume") {
  const auto dir = scratch("distill");
  auto cfg = small_config();
  CommandPaths p;
  p.out = dir / "suite";
  cmd_phantom(p, cfg);
  CHECK(fs::exists(dir / "suite" / "phantom-suite.json"));
  CHECK(fs::exists(dir / "suite" / "resolved_config.json"));

  // uniform saliency fixture
  const auto suite = read_suite(dir / "suite");
  std::vector<std::vector<ProbMap>> uniform;
  for (const auto& c : suite) {
    uniform.emplace_back(c.volume.depth(), ProbMap(c.volume.width(), c.volume.height(), 1.0));
    io::write_prob_maps(dir / "uniform" / c.id, uniform.back());
  }

  p.suite = dir / "suite";
  p.out = dir / "prompts";
  cmd_simulate(p, cfg);
  p.prompts = dir / "prompts";
  p.saliency = dir / "uniform";
  p.out = dir / "consensus";
  cmd_distill(p, cfg);

  const auto prompts = read_prompt_dir(dir / "prompts", suite);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto expected = distill_volume(prompts[i], uniform[i], cfg.cpd);
    CHECK(io::read_file(dir / "consensus" / suite[i].id / "trace.json") ==
          trace_to_json(expected.trace).dump(2) + "\n");
    CHECK(io::read_prompts(dir / "consensus" / suite[i].id / "prompts.json") == expected.consensus);
  }

  // The distilled directory is itself a valid prompt source.
  p.prompts = dir / "consensus";
  p.out = dir / "pred";
  cmd_segment(p, cfg);
  CHECK(fs::exists(dir / "pred" / "case_000" / "slice_0000.pgm"));
  fs::remove_all(dir);
}

TEST_CASE("cmd_evaluate on identical directories is all ones") {
  const auto dir = scratch("evaluate");
  auto cfg = small_config();
  const auto c = make_case(cfg, 0);
  io::write_masks(dir / "gt", c.gt);
  io::write_masks(dir / "pred", c.gt);
  CommandPaths p;
  p.gt = dir / "gt";
  p.pred = dir / "pred";
  p.out = dir / "eval";
  cmd_evaluate(p, cfg);
  const auto csv = io::read_file(dir / "eval" / "metrics.csv");
  std::size_t rows = 0, pos = csv.find('\n') + 1;
  while (pos < csv.size()) {
    const auto end = csv.find('\n', pos);
    const auto row = csv.substr(pos, end - pos);
    const auto f1 = row.find(',');
    CHECK(row.substr(f1 + 1, row.find(',', f1 + 1) - f1 - 1) == "1");
    pos = end + 1;
    ++rows;
  }
  CHECK(rows == c.gt.size());
  const auto summary = io::read_json(dir / "eval" / "summary.json");
  CHECK(summary.dump().find("\"dsc\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("commands report missing inputs") {
  const auto cfg = small_config();
  CommandPaths p;
  CHECK_THROWS_AS(cmd_phantom(p, cfg), ValidationError);
  p.out = scratch("missing");
  p.suite = p.out / "nope";
  CHECK_THROWS_AS(cmd_simulate(p, cfg), IoError);
  fs::remove_all(p.out);
}

// Noise-free rectangles with the four corner pixels removed: every
// foreground pixel has at least 5 foreground pixels in its 3x3 window, so
// any single in-mask seed grows the whole rectangle.
SuiteCase rectangle_case(int index) {
  const int w = 32, h = 32, depth = 6;
  std::vector<Image> slices;
  std::vector<BinaryMask> gt;
  std::vector<ProbMap> sal;
  for (int t = 0; t < depth; ++t) {
    std::vector<std::uint8_t> m(w * h, 0);
    if (t >= 1 && t <= 4) {
      const int x0 = 4 + t + index, y0 = 6 + index, x1 = x0 + 8 + t, y1 = y0 + 7;
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const bool corner = (x == x0 || x == x1) && (y == y0 || y == y1);
          m[y * w + x] = corner ? 0 : 1;
        }
    }
    std::vector<double> img(w * h);
    for (int i = 0; i < w * h; ++i) img[i] = m[i] ? 0.7 : 0.3;
    slices.emplace_back(w, h, img);
    gt.emplace_back(w, h, m);
    sal.push_back(to_prob_map(gt.back()));
  }
  return {case_name(index), Volume(slices), gt, sal};
}

TEST_CASE("nothing to filter or rescue: all conditions agree") {
  auto cfg = small_config();
  cfg.sim.min_extra = cfg.sim.max_extra = 0;
  std::vector<SuiteCase> suite;
  for (int i = 0; i < 4; ++i) suite.push_back(rectangle_case(i));
  std::vector<std::vector<ProbMap>> perfect;
  for (const auto& c : suite) perfect.push_back(c.saliency);
  const auto rows = compare_conditions(suite, simulate_suite(suite, cfg), perfect, cfg);
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0].report.dsc.mean == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& r : rows) {
    CHECK(std::abs(r.report.dsc.mean - rows[0].report.dsc.mean) < 1e-9);
    CHECK(std::abs(r.report.iou.mean - rows[0].report.iou.mean) < 1e-9);
  }
  CHECK(rows[0].condition == "baseline");
  CHECK(rows[1].condition == "local");
  CHECK(rows[2].condition == "consensus");
}

TEST_CASE("extra background prompts: consensus beats raw") {
  auto cfg = small_config();
  cfg.suite_size = 8;
  cfg.corruption = SaliencyCorruption::none();
  const auto suite = make_suite(cfg);
  std::vector<std::vector<ProbMap>> sal;
  for (const auto& c : suite) sal.push_back(c.saliency);
  const auto rows = compare_conditions(suite, simulate_suite(suite, cfg), sal, cfg);
  CHECK(rows[2].report.dsc.mean > rows[0].report.dsc.mean);
  std::vector<int> ns;
  for (std::size_t i = 3; i < rows.size(); ++i) ns.push_back(rows[i].n);
  CHECK(ns == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("local condition is exactly validate_local") {
  auto cfg = small_config();
  const auto suite = make_suite(cfg);
  const auto prompts = simulate_suite(suite, cfg);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto local = local_prompts(prompts[i], suite[i].saliency, cfg.cpd.tau);
    const auto trace = distill_volume(prompts[i], suite[i].saliency, cfg.cpd).trace;
    for (const auto& st : trace.slices) {
      CHECK(test::as_vector(local.at(st.slice)) == st.local_retained);
      CHECK(test::as_vector(local.at(st.slice)) ==
            validate_local(prompts[i].at(st.slice), suite[i].saliency[st.slice], cfg.cpd.tau));
    }
  }
}

TEST_CASE("tau sweep extremes") {
  auto cfg = small_config();
  cfg.corruption.blur_radius = 2;  // put mass in the mid band so tau matters
  const auto suite = make_suite(cfg);
  const auto prompts = simulate_suite(suite, cfg);
  std::vector<std::vector<ProbMap>> sal;
  for (const auto& c : suite) sal.push_back(c.saliency);

  cfg.sweep.tau = {0.0, 0.5, 0.99};
  const auto rows = sweep_tau(prompts, sal, cfg);
  CHECK(rows[1].jaccard == 1.0);
  // subset: |high| == |high n ref|, i.e. jaccard = |high| / |ref|
  CHECK(rows[2].size <= rows[2].reference_size);
  CHECK(std::abs(rows[2].jaccard - static_cast<double>(rows[2].size) / rows[2].reference_size) < 1e-12);
  CHECK(rows[0].size >= rows[0].reference_size);
  CHECK(std::abs(rows[0].jaccard - static_cast<double>(rows[0].reference_size) / rows[0].size) < 1e-12);

  // tau = 0 keeps every prompt with positive saliency on its own slice.
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto r = distill_volume(prompts[i], sal[i], {0.0, cfg.cpd.n});
    for (const auto& [t, pts] : prompts[i].slices())
      for (const auto& p : pts) {
        const auto got = test::as_vector(r.consensus.at(t));
        if (sal[i][t](p.x, p.y) > 0) CHECK(std::find(got.begin(), got.end(), p) != got.end());
      }
  }
}

TEST_CASE("full run writes the documented layout") {
  const auto dir = scratch("run");
  auto cfg = small_config();
  cfg.suite_size = 2;
  cfg.train.epochs = 3;
  cfg.saliency_source = "learned";
  CommandPaths p;
  p.out = dir;
  cmd_run(p, cfg);
  for (const char* f : {"summary.json", "resolved_config.json", "compare.csv", "compare.json", "sweep_tau.csv",
                        "sweep_tau.json", "model.json", "eval/metrics.csv", "eval/summary.json",
                        "prompts/case_000.json", "consensus/case_001/trace.json", "suite/phantom-suite.json",
                        "learned_saliency/case_000/slice_0000.pfm", "pred/case_001/meta.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto summary = io::read_json(dir / "summary.json");
  CHECK(summary.at("psc_ablation").size() == 4);
  fs::remove_all(dir);
}
