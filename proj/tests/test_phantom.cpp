#include "doctest.h"
#include "spd/cpd.hpp"
#include "spd/errors.hpp"
#include "spd/filters.hpp"
#include "spd/phantom.hpp"
#include "support.hpp"

using namespace spd;

TEST_CASE("tube occupies exactly its slice range") {
  PhantomSpec s;
  s.tube_first = 2;
  s.tube_last = 8;
  s.seed = 5;
  const auto ph = make_phantom(s);
  REQUIRE(ph.masks.size() == 12);
  for (int t = 0; t < 12; ++t) CHECK(ph.masks[t].any() == (t >= 2 && t <= 8));
}

TEST_CASE("zero-radius ellipsoid is empty") {
  PhantomSpec s;
  s.kind = PhantomKind::Ellipsoid;
  s.ellipsoid_rx = s.ellipsoid_ry = s.ellipsoid_rz = 0;
  for (const auto& m : make_phantom(s).masks) CHECK_FALSE(m.any());
}

TEST_CASE("phantoms are deterministic per seed") {
  for (auto kind : {PhantomKind::Tube, PhantomKind::Ellipsoid, PhantomKind::MultiBlob}) {
    PhantomSpec s;
    s.kind = kind;
    s.seed = 17;
    const auto a = make_phantom(s), b = make_phantom(s);
    CHECK(a.volume == b.volume);
    CHECK(a.masks == b.masks);
    s.seed = 18;
    CHECK_FALSE(make_phantom(s).volume == a.volume);
  }
}

TEST_CASE("foreground is brighter than background by the contrast") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PhantomSpec s;
    s.seed = seed;
    s.distractors = 0;
    const auto ph = make_phantom(s);
    double fg = 0, bg = 0;
    std::size_t nf = 0, nb = 0;
    for (int t = 0; t < s.depth; ++t) {
      for (std::size_t i = 0; i < ph.masks[t].size(); ++i) {
        if (ph.masks[t][i]) {
          fg += ph.volume.slice(t)[i];
          ++nf;
        } else {
          bg += ph.volume.slice(t)[i];
          ++nb;
        }
      }
    }
    CHECK(fg / nf - bg / nb > (s.fg_mean - s.bg_mean) - 3 * s.noise_sigma);
  }
}

TEST_CASE("target in the left half, distractors clear of it") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PhantomSpec s;
    s.seed = seed;
    s.noise_sigma = 0;
    const auto ph = make_phantom(s);
    for (int t = 0; t < s.depth; ++t) {
      const auto& m = ph.masks[t];
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
          if (m(x, y)) CHECK(x < 32);
      const auto near = dilate(m, 2);
      for (std::size_t i = 0; i < m.size(); ++i) {
        // A bright pixel outside the target is a distractor and must keep a gap.
        if (!m[i] && ph.volume.slice(t)[i] > 0.5) CHECK_FALSE(near[i]);
      }
    }
  }
}

TEST_CASE("degenerate specs are rejected") {
  PhantomSpec s;
  s.tube_first = 9;
  s.tube_last = 3;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.width = 0;
  CHECK_THROWS_AS(make_phantom(s), ValidationError);
  s = {};
  s.tube_radius_min = 8;
  s.tube_radius_max = 4;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK_THROWS_AS(parse_phantom_kind("cube"), ValidationError);
}

TEST_CASE("zero corruption gives separated bands") {
  PhantomSpec s;
  s.seed = 2;
  const auto ph = make_phantom(s);
  const auto sal = corrupt_saliency(ph.masks, SaliencyCorruption::none(), 9);
  for (int t = 0; t < s.depth; ++t) {
    for (std::size_t i = 0; i < sal[t].size(); ++i) {
      if (ph.masks[t][i]) {
        CHECK(sal[t][i] > 0.8);
      } else {
        CHECK(sal[t][i] < 0.2);
      }
    }
  }
}

TEST_CASE("zero corruption with local validation keeps exactly the in-mask prompts") {
  PhantomSpec s;
  s.seed = 4;
  const auto ph = make_phantom(s);
  const auto sal = corrupt_saliency(ph.masks, SaliencyCorruption::none(), 1);
  for (int t = 0; t < s.depth; ++t) {
    std::vector<PromptPoint> all, inside;
    for (int y = 0; y < 64; y += 3)
      for (int x = 0; x < 64; x += 3) {
        all.push_back({x, y});
        if (ph.masks[t](x, y)) inside.push_back({x, y});
      }
    CHECK(validate_local(all, sal[t], 0.5) == inside);
  }
}

TEST_CASE("erosion larger than the structure suppresses all foreground") {
  PhantomSpec s;
  s.seed = 3;
  const auto ph = make_phantom(s);
  SaliencyCorruption c;
  c.erosion_radius = 20;
  for (const auto& m : corrupt_saliency(ph.masks, c, 0))
    for (double v : m.values()) CHECK(v < 0.2);
}

TEST_CASE("mild corruption keeps an empty mid band") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PhantomSpec s;
    s.seed = seed;
    const auto ph = make_phantom(s);
    const auto sal = corrupt_saliency(ph.masks, SaliencyCorruption::mild(), seed);
    bool has_fp = false;
    for (int t = 0; t < s.depth; ++t) {
      const auto ref = threshold(sal[t], 0.5);
      for (double tau : {0.3, 0.4, 0.6, 0.7, 0.8}) CHECK(threshold(sal[t], tau) == ref);
      for (std::size_t i = 0; i < sal[t].size(); ++i) {
        CHECK_FALSE((sal[t][i] > 0.25 && sal[t][i] < 0.75));
        has_fp = has_fp || (ref[i] && !ph.masks[t][i]);
      }
    }
    CHECK(has_fp);
  }
}

TEST_CASE("corruption is deterministic per seed") {
  PhantomSpec s;
  const auto ph = make_phantom(s);
  const auto a = corrupt_saliency(ph.masks, SaliencyCorruption::mild(), 5);
  const auto b = corrupt_saliency(ph.masks, SaliencyCorruption::mild(), 5);
  const auto c = corrupt_saliency(ph.masks, SaliencyCorruption::mild(), 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("filters") {
  const Grid<double> constant(6, 5, std::vector<double>(30, 0.4));
  for (double v : box_blur(constant, 2)) CHECK(std::abs(v - 0.4) < 1e-15);
  for (double v : local_variance(constant, 1)) CHECK(std::abs(v) < 1e-15);
  std::vector<double> delta(25, 0.0);
  delta[12] = 1.0;
  const auto b = box_blur(Grid<double>(5, 5, delta), 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      const bool inside = std::abs(x - 2) <= 1 && std::abs(y - 2) <= 1;
      CHECK(std::abs(b[y * 5 + x] - (inside ? 1.0 / 9 : 0.0)) < 1e-15);
    }
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(5, 5) == 3);
}
