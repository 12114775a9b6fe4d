#include <filesystem>

#include "doctest.h"
#include "spd/errors.hpp"
#include "spd/io.hpp"
#include "support.hpp"

using namespace spd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("spd_test_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("16-bit PGM round trip is within one quantisation step") {
  test::Engine rng(1);
  const auto m = test::random_prob_map(rng, 7, 5);
  const Image img(7, 5, std::vector<double>(m.values().begin(), m.values().end()));
  const auto bytes = io::encode_pgm16(img);
  CHECK(bytes.substr(0, 2) == "P5");
  const auto back = io::decode_pgm16(bytes);
  REQUIRE(back.width() == 7);
  REQUIRE(back.height() == 5);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(back[i] - img[i]) <= 0.5 / 65535 + 1e-15);

  // Re-encoding the decoded image is byte-stable.
  CHECK(io::encode_pgm16(back) == bytes);
}

TEST_CASE("PGM samples are big-endian") {
  const Image img(1, 1, std::vector<double>{1.0});
  const auto bytes = io::encode_pgm16(img);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 0xff);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 0xff);
  const std::string header = "P5\n# comment\n1 1\n65535\n";
  const auto decoded = io::decode_pgm16(header + std::string("\x80\x00", 2));
  CHECK(decoded[0] == doctest::Approx(32768.0 / 65535.0));
}

TEST_CASE("mask PGM round trip is exact") {
  test::Engine rng(2);
  const auto m = test::random_mask(rng, 9, 4);
  const auto bytes = io::encode_mask_pgm(m);
  CHECK(io::decode_mask_pgm(bytes) == m);
  CHECK_THROWS_AS(io::decode_mask_pgm("P5\n1 1\n255\n\x07"), ValidationError);
}

TEST_CASE("PFM round trip is exact for float-representable values") {
  std::vector<double> v{0.0, 0.25, 0.5, 1.0, 0.125, 0.75};
  const ProbMap m(3, 2, v);
  const auto bytes = io::encode_pfm(m);
  CHECK(bytes.substr(0, 3) == "Pf\n");
  CHECK(io::decode_pfm(bytes) == m);
}

TEST_CASE("PFM stores rows bottom-to-top") {
  const ProbMap m(1, 2, std::vector<double>{0.0, 1.0});
  const auto bytes = io::encode_pfm(m);
  // Last 4 bytes are the top row (y = 0), value 0.
  CHECK(bytes.substr(bytes.size() - 4) == std::string(4, '\0'));
}

TEST_CASE("malformed headers are validation errors") {
  CHECK_THROWS_AS(io::decode_pgm16("P6\n1 1\n65535\n\0\0"), ValidationError);
  CHECK_THROWS_AS(io::decode_pgm16("P5\n2 2\n65535\n\0\0"), ValidationError);
  CHECK_THROWS_AS(io::decode_pfm("Pf\n1 1\n1.0\n\0\0\0\0"), ValidationError);
}

TEST_CASE("volume, mask and probability directories round trip") {
  const auto dir = scratch("dirs");
  test::Engine rng(3);
  std::vector<Image> slices;
  std::vector<BinaryMask> masks;
  std::vector<ProbMap> maps;
  for (int t = 0; t < 3; ++t) {
    const auto m = test::random_prob_map(rng, 6, 5);
    slices.emplace_back(6, 5, std::vector<double>(m.values().begin(), m.values().end()));
    masks.push_back(test::random_mask(rng, 6, 5));
    maps.push_back(m);
  }
  const Volume vol(slices, {0.5, 0.75, 2.0});
  io::write_volume(dir / "vol", vol);
  io::write_masks(dir / "gt", masks, vol.spacing());
  io::write_prob_maps(dir / "sal", maps, vol.spacing());

  const auto meta = io::read_meta(dir / "vol");
  CHECK(meta.width == 6);
  CHECK(meta.depth == 3);
  CHECK(meta.spacing[2] == 2.0);
  CHECK(fs::exists(dir / "vol" / "slice_0002.pgm"));

  const auto v2 = io::read_volume(dir / "vol");
  CHECK(v2.spacing() == vol.spacing());
  for (int t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 30; ++i) CHECK(std::abs(v2.slice(t)[i] - vol.slice(t)[i]) <= 0.5 / 65535 + 1e-15);
  CHECK(io::read_masks(dir / "gt") == masks);
  const auto maps2 = io::read_prob_maps(dir / "sal");
  for (int t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 30; ++i) CHECK(maps2[t][i] == static_cast<double>(static_cast<float>(maps[t][i])));

  fs::remove(dir / "gt" / "slice_0001.pgm");
  CHECK_THROWS_AS(io::read_masks(dir / "gt"), IoError);
  CHECK_THROWS_AS(io::read_volume(dir / "missing"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("prompt JSON round trip") {
  PromptSet ps(5);
  ps.insert(0, {1, 2});
  ps.insert(3, {4, 0});
  ps.insert(3, {0, 4});
  const auto j = io::prompts_to_json(ps);
  CHECK(j.dump() == R"({"prompts":{"0":[{"x":1,"y":2}],"3":[{"x":4,"y":0},{"x":0,"y":4}]}})");
  CHECK(io::prompts_from_json(nlohmann::json::parse(j.dump())) == ps);

  CHECK_THROWS_AS(io::prompts_from_json(nlohmann::json::parse(R"({"prompts":{"a":[]}})")), ValidationError);
  CHECK_THROWS_AS(io::prompts_from_json(nlohmann::json::parse(R"({"prompts":{"0":[{"x":1}]}})")), ValidationError);
  CHECK_THROWS_AS(io::prompts_from_json(nlohmann::json::parse(R"({"other":1})")), ValidationError);
}

TEST_CASE("atomic writes leave no temporary files") {
  const auto dir = scratch("atomic");
  io::write_file_atomic(dir / "a.txt", "hello");
  io::write_file_atomic(dir / "a.txt", "world");
  CHECK(io::read_file(dir / "a.txt") == "world");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(io::read_file(dir / "nope"), IoError);
  CHECK_THROWS_AS(io::read_json(dir / "a.txt"), ValidationError);
  fs::remove_all(dir);
}
