#include "spd/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spd::io {

namespace {

// Reads the whitespace/comment separated header tokens of a PNM/PFM file.
class HeaderReader {
 public:
  HeaderReader(std::string_view bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) ++pos_;
    if (start == pos_) fail("truncated header");
    return std::string(bytes_.substr(start, pos_ - start));
  }

  long integer() {
    const std::string tok = token();
    long value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("bad integer '" + tok + "'");
    return value;
  }

  double real() {
    const std::string tok = token();
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + tok + "'");
    }
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::string_view raster() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) fail("missing raster separator");
    return bytes_.substr(pos_ + 1);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(source_ + ": " + what);
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

void check_size(const HeaderReader& h, long width, long height) {
  if (width <= 0 || height <= 0 || width > (1 << 20) || height > (1 << 20)) {
    h.fail("invalid dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string slice_filename(int t, std::string_view ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slice_%04d.", t);
  return std::string(buf) + std::string(ext);
}

std::string encode_pgm16(const Image& image) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n65535\n";
  out.reserve(out.size() + image.size() * 2);
  for (double v : image.values()) {
    const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xff));
  }
  return out;
}

Image decode_pgm16(std::string_view bytes, const std::string& source) {
  HeaderReader h(bytes, source);
  if (h.token() != "P5") h.fail("not a binary PGM (P5)");
  const long width = h.integer();
  const long height = h.integer();
  check_size(h, width, height);
  const long maxval = h.integer();
  if (maxval != 65535) h.fail("expected maxval 65535, got " + std::to_string(maxval));
  const auto raster = h.raster();
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (raster.size() < 2 * n) h.fail("truncated raster");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned hi = static_cast<unsigned char>(raster[2 * i]);
    const unsigned lo = static_cast<unsigned char>(raster[2 * i + 1]);
    values[i] = static_cast<double>((hi << 8) | lo) / 65535.0;
  }
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

std::string encode_mask_pgm(const BinaryMask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  out.reserve(out.size() + mask.size());
  for (auto v : mask.values()) out.push_back(static_cast<char>(v ? 255 : 0));
  return out;
}

BinaryMask decode_mask_pgm(std::string_view bytes, const std::string& source) {
  HeaderReader h(bytes, source);
  if (h.token() != "P5") h.fail("not a binary PGM (P5)");
  const long width = h.integer();
  const long height = h.integer();
  check_size(h, width, height);
  const long maxval = h.integer();
  if (maxval != 255) h.fail("expected maxval 255, got " + std::to_string(maxval));
  const auto raster = h.raster();
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (raster.size() < n) h.fail("truncated raster");
  std::vector<std::uint8_t> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = static_cast<unsigned char>(raster[i]);
    if (b != 0 && b != 255) {
      h.fail("mask value " + std::to_string(b) + " at pixel " + std::to_string(i) + " is neither 0 nor 255");
    }
    values[i] = b ? 1 : 0;
  }
  return BinaryMask(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

std::string encode_pfm(const ProbMap& map) {
  std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n";
  out.reserve(out.size() + map.size() * 4);
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(map(x, y)));
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  return out;
}

ProbMap decode_pfm(std::string_view bytes, const std::string& source) {
  HeaderReader h(bytes, source);
  if (h.token() != "Pf") h.fail("not a grayscale PFM (Pf)");
  const long width = h.integer();
  const long height = h.integer();
  check_size(h, width, height);
  const double scale = h.real();
  if (scale >= 0.0) h.fail("only little-endian PFM (negative scale) is supported");
  const auto raster = h.raster();
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (raster.size() < 4 * n) h.fail("truncated raster");
  std::vector<double> values(n);
  std::size_t k = 0;
  for (long row = height - 1; row >= 0; --row) {
    for (long x = 0; x < width; ++x, ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raster[4 * k + b])) << (8 * b);
      const auto f = std::bit_cast<float>(bits);
      values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = f;
    }
  }
  try {
    return ProbMap(static_cast<int>(width), static_cast<int>(height), std::move(values));
  } catch (const ValidationError& e) {
    h.fail(e.what());
  }
}

Meta read_meta(const fs::path& dir) {
  const auto path = dir / "meta.json";
  const auto j = read_json(path);
  Meta m;
  try {
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.depth = j.at("depth").get<int>();
    const auto& sp = j.at("spacing");
    if (!sp.is_array() || sp.size() != 3) throw ValidationError(path.string() + ": spacing must have 3 entries");
    for (int k = 0; k < 3; ++k) m.spacing[k] = sp.at(k).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": field error: " + e.what());
  }
  if (m.width <= 0 || m.height <= 0 || m.depth <= 0) {
    throw ValidationError(path.string() + ": width/height/depth must be positive");
  }
  for (double s : m.spacing) {
    if (!(s > 0.0)) throw ValidationError(path.string() + ": spacing components must be positive");
  }
  return m;
}

void write_meta(const fs::path& dir, const Meta& meta) {
  ordered_json j;
  j["width"] = meta.width;
  j["height"] = meta.height;
  j["depth"] = meta.depth;
  j["spacing"] = {meta.spacing[0], meta.spacing[1], meta.spacing[2]};
  write_json(dir / "meta.json", j);
}

namespace {

template <typename Decode>
auto read_slices(const fs::path& dir, std::string_view ext, Decode decode) {
  const Meta meta = read_meta(dir);
  std::vector<decltype(decode(std::string_view{}, std::string{}))> out;
  out.reserve(static_cast<std::size_t>(meta.depth));
  for (int t = 0; t < meta.depth; ++t) {
    const auto path = dir / slice_filename(t, ext);
    auto slice = decode(read_file(path), path.string());
    if (slice.width() != meta.width || slice.height() != meta.height) {
      throw DimensionError(path.string() + ": slice is " + std::to_string(slice.width()) + "x" +
                           std::to_string(slice.height()) + " but meta.json says " +
                           std::to_string(meta.width) + "x" + std::to_string(meta.height));
    }
    out.push_back(std::move(slice));
  }
  return std::make_pair(meta, std::move(out));
}

template <typename G, typename Encode>
void write_slices(const fs::path& dir, const std::vector<G>& slices, const Spacing& spacing,
                  std::string_view ext, Encode encode) {
  if (slices.empty()) throw ValidationError("refusing to write an empty slice stack to " + dir.string());
  for (const auto& s : slices) require_same_shape(s, slices.front(), "slice stack " + dir.string());
  for (std::size_t t = 0; t < slices.size(); ++t) {
    write_file_atomic(dir / slice_filename(static_cast<int>(t), ext), encode(slices[t]));
  }
  write_meta(dir, Meta{slices.front().width(), slices.front().height(), static_cast<int>(slices.size()), spacing});
}

}  // namespace

void write_volume(const fs::path& dir, const Volume& volume) {
  std::vector<Image> slices(volume.slices().begin(), volume.slices().end());
  write_slices(dir, slices, volume.spacing(), "pgm", encode_pgm16);
}

Volume read_volume(const fs::path& dir) {
  auto [meta, slices] = read_slices(dir, "pgm", [](std::string_view b, const std::string& s) { return decode_pgm16(b, s); });
  return Volume(std::move(slices), meta.spacing);
}

void write_masks(const fs::path& dir, const std::vector<BinaryMask>& masks, const Spacing& spacing) {
  write_slices(dir, masks, spacing, "pgm", encode_mask_pgm);
}

std::vector<BinaryMask> read_masks(const fs::path& dir) {
  return read_slices(dir, "pgm", [](std::string_view b, const std::string& s) { return decode_mask_pgm(b, s); }).second;
}

void write_prob_maps(const fs::path& dir, const std::vector<ProbMap>& maps, const Spacing& spacing) {
  write_slices(dir, maps, spacing, "pfm", encode_pfm);
}

std::vector<ProbMap> read_prob_maps(const fs::path& dir) {
  return read_slices(dir, "pfm", [](std::string_view b, const std::string& s) { return decode_pfm(b, s); }).second;
}

ordered_json prompts_to_json(const PromptSet& prompts) {
  ordered_json slices = ordered_json::object();
  for (const auto& [t, list] : prompts.slices()) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : list) arr.push_back({{"x", p.x}, {"y", p.y}});
    slices[std::to_string(t)] = std::move(arr);
  }
  ordered_json j;
  j["prompts"] = std::move(slices);
  return j;
}

PromptSet prompts_from_json(const nlohmann::json& j, const std::string& source) {
  PromptSet out;
  if (!j.is_object() || !j.contains("prompts") || !j["prompts"].is_object()) {
    throw ValidationError(source + ": expected object with a \"prompts\" object");
  }
  for (const auto& [key, arr] : j["prompts"].items()) {
    int t = -1;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), t);
    if (ec != std::errc() || ptr != key.data() + key.size() || t < 0) {
      throw ValidationError(source + ": slice key '" + key + "' is not a non-negative integer");
    }
    if (!arr.is_array()) throw ValidationError(source + ": prompts[\"" + key + "\"] must be an array");
    out.touch(t);
    for (const auto& p : arr) {
      if (!p.is_object() || !p.contains("x") || !p.contains("y") || !p["x"].is_number_integer() ||
          !p["y"].is_number_integer()) {
        throw ValidationError(source + ": slice " + key + ": prompt entries need integer \"x\" and \"y\"");
      }
      out.insert(t, PromptPoint{p["x"].get<int>(), p["y"].get<int>()});
    }
  }
  return out;
}

void write_prompts(const fs::path& path, const PromptSet& prompts) {
  write_json(path, prompts_to_json(prompts));
}

PromptSet read_prompts(const fs::path& path) {
  return prompts_from_json(read_json(path), path.string());
}

}  // namespace spd::io
