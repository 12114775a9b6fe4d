#pragma once

// On-disk formats.
//
//   volume dir : meta.json {"width","height","depth","spacing":[sx,sy,sz]}
//                + slice_0000.pgm ... (P5, maxval 65535, big-endian)
//   mask dir   : meta.json + slice_NNNN.pgm (P5, maxval 255; 0 bg, 255 fg)
//   prob dir   : meta.json + slice_NNNN.pfm (Pf, little-endian, scale -1.0,
//                rows stored bottom-to-top as in the PFM convention)
//   prompts    : {"prompts": {"<t>": [{"x":int,"y":int}, ...], ...}}
//
// Every writer goes through write_file_atomic (temp file + rename).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spd/volcore.hpp"

namespace spd::io {

namespace fs = std::filesystem;

using ordered_json = nlohmann::ordered_json;

void write_file_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);
void write_json(const fs::path& path, const ordered_json& j);
nlohmann::json read_json(const fs::path& path);

std::string slice_filename(int t, std::string_view ext);

// Single-slice codecs. Encoders return the file bytes.
std::string encode_pgm16(const Image& image);
Image decode_pgm16(std::string_view bytes, const std::string& source = "<memory>");
std::string encode_mask_pgm(const BinaryMask& mask);
BinaryMask decode_mask_pgm(std::string_view bytes, const std::string& source = "<memory>");
std::string encode_pfm(const ProbMap& map);
ProbMap decode_pfm(std::string_view bytes, const std::string& source = "<memory>");

struct Meta {
  int width = 0;
  int height = 0;
  int depth = 0;
  Spacing spacing{1.0, 1.0, 1.0};
};

Meta read_meta(const fs::path& dir);
void write_meta(const fs::path& dir, const Meta& meta);

void write_volume(const fs::path& dir, const Volume& volume);
Volume read_volume(const fs::path& dir);

void write_masks(const fs::path& dir, const std::vector<BinaryMask>& masks, const Spacing& spacing = {1, 1, 1});
std::vector<BinaryMask> read_masks(const fs::path& dir);

void write_prob_maps(const fs::path& dir, const std::vector<ProbMap>& maps, const Spacing& spacing = {1, 1, 1});
std::vector<ProbMap> read_prob_maps(const fs::path& dir);

ordered_json prompts_to_json(const PromptSet& prompts);
PromptSet prompts_from_json(const nlohmann::json& j, const std::string& source = "<json>");
void write_prompts(const fs::path& path, const PromptSet& prompts);
PromptSet read_prompts(const fs::path& path);

}  // namespace spd::io
