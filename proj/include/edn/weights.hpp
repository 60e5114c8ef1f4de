#pragma once

// EDNW weights file: "EDNW", u32 version, u32 entry count, then per entry
// u32 name length, name bytes, u32 ndim, u32 dims[ndim], f32 payload.
// Every integer and float is little-endian.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edn/model.hpp"

namespace edn {

inline constexpr std::uint32_t kWeightsVersion = 1;

struct WeightsEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
  friend bool operator==(const WeightsEntry&, const WeightsEntry&) = default;
};

// Entries of every layer in `params`, sorted by name:
// <path>.weight, <path>.bias, <path>.bn_{gamma,beta,mean,var}.
std::vector<WeightsEntry> collect_entries(const ParamStore& params);

std::string encode_weights(const std::vector<WeightsEntry>& entries);
// FormatError on bad magic, unsupported version, truncation, trailing bytes
// or duplicate names.
std::vector<WeightsEntry> decode_weights(std::string_view bytes);

// Overwrites the parameters in `params` with `entries`. ValidationError on
// an unknown, missing or mis-shaped entry, or on a non-positive variance.
void apply_entries(ParamStore& params, const std::vector<WeightsEntry>& entries);

void save_weights(const EdnModel& model, const std::filesystem::path& path);
void load_weights(EdnModel& model, const std::filesystem::path& path);

}  // namespace edn
