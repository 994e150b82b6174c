// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/core/common.hpp"

namespace forge {

// Flat array files: one ASCII header line "arr <f32|i32> <rows> <cols>\n"
// followed by rows*cols little-endian values in row-major order.
void write_array_f32(const std::filesystem::path& path, const MatD& m);
void write_array_i32(const std::filesystem::path& path, const MatI& m);
MatD read_array_f32(const std::filesystem::path& path);
MatI read_array_i32(const std::filesystem::path& path);

// Line-delimited structured-text records: "key: value" lines, '#' comments
// and blank lines ignored. Repeated keys are kept in file order.
struct Record {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> get_all(const std::string& key) const;
};

void write_record(const std::filesystem::path& path, const Record& rec);
Record read_record(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// FNV-1a over a byte buffer; used for checkpoint / vocabulary fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t n);
std::uint64_t fnv1a_file(const std::filesystem::path& path);

/// 8-bit grayscale PNG for visual inspection. Values are clamped to [0,1].
void write_png_gray(const std::filesystem::path& path, const MatD& img);
/// Side-by-side panel of grayscale images separated by a 2 px white gutter.
void write_png_panel(const std::filesystem::path& path, const std::vector<MatD>& imgs);

}  // namespace forge
