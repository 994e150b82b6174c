// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "forge/core/common.hpp"

namespace forge {

/// Special token ids. Ids are dense from 0: specials, then the 64
/// coordinate-bin tokens, then class-label tokens, then corpus words.
enum SpecialToken : int {
  kPad = 0,
  kBos = 1,
  kEos = 2,
  kImgOpen = 3,
  kImgSlot = 4,
  kImgClose = 5,
  kSeg = 6,
  kBbox = 7,
  kResponse = 8,
  kUnk = 9,
};
constexpr int kNumSpecials = 10;
constexpr int kNumBins = 64;

/// Surface form of a special token, e.g. "<img>" for kImgOpen.
const std::string& special_surface(int id);

/// Splits text into lowercased word and punctuation tokens. Angle-bracket
/// marker forms ("<img>", "<bin7>", ...) are kept whole; they are explicit
/// escapes, never produced by splitting plain words. Word characters are
/// [a-z0-9_'] plus '.' between digits (so "1.5t" stays one token).
std::vector<std::string> split_words(const std::string& text);

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Deterministic closed vocabulary: specials, bins, registered class
  /// labels, then the sorted unique words of `texts`.
  static Vocabulary build(const std::vector<std::string>& texts);

  int size() const { return static_cast<int>(id_to_token_.size()); }
  bool contains(const std::string& token) const;
  int id(const std::string& token) const;  // kUnk when missing
  const std::string& token(int id) const;

  static bool is_special(int id) { return id >= 0 && id < kNumSpecials; }
  static bool is_bin(int id) { return id >= kNumSpecials && id < kNumSpecials + kNumBins; }
  static int bin_id(int bin);        // bin in [0,64) -> token id
  static int bin_value(int id);      // token id -> bin in [0,64)

  /// encode: lowercased split, then id lookup (UNK for unknown words).
  std::vector<int> encode(const std::string& text) const;
  /// decode: joins tokens, reattaching punctuation, then restores sentence
  /// capitalization and acronym casing so templated corpus texts
  /// round-trip exactly.
  std::string decode(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  std::uint64_t hash() const;

 private:
  void add(const std::string& token);
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

}  // namespace forge
