// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "forge/corpus/phantom.hpp"
#include "forge/text/vocab.hpp"

namespace forge {

enum class Modality : std::uint8_t { Text, Image };

struct MultimodalSequence {
  std::vector<int> token_ids;
  std::vector<Modality> modality_flags;   // IMAGE exactly on IMG_SLOT positions
  std::vector<std::uint8_t> loss_mask;    // true only on response..EOS
  int image_slot_count = 0;

  int length() const { return static_cast<int>(token_ids.size()); }
};

constexpr int kDefaultMaxSeqLen = 512;

/// Pix2Seq-style box serialization: BBOX, class token, then 4 coordinate
/// bins with bin = floor(coord/size*64) clipped to 63.
std::vector<int> encode_bbox(const Box& box, int image_size, const Vocabulary& vocab);

/// Inverts encode_bbox via bin centers; throws SpecError on malformed runs
/// (wrong arity, missing BBOX lead, non-bin coordinates).
Box decode_bbox(const std::vector<int>& tokens, int image_size, const Vocabulary& vocab);

/// Scans a generated stream for well-formed 6-token box runs; malformed
/// runs after a BBOX marker are skipped (callers count them separately).
std::vector<Box> parse_boxes(const std::vector<int>& tokens, int image_size,
                             const Vocabulary& vocab, int* malformed_runs = nullptr);

/// Layout: BOS, IMG_OPEN, IMG_SLOT x n, IMG_CLOSE, instruction, RESPONSE,
/// response, EOS. Empty response produces the generation-prefix form.
MultimodalSequence interleave(int image_token_count, const std::vector<int>& instruction_ids,
                              const std::vector<int>& response_ids,
                              int max_len = kDefaultMaxSeqLen);

/// Instruction strings are stored with the leading "<img> " marker; this
/// returns the text after it (interleave supplies the real image block).
std::string strip_image_marker(const std::string& instruction);

}  // namespace forge
