// SPDX-License-Identifier: Apache-2.0
#include "forge/text/sequence.hpp"

#include <algorithm>
#include <cmath>

namespace forge {
namespace {

int coord_bin(double coord, int image_size) {
  const int bin = static_cast<int>(std::floor(coord / image_size * kNumBins));
  return std::clamp(bin, 0, kNumBins - 1);
}

}  // namespace

std::vector<int> encode_bbox(const Box& box, int image_size, const Vocabulary& vocab) {
  require(image_size > 0, "image size must be positive");
  require(box.x0 < box.x1 && box.y0 < box.y1, "degenerate box");
  require(box.x0 >= 0 && box.y0 >= 0 && box.x1 <= image_size && box.y1 <= image_size,
          "box outside image bounds");
  const int cls = vocab.id(box.label);
  require(cls != kUnk, "box class label not in vocabulary: " + box.label);
  return {kBbox,
          cls,
          Vocabulary::bin_id(coord_bin(box.x0, image_size)),
          Vocabulary::bin_id(coord_bin(box.y0, image_size)),
          Vocabulary::bin_id(coord_bin(box.x1, image_size)),
          Vocabulary::bin_id(coord_bin(box.y1, image_size))};
}

Box decode_bbox(const std::vector<int>& tokens, int image_size, const Vocabulary& vocab) {
  require(tokens.size() == 6, "bbox token run must have exactly 6 tokens");
  require(tokens[0] == kBbox, "bbox token run must start with the BBOX marker");
  require(!Vocabulary::is_special(tokens[1]) && !Vocabulary::is_bin(tokens[1]),
          "bbox class position holds a non-class token");
  for (int i = 2; i < 6; ++i)
    require(Vocabulary::is_bin(tokens[i]), "bbox coordinate position holds a non-bin token");

  const double unit = static_cast<double>(image_size) / kNumBins;
  Box box;
  box.label = vocab.token(tokens[1]);
  box.x0 = (Vocabulary::bin_value(tokens[2]) + 0.5) * unit;
  box.y0 = (Vocabulary::bin_value(tokens[3]) + 0.5) * unit;
  box.x1 = (Vocabulary::bin_value(tokens[4]) + 0.5) * unit;
  box.y1 = (Vocabulary::bin_value(tokens[5]) + 0.5) * unit;
  require(box.x0 < box.x1 && box.y0 < box.y1, "decoded box is degenerate");
  return box;
}

std::vector<Box> parse_boxes(const std::vector<int>& tokens, int image_size,
                             const Vocabulary& vocab, int* malformed_runs) {
  std::vector<Box> boxes;
  int malformed = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != kBbox) continue;
    if (i + 6 <= tokens.size()) {
      std::vector<int> run(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                           tokens.begin() + static_cast<std::ptrdiff_t>(i + 6));
      try {
        boxes.push_back(decode_bbox(run, image_size, vocab));
        i += 5;
        continue;
      } catch (const SpecError&) {
        ++malformed;
        continue;
      }
    }
    ++malformed;
  }
  if (malformed_runs != nullptr) *malformed_runs = malformed;
  return boxes;
}

MultimodalSequence interleave(int image_token_count, const std::vector<int>& instruction_ids,
                              const std::vector<int>& response_ids, int max_len) {
  require(image_token_count > 0, "interleave requires at least one image token");
  require(!instruction_ids.empty(), "interleave requires a non-empty instruction");
  const int total = image_token_count + static_cast<int>(instruction_ids.size()) +
                    static_cast<int>(response_ids.size()) + 5;
  if (total > max_len)
    throw SpecError("sequence length " + std::to_string(total) + " exceeds max " +
                    std::to_string(max_len));

  MultimodalSequence seq;
  seq.token_ids.reserve(static_cast<std::size_t>(total));
  seq.image_slot_count = image_token_count;

  auto push = [&seq](int id, Modality m, bool loss) {
    seq.token_ids.push_back(id);
    seq.modality_flags.push_back(m);
    seq.loss_mask.push_back(loss ? 1 : 0);
  };

  push(kBos, Modality::Text, false);
  push(kImgOpen, Modality::Text, false);
  for (int i = 0; i < image_token_count; ++i) push(kImgSlot, Modality::Image, false);
  push(kImgClose, Modality::Text, false);
  for (int id : instruction_ids) push(id, Modality::Text, false);
  push(kResponse, Modality::Text, false);
  for (int id : response_ids) push(id, Modality::Text, true);
  push(kEos, Modality::Text, true);
  return seq;
}

std::string strip_image_marker(const std::string& instruction) {
  const std::string& marker = special_surface(kImgOpen);
  require(instruction.rfind(marker, 0) == 0,
          "instruction does not begin with the image placeholder marker");
  std::size_t i = marker.size();
  while (i < instruction.size() && instruction[i] == ' ') ++i;
  return instruction.substr(i);
}

}  // namespace forge
