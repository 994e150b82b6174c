// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/corpus/description.hpp"
#include "forge/corpus/instructions.hpp"
#include "forge/corpus/phantom.hpp"
#include "forge/text/sequence.hpp"
#include "forge/text/vocab.hpp"

namespace forge {

enum class Stage { VisionPretrain, Alignment, VLPretrain, InstructionTune };
enum class Category { ImageOnly, Paired, Instruction };

std::string to_string(Stage s);
std::string to_string(Category c);
Stage stage_from_string(const std::string& s);
Category category_from_string(const std::string& s);
const std::vector<Stage>& all_stages();

struct StageWeights {
  double image_only = 0.0, paired = 0.0, instruction = 0.0;
};

/// Table 2 data ratios for a stage.
StageWeights stage_weights(Stage s);

struct CorpusConfig {
  int image_only_count = 128;
  int paired_count = 128;
  int instruction_count = 256;
  int eval_per_task = 12;
  int image_size = 64;
  double lesion_fraction = 0.5;
  int eval_acceleration = 4;

  static CorpusConfig from_json_file(const std::string& path);
  std::string to_json() const;
  void validate() const;
};

struct StageManifest {
  int version = 1;
  std::uint64_t seed = 0;
  int image_size = 64;
  std::vector<std::string> image_only_ids, paired_ids, instruction_ids, eval_ids;
  std::map<Stage, StageWeights> weights;

  const std::vector<std::string>& ids_for(Category c) const;
};

/// Fixed prompt used to interleave paired image-description data.
const std::string& caption_prompt();

/// Deterministic closure of every templated text the pipeline can emit;
/// prepended to the sampled corpus texts when building the vocabulary so
/// the closed vocab never depends on which labels were drawn.
std::vector<std::string> canonical_text_closure();

/// Builds the on-disk corpus (instance directories, manifest.txt,
/// vocab.txt) and returns the manifest.
StageManifest build_corpus(const CorpusConfig& config, const std::string& out_dir,
                           std::uint64_t seed);

void save_manifest(const StageManifest& m, const std::string& path);
StageManifest load_manifest(const std::string& path);

/// Category of each draw follows the stage's Table 2 weights;
/// within-category uniform. Deterministic in seed.
std::vector<std::string> stage_sampler(const StageManifest& manifest, Stage stage,
                                       std::uint64_t seed, int n);

/// A corpus instance as loaded from disk. Phantom geometry is not
/// persisted; labels, arrays, boxes, and texts are.
struct CorpusInstance {
  std::string id;
  Category category = Category::ImageOnly;
  std::uint64_t phantom_seed = 0;
  PhantomMetadata metadata;
  LesionType lesion = LesionType::None;
  MatD image;
  MatI seg_mask;
  std::vector<Box> boxes;
  std::string diagnosis;
  HierarchicalDescription description;
  bool has_instruction = false;
  InstructionInstance instruction;
};

CorpusInstance load_instance(const std::string& corpus_dir, const std::string& id);

/// Serialized response for an instruction target: Text -> word tokens,
/// Boxes -> bbox token runs, Image -> the IMG_OPEN marker, Mask -> SEG.
std::vector<int> response_token_ids(const InstructionInstance& inst, const Vocabulary& vocab,
                                    int image_size);

/// Phrases checked by report_coverage for a loaded instance.
std::vector<std::string> required_report_phrases(const CorpusInstance& inst);

}  // namespace forge
