// SPDX-License-Identifier: Apache-2.0
#include "forge/corpus/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forge/core/array_io.hpp"
#include "forge/core/rng.hpp"

namespace fs = std::filesystem;

namespace forge {
namespace {

struct LabelDraw {
  Anatomy anatomy;
  Sequence sequence;
  Orientation orientation;
  LesionType lesion;
};

LabelDraw draw_labels(Rng& rng, double lesion_fraction, bool force_lesion) {
  LabelDraw d;
  d.anatomy = static_cast<Anatomy>(rng.index(kNumAnatomies));
  d.sequence = static_cast<Sequence>(rng.index(kNumSequences));
  d.orientation = static_cast<Orientation>(rng.index(kNumOrientations));
  const bool with_lesion = force_lesion || rng.uniform() < lesion_fraction;
  if (with_lesion) {
    const auto [small, large] = lesions_for(d.anatomy);
    d.lesion = rng.uniform() < 0.5 ? small : large;
  } else {
    d.lesion = LesionType::None;
  }
  return d;
}

std::string format_weight(double w) {
  // Table 2 weights are exact decimals; print the shortest stable form.
  std::ostringstream os;
  os << w;
  return os.str();
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ' ';
    out += ids[i];
  }
  return out;
}

std::vector<std::string> split_ids(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string id;
  while (is >> id) out.push_back(id);
  return out;
}

void write_instance_dir(const std::string& out_dir, const std::string& id, Category category,
                        const PhantomInstance& phantom, const HierarchicalDescription& desc,
                        const InstructionInstance* instr) {
  const fs::path dir = fs::path(out_dir) / id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create instance directory " + dir.string() + ": " + ec.message());

  write_array_f32(dir / "image.arr", phantom.image);
  write_array_i32(dir / "mask.arr", phantom.seg_mask);

  Record rec;
  rec.add("id", id);
  rec.add("category", to_string(category));
  rec.add("phantom_seed", std::to_string(phantom.spec.seed));
  rec.add("anatomy", to_string(phantom.metadata.anatomy));
  rec.add("sequence", to_string(phantom.metadata.sequence));
  rec.add("orientation", to_string(phantom.metadata.orientation));
  rec.add("field_strength", phantom.metadata.field_strength);
  rec.add("lesion",
          phantom.spec.lesion ? lesion_token(phantom.spec.lesion->second) : std::string("none"));
  rec.add("diagnosis", phantom.diagnosis);
  for (const Box& b : phantom.boxes) {
    std::ostringstream os;
    os << b.x0 << ' ' << b.y0 << ' ' << b.x1 << ' ' << b.y1 << ' ' << b.label;
    rec.add("box", os.str());
  }
  rec.add("desc_modality", desc.modality_params);
  rec.add("desc_structures", desc.anatomical_structures);
  rec.add("desc_signal", desc.signal_characteristics);
  rec.add("desc_findings", desc.pathological_findings);
  rec.add("desc_impression", desc.diagnostic_impression);
  if (instr != nullptr) {
    rec.add("task", to_string(instr->task));
    rec.add("instruction", instr->instruction);
    rec.add("target_kind", to_string(instr->target.kind));
    if (instr->target.kind == TargetKind::Text) rec.add("target_text", instr->target.text);
    if (instr->task == Task::Reconstruction) {
      rec.add("acceleration", std::to_string(instr->acceleration));
      write_array_f32(dir / "degraded.arr", instr->degraded);
    }
  }
  write_record(dir / "record.txt", rec);
}

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::VisionPretrain: return "VisionPretrain";
    case Stage::Alignment: return "Alignment";
    case Stage::VLPretrain: return "VLPretrain";
    case Stage::InstructionTune: return "InstructionTune";
  }
  throw SpecError("unknown stage");
}

std::string to_string(Category c) {
  switch (c) {
    case Category::ImageOnly: return "image_only";
    case Category::Paired: return "paired";
    case Category::Instruction: return "instruction";
  }
  throw SpecError("unknown category");
}

Stage stage_from_string(const std::string& s) {
  for (Stage st : all_stages())
    if (to_string(st) == s) return st;
  throw SpecError("unknown stage: " + s);
}

Category category_from_string(const std::string& s) {
  for (int i = 0; i < 3; ++i)
    if (to_string(static_cast<Category>(i)) == s) return static_cast<Category>(i);
  throw SpecError("unknown category: " + s);
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::VisionPretrain, Stage::Alignment,
                                            Stage::VLPretrain, Stage::InstructionTune};
  return stages;
}

StageWeights stage_weights(Stage s) {
  switch (s) {
    case Stage::VisionPretrain: return {1.0, 0.0, 0.0};
    case Stage::Alignment: return {0.0, 1.0, 0.0};
    case Stage::VLPretrain: return {0.0, 0.8, 0.2};
    case Stage::InstructionTune: return {0.0, 0.0, 1.0};
  }
  throw SpecError("unknown stage");
}

void CorpusConfig::validate() const {
  require(image_only_count > 0 && paired_count > 0 && instruction_count > 0,
          "corpus counts per category must be > 0");
  require(eval_per_task > 0, "eval_per_task must be > 0");
  require(image_size >= 16 && image_size % 16 == 0,
          "image_size must be a positive multiple of 16");
  require(lesion_fraction >= 0.0 && lesion_fraction <= 1.0, "lesion_fraction must be in [0,1]");
  require(eval_acceleration >= 1, "eval_acceleration must be >= 1");
}

CorpusConfig CorpusConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SpecError("malformed corpus config " + path + ": " + e.what());
  }
  CorpusConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "image_only_count") c.image_only_count = value.get<int>();
    else if (key == "paired_count") c.paired_count = value.get<int>();
    else if (key == "instruction_count") c.instruction_count = value.get<int>();
    else if (key == "eval_per_task") c.eval_per_task = value.get<int>();
    else if (key == "image_size") c.image_size = value.get<int>();
    else if (key == "lesion_fraction") c.lesion_fraction = value.get<double>();
    else if (key == "eval_acceleration") c.eval_acceleration = value.get<int>();
    else throw SpecError("unknown corpus config key: " + key);
  }
  c.validate();
  return c;
}

std::string CorpusConfig::to_json() const {
  nlohmann::json j;
  j["image_only_count"] = image_only_count;
  j["paired_count"] = paired_count;
  j["instruction_count"] = instruction_count;
  j["eval_per_task"] = eval_per_task;
  j["image_size"] = image_size;
  j["lesion_fraction"] = lesion_fraction;
  j["eval_acceleration"] = eval_acceleration;
  return j.dump(2) + "\n";
}

const std::vector<std::string>& StageManifest::ids_for(Category c) const {
  switch (c) {
    case Category::ImageOnly: return image_only_ids;
    case Category::Paired: return paired_ids;
    case Category::Instruction: return instruction_ids;
  }
  throw SpecError("unknown category");
}

const std::string& caption_prompt() {
  static const std::string p = special_surface(kImgOpen) + " Describe this MRI scan.";
  return p;
}

std::vector<std::string> canonical_text_closure() {
  std::vector<std::string> texts;
  texts.push_back(caption_prompt());
  texts.push_back("no abnormality detected");
  for (const std::string& label : all_diagnosis_labels()) texts.push_back(label);

  for (int a = 0; a < kNumAnatomies; ++a) {
    const auto anatomy = static_cast<Anatomy>(a);
    for (int o = 0; o < kNumOrientations; ++o) {
      const auto orientation = static_cast<Orientation>(o);
      for (Task task : all_tasks())
        for (const std::string& t : instruction_pool(task, anatomy, orientation))
          texts.push_back(t);
      // Descriptions for every (sequence, lesion) label combination.
      for (int s = 0; s < kNumSequences; ++s) {
        const auto [small, large] = lesions_for(anatomy);
        for (LesionType lesion : {LesionType::None, small, large}) {
          PhantomInstance shell;
          shell.metadata.anatomy = anatomy;
          shell.metadata.sequence = static_cast<Sequence>(s);
          shell.metadata.orientation = orientation;
          shell.metadata.field_strength =
              (anatomy == Anatomy::Knee || anatomy == Anatomy::Breast) ? "1.5T" : "3T";
          if (lesion != LesionType::None) shell.spec.lesion = {Ellipse{}, lesion};
          texts.push_back(render_description(shell).flat());
        }
      }
    }
  }
  return texts;
}

StageManifest build_corpus(const CorpusConfig& config, const std::string& out_dir,
                           std::uint64_t seed) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create corpus directory " + out_dir + ": " + ec.message());

  StageManifest manifest;
  manifest.seed = seed;
  manifest.image_size = config.image_size;
  for (Stage s : all_stages()) manifest.weights[s] = stage_weights(s);

  std::vector<std::string> vocab_texts = canonical_text_closure();

  auto make_phantom = [&](std::uint64_t instance_seed, bool force_lesion) {
    Rng lr(hash_seed(instance_seed, "labels"));
    const LabelDraw d = draw_labels(lr, config.lesion_fraction, force_lesion);
    const PhantomSpec spec = sample_phantom_spec(d.anatomy, d.sequence, d.orientation, d.lesion,
                                                 instance_seed, config.image_size,
                                                 config.image_size);
    return generate_phantom(spec);
  };

  char buf[32];
  const std::uint64_t io_seed = hash_seed(seed, "image-only");
  for (int i = 0; i < config.image_only_count; ++i) {
    std::snprintf(buf, sizeof buf, "io_%04d", i);
    const PhantomInstance phantom = make_phantom(hash_seed(io_seed, static_cast<std::uint64_t>(i)),
                                                 false);
    const HierarchicalDescription desc = render_description(phantom);
    write_instance_dir(out_dir, buf, Category::ImageOnly, phantom, desc, nullptr);
    manifest.image_only_ids.push_back(buf);
    vocab_texts.push_back(desc.flat());
  }

  const std::uint64_t pr_seed = hash_seed(seed, "paired");
  for (int i = 0; i < config.paired_count; ++i) {
    std::snprintf(buf, sizeof buf, "pr_%04d", i);
    const PhantomInstance phantom = make_phantom(hash_seed(pr_seed, static_cast<std::uint64_t>(i)),
                                                 false);
    const HierarchicalDescription desc = render_description(phantom);
    write_instance_dir(out_dir, buf, Category::Paired, phantom, desc, nullptr);
    manifest.paired_ids.push_back(buf);
    vocab_texts.push_back(desc.flat());
  }

  const std::uint64_t in_seed = hash_seed(seed, "instruction");
  for (int i = 0; i < config.instruction_count; ++i) {
    std::snprintf(buf, sizeof buf, "in_%04d", i);
    const std::uint64_t instance_seed = hash_seed(in_seed, static_cast<std::uint64_t>(i));
    Rng tr(hash_seed(instance_seed, "task"));
    const Task task = all_tasks()[tr.index(all_tasks().size())];
    const PhantomInstance phantom = make_phantom(instance_seed, false);
    const HierarchicalDescription desc = render_description(phantom);
    const InstructionInstance instr = [&] {
      InstructionInstance x = build_instruction_instance(phantom, task, instance_seed);
      x.image_ref = buf;
      if (x.task == Task::Reconstruction) x.degraded_image_ref = buf;
      return x;
    }();
    write_instance_dir(out_dir, buf, Category::Instruction, phantom, desc, &instr);
    manifest.instruction_ids.push_back(buf);
    vocab_texts.push_back(desc.flat());
    vocab_texts.push_back(instr.instruction);
    if (instr.target.kind == TargetKind::Text) vocab_texts.push_back(instr.target.text);
  }

  const std::uint64_t ev_seed = hash_seed(seed, "eval");
  for (Task task : all_tasks()) {
    for (int i = 0; i < config.eval_per_task; ++i) {
      std::snprintf(buf, sizeof buf, "ev_%s_%02d", to_string(task).c_str(), i);
      const std::uint64_t instance_seed =
          hash_seed(hash_seed(ev_seed, to_string(task)), static_cast<std::uint64_t>(i));
      // Detection needs lesions to measure recall against.
      const bool force_lesion = task == Task::Detection;
      const PhantomInstance phantom = make_phantom(instance_seed, force_lesion);
      const HierarchicalDescription desc = render_description(phantom);
      const int forced_accel = task == Task::Reconstruction ? config.eval_acceleration : 0;
      InstructionInstance instr =
          build_instruction_instance(phantom, task, instance_seed, forced_accel);
      instr.image_ref = buf;
      if (instr.task == Task::Reconstruction) instr.degraded_image_ref = buf;
      write_instance_dir(out_dir, buf, Category::Instruction, phantom, desc, &instr);
      manifest.eval_ids.push_back(buf);
      vocab_texts.push_back(desc.flat());
      vocab_texts.push_back(instr.instruction);
      if (instr.target.kind == TargetKind::Text) vocab_texts.push_back(instr.target.text);
    }
  }

  const Vocabulary vocab = Vocabulary::build(vocab_texts);
  vocab.save((fs::path(out_dir) / "vocab.txt").string());
  save_manifest(manifest, (fs::path(out_dir) / "manifest.txt").string());
  return manifest;
}

void save_manifest(const StageManifest& m, const std::string& path) {
  std::ostringstream os;
  os << "# forge corpus manifest\n";
  os << "version: " << m.version << '\n';
  os << "seed: " << m.seed << '\n';
  os << "image_size: " << m.image_size << '\n';
  for (Stage s : all_stages()) {
    const StageWeights w = m.weights.at(s);
    os << "stage_weight: " << to_string(s) << ' ' << format_weight(w.image_only) << ' '
       << format_weight(w.paired) << ' ' << format_weight(w.instruction) << '\n';
  }
  os << "image_only: " << join_ids(m.image_only_ids) << '\n';
  os << "paired: " << join_ids(m.paired_ids) << '\n';
  os << "instruction: " << join_ids(m.instruction_ids) << '\n';
  os << "eval: " << join_ids(m.eval_ids) << '\n';
  write_text_file(path, os.str());
}

StageManifest load_manifest(const std::string& path) {
  const Record rec = read_record(path);
  StageManifest m;
  m.version = std::stoi(rec.get("version"));
  require(m.version == 1, "unsupported manifest version in " + path);
  m.seed = std::stoull(rec.get("seed"));
  m.image_size = std::stoi(rec.get("image_size"));
  for (const std::string& line : rec.get_all("stage_weight")) {
    std::istringstream is(line);
    std::string name;
    StageWeights w;
    is >> name >> w.image_only >> w.paired >> w.instruction;
    require(!is.fail(), "malformed stage_weight line: " + line);
    m.weights[stage_from_string(name)] = w;
  }
  m.image_only_ids = split_ids(rec.get("image_only"));
  m.paired_ids = split_ids(rec.get("paired"));
  m.instruction_ids = split_ids(rec.get("instruction"));
  m.eval_ids = split_ids(rec.get("eval"));
  require(m.weights.size() == all_stages().size(), "manifest missing stage weights");
  return m;
}

std::vector<std::string> stage_sampler(const StageManifest& manifest, Stage stage,
                                       std::uint64_t seed, int n) {
  require(n >= 0, "sample count must be non-negative");
  const StageWeights w = manifest.weights.at(stage);
  const double total = w.image_only + w.paired + w.instruction;
  require(std::abs(total - 1.0) < 1e-9, "stage weights must sum to 1");
  for (Category c : {Category::ImageOnly, Category::Paired, Category::Instruction}) {
    const double wc = c == Category::ImageOnly ? w.image_only
                      : c == Category::Paired  ? w.paired
                                               : w.instruction;
    if (wc > 0.0)
      require(!manifest.ids_for(c).empty(),
              "stage " + to_string(stage) + " requires non-empty category " + to_string(c));
  }

  Rng rng(hash_seed(seed, "stage-sampler-" + to_string(stage)));
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const std::vector<std::string>* pool;
    if (u < w.image_only) pool = &manifest.image_only_ids;
    else if (u < w.image_only + w.paired) pool = &manifest.paired_ids;
    else pool = &manifest.instruction_ids;
    out.push_back((*pool)[rng.index(pool->size())]);
  }
  return out;
}

CorpusInstance load_instance(const std::string& corpus_dir, const std::string& id) {
  const fs::path dir = fs::path(corpus_dir) / id;
  const Record rec = read_record((dir / "record.txt").string());

  CorpusInstance inst;
  inst.id = rec.get("id");
  require(inst.id == id, "record id mismatch in " + dir.string());
  inst.category = category_from_string(rec.get("category"));
  inst.phantom_seed = std::stoull(rec.get("phantom_seed"));
  inst.metadata.anatomy = anatomy_from_string(rec.get("anatomy"));
  inst.metadata.sequence = sequence_from_string(rec.get("sequence"));
  inst.metadata.orientation = orientation_from_string(rec.get("orientation"));
  inst.metadata.field_strength = rec.get("field_strength");
  const std::string lesion = rec.get("lesion");
  inst.lesion = lesion == "none" ? LesionType::None : lesion_from_token(lesion);
  inst.diagnosis = rec.get("diagnosis");
  inst.image = read_array_f32((dir / "image.arr").string());
  inst.seg_mask = read_array_i32((dir / "mask.arr").string());
  for (const std::string& line : rec.get_all("box")) {
    std::istringstream is(line);
    Box b;
    is >> b.x0 >> b.y0 >> b.x1 >> b.y1 >> b.label;
    require(!is.fail(), "malformed box line in " + dir.string() + ": " + line);
    inst.boxes.push_back(b);
  }
  inst.description.modality_params = rec.get("desc_modality");
  inst.description.anatomical_structures = rec.get("desc_structures");
  inst.description.signal_characteristics = rec.get("desc_signal");
  inst.description.pathological_findings = rec.get("desc_findings");
  inst.description.diagnostic_impression = rec.get("desc_impression");

  if (rec.has("task")) {
    inst.has_instruction = true;
    InstructionInstance& x = inst.instruction;
    x.task = task_from_string(rec.get("task"));
    x.instruction = rec.get("instruction");
    x.image_ref = inst.id;
    x.target.kind = target_kind_from_string(rec.get("target_kind"));
    switch (x.target.kind) {
      case TargetKind::Image: x.target.image = inst.image; break;
      case TargetKind::Mask: x.target.mask = inst.seg_mask; break;
      case TargetKind::Boxes: x.target.boxes = inst.boxes; break;
      case TargetKind::Text: x.target.text = rec.get("target_text"); break;
    }
    if (x.task == Task::Reconstruction) {
      x.acceleration = std::stoi(rec.get("acceleration"));
      x.degraded_image_ref = inst.id;
      x.degraded = read_array_f32((dir / "degraded.arr").string());
    }
  }
  return inst;
}

std::vector<int> response_token_ids(const InstructionInstance& inst, const Vocabulary& vocab,
                                    int image_size) {
  switch (inst.target.kind) {
    case TargetKind::Text: return vocab.encode(inst.target.text);
    case TargetKind::Boxes: {
      std::vector<int> ids;
      for (const Box& b : inst.target.boxes) {
        const std::vector<int> run = encode_bbox(b, image_size, vocab);
        ids.insert(ids.end(), run.begin(), run.end());
      }
      return ids;
    }
    case TargetKind::Image: return {kImgOpen};
    case TargetKind::Mask: return {kSeg};
  }
  throw SpecError("unknown target kind");
}

std::vector<std::string> required_report_phrases(const CorpusInstance& inst) {
  const std::string anatomy = to_string(inst.metadata.anatomy);
  if (inst.lesion != LesionType::None) {
    const std::string label = lesion_label(inst.lesion);
    return {anatomy, intensity_word(lesion_intensity(inst.metadata.sequence)), label,
            "most consistent with " + label};
  }
  return {anatomy, "normal signal", "no focal abnormality", "no acute abnormality"};
}

}  // namespace forge
