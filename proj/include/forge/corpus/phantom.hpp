// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forge/core/common.hpp"

namespace forge {

enum class Anatomy { Brain, Knee, Prostate, Breast, Cardiac };
enum class Sequence { T1, T2, Flair, Pd };
enum class Orientation { Axial, Sagittal, Coronal };

/// Lesion kinds, two per anatomy: one small focal type, one large mass-like
/// type. The visual size class is what makes them distinguishable.
enum class LesionType {
  None,
  LacunarInfarct,   // brain, small
  Glioma,           // brain, large
  MeniscusTear,     // knee, small
  BoneMarrowEdema,  // knee, large
  FocalProstatitis, // prostate, small
  ProstateTumor,    // prostate, large
  SmallCyst,        // breast, small
  BreastMass,       // breast, large
  FocalFibrosis,    // cardiac, small
  MyocardialInfarction,  // cardiac, large
};

constexpr int kNumAnatomies = 5;
constexpr int kNumSequences = 4;
constexpr int kNumOrientations = 3;
constexpr int kMaxTissues = 5;
/// Global segmentation class of lesion pixels; tissues use 1..kMaxTissues.
constexpr int kLesionClass = kMaxTissues + 1;
/// Segmentation channels: background + tissues + lesion.
constexpr int kSegClasses = kMaxTissues + 2;

std::string to_string(Anatomy a);
std::string to_string(Sequence s);
std::string to_string(Orientation o);
Anatomy anatomy_from_string(const std::string& s);
Sequence sequence_from_string(const std::string& s);
Orientation orientation_from_string(const std::string& s);

/// Label phrase, e.g. "meniscus tear"; also the diagnosis label.
std::string lesion_label(LesionType t);
/// Token form, e.g. "meniscus_tear"; used as the detection class token.
std::string lesion_token(LesionType t);
LesionType lesion_from_token(const std::string& token);
bool lesion_is_large(LesionType t);
Anatomy lesion_anatomy(LesionType t);
std::pair<LesionType, LesionType> lesions_for(Anatomy a);  // (small, large)

std::string diagnosis_label(LesionType t);  // "no acute abnormality" for None
const std::vector<std::string>& all_diagnosis_labels();

struct Ellipse {
  double cx = 0.0, cy = 0.0;  // pixel coordinates
  double ax = 1.0, ay = 1.0;  // semi-axes in pixels
  double rot = 0.0;           // radians, counter-clockwise
  int tissue_class = 1;       // 1..num_tissues; kLesionClass for lesions

  bool contains(double x, double y) const;
};

struct PhantomSpec {
  std::uint64_t seed = 0;
  Anatomy anatomy = Anatomy::Brain;
  Sequence sequence = Sequence::T1;
  Orientation orientation = Orientation::Axial;
  int height = 64, width = 64;
  int num_tissues = 3;
  std::vector<Ellipse> ellipses;  // tissue ellipses in paint order
  std::optional<std::pair<Ellipse, LesionType>> lesion;
};

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open: [x0,x1) x [y0,y1)
  std::string label;
};

struct PhantomMetadata {
  Anatomy anatomy = Anatomy::Brain;
  Sequence sequence = Sequence::T1;
  Orientation orientation = Orientation::Axial;
  std::string field_strength = "3T";

  /// Dense id of the (anatomy, sequence, orientation) triple, 0..59.
  int triple_id() const;
};

struct PhantomInstance {
  PhantomSpec spec;
  MatD image;     // [h x w] in [0,1]
  MatI seg_mask;  // [h x w]; 0 background, k tissue k, kLesionClass lesion
  std::vector<Box> boxes;
  std::string diagnosis;
  PhantomMetadata metadata;
};

/// Tissue names for descriptions, in class order (size == num_tissues).
const std::vector<std::string>& tissue_names(Anatomy a);
int default_num_tissues(Anatomy a);

/// Fixed per-(sequence, tissue-class) display intensity, in [0,1].
double tissue_intensity(Sequence s, int tissue_class);
double lesion_intensity(Sequence s);
double background_intensity();
/// Radiological intensity word ("hyperintense", ...) for a LUT value.
std::string intensity_word(double value);

/// Draws a randomized but anatomy-plausible spec. Deterministic in arguments.
PhantomSpec sample_phantom_spec(Anatomy anatomy, Sequence sequence, Orientation orientation,
                                LesionType lesion, std::uint64_t seed, int height = 64,
                                int width = 64);

/// Renders a spec into an instance. Deterministic; throws SpecError on
/// out-of-range geometry.
PhantomInstance generate_phantom(const PhantomSpec& spec);

}  // namespace forge
