// SPDX-License-Identifier: Apache-2.0
#include "forge/corpus/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "forge/core/rng.hpp"

namespace forge {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct LayoutEllipse {
  double fx, fy;  // center as fraction of width/height
  double fax, fay;  // semi-axes as fraction of min(h, w)
  double rot;
  int tissue_class;
};

struct AnatomyLayout {
  int num_tissues;
  std::vector<std::string> tissues;
  std::vector<LayoutEllipse> ellipses;
  int lesion_host_class;  // tissue class the lesion is seeded inside
};

const AnatomyLayout& layout_for(Anatomy a) {
  static const AnatomyLayout brain{
      4,
      {"cortex", "white matter", "ventricles", "thalamus"},
      {{0.50, 0.50, 0.400, 0.340, 0.00, 1},
       {0.50, 0.50, 0.300, 0.240, 0.00, 2},
       {0.455, 0.46, 0.055, 0.115, 0.20, 3},
       {0.545, 0.46, 0.055, 0.115, -0.20, 3},
       {0.50, 0.625, 0.105, 0.060, 0.00, 4}},
      2};
  static const AnatomyLayout knee{
      4,
      {"femur", "tibia", "cartilage", "meniscus"},
      {{0.50, 0.26, 0.270, 0.170, 0.00, 1},
       {0.50, 0.78, 0.290, 0.155, 0.00, 2},
       {0.50, 0.47, 0.250, 0.048, 0.00, 3},
       {0.315, 0.565, 0.068, 0.046, 0.15, 4},
       {0.685, 0.565, 0.068, 0.046, -0.15, 4}},
      1};
  static const AnatomyLayout prostate{
      3,
      {"peripheral zone", "transition zone", "urethra"},
      {{0.50, 0.55, 0.360, 0.270, 0.00, 1},
       {0.50, 0.47, 0.215, 0.155, 0.00, 2},
       {0.50, 0.52, 0.036, 0.036, 0.00, 3}},
      1};
  static const AnatomyLayout breast{
      3,
      {"adipose tissue", "fibroglandular tissue", "pectoral muscle"},
      {{0.50, 0.46, 0.410, 0.330, 0.00, 1},
       {0.455, 0.50, 0.215, 0.155, 0.40, 2},
       {0.50, 0.875, 0.350, 0.085, 0.00, 3}},
      2};
  static const AnatomyLayout cardiac{
      5,
      {"myocardium", "left ventricle", "right ventricle", "left atrium", "aorta"},
      {{0.46, 0.50, 0.255, 0.215, 0.10, 1},
       {0.46, 0.50, 0.135, 0.108, 0.10, 2},
       {0.695, 0.44, 0.095, 0.135, -0.30, 3},
       {0.405, 0.755, 0.100, 0.068, 0.00, 4},
       {0.625, 0.205, 0.058, 0.058, 0.00, 5}},
      1};
  switch (a) {
    case Anatomy::Brain: return brain;
    case Anatomy::Knee: return knee;
    case Anatomy::Prostate: return prostate;
    case Anatomy::Breast: return breast;
    case Anatomy::Cardiac: return cardiac;
  }
  throw SpecError("unknown anatomy");
}

// Per-sequence intensity for tissue classes 1..5; index 0 unused.
// Values chosen so every sequence separates the tissues it highlights.
double lut(Sequence s, int cls) {
  static const std::array<std::array<double, kMaxTissues + 1>, kNumSequences> t = {{
      // class:      1     2     3     4     5
      /* T1    */ {{0.0, 0.55, 0.80, 0.15, 0.65, 0.45}},
      /* T2    */ {{0.0, 0.60, 0.40, 0.95, 0.50, 0.75}},
      /* FLAIR */ {{0.0, 0.55, 0.45, 0.10, 0.60, 0.70}},
      /* PD    */ {{0.0, 0.70, 0.60, 0.80, 0.55, 0.50}},
  }};
  return t[static_cast<int>(s)][cls];
}

double lesion_lut(Sequence s) {
  switch (s) {
    case Sequence::T1: return 0.08;     // hypointense
    case Sequence::T2: return 0.97;     // hyperintense
    case Sequence::Flair: return 0.92;  // hyperintense
    case Sequence::Pd: return 0.88;     // hyperintense
  }
  throw SpecError("unknown sequence");
}

LayoutEllipse apply_orientation(LayoutEllipse e, Orientation o) {
  switch (o) {
    case Orientation::Axial:
      return e;
    case Orientation::Sagittal: {
      // Rotate the whole layout a quarter turn about the image center.
      LayoutEllipse r = e;
      r.fx = e.fy;
      r.fy = 1.0 - e.fx;
      r.rot = e.rot + kPi / 2.0;
      return r;
    }
    case Orientation::Coronal: {
      // Mirror horizontally and shift toward the top edge.
      LayoutEllipse r = e;
      r.fx = 1.0 - e.fx;
      r.fy = e.fy - 0.04;
      r.rot = -e.rot;
      return r;
    }
  }
  throw SpecError("unknown orientation");
}

}  // namespace

bool Ellipse::contains(double x, double y) const {
  const double dx = x - cx, dy = y - cy;
  const double c = std::cos(rot), s = std::sin(rot);
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  const double nu = u / ax, nv = v / ay;
  return nu * nu + nv * nv <= 1.0;
}

std::string to_string(Anatomy a) {
  switch (a) {
    case Anatomy::Brain: return "brain";
    case Anatomy::Knee: return "knee";
    case Anatomy::Prostate: return "prostate";
    case Anatomy::Breast: return "breast";
    case Anatomy::Cardiac: return "cardiac";
  }
  throw SpecError("unknown anatomy");
}

std::string to_string(Sequence s) {
  switch (s) {
    case Sequence::T1: return "T1";
    case Sequence::T2: return "T2";
    case Sequence::Flair: return "FLAIR";
    case Sequence::Pd: return "PD";
  }
  throw SpecError("unknown sequence");
}

std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::Axial: return "axial";
    case Orientation::Sagittal: return "sagittal";
    case Orientation::Coronal: return "coronal";
  }
  throw SpecError("unknown orientation");
}

Anatomy anatomy_from_string(const std::string& s) {
  for (int i = 0; i < kNumAnatomies; ++i)
    if (to_string(static_cast<Anatomy>(i)) == s) return static_cast<Anatomy>(i);
  throw SpecError("unknown anatomy: " + s);
}

Sequence sequence_from_string(const std::string& s) {
  for (int i = 0; i < kNumSequences; ++i)
    if (to_string(static_cast<Sequence>(i)) == s) return static_cast<Sequence>(i);
  throw SpecError("unknown sequence: " + s);
}

Orientation orientation_from_string(const std::string& s) {
  for (int i = 0; i < kNumOrientations; ++i)
    if (to_string(static_cast<Orientation>(i)) == s) return static_cast<Orientation>(i);
  throw SpecError("unknown orientation: " + s);
}

std::string lesion_label(LesionType t) {
  switch (t) {
    case LesionType::None: return "none";
    case LesionType::LacunarInfarct: return "lacunar infarct";
    case LesionType::Glioma: return "glioma";
    case LesionType::MeniscusTear: return "meniscus tear";
    case LesionType::BoneMarrowEdema: return "bone marrow edema";
    case LesionType::FocalProstatitis: return "focal prostatitis";
    case LesionType::ProstateTumor: return "prostate tumor";
    case LesionType::SmallCyst: return "small cyst";
    case LesionType::BreastMass: return "breast mass";
    case LesionType::FocalFibrosis: return "focal fibrosis";
    case LesionType::MyocardialInfarction: return "myocardial infarction";
  }
  throw SpecError("unknown lesion type");
}

std::string lesion_token(LesionType t) {
  std::string s = lesion_label(t);
  std::replace(s.begin(), s.end(), ' ', '_');
  return s;
}

LesionType lesion_from_token(const std::string& token) {
  for (int i = 1; i <= 10; ++i) {
    const auto t = static_cast<LesionType>(i);
    if (lesion_token(t) == token) return t;
  }
  throw SpecError("unknown lesion token: " + token);
}

bool lesion_is_large(LesionType t) {
  switch (t) {
    case LesionType::Glioma:
    case LesionType::BoneMarrowEdema:
    case LesionType::ProstateTumor:
    case LesionType::BreastMass:
    case LesionType::MyocardialInfarction:
      return true;
    default:
      return false;
  }
}

Anatomy lesion_anatomy(LesionType t) {
  switch (t) {
    case LesionType::LacunarInfarct:
    case LesionType::Glioma: return Anatomy::Brain;
    case LesionType::MeniscusTear:
    case LesionType::BoneMarrowEdema: return Anatomy::Knee;
    case LesionType::FocalProstatitis:
    case LesionType::ProstateTumor: return Anatomy::Prostate;
    case LesionType::SmallCyst:
    case LesionType::BreastMass: return Anatomy::Breast;
    case LesionType::FocalFibrosis:
    case LesionType::MyocardialInfarction: return Anatomy::Cardiac;
    case LesionType::None: break;
  }
  throw SpecError("lesion type has no anatomy");
}

std::pair<LesionType, LesionType> lesions_for(Anatomy a) {
  switch (a) {
    case Anatomy::Brain: return {LesionType::LacunarInfarct, LesionType::Glioma};
    case Anatomy::Knee: return {LesionType::MeniscusTear, LesionType::BoneMarrowEdema};
    case Anatomy::Prostate: return {LesionType::FocalProstatitis, LesionType::ProstateTumor};
    case Anatomy::Breast: return {LesionType::SmallCyst, LesionType::BreastMass};
    case Anatomy::Cardiac: return {LesionType::FocalFibrosis, LesionType::MyocardialInfarction};
  }
  throw SpecError("unknown anatomy");
}

std::string diagnosis_label(LesionType t) {
  return t == LesionType::None ? std::string("no acute abnormality") : lesion_label(t);
}

const std::vector<std::string>& all_diagnosis_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> v;
    v.push_back(diagnosis_label(LesionType::None));
    for (int i = 1; i <= 10; ++i) v.push_back(diagnosis_label(static_cast<LesionType>(i)));
    return v;
  }();
  return labels;
}

int PhantomMetadata::triple_id() const {
  return (static_cast<int>(anatomy) * kNumSequences + static_cast<int>(sequence)) *
             kNumOrientations +
         static_cast<int>(orientation);
}

const std::vector<std::string>& tissue_names(Anatomy a) { return layout_for(a).tissues; }

int default_num_tissues(Anatomy a) { return layout_for(a).num_tissues; }

double tissue_intensity(Sequence s, int tissue_class) {
  require(tissue_class >= 1 && tissue_class <= kMaxTissues, "tissue class out of range");
  return lut(s, tissue_class);
}

double lesion_intensity(Sequence s) { return lesion_lut(s); }

double background_intensity() { return 0.05; }

std::string intensity_word(double value) {
  if (value >= 0.75) return "hyperintense";
  if (value >= 0.50) return "intermediate";
  if (value >= 0.25) return "hypointense";
  return "markedly hypointense";
}

PhantomSpec sample_phantom_spec(Anatomy anatomy, Sequence sequence, Orientation orientation,
                                LesionType lesion, std::uint64_t seed, int height, int width) {
  require(height >= 16 && width >= 16, "phantom size too small");
  if (lesion != LesionType::None)
    require(lesion_anatomy(lesion) == anatomy, "lesion type does not match anatomy");

  const AnatomyLayout& base = layout_for(anatomy);
  Rng rng(hash_seed(seed, "phantom-spec"));

  PhantomSpec spec;
  spec.seed = seed;
  spec.anatomy = anatomy;
  spec.sequence = sequence;
  spec.orientation = orientation;
  spec.height = height;
  spec.width = width;
  spec.num_tissues = base.num_tissues;

  const double scale = std::min(height, width);
  const double global_scale = rng.uniform(0.90, 1.06);
  const double global_rot = rng.uniform(-0.12, 0.12);
  const double cg = std::cos(global_rot), sg = std::sin(global_rot);

  for (const LayoutEllipse& le : base.ellipses) {
    const LayoutEllipse oe = apply_orientation(le, orientation);
    // Jitter, then rotate the center about the image center by global_rot.
    double fx = oe.fx + rng.uniform(-0.02, 0.02);
    double fy = oe.fy + rng.uniform(-0.02, 0.02);
    const double rx = (fx - 0.5) * global_scale, ry = (fy - 0.5) * global_scale;
    fx = 0.5 + cg * rx - sg * ry;
    fy = 0.5 + sg * rx + cg * ry;

    Ellipse e;
    e.cx = fx * width;
    e.cy = fy * height;
    e.ax = std::max(1.0, oe.fax * scale * global_scale * rng.uniform(0.90, 1.10));
    e.ay = std::max(1.0, oe.fay * scale * global_scale * rng.uniform(0.90, 1.10));
    e.rot = oe.rot + global_rot + rng.uniform(-0.10, 0.10);
    e.tissue_class = le.tissue_class;
    spec.ellipses.push_back(e);
  }

  if (lesion != LesionType::None) {
    // Seed the lesion inside the host tissue's first ellipse so it always
    // overlaps tissue; jitter keeps it off-center but well inside.
    const Ellipse* host = nullptr;
    for (const Ellipse& e : spec.ellipses)
      if (e.tissue_class == base.lesion_host_class) { host = &e; break; }
    require(host != nullptr, "layout lacks lesion host tissue");

    const bool large = lesion_is_large(lesion);
    const double lo = large ? 0.10 : 0.040;
    const double hi = large ? 0.16 : 0.068;
    Ellipse le;
    le.ax = scale * rng.uniform(lo, hi);
    le.ay = scale * rng.uniform(lo, hi);
    le.rot = rng.uniform(0.0, kPi);
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const double rad = rng.uniform(0.0, 0.45);
    le.cx = host->cx + std::cos(theta) * rad * host->ax;
    le.cy = host->cy + std::sin(theta) * rad * host->ay;
    le.tissue_class = kLesionClass;
    spec.lesion = {le, lesion};
  }
  return spec;
}

PhantomInstance generate_phantom(const PhantomSpec& spec) {
  require(spec.height >= 16 && spec.width >= 16, "phantom size too small");
  require(spec.num_tissues >= 3 && spec.num_tissues <= kMaxTissues,
          "num_tissues must be in [3, 5]");
  require(!spec.ellipses.empty(), "spec has no tissue ellipses");

  std::vector<bool> seen(static_cast<std::size_t>(spec.num_tissues) + 1, false);
  for (const Ellipse& e : spec.ellipses) {
    require(e.tissue_class >= 1 && e.tissue_class <= spec.num_tissues,
            "ellipse tissue class out of range");
    require(e.ax > 0.0 && e.ay > 0.0, "ellipse semi-axes must be positive");
    require(e.cx >= 0.0 && e.cx < spec.width && e.cy >= 0.0 && e.cy < spec.height,
            "ellipse center outside image bounds");
    seen[static_cast<std::size_t>(e.tissue_class)] = true;
  }
  for (int c = 1; c <= spec.num_tissues; ++c)
    require(seen[static_cast<std::size_t>(c)], "missing tissue class " + std::to_string(c));

  PhantomInstance out;
  out.spec = spec;
  out.metadata.anatomy = spec.anatomy;
  out.metadata.sequence = spec.sequence;
  out.metadata.orientation = spec.orientation;
  // Field strength is a label, not geometry: tie it to anatomy so that
  // descriptions depend only on labels (brain/prostate/cardiac protocols
  // run at 3T here, knee/breast at 1.5T).
  switch (spec.anatomy) {
    case Anatomy::Knee:
    case Anatomy::Breast: out.metadata.field_strength = "1.5T"; break;
    default: out.metadata.field_strength = "3T"; break;
  }

  const int h = spec.height, w = spec.width;
  out.seg_mask = MatI::Zero(h, w);
  out.image = MatD::Constant(h, w, background_intensity());

  // Paint tissue ellipses in order; later ellipses overwrite earlier ones.
  for (const Ellipse& e : spec.ellipses) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (e.contains(x + 0.5, y + 0.5)) {
          out.seg_mask(y, x) = e.tissue_class;
          out.image(y, x) = tissue_intensity(spec.sequence, e.tissue_class);
        }
  }

  out.diagnosis = diagnosis_label(LesionType::None);
  if (spec.lesion) {
    const Ellipse& le = spec.lesion->first;
    const LesionType type = spec.lesion->second;
    require(type != LesionType::None, "lesion ellipse present but type is None");
    require(le.ax > 0.0 && le.ay > 0.0, "lesion semi-axes must be positive");

    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    bool touches_tissue = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (le.contains(x + 0.5, y + 0.5)) {
          if (out.seg_mask(y, x) > 0) touches_tissue = true;
          out.seg_mask(y, x) = kLesionClass;
          out.image(y, x) = lesion_intensity(spec.sequence);
          min_x = std::min(min_x, x);
          min_y = std::min(min_y, y);
          max_x = std::max(max_x, x);
          max_y = std::max(max_y, y);
        }
    require(max_x >= 0, "lesion ellipse rasterizes to zero pixels");
    require(touches_tissue, "lesion does not overlap any tissue ellipse");

    Box box;
    box.x0 = min_x;
    box.y0 = min_y;
    box.x1 = max_x + 1;
    box.y1 = max_y + 1;
    box.label = lesion_token(type);
    out.boxes.push_back(box);
    out.diagnosis = diagnosis_label(type);
  }

  // Additive Gaussian noise, then clamp to [0, 1].
  Rng noise(hash_seed(spec.seed, "phantom-noise"));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.image(y, x) = std::clamp(out.image(y, x) + 0.01 * noise.normal(), 0.0, 1.0);

  return out;
}

}  // namespace forge
