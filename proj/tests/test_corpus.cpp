// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "forge/core/array_io.hpp"
#include "forge/core/rng.hpp"
#include "forge/corpus/corpus.hpp"
#include "forge/corpus/description.hpp"
#include "forge/corpus/fourier.hpp"
#include "forge/corpus/instructions.hpp"
#include "forge/corpus/phantom.hpp"
#include "forge/text/sequence.hpp"
#include "forge/text/vocab.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

MatD test_phantom_image(std::uint64_t seed) {
  const PhantomSpec spec =
      sample_phantom_spec(Anatomy::Knee, Sequence::T2, Orientation::Axial,
                          LesionType::MeniscusTear, seed);
  return generate_phantom(spec).image;
}

double mse(const MatD& a, const MatD& b) { return (a - b).array().square().mean(); }

double psnr_db(const MatD& a, const MatD& b) { return 10.0 * std::log10(1.0 / mse(a, b)); }

fs::path temp_dir(const std::string& tag) {
  return fs::temp_directory_path() / ("forge_test_" + tag + "_" + std::to_string(::getpid()));
}

}  // namespace

TEST_CASE("kspace: constant image concentrates energy at the center bin") {
  const double c = 0.37;
  const MatD img = MatD::Constant(32, 32, c);
  const MatC k = kspace_forward(img);
  CHECK(std::abs(k(16, 16) - std::complex<double>(c * 32 * 32, 0.0)) < 1e-8);
  double off_center = 0.0;
  for (int r = 0; r < 32; ++r)
    for (int cc = 0; cc < 32; ++cc)
      if (r != 16 || cc != 16) off_center = std::max(off_center, std::abs(k(r, cc)));
  CHECK(off_center < 1e-8);
}

TEST_CASE("kspace: inverse(forward(x)) round-trips under 1e-5") {
  const MatD img = test_phantom_image(11);
  const MatC rec = kspace_inverse(kspace_forward(img));
  CHECK((rec.real() - img).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(rec.imag().cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("kspace: Parseval identity on a random phantom") {
  const MatD img = test_phantom_image(12);
  const MatC k = kspace_forward(img);
  const double spatial = img.array().square().sum();
  const double spectral = k.cwiseAbs2().sum() / static_cast<double>(img.size());
  CHECK(std::abs(spatial - spectral) / spatial < 1e-4);
}

TEST_CASE("mask: acceleration 1 keeps every column") {
  const KspaceMask m = make_undersampling_mask(64, 1, 0.125, 5);
  CHECK(m.kept_count() == 64);
}

TEST_CASE("mask: width 64 center_fraction 0.125 always keeps columns 28..35") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const KspaceMask m = make_undersampling_mask(64, 4, 0.125, seed);
    for (int c = 28; c <= 35; ++c) CHECK(m.kept_columns[static_cast<std::size_t>(c)]);
  }
}

TEST_CASE("mask: kept density within 15% of 1/acceleration across the grid") {
  struct Case {
    int width, accel;
    double cf;
  };
  const Case grid[] = {{64, 2, 0.125},  {64, 4, 0.125}, {64, 6, 0.125}, {64, 8, 0.0625},
                       {128, 4, 0.125}, {128, 6, 0.08}, {96, 3, 0.1},   {64, 3, 0.125}};
  for (const Case& c : grid) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const KspaceMask m = make_undersampling_mask(c.width, c.accel, c.cf, seed);
      const double target = 1.0 / c.accel;
      CHECK(std::abs(m.density() - target) <= 0.15 * target);
    }
  }
}

TEST_CASE("mask: Monte Carlo mean density at 4x is within [0.22, 0.28]") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    total += make_undersampling_mask(64, 4, 0.125, seed).density();
  const double mean = total / 1000.0;
  CHECK(mean >= 0.22);
  CHECK(mean <= 0.28);
}

TEST_CASE("mask: center band exceeding the sampling budget is rejected") {
  CHECK_THROWS_AS(make_undersampling_mask(64, 8, 0.125, 1), SpecError);
  CHECK_THROWS_AS(make_undersampling_mask(64, 16, 0.25, 1), SpecError);
  CHECK_THROWS_AS(make_undersampling_mask(64, 4, 0.0, 1), SpecError);
  CHECK_THROWS_AS(make_undersampling_mask(64, 0, 0.125, 1), SpecError);
}

TEST_CASE("zero_fill: full mask reproduces the input within 1e-5") {
  const MatD img = test_phantom_image(13);
  const KspaceMask full = make_undersampling_mask(64, 1, 0.125, 0);
  const MatD out = undersample_zero_fill(img, full);
  CHECK((out - img).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("zero_fill: 6x degrades PSNR strictly below 2x on the same phantom") {
  const MatD img = test_phantom_image(14);
  const MatD deg2 = undersample_zero_fill(img, make_undersampling_mask(64, 2, 0.125, 99));
  const MatD deg6 = undersample_zero_fill(img, make_undersampling_mask(64, 6, 0.125, 99));
  CHECK(psnr_db(deg6, img) < psnr_db(deg2, img));
}

TEST_CASE("zero_fill: center-band-only mask is a low-pass image") {
  const MatD img = test_phantom_image(15);
  KspaceMask center_only;
  center_only.width = 64;
  center_only.acceleration = 8;
  center_only.center_fraction = 0.125;
  center_only.kept_columns.assign(64, false);
  for (int c = 28; c <= 35; ++c) center_only.kept_columns[static_cast<std::size_t>(c)] = true;

  // The retained spectrum has exactly zero energy outside the band.
  const MatC masked = undersampled_kspace(img, center_only);
  double out_band = 0.0, total = 0.0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      const double e = std::norm(masked(r, c));
      total += e;
      if (c < 28 || c > 35) out_band += e;
    }
  CHECK(out_band < 1e-6 * total);

  // The magnitude image is nonlinear in the spectrum, so it only stays
  // approximately band-limited; it must still be strongly low-pass.
  const MatC spec_of_out = kspace_forward(undersample_zero_fill(img, center_only));
  double out_band2 = 0.0, total2 = 0.0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      const double e = std::norm(spec_of_out(r, c));
      total2 += e;
      if (c < 28 || c > 35) out_band2 += e;
    }
  CHECK(out_band2 < 1e-2 * total2);
}

TEST_CASE("phantom: identical specs render bit-identical instances") {
  const PhantomSpec spec = sample_phantom_spec(Anatomy::Brain, Sequence::Flair,
                                               Orientation::Coronal, LesionType::Glioma, 42);
  const PhantomInstance a = generate_phantom(spec);
  const PhantomInstance b = generate_phantom(spec);
  CHECK((a.image.array() == b.image.array()).all());
  CHECK((a.seg_mask.array() == b.seg_mask.array()).all());
  REQUIRE(a.boxes.size() == b.boxes.size());
  CHECK(a.boxes[0].x0 == b.boxes[0].x0);
  CHECK(a.diagnosis == b.diagnosis);
}

TEST_CASE("phantom: lesion-free specs have empty boxes and the clean diagnosis") {
  const PhantomSpec spec = sample_phantom_spec(Anatomy::Prostate, Sequence::T1,
                                               Orientation::Axial, LesionType::None, 3);
  const PhantomInstance inst = generate_phantom(spec);
  CHECK(inst.boxes.empty());
  CHECK(inst.diagnosis == "no acute abnormality");
}

TEST_CASE("phantom: seed 7 knee T2 meniscus tear matches the oracle rasterization") {
  const PhantomSpec spec = sample_phantom_spec(Anatomy::Knee, Sequence::T2, Orientation::Axial,
                                               LesionType::MeniscusTear, 7);
  REQUIRE(spec.lesion.has_value());
  const PhantomInstance inst = generate_phantom(spec);

  // Independent rasterizer: count pixel centers inside the lesion ellipse.
  const Ellipse& le = spec.lesion->first;
  int oracle = 0;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const double dx = (x + 0.5) - le.cx, dy = (y + 0.5) - le.cy;
      const double c = std::cos(le.rot), s = std::sin(le.rot);
      const double u = (c * dx + s * dy) / le.ax;
      const double v = (-s * dx + c * dy) / le.ay;
      if (u * u + v * v <= 1.0) ++oracle;
    }
  CHECK(oracle > 0);
  CHECK((inst.seg_mask.array() == kLesionClass).count() == oracle);
}

TEST_CASE("phantom: out-of-range geometry is rejected with a diagnostic") {
  PhantomSpec spec = sample_phantom_spec(Anatomy::Breast, Sequence::Pd, Orientation::Axial,
                                         LesionType::None, 9);
  SUBCASE("ellipse center outside bounds") {
    spec.ellipses[0].cx = 70.0;
    CHECK_THROWS_WITH_AS(generate_phantom(spec),
                         doctest::Contains("outside image bounds"), SpecError);
  }
  SUBCASE("tissue count out of range") {
    spec.num_tissues = 6;
    CHECK_THROWS_AS(generate_phantom(spec), SpecError);
  }
  SUBCASE("missing tissue class") {
    for (Ellipse& e : spec.ellipses) e.tissue_class = 1;
    CHECK_THROWS_WITH_AS(generate_phantom(spec), doctest::Contains("missing tissue class"),
                         SpecError);
  }
  SUBCASE("lesion not overlapping tissue") {
    PhantomSpec with_lesion = sample_phantom_spec(Anatomy::Breast, Sequence::Pd,
                                                  Orientation::Axial, LesionType::SmallCyst, 9);
    REQUIRE(with_lesion.lesion.has_value());
    with_lesion.lesion->first.cx = 2.0;
    with_lesion.lesion->first.cy = 2.0;
    CHECK_THROWS_WITH_AS(generate_phantom(with_lesion),
                         doctest::Contains("overlap"), SpecError);
  }
}

TEST_CASE("phantom: lesion polarity follows the sequence") {
  auto lesion_mean = [](Sequence seq) {
    const PhantomSpec spec =
        sample_phantom_spec(Anatomy::Brain, seq, Orientation::Axial, LesionType::Glioma, 21);
    const PhantomInstance inst = generate_phantom(spec);
    double sum = 0.0;
    int n = 0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (inst.seg_mask(y, x) == kLesionClass) {
          sum += inst.image(y, x);
          ++n;
        }
    REQUIRE(n > 0);
    return sum / n;
  };
  CHECK(lesion_mean(Sequence::T2) > 0.75);     // hyperintense
  CHECK(lesion_mean(Sequence::Flair) > 0.75);  // hyperintense
  CHECK(lesion_mean(Sequence::T1) < 0.25);     // hypointense
}

TEST_CASE("phantom: boxes tightly bound the lesion pixels") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    const PhantomSpec spec = sample_phantom_spec(Anatomy::Cardiac, Sequence::T2,
                                                 Orientation::Sagittal,
                                                 LesionType::MyocardialInfarction, seed);
    const PhantomInstance inst = generate_phantom(spec);
    REQUIRE(inst.boxes.size() == 1);
    int min_x = 64, min_y = 64, max_x = -1, max_y = -1;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (inst.seg_mask(y, x) == kLesionClass) {
          min_x = std::min(min_x, x);
          min_y = std::min(min_y, y);
          max_x = std::max(max_x, x);
          max_y = std::max(max_y, y);
        }
    const Box& b = inst.boxes[0];
    CHECK(b.x0 == static_cast<double>(min_x));
    CHECK(b.y0 == static_cast<double>(min_y));
    CHECK(b.x1 == static_cast<double>(max_x + 1));
    CHECK(b.y1 == static_cast<double>(max_y + 1));
    CHECK(b.label == "myocardial_infarction");
  }
}

TEST_CASE("description: depends only on labels, not geometry seeds") {
  const PhantomInstance a = generate_phantom(sample_phantom_spec(
      Anatomy::Knee, Sequence::T2, Orientation::Axial, LesionType::MeniscusTear, 100));
  const PhantomInstance b = generate_phantom(sample_phantom_spec(
      Anatomy::Knee, Sequence::T2, Orientation::Axial, LesionType::MeniscusTear, 2000));
  CHECK(render_description(a).flat() == render_description(b).flat());
}

TEST_CASE("description: knee T2 meniscus tear content") {
  const PhantomInstance inst = generate_phantom(sample_phantom_spec(
      Anatomy::Knee, Sequence::T2, Orientation::Axial, LesionType::MeniscusTear, 5));
  const HierarchicalDescription d = render_description(inst);
  CHECK(d.pathological_findings.find("meniscus tear") != std::string::npos);
  CHECK(d.modality_params.find("T2") != std::string::npos);
  CHECK(!d.modality_params.empty());
  CHECK(!d.anatomical_structures.empty());
  CHECK(!d.signal_characteristics.empty());
  CHECK(!d.pathological_findings.empty());
  CHECK(!d.diagnostic_impression.empty());
  const std::string flat = d.flat();
  for (const char* heading :
       {"Modality and parameters:", "Anatomical structures:", "Signal characteristics:",
        "Pathological findings:", "Diagnostic impression:"})
    CHECK(flat.find(heading) != std::string::npos);
}

TEST_CASE("description: lesion-free wording matches the diagnosis label") {
  const PhantomInstance inst = generate_phantom(sample_phantom_spec(
      Anatomy::Cardiac, Sequence::Pd, Orientation::Axial, LesionType::None, 6));
  const HierarchicalDescription d = render_description(inst);
  CHECK(d.pathological_findings.find("no focal abnormality") != std::string::npos);
  CHECK(d.diagnostic_impression.find("No acute abnormality") != std::string::npos);
}

TEST_CASE("vocab: two builds over the same corpus give identical bijections") {
  const std::vector<std::string> texts = canonical_text_closure();
  const Vocabulary a = Vocabulary::build(texts);
  const Vocabulary b = Vocabulary::build(texts);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) CHECK(a.token(i) == b.token(i));
  CHECK(a.hash() == b.hash());
}

TEST_CASE("vocab: Table 1 template strings round-trip exactly with zero unknowns") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  const std::vector<std::string> table1 = {
      "<img> Reconstruct the image from this under-sampled MRI data.",
      "<img> Segment the cartilage and meniscus in this knee MRI.",
      "<img> Identify and localize any bone marrow edema or meniscus tear in this image.",
      "<img> Provide your diagnosis of this MRI volume.",
      "<img> Generate a diagnostic report based on this MRI scan.",
  };
  for (const std::string& s : table1) {
    const std::vector<int> ids = v.encode(s);
    for (int id : ids) CHECK(id != kUnk);
    CHECK(v.decode(ids) == s);
  }
}

TEST_CASE("vocab: empty text encodes and decodes to empty") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  const std::vector<int> ids = v.encode("");
  CHECK(ids.empty());
  CHECK(v.decode(ids).empty());
}

TEST_CASE("vocab: every rendered description round-trips exactly") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  for (int a = 0; a < kNumAnatomies; ++a)
    for (int s = 0; s < kNumSequences; ++s)
      for (int o = 0; o < kNumOrientations; ++o) {
        const auto anatomy = static_cast<Anatomy>(a);
        const auto [small, large] = lesions_for(anatomy);
        for (LesionType lt : {LesionType::None, small, large}) {
          const PhantomInstance inst = generate_phantom(
              sample_phantom_spec(anatomy, static_cast<Sequence>(s),
                                  static_cast<Orientation>(o), lt, 77));
          const std::string flat = render_description(inst).flat();
          const std::vector<int> ids = v.encode(flat);
          for (int id : ids) CHECK(id != kUnk);
          CHECK(v.decode(ids) == flat);
        }
      }
}

TEST_CASE("vocab: closed vocabulary stays under 2000 entries") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  CHECK(v.size() < 2000);
  CHECK(v.size() > kNumSpecials + kNumBins);
}

TEST_CASE("vocab: save/load round-trips the bijection and the hash") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  const fs::path path = temp_dir("vocab");
  fs::create_directories(path);
  v.save((path / "vocab.txt").string());
  const Vocabulary w = Vocabulary::load((path / "vocab.txt").string());
  REQUIRE(w.size() == v.size());
  for (int i = 0; i < v.size(); ++i) CHECK(w.token(i) == v.token(i));
  CHECK(w.hash() == v.hash());
  fs::remove_all(path);
}

TEST_CASE("bbox: full-image box clips the exclusive edge into bin 63") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  Box b{0, 0, 64, 64, "glioma"};
  const std::vector<int> ids = encode_bbox(b, 64, v);
  REQUIRE(ids.size() == 6);
  CHECK(ids[0] == kBbox);
  CHECK(v.token(ids[1]) == "glioma");
  CHECK(Vocabulary::bin_value(ids[2]) == 0);
  CHECK(Vocabulary::bin_value(ids[3]) == 0);
  CHECK(Vocabulary::bin_value(ids[4]) == 63);
  CHECK(Vocabulary::bin_value(ids[5]) == 63);
}

TEST_CASE("bbox: at size 64 bins equal integer coordinates") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  Box b{16, 16, 48, 48, "breast_mass"};
  const std::vector<int> ids = encode_bbox(b, 64, v);
  CHECK(Vocabulary::bin_value(ids[2]) == 16);
  CHECK(Vocabulary::bin_value(ids[3]) == 16);
  CHECK(Vocabulary::bin_value(ids[4]) == 48);
  CHECK(Vocabulary::bin_value(ids[5]) == 48);
}

TEST_CASE("bbox: 128x128 sweep round-trip error never exceeds one pixel") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  Rng rng(404);
  double max_err = 0.0;
  for (int i = 0; i < 500; ++i) {
    Box b;
    b.x0 = rng.uniform(0.0, 120.0);
    b.y0 = rng.uniform(0.0, 120.0);
    b.x1 = b.x0 + rng.uniform(4.0, 128.0 - b.x0 - 0.001);
    b.y1 = b.y0 + rng.uniform(4.0, 128.0 - b.y0 - 0.001);
    b.label = "prostate_tumor";
    const Box r = decode_bbox(encode_bbox(b, 128, v), 128, v);
    max_err = std::max({max_err, std::abs(r.x0 - b.x0), std::abs(r.y0 - b.y0),
                        std::abs(r.x1 - b.x1), std::abs(r.y1 - b.y1)});
    CHECK(r.label == b.label);
  }
  CHECK(max_err <= 1.0);
}

TEST_CASE("bbox: malformed token runs raise parse errors") {
  const Vocabulary v = Vocabulary::build(canonical_text_closure());
  Box b{8, 8, 24, 24, "small_cyst"};
  std::vector<int> good = encode_bbox(b, 64, v);
  SUBCASE("wrong arity") {
    good.pop_back();
    CHECK_THROWS_AS(decode_bbox(good, 64, v), SpecError);
  }
  SUBCASE("missing marker") {
    good[0] = kSeg;
    CHECK_THROWS_AS(decode_bbox(good, 64, v), SpecError);
  }
  SUBCASE("bin in class slot") {
    good[1] = Vocabulary::bin_id(5);
    CHECK_THROWS_AS(decode_bbox(good, 64, v), SpecError);
  }
  SUBCASE("word in coordinate slot") {
    good[3] = good[1];
    CHECK_THROWS_AS(decode_bbox(good, 64, v), SpecError);
  }
}

TEST_CASE("interleave: layout arithmetic and flags") {
  const std::vector<int> instr(8, 100);
  const std::vector<int> resp(4, 101);
  const MultimodalSequence seq = interleave(16, instr, resp);
  CHECK(seq.length() == 33);
  CHECK(seq.image_slot_count == 16);
  CHECK(seq.token_ids.front() == kBos);
  CHECK(seq.token_ids.back() == kEos);
  int image_positions = 0;
  for (int i = 0; i < seq.length(); ++i) {
    const bool is_slot = seq.token_ids[static_cast<std::size_t>(i)] == kImgSlot;
    const bool is_image = seq.modality_flags[static_cast<std::size_t>(i)] == Modality::Image;
    CHECK(is_slot == is_image);
    image_positions += is_image ? 1 : 0;
  }
  CHECK(image_positions == 16);
  // Slots contiguous between IMG_OPEN and IMG_CLOSE.
  CHECK(seq.token_ids[1] == kImgOpen);
  for (int i = 2; i < 18; ++i) CHECK(seq.token_ids[static_cast<std::size_t>(i)] == kImgSlot);
  CHECK(seq.token_ids[18] == kImgClose);
}

TEST_CASE("interleave: empty response masks only the EOS position") {
  const MultimodalSequence seq = interleave(4, {50, 51}, {});
  int on = 0;
  for (std::size_t i = 0; i < seq.loss_mask.size(); ++i) {
    on += seq.loss_mask[i];
    if (seq.loss_mask[i]) CHECK(seq.token_ids[i] == kEos);
  }
  CHECK(on == 1);
}

TEST_CASE("interleave: loss mask sum equals response length plus one") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(20));
    const std::vector<int> instr(1 + rng.index(10), 100);
    const std::vector<int> resp(rng.index(12), 101);
    const MultimodalSequence seq = interleave(n, instr, resp);
    int on = 0;
    for (std::uint8_t b : seq.loss_mask) on += b;
    CHECK(on == static_cast<int>(resp.size()) + 1);
  }
}

TEST_CASE("interleave: rejects overflow and empty inputs") {
  CHECK_THROWS_AS(interleave(600, {1}, {}), SpecError);
  CHECK_THROWS_AS(interleave(0, {1}, {}), SpecError);
  CHECK_THROWS_AS(interleave(4, {}, {}), SpecError);
  CHECK_NOTHROW(interleave(600, {1}, {}, 1024));
}

TEST_CASE("instructions: diagnosis instruction equals a registered template verbatim") {
  const PhantomInstance inst = generate_phantom(sample_phantom_spec(
      Anatomy::Brain, Sequence::T1, Orientation::Axial, LesionType::Glioma, 8));
  const std::vector<std::string> pool =
      instruction_pool(Task::Diagnosis, Anatomy::Brain, Orientation::Axial);
  CHECK(pool.size() >= 3);
  bool found_table1 = false;
  for (const std::string& t : pool)
    if (t == "<img> Provide your diagnosis of this MRI volume.") found_table1 = true;
  CHECK(found_table1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const InstructionInstance x = build_instruction_instance(inst, Task::Diagnosis, seed);
    CHECK(std::find(pool.begin(), pool.end(), x.instruction) != pool.end());
    CHECK(x.instruction.rfind("<img>", 0) == 0);
  }
}

TEST_CASE("instructions: knee pools contain the Table 1 wordings") {
  const auto seg = instruction_pool(Task::Segmentation, Anatomy::Knee, Orientation::Axial);
  CHECK(seg[0] == "<img> Segment the cartilage and meniscus in this knee MRI.");
  const auto det = instruction_pool(Task::Detection, Anatomy::Knee, Orientation::Axial);
  CHECK(det[0] ==
        "<img> Identify and localize any bone marrow edema or meniscus tear in this image.");
  const auto rec = instruction_pool(Task::Reconstruction, Anatomy::Knee, Orientation::Axial);
  CHECK(rec[0] == "<img> Reconstruct the image from this under-sampled MRI data.");
  const auto rep = instruction_pool(Task::Report, Anatomy::Knee, Orientation::Axial);
  CHECK(rep[0] == "<img> Generate a diagnostic report based on this MRI scan.");
}

TEST_CASE("instructions: reconstruction populates the degraded input and image target") {
  const PhantomInstance inst = generate_phantom(sample_phantom_spec(
      Anatomy::Knee, Sequence::Pd, Orientation::Coronal, LesionType::None, 31));
  const InstructionInstance x = build_instruction_instance(inst, Task::Reconstruction, 5);
  CHECK(x.target.kind == TargetKind::Image);
  CHECK(x.degraded.rows() == 64);
  CHECK((x.acceleration == 2 || x.acceleration == 4 || x.acceleration == 6));
  CHECK((x.target.image.array() == inst.image.array()).all());
  const InstructionInstance forced = build_instruction_instance(inst, Task::Reconstruction, 5, 4);
  CHECK(forced.acceleration == 4);
}

TEST_CASE("instructions: detection on a lesion-free phantom degenerates to text") {
  const PhantomInstance inst = generate_phantom(sample_phantom_spec(
      Anatomy::Breast, Sequence::T2, Orientation::Axial, LesionType::None, 17));
  const InstructionInstance x = build_instruction_instance(inst, Task::Detection, 2);
  CHECK(x.target.kind == TargetKind::Text);
  CHECK(x.target.text == "no abnormality detected");

  const PhantomInstance lesioned = generate_phantom(sample_phantom_spec(
      Anatomy::Breast, Sequence::T2, Orientation::Axial, LesionType::BreastMass, 18));
  const InstructionInstance y = build_instruction_instance(lesioned, Task::Detection, 2);
  CHECK(y.target.kind == TargetKind::Boxes);
  REQUIRE(y.target.boxes.size() == 1);
}

TEST_CASE("corpus: build, manifest round trip, determinism, loader") {
  CorpusConfig cfg;
  cfg.image_only_count = 10;
  cfg.paired_count = 10;
  cfg.instruction_count = 25;
  cfg.eval_per_task = 2;
  const fs::path dir_a = temp_dir("corpus_a");
  const fs::path dir_b = temp_dir("corpus_b");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  const StageManifest m = build_corpus(cfg, dir_a.string(), 321);
  CHECK(m.image_only_ids.size() == 10);
  CHECK(m.paired_ids.size() == 10);
  CHECK(m.instruction_ids.size() == 25);
  CHECK(m.eval_ids.size() == 10);

  SUBCASE("stage weights equal Table 2") {
    CHECK(m.weights.at(Stage::VisionPretrain).image_only == 1.0);
    CHECK(m.weights.at(Stage::VisionPretrain).paired == 0.0);
    CHECK(m.weights.at(Stage::Alignment).paired == 1.0);
    CHECK(m.weights.at(Stage::VLPretrain).paired == 0.8);
    CHECK(m.weights.at(Stage::VLPretrain).instruction == 0.2);
    CHECK(m.weights.at(Stage::InstructionTune).instruction == 1.0);
  }

  SUBCASE("manifest file round-trips") {
    const StageManifest r = load_manifest((dir_a / "manifest.txt").string());
    CHECK(r.image_only_ids == m.image_only_ids);
    CHECK(r.paired_ids == m.paired_ids);
    CHECK(r.instruction_ids == m.instruction_ids);
    CHECK(r.eval_ids == m.eval_ids);
    CHECK(r.seed == 321);
    CHECK(r.weights.at(Stage::VLPretrain).paired == 0.8);
  }

  SUBCASE("rebuild is byte-identical") {
    build_corpus(cfg, dir_b.string(), 321);
    CHECK(read_text_file(dir_a / "manifest.txt") == read_text_file(dir_b / "manifest.txt"));
    CHECK(read_text_file(dir_a / "vocab.txt") == read_text_file(dir_b / "vocab.txt"));
    const std::string id = m.instruction_ids.front();
    CHECK(fnv1a_file(dir_a / id / "image.arr") == fnv1a_file(dir_b / id / "image.arr"));
    CHECK(read_text_file(dir_a / id / "record.txt") ==
          read_text_file(dir_b / id / "record.txt"));
  }

  SUBCASE("loader restores instances faithfully") {
    const Vocabulary vocab = Vocabulary::load((dir_a / "vocab.txt").string());
    for (const std::string& id : m.instruction_ids) {
      const CorpusInstance inst = load_instance(dir_a.string(), id);
      CHECK(inst.id == id);
      CHECK(inst.has_instruction);
      CHECK(inst.instruction.instruction.rfind("<img>", 0) == 0);
      CHECK(inst.image.rows() == 64);
      CHECK(inst.seg_mask.rows() == 64);
      // Description fields round-trip through the record and the vocab.
      const std::string flat = inst.description.flat();
      CHECK(vocab.decode(vocab.encode(flat)) == flat);
      const std::vector<int> resp = response_token_ids(inst.instruction, vocab, 64);
      CHECK(!resp.empty());
      if (inst.instruction.target.kind == TargetKind::Image) {
        CHECK(resp == std::vector<int>{kImgOpen});
        CHECK(inst.instruction.degraded.rows() == 64);
      }
      if (inst.instruction.target.kind == TargetKind::Mask)
        CHECK(resp == std::vector<int>{kSeg});
    }
    for (const std::string& id : m.eval_ids) {
      const CorpusInstance inst = load_instance(dir_a.string(), id);
      CHECK(inst.has_instruction);
      if (inst.instruction.task == Task::Reconstruction)
        CHECK(inst.instruction.acceleration == 4);
      if (inst.instruction.task == Task::Detection) CHECK(inst.lesion != LesionType::None);
    }
  }

  SUBCASE("eval ids are disjoint from training ids") {
    std::set<std::string> train(m.image_only_ids.begin(), m.image_only_ids.end());
    train.insert(m.paired_ids.begin(), m.paired_ids.end());
    train.insert(m.instruction_ids.begin(), m.instruction_ids.end());
    for (const std::string& id : m.eval_ids) CHECK(train.count(id) == 0);
  }

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("corpus: stage sampler ratios match Table 2 within 2% over 10k draws") {
  StageManifest m;
  for (Stage s : all_stages()) m.weights[s] = stage_weights(s);
  for (int i = 0; i < 40; ++i) m.image_only_ids.push_back("io_" + std::to_string(i));
  for (int i = 0; i < 40; ++i) m.paired_ids.push_back("pr_" + std::to_string(i));
  for (int i = 0; i < 40; ++i) m.instruction_ids.push_back("in_" + std::to_string(i));

  auto fraction = [&](Stage stage, const std::string& prefix) {
    const std::vector<std::string> draws = stage_sampler(m, stage, 99, 10000);
    int hits = 0;
    for (const std::string& id : draws)
      if (id.rfind(prefix, 0) == 0) ++hits;
    return hits / 10000.0;
  };
  CHECK(fraction(Stage::VisionPretrain, "io_") == 1.0);
  CHECK(fraction(Stage::Alignment, "pr_") == 1.0);
  const double vl_paired = fraction(Stage::VLPretrain, "pr_");
  CHECK(vl_paired > 0.78);
  CHECK(vl_paired < 0.82);
  CHECK(fraction(Stage::InstructionTune, "in_") == 1.0);

  SUBCASE("empty required category is rejected") {
    StageManifest bad = m;
    bad.paired_ids.clear();
    CHECK_THROWS_AS(stage_sampler(bad, Stage::Alignment, 1, 10), SpecError);
  }
}

TEST_CASE("corpus: uniform within category") {
  StageManifest m;
  for (Stage s : all_stages()) m.weights[s] = stage_weights(s);
  for (int i = 0; i < 8; ++i) m.image_only_ids.push_back("io_" + std::to_string(i));
  m.paired_ids.push_back("pr_0");
  m.instruction_ids.push_back("in_0");
  std::map<std::string, int> counts;
  for (const std::string& id : stage_sampler(m, Stage::VisionPretrain, 5, 8000)) ++counts[id];
  for (const auto& [id, n] : counts) CHECK(std::abs(n - 1000) < 150);
  CHECK(counts.size() == 8);
}
