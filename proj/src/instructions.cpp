// SPDX-License-Identifier: Apache-2.0
#include "forge/corpus/instructions.hpp"

#include "forge/core/rng.hpp"
#include "forge/text/vocab.hpp"

namespace forge {

std::string to_string(Task t) {
  switch (t) {
    case Task::Reconstruction: return "reconstruction";
    case Task::Segmentation: return "segmentation";
    case Task::Detection: return "detection";
    case Task::Diagnosis: return "diagnosis";
    case Task::Report: return "report";
  }
  throw SpecError("unknown task");
}

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::Image: return "image";
    case TargetKind::Mask: return "mask";
    case TargetKind::Boxes: return "boxes";
    case TargetKind::Text: return "text";
  }
  throw SpecError("unknown target kind");
}

Task task_from_string(const std::string& s) {
  for (Task t : all_tasks())
    if (to_string(t) == s) return t;
  throw SpecError("unknown task: " + s);
}

TargetKind target_kind_from_string(const std::string& s) {
  for (int i = 0; i < 4; ++i)
    if (to_string(static_cast<TargetKind>(i)) == s) return static_cast<TargetKind>(i);
  throw SpecError("unknown target kind: " + s);
}

const std::vector<Task>& all_tasks() {
  static const std::vector<Task> tasks = {Task::Reconstruction, Task::Segmentation,
                                          Task::Detection, Task::Diagnosis, Task::Report};
  return tasks;
}

std::vector<std::string> instruction_pool(Task task, Anatomy anatomy, Orientation orientation) {
  const std::string marker = special_surface(kImgOpen) + " ";
  const std::string anat = to_string(anatomy);
  const std::string orient = to_string(orientation);
  const std::vector<std::string>& tissues = tissue_names(anatomy);
  const auto [small_lesion, large_lesion] = lesions_for(anatomy);

  switch (task) {
    case Task::Reconstruction:
      return {marker + "Reconstruct the image from this under-sampled MRI data.",
              marker + "Recover a fully sampled image from this under-sampled " + anat +
                  " acquisition.",
              marker + "Remove the undersampling artifacts and restore this " + anat + " MRI."};
    case Task::Segmentation:
      // Slot rule: the last two tissue names; for the knee this reproduces
      // the Table 1 wording "cartilage and meniscus".
      return {marker + "Segment the " + tissues[tissues.size() - 2] + " and " + tissues.back() +
                  " in this " + anat + " MRI.",
              marker + "Produce a segmentation mask covering every labeled structure in this " +
                  anat + " scan.",
              marker + "Delineate the anatomical structures visible in this " + orient + " " +
                  anat + " image."};
    case Task::Detection:
      return {marker + "Identify and localize any " + lesion_label(large_lesion) + " or " +
                  lesion_label(small_lesion) + " in this image.",
              marker + "Mark the bounding box of any abnormality in this " + anat + " MRI.",
              marker + "Find and box any focal lesion present in this scan."};
    case Task::Diagnosis:
      return {marker + "Provide your diagnosis of this MRI volume.",
              marker + "What is the most likely diagnosis for this " + anat + " scan?",
              marker + "State the primary diagnostic finding in this image."};
    case Task::Report:
      return {marker + "Generate a diagnostic report based on this MRI scan.",
              marker + "Write the findings and impression for this " + anat + " MRI.",
              marker + "Summarize this " + orient + " " + anat + " scan as a radiology report."};
  }
  throw SpecError("unknown task");
}

InstructionInstance build_instruction_instance(const PhantomInstance& instance, Task task,
                                               std::uint64_t seed, int forced_accel) {
  Rng rng(hash_seed(seed, "instruction-build"));
  const std::vector<std::string> pool =
      instruction_pool(task, instance.metadata.anatomy, instance.metadata.orientation);
  InstructionInstance out;
  out.task = task;
  out.instruction = pool[rng.index(pool.size())];

  switch (task) {
    case Task::Reconstruction: {
      static const int kAccels[] = {2, 4, 6};
      out.acceleration = forced_accel > 0 ? forced_accel : kAccels[rng.index(3)];
      const KspaceMask mask = make_undersampling_mask(
          instance.spec.width, out.acceleration, 0.125, hash_seed(seed, "instruction-mask"));
      out.degraded = undersample_zero_fill(instance.image, mask);
      out.target.kind = TargetKind::Image;
      out.target.image = instance.image;
      break;
    }
    case Task::Segmentation:
      out.target.kind = TargetKind::Mask;
      out.target.mask = instance.seg_mask;
      break;
    case Task::Detection:
      if (instance.boxes.empty()) {
        out.target.kind = TargetKind::Text;
        out.target.text = "no abnormality detected";
      } else {
        out.target.kind = TargetKind::Boxes;
        out.target.boxes = instance.boxes;
      }
      break;
    case Task::Diagnosis:
      out.target.kind = TargetKind::Text;
      out.target.text = instance.diagnosis;
      break;
    case Task::Report:
      out.target.kind = TargetKind::Text;
      out.target.text = render_description(instance).report_text();
      break;
  }
  return out;
}

}  // namespace forge
