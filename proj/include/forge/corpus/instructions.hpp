// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forge/corpus/description.hpp"
#include "forge/corpus/fourier.hpp"
#include "forge/corpus/phantom.hpp"

namespace forge {

enum class Task { Reconstruction, Segmentation, Detection, Diagnosis, Report };
enum class TargetKind { Image, Mask, Boxes, Text };

std::string to_string(Task t);
std::string to_string(TargetKind k);
Task task_from_string(const std::string& s);
TargetKind target_kind_from_string(const std::string& s);
const std::vector<Task>& all_tasks();

struct InstructionTarget {
  TargetKind kind = TargetKind::Text;
  MatD image;              // Image
  MatI mask;               // Mask
  std::vector<Box> boxes;  // Boxes
  std::string text;        // Text
};

struct InstructionInstance {
  std::string image_ref;           // corpus id of the underlying phantom
  std::string degraded_image_ref;  // reconstruction only; id owning degraded.arr
  std::string instruction;         // begins with the "<img>" marker
  InstructionTarget target;
  Task task = Task::Diagnosis;
  int acceleration = 0;  // reconstruction only
  MatD degraded;         // zero-filled input image (reconstruction only)
};

/// The registered per-task paraphrase pool, slots filled for the given
/// labels. Index 0 is the Table 1 wording. All entries carry the leading
/// "<img>" placeholder marker.
std::vector<std::string> instruction_pool(Task task, Anatomy anatomy, Orientation orientation);

/// Builds an instruction-response instance. Template choice and the
/// reconstruction acceleration (from {2, 4, 6}) are drawn from seed;
/// forced_accel > 0 pins the acceleration (used by the eval split).
InstructionInstance build_instruction_instance(const PhantomInstance& instance, Task task,
                                               std::uint64_t seed, int forced_accel = 0);

}  // namespace forge
