// SPDX-License-Identifier: Apache-2.0
#include "forge/corpus/description.hpp"

namespace forge {
namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

std::string HierarchicalDescription::flat() const {
  return "Modality and parameters: " + modality_params +
         " Anatomical structures: " + anatomical_structures +
         " Signal characteristics: " + signal_characteristics +
         " Pathological findings: " + pathological_findings +
         " Diagnostic impression: " + diagnostic_impression;
}

std::string HierarchicalDescription::report_text() const {
  return pathological_findings + " " + diagnostic_impression;
}

HierarchicalDescription render_description(const PhantomInstance& instance) {
  const PhantomMetadata& md = instance.metadata;
  const std::string anatomy = to_string(md.anatomy);
  const std::string sequence = to_string(md.sequence);
  const std::vector<std::string>& tissues = tissue_names(md.anatomy);

  HierarchicalDescription d;
  d.modality_params = sequence + " weighted " + to_string(md.orientation) + " MRI of the " +
                      anatomy + " acquired at " + md.field_strength + ".";
  d.anatomical_structures = "Visible structures include the " + join_names(tissues) + ".";

  std::string sig = "The ";
  for (std::size_t i = 0; i < tissues.size(); ++i) {
    if (i > 0) sig += (i + 1 == tissues.size()) ? " and the " : ", the ";
    sig += tissues[i] + " appears " +
           intensity_word(tissue_intensity(md.sequence, static_cast<int>(i) + 1));
  }
  d.signal_characteristics = sig + " on this sequence.";

  const bool has_lesion = instance.spec.lesion.has_value();
  if (has_lesion) {
    const std::string label = lesion_label(instance.spec.lesion->second);
    d.pathological_findings = "There is a " + label + " with " +
                              intensity_word(lesion_intensity(md.sequence)) + " signal in the " +
                              anatomy + ".";
    d.diagnostic_impression = "Most consistent with " + label + ".";
  } else {
    d.pathological_findings =
        "The " + anatomy + " shows normal signal with no focal abnormality.";
    d.diagnostic_impression = "No acute abnormality.";
  }
  return d;
}

std::vector<std::string> required_report_phrases(const PhantomInstance& instance) {
  const std::string anatomy = to_string(instance.metadata.anatomy);
  if (instance.spec.lesion) {
    const std::string label = lesion_label(instance.spec.lesion->second);
    return {anatomy, intensity_word(lesion_intensity(instance.metadata.sequence)), label,
            "most consistent with " + label};
  }
  return {anatomy, "normal signal", "no focal abnormality", "no acute abnormality"};
}

}  // namespace forge
