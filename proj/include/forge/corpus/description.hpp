// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "forge/corpus/phantom.hpp"

namespace forge {

/// Five-level description schema: acquisition parameters down to the
/// diagnostic impression. Text depends only on labels, never on geometry.
struct HierarchicalDescription {
  std::string modality_params;
  std::string anatomical_structures;
  std::string signal_characteristics;
  std::string pathological_findings;
  std::string diagnostic_impression;

  /// Single-line rendering with each field under its section heading.
  std::string flat() const;
  /// Findings + impression; the report-generation target text.
  std::string report_text() const;
};

HierarchicalDescription render_description(const PhantomInstance& instance);

/// The four phrases report_coverage checks for: anatomy term, signal term,
/// finding, impression. The report target text contains all of them.
std::vector<std::string> required_report_phrases(const PhantomInstance& instance);

}  // namespace forge
