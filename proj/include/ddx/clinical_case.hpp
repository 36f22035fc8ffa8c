#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ddx/expert_engine.hpp"

namespace ddx {

enum class CaseSource { expert_sim, assessment, vignette };

std::string_view to_string(CaseSource source);
CaseSource parse_case_source(std::string_view text);

struct ClinicalCase {
  std::string id;
  FindingSet pos;  // present findings, demographic values included
  FindingSet neg;  // explicitly absent findings
  DifferentialDiagnosis ddx;
  CaseSource source = CaseSource::expert_sim;
  std::optional<std::string> seed_disease;
};

}  // namespace ddx
