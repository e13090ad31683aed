#include "arfdx/types.hpp"

namespace arfdx {

std::string_view diagnosis_name(Diagnosis d) {
  switch (d) {
    case Diagnosis::kPneumonia: return "pneumonia";
    case Diagnosis::kHeartFailure: return "heart_failure";
    case Diagnosis::kCopd: return "copd";
  }
  return "unknown";
}

std::optional<Diagnosis> parse_diagnosis(std::string_view name) {
  for (Diagnosis d : kAllDiagnoses) {
    if (diagnosis_name(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view to_string(LabelSource source) {
  return source == LabelSource::kChartReview ? "chart_review" : "code_med";
}

}  // namespace arfdx
