#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace arfdx {

// All clinical times are integer minutes since an arbitrary epoch.
using Minutes = std::chrono::minutes;

constexpr Minutes hours(std::int64_t h) { return Minutes{h * 60}; }
constexpr Minutes days(std::int64_t d) { return Minutes{d * 24 * 60}; }

enum class Diagnosis : std::size_t { kPneumonia = 0, kHeartFailure = 1, kCopd = 2 };

inline constexpr std::size_t kNumDiagnoses = 3;
inline constexpr std::array<Diagnosis, kNumDiagnoses> kAllDiagnoses{
    Diagnosis::kPneumonia, Diagnosis::kHeartFailure, Diagnosis::kCopd};

template <typename T>
using PerDiagnosis = std::array<T, kNumDiagnoses>;

constexpr std::size_t index_of(Diagnosis d) { return static_cast<std::size_t>(d); }

// "pneumonia", "heart_failure", "copd"
std::string_view diagnosis_name(Diagnosis d);
std::optional<Diagnosis> parse_diagnosis(std::string_view name);

// One physician's retrospective ratings, 1 = very likely ... 4 = unlikely.
struct ChartReview {
  std::string reviewer_id;
  PerDiagnosis<double> scores{};

  double score(Diagnosis d) const { return scores[index_of(d)]; }
};

enum class LabelSource { kChartReview, kCodeMed };

std::string_view to_string(LabelSource source);

// Multi-label diagnosis assignment for one patient.
struct DiagnosisLabels {
  PerDiagnosis<bool> assigned{};
  LabelSource source = LabelSource::kChartReview;

  bool operator[](Diagnosis d) const { return assigned[index_of(d)]; }
  bool pneumonia() const { return assigned[0]; }
  bool heart_failure() const { return assigned[1]; }
  bool copd() const { return assigned[2]; }

  friend bool operator==(const DiagnosisLabels&, const DiagnosisLabels&) = default;
};

}  // namespace arfdx
