#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arfdx/cohort.hpp"
#include "arfdx/rng.hpp"
#include "arfdx/types.hpp"

namespace arfdx {

// Mean rating strictly below this assigns the diagnosis (midpoint of 1 and 4).
inline constexpr double kAssignThreshold = 2.5;

// Consensus labels: per diagnosis, mean rating < 2.5. Throws NoReviews on an
// empty list.
DiagnosisLabels aggregate_reviews(std::span<const ChartReview> reviews);

// A single reviewer's own call under the same < 2.5 rule.
bool review_assigns(const ChartReview& review, Diagnosis d);

struct PhenotypeRule {
  std::set<std::string> icd_codes;    // normalized with normalize_icd
  std::set<std::string> medications;  // normalized with normalize_medication
};

struct PhenotypeRuleset {
  PerDiagnosis<PhenotypeRule> rules;

  const PhenotypeRule& operator[](Diagnosis d) const { return rules[index_of(d)]; }
};

// Uppercase, surrounding whitespace trimmed, dots kept as printed.
std::string normalize_icd(std::string_view code);
// Uppercase, surrounding whitespace trimmed.
std::string normalize_medication(std::string_view name);

// {"pneumonia": {"icd": [...], "medications": [...]}, "heart_failure": ..., "copd": ...}
PhenotypeRuleset parse_ruleset(std::string_view json_text);
PhenotypeRuleset load_ruleset(const std::filesystem::path& path);
std::string ruleset_to_json(const PhenotypeRuleset& ruleset);

// Discharge ICD-10 codes and medication names for the three diagnoses.
PhenotypeRuleset builtin_ruleset();

// Assigned iff the stay carries a listed ICD-10 code AND a listed medication.
DiagnosisLabels code_med_label(const PatientStay& stay, const PhenotypeRuleset& ruleset);

// Pooled 2x2 table over reviewer pairs. "first"/"second" follow review order
// within a patient.
struct AgreementTable {
  std::size_t both_yes = 0;
  std::size_t first_only = 0;
  std::size_t second_only = 0;
  std::size_t both_no = 0;

  std::size_t total() const { return both_yes + first_only + second_only + both_no; }
};

struct Agreement {
  double kappa = 0.0;
  double raw_agreement = 0.0;
  AgreementTable table;
};

// Cohen's kappa. Throws DegenerateMarginals when chance agreement is 1.
Agreement cohen_kappa(const AgreementTable& table);

// Pools every unordered reviewer pair within each patient. Patients with a
// single review contribute nothing; throws TooFewReviews if no pair exists.
PerDiagnosis<Agreement> rater_agreement(std::span<const std::vector<ChartReview>> patient_reviews);

struct PhysicianBenchmark {
  ChartReview held_out;
  // 5 - rating: higher means the physician found the diagnosis more likely.
  PerDiagnosis<double> ordinal_scores{};
  DiagnosisLabels consensus;
};

// Holds out one review uniformly at random and builds the consensus from the
// rest. Throws TooFewReviews with fewer than three reviews.
PhysicianBenchmark physician_benchmark(std::span<const ChartReview> reviews, Rng& rng);

}  // namespace arfdx
