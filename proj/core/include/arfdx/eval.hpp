#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arfdx/rng.hpp"
#include "arfdx/types.hpp"

namespace arfdx {

enum class Role { kTrain, kVal, kTest };

std::string_view to_string(Role role);

struct SplitAssignment {
  std::size_t index = 0;
  std::vector<std::string> patient_ids;  // sorted, unique
  std::vector<Role> roles;               // aligned with patient_ids

  Role role_of(std::string_view patient_id) const;
  std::vector<std::string> ids_with(Role role) const;
};

inline constexpr std::size_t kNumSplits = 5;

// Independent seeded shuffles; floor(20%) validation, floor(20%) test, the
// remainder train. Requires at least five distinct patients.
std::vector<SplitAssignment> make_splits(std::span<const std::string> patient_ids, std::uint64_t seed,
                                         std::size_t n_splits = kNumSplits);

// Mann-Whitney: (concordant + 0.5 tied) / (positives * negatives).
// Throws SingleClass unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Average precision, tied scores processed as one block. Throws NoPositives.
double aupr(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

inline constexpr std::size_t kCalibrationBins = 5;

struct CalibrationBin {
  double mean_prediction = 0.0;
  double observed_fraction = 0.0;
  std::size_t count = 0;
};

struct CalibrationLine {
  double slope = 1.0;
  double intercept = 0.0;

  // Affine map then clamp to [0, 1].
  double apply(double prediction) const;
};

struct CalibrationResult {
  std::array<CalibrationBin, kCalibrationBins> bins{};
  CalibrationLine line;
  double ece = 0.0;
};

// Equal-count quintiles of the sorted predictions (remainder to the lowest
// bins), least-squares line of observed on predicted, and ECE as the
// unweighted mean |prediction - observed| over bins. Needs >= 5 samples.
CalibrationResult calibration(std::span<const double> preds, std::span<const int> labels);

struct Confusion {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
};

struct OddsRatio {
  double value = 0.0;
  bool corrected = false;  // Haldane +0.5 applied because a cell was zero
};

OddsRatio diagnostic_odds_ratio(const Confusion& c);

struct OperatingPoint {
  double threshold = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double ppv = 0.0;
  OddsRatio dor;
  Confusion confusion;
};

// Among thresholds t in the distinct predictions (positive when pred >= t) with
// PPV >= target, maximal sensitivity then maximal specificity.
// Throws PPVUnattainable if no threshold reaches the target.
OperatingPoint threshold_at_ppv(std::span<const double> preds, std::span<const int> labels, double target = 0.5);

double macro_average(const PerDiagnosis<double>& values);

struct SplitSummary {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Exactly five values.
SplitSummary summarize_splits(std::span<const double> values);

// Per-patient predictions and labels, one column per diagnosis.
struct PredictionSet {
  PerDiagnosis<std::vector<double>> scores;
  PerDiagnosis<std::vector<int>> labels;

  std::size_t size() const { return scores[0].size(); }
};

struct DiagnosisMetrics {
  double auroc = 0.0;
  double aupr = 0.0;
  double prevalence = 0.0;
  CalibrationResult calibration;         // raw test predictions
  CalibrationLine recalibration;         // fitted on validation predictions
  double ece_recalibrated = 0.0;         // test ECE after recalibration
  std::optional<OperatingPoint> operating_point;  // nullopt if PPV 0.5 unreachable
};

struct MetricsReport {
  PerDiagnosis<DiagnosisMetrics> per_diagnosis;
  double macro_auroc = 0.0;
  double macro_aupr = 0.0;
  double macro_ece = 0.0;
};

MetricsReport evaluate_predictions(const PredictionSet& test, const PredictionSet& validation);

struct PhysicianCase {
  std::vector<ChartReview> reviews;
  PerDiagnosis<double> model_probs{};
};

struct PhysicianComparison {
  PerDiagnosis<double> physician_auroc{};
  PerDiagnosis<double> model_auroc{};
  double physician_macro = 0.0;
  double model_macro = 0.0;
  std::size_t patients = 0;
};

// Cases with fewer than three reviews are skipped. For each remaining case one
// review is held out as the "physician"; both the physician's ordinal scores
// and the model's probabilities are scored against the consensus of the rest.
PhysicianComparison physician_comparison(std::span<const PhysicianCase> cases, Rng& rng);

}  // namespace arfdx
