#include "arfdx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arfdx/error.hpp"
#include "arfdx/labels.hpp"
#include "arfdx/stats.hpp"

namespace arfdx {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kTrain: return "train";
    case Role::kVal: return "val";
    case Role::kTest: return "test";
  }
  return "unknown";
}

Role SplitAssignment::role_of(std::string_view patient_id) const {
  auto it = std::lower_bound(patient_ids.begin(), patient_ids.end(), patient_id);
  if (it == patient_ids.end() || *it != patient_id) {
    throw Error(ErrorCode::kInvalidArgument, "patient " + std::string(patient_id) + " is not in split");
  }
  return roles[static_cast<std::size_t>(it - patient_ids.begin())];
}

std::vector<std::string> SplitAssignment::ids_with(Role role) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < patient_ids.size(); ++i) {
    if (roles[i] == role) out.push_back(patient_ids[i]);
  }
  return out;
}

std::vector<SplitAssignment> make_splits(std::span<const std::string> patient_ids, std::uint64_t seed,
                                         std::size_t n_splits) {
  std::vector<std::string> ids(patient_ids.begin(), patient_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 5) throw Error(ErrorCode::kInvalidArgument, "splitting needs at least five patients");
  const std::size_t n = ids.size();
  const std::size_t n_val = n / 5;
  const std::size_t n_test = n / 5;
  const std::size_t n_train = n - n_val - n_test;

  std::vector<SplitAssignment> splits;
  for (std::size_t k = 0; k < n_splits; ++k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, k));
    std::shuffle(order.begin(), order.end(), rng);
    SplitAssignment s{k, ids, std::vector<Role>(n, Role::kTrain)};
    for (std::size_t pos = n_train; pos < n; ++pos) {
      s.roles[order[pos]] = pos < n_train + n_val ? Role::kVal : Role::kTest;
    }
    splits.push_back(std::move(s));
  }
  return splits;
}

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kShapeMismatch, "scores and labels differ in length");
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels) {
  const auto pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
  return {pos, labels.size() - pos};
}

// Indices ordered by descending score; ties keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClass, "AUROC needs both classes");
  const auto ranks = stats::average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) rank_sum += ranks[i];
  }
  // Mann-Whitney U counts concordant pairs plus half the ties.
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double aupr(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0) throw Error(ErrorCode::kNoPositives, "AUPR needs at least one positive");
  const auto order = descending_order(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++tp;
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClass, "ROC curve needs both classes");
  const auto order = descending_order(scores);
  std::vector<RocPoint> points{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      labels[order[i]] ? ++tp : ++fp;
      ++i;
    }
    points.push_back({t, static_cast<double>(fp) / static_cast<double>(neg),
                      static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return points;
}

double CalibrationLine::apply(double prediction) const {
  return std::clamp(slope * prediction + intercept, 0.0, 1.0);
}

CalibrationResult calibration(std::span<const double> preds, std::span<const int> labels) {
  check_lengths(preds, labels);
  if (preds.size() < kCalibrationBins) {
    throw Error(ErrorCode::kInvalidArgument, "calibration needs at least five predictions");
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return preds[a] < preds[b]; });

  CalibrationResult result;
  const std::size_t base = preds.size() / kCalibrationBins;
  const std::size_t extra = preds.size() % kCalibrationBins;
  std::size_t cursor = 0;
  std::array<double, kCalibrationBins> xs{}, ys{};
  double gap = 0.0;
  for (std::size_t b = 0; b < kCalibrationBins; ++b) {
    const std::size_t count = base + (b < extra ? 1 : 0);
    double sum_pred = 0.0;
    std::size_t positives = 0;
    for (std::size_t k = 0; k < count; ++k, ++cursor) {
      sum_pred += preds[order[cursor]];
      if (labels[order[cursor]]) ++positives;
    }
    auto& bin = result.bins[b];
    bin.count = count;
    bin.mean_prediction = sum_pred / static_cast<double>(count);
    bin.observed_fraction = static_cast<double>(positives) / static_cast<double>(count);
    xs[b] = bin.mean_prediction;
    ys[b] = bin.observed_fraction;
    gap += std::abs(bin.mean_prediction - bin.observed_fraction);
  }
  const auto fit = stats::least_squares(xs, ys);
  result.line = {fit.slope, fit.intercept};
  result.ece = gap / static_cast<double>(kCalibrationBins);
  return result;
}

OddsRatio diagnostic_odds_ratio(const Confusion& c) {
  if (c.tp == 0 || c.fn == 0 || c.fp == 0 || c.tn == 0) {
    const double tp = static_cast<double>(c.tp) + 0.5, fn = static_cast<double>(c.fn) + 0.5;
    const double fp = static_cast<double>(c.fp) + 0.5, tn = static_cast<double>(c.tn) + 0.5;
    return {(tp * tn) / (fp * fn), true};
  }
  return {(static_cast<double>(c.tp) * static_cast<double>(c.tn)) /
              (static_cast<double>(c.fp) * static_cast<double>(c.fn)),
          false};
}

OperatingPoint threshold_at_ppv(std::span<const double> preds, std::span<const int> labels, double target) {
  check_lengths(preds, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClass, "threshold selection needs both classes");

  // Sweep thresholds from the highest prediction down; each distinct value is
  // a candidate and everything at or above it is called positive.
  const auto order = descending_order(preds);
  std::optional<OperatingPoint> best;
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double t = preds[order[i]];
    while (i < order.size() && preds[order[i]] == t) {
      labels[order[i]] ? ++tp : ++fp;
      ++i;
    }
    const double ppv = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (ppv < target) continue;
    OperatingPoint op;
    op.threshold = t;
    op.confusion = {tp, pos - tp, fp, neg - fp};
    op.sensitivity = static_cast<double>(tp) / static_cast<double>(pos);
    op.specificity = static_cast<double>(neg - fp) / static_cast<double>(neg);
    op.ppv = ppv;
    op.dor = diagnostic_odds_ratio(op.confusion);
    if (!best || op.sensitivity > best->sensitivity ||
        (op.sensitivity == best->sensitivity && op.specificity > best->specificity)) {
      best = op;
    }
  }
  if (!best) throw Error(ErrorCode::kPpvUnattainable, "no threshold reaches the target PPV");
  return *best;
}

double macro_average(const PerDiagnosis<double>& values) {
  return (values[0] + values[1] + values[2]) / 3.0;
}

SplitSummary summarize_splits(std::span<const double> values) {
  if (values.size() != kNumSplits) throw Error(ErrorCode::kInvalidArgument, "summary needs exactly five values");
  std::array<double, kNumSplits> sorted{};
  std::copy(values.begin(), values.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.end());
  return {sorted[2], sorted.front(), sorted.back()};
}

MetricsReport evaluate_predictions(const PredictionSet& test, const PredictionSet& validation) {
  MetricsReport report;
  PerDiagnosis<double> aurocs{}, auprs{}, eces{};
  for (Diagnosis d : kAllDiagnoses) {
    const std::size_t k = index_of(d);
    const auto& scores = test.scores[k];
    const auto& labels = test.labels[k];
    auto& m = report.per_diagnosis[k];
    m.auroc = auroc(scores, labels);
    m.aupr = aupr(scores, labels);
    m.prevalence = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) /
                   static_cast<double>(labels.size());
    m.calibration = calibration(scores, labels);
    m.recalibration = calibration(validation.scores[k], validation.labels[k]).line;
    std::vector<double> recalibrated(scores.size());
    std::transform(scores.begin(), scores.end(), recalibrated.begin(),
                   [&](double p) { return m.recalibration.apply(p); });
    m.ece_recalibrated = calibration(recalibrated, labels).ece;
    try {
      m.operating_point = threshold_at_ppv(scores, labels, 0.5);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPpvUnattainable) throw;
    }
    aurocs[k] = m.auroc;
    auprs[k] = m.aupr;
    eces[k] = m.calibration.ece;
  }
  report.macro_auroc = macro_average(aurocs);
  report.macro_aupr = macro_average(auprs);
  report.macro_ece = macro_average(eces);
  return report;
}

PhysicianComparison physician_comparison(std::span<const PhysicianCase> cases, Rng& rng) {
  PerDiagnosis<std::vector<double>> physician_scores, model_scores;
  PerDiagnosis<std::vector<int>> consensus;
  std::size_t used = 0;
  for (const auto& c : cases) {
    if (c.reviews.size() < 3) continue;
    const PhysicianBenchmark bench = physician_benchmark(c.reviews, rng);
    for (Diagnosis d : kAllDiagnoses) {
      const std::size_t k = index_of(d);
      physician_scores[k].push_back(bench.ordinal_scores[k]);
      model_scores[k].push_back(c.model_probs[k]);
      consensus[k].push_back(bench.consensus[d] ? 1 : 0);
    }
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::kTooFewReviews, "no patient has three or more reviews");
  PhysicianComparison out;
  out.patients = used;
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    out.physician_auroc[k] = auroc(physician_scores[k], consensus[k]);
    out.model_auroc[k] = auroc(model_scores[k], consensus[k]);
  }
  out.physician_macro = macro_average(out.physician_auroc);
  out.model_macro = macro_average(out.model_auroc);
  return out;
}

}  // namespace arfdx
