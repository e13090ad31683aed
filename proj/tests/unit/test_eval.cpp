#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "arfdx/error.hpp"
#include "arfdx/eval.hpp"
#include "test_support.hpp"

using namespace arfdx;
using arfdx::testing::Gen;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("p" + std::to_string(1000 + i));
  return out;
}

std::size_t count_role(const SplitAssignment& s, Role r) { return s.ids_with(r).size(); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected arfdx::Error";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Splits, Sizes) {
  for (auto [n, tr, va] : {std::tuple{100u, 60u, 20u}, std::tuple{101u, 61u, 20u}, std::tuple{5u, 3u, 1u}}) {
    const auto splits = make_splits(ids(n), 7);
    ASSERT_EQ(splits.size(), 5u);
    for (const auto& s : splits) {
      EXPECT_EQ(count_role(s, Role::kTrain), tr);
      EXPECT_EQ(count_role(s, Role::kVal), va);
      EXPECT_EQ(count_role(s, Role::kTest), va);
    }
  }
}

TEST(Splits, DeterministicPartitionAndDistinct) {
  const auto p = ids(40);
  const auto a = make_splits(p, 3);
  const auto b = make_splits(p, 3);
  std::set<std::vector<Role>> distinct;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a[k].roles, b[k].roles);
    EXPECT_EQ(a[k].patient_ids, p);
    std::set<std::string> seen;
    for (Role r : {Role::kTrain, Role::kVal, Role::kTest})
      for (const auto& id : a[k].ids_with(r)) EXPECT_TRUE(seen.insert(id).second);
    EXPECT_EQ(seen.size(), p.size());
    distinct.insert(a[k].roles);
  }
  EXPECT_GT(distinct.size(), 1u);
  EXPECT_NE(make_splits(p, 4)[0].roles, a[0].roles);
}

TEST(Splits, TooFewPatients) { EXPECT_THROW(make_splits(ids(4), 1), Error); }

TEST(Auroc, Examples) {
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{0, 1, 1}), 0.5);
  EXPECT_EQ(code_of([] { auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}); }), ErrorCode::kSingleClass);
}

TEST(Auroc, MatchesPairwiseOracle) {
  Gen g(61);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 2, 40);
    const auto s = arfdx::testing::random_scores(g, n);
    const auto y = arfdx::testing::random_labels(g, n);
    EXPECT_NEAR(auroc(s, y), arfdx::testing::brute_auroc(s, y), 1e-12);
  }
}

TEST(Auroc, MonotoneTransformAndNegation) {
  Gen g(62);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 2, 40);
    std::vector<double> s(n);
    for (auto& v : s) v = arfdx::testing::uniform(g, -3, 3);
    const auto y = arfdx::testing::random_labels(g, n);
    std::vector<double> lin(n), sig(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      lin[i] = 2 * s[i] + 1;
      sig[i] = 1.0 / (1.0 + std::exp(-s[i]));
      neg[i] = -s[i];
    }
    const double a = auroc(s, y);
    EXPECT_EQ(auroc(lin, y), a);
    EXPECT_EQ(auroc(sig, y), a);
    EXPECT_NEAR(a + auroc(neg, y), 1.0, 1e-15);
  }
}

TEST(Aupr, Examples) {
  EXPECT_DOUBLE_EQ(aupr(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(aupr(std::vector<double>{0.9, 0.1}, std::vector<int>{0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(aupr(std::vector<double>{0.4, 0.4, 0.4, 0.4}, std::vector<int>{1, 0, 0, 0}), 0.25);
  EXPECT_EQ(code_of([] { aupr(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}); }), ErrorCode::kNoPositives);
}

TEST(Aupr, MatchesStepOracle) {
  Gen g(63);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 2, 50);
    const auto s = arfdx::testing::random_scores(g, n);
    const auto y = arfdx::testing::random_labels(g, n);
    EXPECT_NEAR(aupr(s, y), arfdx::testing::step_aupr(s, y), 1e-12);
  }
}

TEST(Roc, EndpointsAndMonotone) {
  const auto pts = roc_curve(std::vector<double>{0.9, 0.8, 0.7, 0.6}, std::vector<int>{1, 0, 1, 0});
  ASSERT_GE(pts.size(), 2u);
  EXPECT_EQ(pts.front().fpr, 0.0);
  EXPECT_EQ(pts.front().tpr, 0.0);
  EXPECT_EQ(pts.back().fpr, 1.0);
  EXPECT_EQ(pts.back().tpr, 1.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(pts[i].fpr, pts[i - 1].fpr);
    EXPECT_GE(pts[i].tpr, pts[i - 1].tpr);
  }
}

TEST(Calibration, ConstantHalf) {
  std::vector<double> p(10, 0.5);
  std::vector<int> y{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  // Stable sort keeps input order, so every bin pairs one positive with one negative.
  const auto c = calibration(p, y);
  for (const auto& b : c.bins) {
    EXPECT_EQ(b.mean_prediction, 0.5);
    EXPECT_EQ(b.observed_fraction, 0.5);
    EXPECT_EQ(b.count, 2u);
  }
  EXPECT_EQ(c.ece, 0.0);
}

TEST(Calibration, PerfectPredictions) {
  std::vector<double> p{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  std::vector<int> y{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  const auto c = calibration(p, y);
  EXPECT_EQ(c.ece, 0.0);
  EXPECT_NEAR(c.line.slope, 1.0, 1e-12);
  EXPECT_NEAR(c.line.intercept, 0.0, 1e-12);
}

TEST(Calibration, RemainderGoesToLowBins) {
  std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<int> y{0, 0, 0, 1, 0, 1, 1};
  const auto c = calibration(p, y);
  EXPECT_EQ(c.bins[0].count, 2u);
  EXPECT_EQ(c.bins[1].count, 2u);
  EXPECT_EQ(c.bins[2].count, 1u);
  EXPECT_NEAR(c.bins[0].mean_prediction, 0.15, 1e-15);
  EXPECT_NEAR(c.bins[1].observed_fraction, 0.5, 1e-15);
  double ece = 0;
  for (const auto& b : c.bins) ece += std::abs(b.mean_prediction - b.observed_fraction);
  EXPECT_NEAR(c.ece, ece / 5, 1e-15);
}

TEST(Calibration, WellCalibratedMonteCarlo) {
  Gen g(64);
  std::vector<double> p(10000);
  std::vector<int> y(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = arfdx::testing::uniform(g);
    y[i] = arfdx::testing::uniform(g) < p[i];
  }
  EXPECT_LT(calibration(p, y).ece, 0.02);
}

TEST(Calibration, LineApplyClamps) {
  const CalibrationLine line{2.0, -0.5};
  EXPECT_EQ(line.apply(0.1), 0.0);
  EXPECT_EQ(line.apply(0.5), 0.5);
  EXPECT_EQ(line.apply(0.9), 1.0);
}

TEST(Calibration, NeedsFiveSamples) {
  EXPECT_THROW(calibration(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 1}), Error);
}

TEST(Threshold, Example) {
  const auto op = threshold_at_ppv(std::vector<double>{0.9, 0.8, 0.7, 0.6}, std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(op.threshold, 0.7);
  EXPECT_EQ(op.sensitivity, 1.0);
  EXPECT_EQ(op.specificity, 0.5);
  EXPECT_TRUE(op.dor.corrected);
  EXPECT_DOUBLE_EQ(op.dor.value, 5.0);
}

TEST(Threshold, Unattainable) {
  EXPECT_EQ(code_of([] { threshold_at_ppv(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{0, 0, 1}); }),
            ErrorCode::kPpvUnattainable);
}

TEST(Threshold, AchievesTargetAndMaximalSensitivity) {
  Gen g(65);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 2, 40);
    const auto s = arfdx::testing::random_scores(g, n);
    const auto y = arfdx::testing::random_labels(g, n);
    double best_sens = -1;
    for (double t : s) {
      double tp = 0, fp = 0, pos = 0;
      for (std::size_t i = 0; i < n; ++i) {
        pos += y[i];
        if (s[i] >= t) (y[i] ? tp : fp) += 1;
      }
      if (tp / (tp + fp) >= 0.5) best_sens = std::max(best_sens, tp / pos);
    }
    if (best_sens < 0) {
      EXPECT_THROW(threshold_at_ppv(s, y), Error);
      continue;
    }
    const auto op = threshold_at_ppv(s, y);
    const auto& c = op.confusion;
    EXPECT_GE(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp), 0.5);
    EXPECT_EQ(op.sensitivity, best_sens);
    EXPECT_EQ(c.tp + c.fn + c.fp + c.tn, n);
  }
}

TEST(Dor, Examples) {
  EXPECT_DOUBLE_EQ(diagnostic_odds_ratio({8, 2, 2, 8}).value, 16.0);
  EXPECT_FALSE(diagnostic_odds_ratio({8, 2, 2, 8}).corrected);
  EXPECT_DOUBLE_EQ(diagnostic_odds_ratio({5, 5, 5, 5}).value, 1.0);
  EXPECT_DOUBLE_EQ(diagnostic_odds_ratio({2, 0, 1, 1}).value, (2.5 * 1.5) / (1.5 * 0.5));
}

TEST(Macro, Examples) {
  EXPECT_NEAR(macro_average({0.79, 0.83, 0.88}), 2.5 / 3, 1e-12);
  EXPECT_NEAR(macro_average({0.7, 0.7, 0.7}), 0.7, 1e-15);
  EXPECT_EQ(macro_average({0.0, 1.0, 0.5}), 0.5);
}

TEST(Summary, Examples) {
  const auto a = summarize_splits(std::vector<double>{0.79, 0.77, 0.79, 0.79, 0.79});
  EXPECT_EQ(a.median, 0.79);
  EXPECT_EQ(a.min, 0.77);
  EXPECT_EQ(a.max, 0.79);
  const auto b = summarize_splits(std::vector<double>{5, 1, 4, 2, 3});
  EXPECT_EQ(b.median, 3);
  EXPECT_EQ(b.min, 1);
  EXPECT_EQ(b.max, 5);
  EXPECT_THROW(summarize_splits(std::vector<double>{1, 2}), Error);
}

TEST(Report, MacroAndRecalibration) {
  Gen g(66);
  PredictionSet test, val;
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    for (int i = 0; i < 200; ++i) {
      const double p = arfdx::testing::uniform(g);
      test.scores[k].push_back(p);
      test.labels[k].push_back(arfdx::testing::uniform(g) < p);
      const double q = arfdx::testing::uniform(g);
      val.scores[k].push_back(q);
      val.labels[k].push_back(arfdx::testing::uniform(g) < q);
    }
  }
  const auto r = evaluate_predictions(test, val);
  PerDiagnosis<double> a{};
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    a[k] = auroc(test.scores[k], test.labels[k]);
    EXPECT_EQ(r.per_diagnosis[k].auroc, a[k]);
    EXPECT_EQ(r.per_diagnosis[k].recalibration.slope, calibration(val.scores[k], val.labels[k]).line.slope);
  }
  EXPECT_DOUBLE_EQ(r.macro_auroc, macro_average(a));
}

TEST(Physician, Example) {
  const PerDiagnosis<double> one{1, 1, 1}, four{4, 4, 4}, two{2, 2, 2};
  auto reviews = [](PerDiagnosis<double> s) {
    return std::vector<ChartReview>{{"a", s}, {"b", s}, {"c", s}};
  };
  std::vector<PhysicianCase> cases{{reviews(one), {0.9, 0.9, 0.9}}, {reviews(four), {0.1, 0.1, 0.1}},
                                   {reviews(two), {0.8, 0.8, 0.8}}, {{{"a", one}, {"b", one}}, {0.0, 0.0, 0.0}}};
  Rng rng(1);
  const auto r = physician_comparison(cases, rng);
  EXPECT_EQ(r.patients, 3u);
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    EXPECT_EQ(r.physician_auroc[k], 1.0);
    EXPECT_EQ(r.model_auroc[k], 1.0);
  }
}

TEST(Physician, ConstantModelIsHalf) {
  const PerDiagnosis<double> one{1, 1, 1}, four{4, 4, 4};
  std::vector<PhysicianCase> cases{{{{"a", one}, {"b", one}, {"c", one}}, {0.3, 0.3, 0.3}},
                                   {{{"a", four}, {"b", four}, {"c", four}}, {0.3, 0.3, 0.3}}};
  Rng rng(2);
  const auto r = physician_comparison(cases, rng);
  EXPECT_EQ(r.model_macro, 0.5);
  EXPECT_EQ(r.physician_macro, 1.0);
}

TEST(Physician, NoEligiblePatients) {
  std::vector<PhysicianCase> cases{{{{"a", {1, 1, 1}}}, {0.5, 0.5, 0.5}}};
  Rng rng(1);
  EXPECT_EQ(code_of([&] { physician_comparison(cases, rng); }), ErrorCode::kTooFewReviews);
}
