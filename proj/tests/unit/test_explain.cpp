#include <gtest/gtest.h>

#include <numeric>

#include "arfdx/error.hpp"
#include "arfdx/explain.hpp"
#include "test_support.hpp"

using namespace arfdx;
using arfdx::testing::Gen;

namespace {

// Three numeric variables with two bins each: columns {0,1}, {2,3}, {4,5}.
FittedFeaturizer three_vars() {
  FittedFeaturizer f;
  f.bins_per_var = 2;
  for (std::size_t v = 0; v < 3; ++v) {
    FeatureBlock b;
    b.variable = std::string(1, static_cast<char>('a' + v));
    b.offset = 2 * v;
    b.width = 2;
    b.edges = {0.5};
    f.blocks.push_back(b);
  }
  f.dim = 6;
  return f;
}

std::vector<FeatureGroup> singletons() { return {{"a", {"a"}}, {"b", {"b"}}, {"c", {"c"}}}; }

// Random one-hot rows; labels follow variable a's upper bin.
void planted_data(Gen& g, std::size_t n, Eigen::MatrixXd& ehr, std::vector<int>& labels) {
  ehr = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 6);
  labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index v = 0; v < 3; ++v) ehr(static_cast<Eigen::Index>(i), 2 * v + (arfdx::testing::uniform(g) < 0.5)) = 1;
    labels[i] = ehr(static_cast<Eigen::Index>(i), 1) > 0.5 ? 1 : 0;
  }
  if (std::accumulate(labels.begin(), labels.end(), 0) == 0) {
    ehr.row(0).head(2) << 0, 1;
    labels[0] = 1;
  }
}

// Reads columns 1 (strongly) and 3 (weakly); never touches variable c.
Scorer linear_scorer() {
  return [](const Eigen::MatrixXd& ehr) {
    std::vector<double> s(static_cast<std::size_t>(ehr.rows()));
    for (Eigen::Index i = 0; i < ehr.rows(); ++i) s[static_cast<std::size_t>(i)] = 2.0 * ehr(i, 1) + 0.3 * ehr(i, 3);
    return s;
  };
}

}  // namespace

TEST(Signals, BinIndexPlusOneOrZero) {
  const auto f = three_vars();
  FeatureVector x(6);
  x.set(1);
  x.set(2);
  const auto s = variable_signals(std::vector<FeatureVector>{x}, f);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].values[0], 2.0);
  EXPECT_EQ(s[1].values[0], 1.0);
  EXPECT_EQ(s[2].values[0], 0.0);
}

TEST(Groups, ChainFormsOneComponent) {
  const std::vector<double> a{1, -1, 1, -1}, c{1, 1, -1, -1};
  std::vector<double> b(4);
  for (int i = 0; i < 4; ++i) b[i] = a[i] + c[i];
  const std::vector<VariableSignal> sig{{"a", a}, {"b", b}, {"c", c}, {"d", {0, 0, 1, 0}}};
  const auto groups = correlation_groups(sig, 0.6);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].members, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(groups[0].id, "a+b+c");
  EXPECT_EQ(groups[1].members, (std::vector<std::string>{"d"}));
}

TEST(Groups, ThresholdControlsGrouping) {
  const std::vector<VariableSignal> sig{{"x", {1, 2, 3, 4}}, {"y", {3, 1, 4, 2}}, {"z", {2, 1, 4, 3}}, {"k", {5, 5, 5, 5}}};
  // r(x, y) = 0, r(x, z) = 0.6, r(y, z) = 0.8
  const auto groups = correlation_groups(sig, 0.85);
  EXPECT_EQ(groups.size(), 4u);
  const auto looser = correlation_groups(sig, 0.7);
  ASSERT_EQ(looser.size(), 3u);
  EXPECT_EQ(looser[1].id, "y+z");
}

TEST(Groups, DuplicatesAndNegativeCorrelation) {
  const std::vector<VariableSignal> sig{{"x", {1, 2, 3, 4}}, {"k", {7, 7, 7, 7}}, {"dup", {1, 2, 3, 4}}, {"neg", {4, 3, 2, 1}}};
  const auto groups = correlation_groups(sig);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].members, (std::vector<std::string>{"x", "dup", "neg"}));
  EXPECT_EQ(groups[1].members, (std::vector<std::string>{"k"}));
}

TEST(Groups, PartitionProperty) {
  Gen g(71);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<VariableSignal> sig;
    const std::size_t v = arfdx::testing::uniform_index(g, 1, 8);
    for (std::size_t j = 0; j < v; ++j) {
      VariableSignal s{"v" + std::to_string(j), std::vector<double>(10)};
      for (auto& x : s.values) x = static_cast<double>(arfdx::testing::uniform_index(g, 0, 3));
      sig.push_back(s);
    }
    std::vector<std::string> seen;
    for (const auto& grp : correlation_groups(sig)) seen.insert(seen.end(), grp.members.begin(), grp.members.end());
    std::sort(seen.begin(), seen.end());
    std::vector<std::string> all;
    for (const auto& s : sig) all.push_back(s.variable);
    std::sort(all.begin(), all.end());
    EXPECT_EQ(seen, all);
  }
}

TEST(GroupColumns, CoversMemberBlocks) {
  const auto f = three_vars();
  EXPECT_EQ(group_columns({"a+c", {"a", "c"}}, f), (std::vector<Eigen::Index>{0, 1, 4, 5}));
  EXPECT_THROW(group_columns({"z", {"z"}}, f), Error);
}

TEST(Permutation, IdentityGivesZeroDrop) {
  Gen g(72);
  Eigen::MatrixXd ehr;
  std::vector<int> y;
  planted_data(g, 40, ehr, y);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  const std::vector<Eigen::Index> cols{0, 1};
  EXPECT_EQ(permutation_drop(linear_scorer(), ehr, y, cols, perm), 0.0);
}

TEST(Permutation, UntouchedGroupHasZeroDropAndPlantedGroupWins) {
  Gen g(73);
  Eigen::MatrixXd ehr;
  std::vector<int> y;
  planted_data(g, 200, ehr, y);
  const auto groups = singletons();
  const auto drops = permutation_importance(linear_scorer(), ehr, y, groups, three_vars(), 5, 10);
  ASSERT_EQ(drops.size(), 3u);
  EXPECT_EQ(drops[2], 0.0);
  EXPECT_GT(drops[0], drops[1]);
  EXPECT_GT(drops[0], 0.2);
}

TEST(Permutation, DeterministicForSeed) {
  Gen g(74);
  Eigen::MatrixXd ehr;
  std::vector<int> y;
  planted_data(g, 60, ehr, y);
  const auto groups = singletons();
  EXPECT_EQ(permutation_importance(linear_scorer(), ehr, y, groups, three_vars(), 9),
            permutation_importance(linear_scorer(), ehr, y, groups, three_vars(), 9));
}

TEST(Scorer, ModelScorerMatchesPredict) {
  const ModelSpec spec{ModelKind::kEhrLinear, 6, 0, 0};
  TrainedModel m{spec, {}, init_params(spec, 4), {}, 0};
  Gen g(75);
  Eigen::MatrixXd ehr;
  std::vector<int> y;
  planted_data(g, 10, ehr, y);
  std::vector<PatientExample> patients(10);
  for (std::size_t i = 0; i < patients.size(); ++i) patients[i].ehr = Eigen::VectorXd::Zero(6);
  const auto scorer = make_scorer(m, patients, Diagnosis::kHeartFailure);
  const auto s = scorer(ehr);
  for (std::size_t i = 0; i < patients.size(); ++i) {
    const Eigen::VectorXd x = ehr.row(static_cast<Eigen::Index>(i)).transpose();
    EXPECT_EQ(s[i], forward(spec, m.params, x, Eigen::VectorXd())(1));
  }
  EXPECT_THROW(scorer(ehr.topRows(3)), Error);
}

TEST(Ranks, TiesShareAverageRank) {
  const auto groups = singletons();
  const auto r = aggregate_ranks(Diagnosis::kCopd, groups, {{0.3, 0.3, 0.1}});
  ASSERT_EQ(r.groups.size(), 3u);
  EXPECT_EQ(r.groups[0].group.id, "a");
  EXPECT_EQ(r.groups[0].mean_rank, 1.5);
  EXPECT_EQ(r.groups[1].group.id, "b");
  EXPECT_EQ(r.groups[1].mean_rank, 1.5);
  EXPECT_EQ(r.groups[2].mean_rank, 3.0);
}

TEST(Ranks, DominantGroupFirst) {
  const auto groups = singletons();
  std::vector<std::vector<double>> drops;
  for (int s = 0; s < 5; ++s) drops.push_back({0.01 * s, 0.5, 0.02});
  const auto r = aggregate_ranks(Diagnosis::kPneumonia, groups, drops);
  EXPECT_EQ(r.groups[0].group.id, "b");
  EXPECT_EQ(r.groups[0].mean_rank, 1.0);
  EXPECT_EQ(r.top5.front(), "b");
  EXPECT_NEAR(r.groups[0].mean_drop, 0.5, 1e-15);
}

TEST(Ranks, RankSumProperty) {
  Gen g(76);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 1, 9);
    std::vector<FeatureGroup> groups;
    for (std::size_t i = 0; i < n; ++i) groups.push_back({"g" + std::to_string(i), {"g" + std::to_string(i)}});
    std::vector<std::vector<double>> drops(5, std::vector<double>(n));
    for (auto& split : drops)
      for (auto& d : split) d = static_cast<double>(arfdx::testing::uniform_index(g, 0, 3)) / 10.0;
    const auto r = aggregate_ranks(Diagnosis::kPneumonia, groups, drops);
    for (std::size_t s = 0; s < 5; ++s) {
      double sum = 0;
      for (const auto& gi : r.groups) sum += gi.split_ranks[s];
      EXPECT_DOUBLE_EQ(sum, static_cast<double>(n * (n + 1)) / 2);
    }
    EXPECT_LE(r.top5.size(), 5u);
    for (std::size_t i = 1; i < r.groups.size(); ++i) EXPECT_LE(r.groups[i - 1].mean_rank, r.groups[i].mean_rank);
  }
}
