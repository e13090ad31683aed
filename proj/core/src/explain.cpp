#include "arfdx/explain.hpp"

#include <algorithm>
#include <numeric>

#include "arfdx/error.hpp"
#include "arfdx/eval.hpp"
#include "arfdx/rng.hpp"
#include "arfdx/stats.hpp"

namespace arfdx {

std::vector<VariableSignal> variable_signals(std::span<const FeatureVector> rows, const FittedFeaturizer& featurizer) {
  std::vector<VariableSignal> out;
  out.reserve(featurizer.blocks.size());
  for (const auto& block : featurizer.blocks) {
    VariableSignal sig{block.variable, {}};
    sig.values.reserve(rows.size());
    for (const auto& x : rows) {
      double v = 0.0;
      for (std::size_t i = 0; i < block.width; ++i) {
        if (x.test(block.offset + i)) {
          v = static_cast<double>(i + 1);
          break;
        }
      }
      sig.values.push_back(v);
    }
    out.push_back(std::move(sig));
  }
  return out;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;

  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<FeatureGroup> correlation_groups(std::span<const VariableSignal> signals, double threshold) {
  if (!signals.empty() && signals.front().values.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "correlation grouping needs at least two patients");
  }
  DisjointSets sets(signals.size());
  for (std::size_t a = 0; a < signals.size(); ++a) {
    for (std::size_t b = a + 1; b < signals.size(); ++b) {
      const auto r = stats::pearson(signals[a].values, signals[b].values);
      if (r && std::abs(*r) > threshold) sets.unite(a, b);
    }
  }
  std::vector<FeatureGroup> groups;
  std::vector<std::size_t> group_of_root(signals.size(), SIZE_MAX);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (group_of_root[root] == SIZE_MAX) {
      group_of_root[root] = groups.size();
      groups.emplace_back();
    }
    auto& g = groups[group_of_root[root]];
    g.members.push_back(signals[i].variable);
    g.id += (g.id.empty() ? "" : "+") + signals[i].variable;
  }
  return groups;
}

Scorer make_scorer(const TrainedModel& model, std::span<const PatientExample> patients, Diagnosis diagnosis) {
  std::vector<PatientExample> frozen(patients.begin(), patients.end());
  return [model, frozen = std::move(frozen), diagnosis](const Eigen::MatrixXd& ehr) mutable {
    if (static_cast<std::size_t>(ehr.rows()) != frozen.size()) {
      throw Error(ErrorCode::kShapeMismatch, "scorer: EHR rows do not match patients");
    }
    std::vector<double> scores(frozen.size());
    for (std::size_t i = 0; i < frozen.size(); ++i) {
      frozen[i].ehr = ehr.row(static_cast<Eigen::Index>(i)).transpose();
      scores[i] = predict_patient(model.spec, model.params, frozen[i])[static_cast<Eigen::Index>(index_of(diagnosis))];
    }
    return scores;
  };
}

std::vector<Eigen::Index> group_columns(const FeatureGroup& group, const FittedFeaturizer& featurizer) {
  std::vector<Eigen::Index> cols;
  for (const auto& name : group.members) {
    const FeatureBlock* block = featurizer.find(name);
    if (!block) throw Error(ErrorCode::kInvalidArgument, "group member " + name + " is not a featurizer variable");
    for (std::size_t i = 0; i < block->width; ++i) cols.push_back(static_cast<Eigen::Index>(block->offset + i));
  }
  return cols;
}

double permutation_drop(const Scorer& scorer, const Eigen::MatrixXd& ehr, std::span<const int> labels,
                        std::span<const Eigen::Index> columns, std::span<const std::size_t> permutation) {
  if (permutation.size() != static_cast<std::size_t>(ehr.rows())) {
    throw Error(ErrorCode::kShapeMismatch, "permutation length does not match rows");
  }
  const double baseline = auroc(scorer(ehr), labels);
  Eigen::MatrixXd shuffled = ehr;
  for (Eigen::Index col : columns) {
    for (std::size_t i = 0; i < permutation.size(); ++i) {
      shuffled(static_cast<Eigen::Index>(i), col) = ehr(static_cast<Eigen::Index>(permutation[i]), col);
    }
  }
  return baseline - auroc(scorer(shuffled), labels);
}

std::vector<double> permutation_importance(const Scorer& scorer, const Eigen::MatrixXd& ehr,
                                           std::span<const int> labels, std::span<const FeatureGroup> groups,
                                           const FittedFeaturizer& featurizer, std::uint64_t seed,
                                           std::size_t repetitions) {
  if (repetitions == 0) throw Error(ErrorCode::kInvalidArgument, "repetitions must be positive");
  const double baseline = auroc(scorer(ehr), labels);
  std::vector<double> drops;
  drops.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto cols = group_columns(groups[g], featurizer);
    Rng rng(derive_seed(seed, g));
    double total = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
      std::vector<std::size_t> perm(static_cast<std::size_t>(ehr.rows()));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Eigen::MatrixXd shuffled = ehr;
      for (Eigen::Index col : cols) {
        for (std::size_t i = 0; i < perm.size(); ++i) {
          shuffled(static_cast<Eigen::Index>(i), col) = ehr(static_cast<Eigen::Index>(perm[i]), col);
        }
      }
      total += baseline - auroc(scorer(shuffled), labels);
    }
    drops.push_back(total / static_cast<double>(repetitions));
  }
  return drops;
}

ImportanceReport aggregate_ranks(Diagnosis diagnosis, std::span<const FeatureGroup> groups,
                                 const std::vector<std::vector<double>>& drops_per_split) {
  ImportanceReport report;
  report.diagnosis = diagnosis;
  for (const auto& g : groups) report.groups.push_back({g, {}, {}, 0.0, 0.0});
  for (const auto& drops : drops_per_split) {
    if (drops.size() != groups.size()) throw Error(ErrorCode::kShapeMismatch, "drops do not match group count");
    std::vector<double> negated(drops.size());
    std::transform(drops.begin(), drops.end(), negated.begin(), [](double d) { return -d; });
    const auto ranks = stats::average_ranks(negated);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      report.groups[g].split_drops.push_back(drops[g]);
      report.groups[g].split_ranks.push_back(ranks[g]);
    }
  }
  for (auto& gi : report.groups) {
    gi.mean_rank = stats::mean(gi.split_ranks);
    gi.mean_drop = stats::mean(gi.split_drops);
  }
  std::stable_sort(report.groups.begin(), report.groups.end(), [](const GroupImportance& a, const GroupImportance& b) {
    if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
    return a.group.id < b.group.id;
  });
  for (std::size_t i = 0; i < std::min<std::size_t>(5, report.groups.size()); ++i) {
    report.top5.push_back(report.groups[i].group.id);
  }
  return report;
}

}  // namespace arfdx
