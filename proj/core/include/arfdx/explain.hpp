#pragma once

// Grouped permutation importance over EHR variables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arfdx/featurize.hpp"
#include "arfdx/models.hpp"
#include "arfdx/types.hpp"

namespace arfdx {

struct FeatureGroup {
  std::string id;  // members joined with '+'
  std::vector<std::string> members;
};

struct VariableSignal {
  std::string variable;
  std::vector<double> values;  // one per patient
};

// bin index + 1 when the variable is present, 0 when missing.
std::vector<VariableSignal> variable_signals(std::span<const FeatureVector> rows, const FittedFeaturizer& featurizer);

// Connected components of the graph with an edge wherever |Pearson r| >
// threshold. Constant signals are singletons. Groups follow the order of their
// first member.
std::vector<FeatureGroup> correlation_groups(std::span<const VariableSignal> signals, double threshold = 0.6);

// Per-patient score for one diagnosis given an EHR feature matrix (patients x d).
using Scorer = std::function<std::vector<double>(const Eigen::MatrixXd& ehr)>;

// Scores for `diagnosis` from a trained model; the patients' images stay fixed.
Scorer make_scorer(const TrainedModel& model, std::span<const PatientExample> patients, Diagnosis diagnosis);

// Feature columns covered by a group's member blocks.
std::vector<Eigen::Index> group_columns(const FeatureGroup& group, const FittedFeaturizer& featurizer);

// Baseline AUROC minus AUROC after applying `permutation` jointly to `columns`
// (row i receives the values of row permutation[i]).
double permutation_drop(const Scorer& scorer, const Eigen::MatrixXd& ehr, std::span<const int> labels,
                        std::span<const Eigen::Index> columns, std::span<const std::size_t> permutation);

// AUROC drop per group, each averaged over `repetitions` shared-permutation
// shuffles. Group g draws its permutations from derive_seed(seed, g).
std::vector<double> permutation_importance(const Scorer& scorer, const Eigen::MatrixXd& ehr,
                                           std::span<const int> labels, std::span<const FeatureGroup> groups,
                                           const FittedFeaturizer& featurizer, std::uint64_t seed,
                                           std::size_t repetitions = 10);

struct GroupImportance {
  FeatureGroup group;
  std::vector<double> split_drops;
  std::vector<double> split_ranks;
  double mean_rank = 0.0;
  double mean_drop = 0.0;
};

struct ImportanceReport {
  Diagnosis diagnosis = Diagnosis::kPneumonia;
  std::vector<GroupImportance> groups;  // ordered by mean rank, ties by group id
  std::vector<std::string> top5;
};

// drops_per_split[s][g] is group g's drop on split s. Rank 1 = largest drop,
// ties share the average rank.
ImportanceReport aggregate_ranks(Diagnosis diagnosis, std::span<const FeatureGroup> groups,
                                 const std::vector<std::vector<double>>& drops_per_split);

}  // namespace arfdx
