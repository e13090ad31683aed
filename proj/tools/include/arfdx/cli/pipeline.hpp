#pragma once

// Glue between the core modules: cohort selection, per-split featurization
// and assembly of model-ready patient examples.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arfdx/cohort.hpp"
#include "arfdx/eval.hpp"
#include "arfdx/featurize.hpp"
#include "arfdx/imaging.hpp"
#include "arfdx/labels.hpp"
#include "arfdx/models.hpp"

namespace arfdx::cli {

struct PatientLabels {
  std::optional<DiagnosisLabels> chart;  // nullopt without chart reviews
  DiagnosisLabels code_med;
};

struct LabeledCohort {
  std::vector<PatientStay> stays;  // included stays, sorted by patient id
  std::vector<PatientLabels> labels;
  std::size_t excluded = 0;
};

LabeledCohort select_cohort(std::vector<PatientStay> stays, const CohortConfig& cfg,
                            const PhenotypeRuleset& ruleset);

Eigen::VectorXd to_eigen(const FeatureVector& x);
Eigen::Vector3d to_eigen(const DiagnosisLabels& labels);

// Image refs of the selected study, all of which must appear in `embeddings`.
std::vector<Eigen::VectorXd> study_embeddings(const PatientStay& stay, const EmbeddingMap& embeddings);

std::size_t embedding_width(const EmbeddingMap& embeddings);

struct SplitData {
  FittedFeaturizer featurizer;
  std::vector<PatientExample> train;
  std::vector<PatientExample> val;
  std::vector<PatientExample> test;
};

// Fits the featurizer on the split's training patients and builds examples
// for every role. `labels` is parallel to `stays`.
SplitData prepare_split(std::span<const PatientStay> stays, std::span<const DiagnosisLabels> labels,
                        const SplitAssignment& split, const FeaturizerConfig& fcfg, const EmbeddingMap& embeddings,
                        const CohortConfig& ccfg = {});

PredictionSet prediction_set(const Eigen::MatrixXd& probs, std::span<const PatientExample> patients);

}  // namespace arfdx::cli
