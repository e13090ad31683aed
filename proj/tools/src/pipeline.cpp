#include "arfdx/cli/pipeline.hpp"

#include <algorithm>

#include "arfdx/error.hpp"

namespace arfdx::cli {

LabeledCohort select_cohort(std::vector<PatientStay> stays, const CohortConfig& cfg,
                            const PhenotypeRuleset& ruleset) {
  std::sort(stays.begin(), stays.end(),
            [](const PatientStay& a, const PatientStay& b) { return a.patient_id < b.patient_id; });
  LabeledCohort out;
  for (auto& stay : stays) {
    if (!out.stays.empty() && out.stays.back().patient_id == stay.patient_id) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate patient_id " + stay.patient_id);
    }
    if (!include_stay(stay, cfg)) {
      ++out.excluded;
      continue;
    }
    PatientLabels labels;
    if (!stay.reviews.empty()) labels.chart = aggregate_reviews(stay.reviews);
    labels.code_med = code_med_label(stay, ruleset);
    out.stays.push_back(std::move(stay));
    out.labels.push_back(labels);
  }
  return out;
}

Eigen::VectorXd to_eigen(const FeatureVector& x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x.test(i) ? 1.0 : 0.0;
  return v;
}

Eigen::Vector3d to_eigen(const DiagnosisLabels& labels) {
  return {labels.assigned[0] ? 1.0 : 0.0, labels.assigned[1] ? 1.0 : 0.0, labels.assigned[2] ? 1.0 : 0.0};
}

std::vector<Eigen::VectorXd> study_embeddings(const PatientStay& stay, const EmbeddingMap& embeddings) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& ref : select_study(stay).image_refs) {
    auto it = embeddings.find(ref);
    if (it == embeddings.end()) {
      throw Error(ErrorCode::kFormatError, "no embedding for image " + ref + " of patient " + stay.patient_id);
    }
    const auto& v = it->second.vector;
    Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) e[static_cast<Eigen::Index>(i)] = v[i];
    out.push_back(std::move(e));
  }
  return out;
}

std::size_t embedding_width(const EmbeddingMap& embeddings) {
  return embeddings.empty() ? 0 : embeddings.begin()->second.vector.size();
}

SplitData prepare_split(std::span<const PatientStay> stays, std::span<const DiagnosisLabels> labels,
                        const SplitAssignment& split, const FeaturizerConfig& fcfg, const EmbeddingMap& embeddings,
                        const CohortConfig& ccfg) {
  if (stays.size() != labels.size()) throw Error(ErrorCode::kShapeMismatch, "stays and labels differ in length");
  std::vector<WindowValues> values;
  values.reserve(stays.size());
  std::vector<WindowValues> train_values;
  std::vector<Role> roles;
  for (const auto& stay : stays) {
    values.push_back(extract_window_values(stay, fcfg, observation_window(stay, ccfg)));
    roles.push_back(split.role_of(stay.patient_id));
    if (roles.back() == Role::kTrain) train_values.push_back(values.back());
  }
  SplitData out;
  out.featurizer = fit(train_values, fcfg);
  for (std::size_t i = 0; i < stays.size(); ++i) {
    PatientExample ex;
    ex.patient_id = stays[i].patient_id;
    ex.ehr = to_eigen(encode(values[i], out.featurizer));
    ex.images = study_embeddings(stays[i], embeddings);
    ex.labels = to_eigen(labels[i]);
    switch (roles[i]) {
      case Role::kTrain: out.train.push_back(std::move(ex)); break;
      case Role::kVal: out.val.push_back(std::move(ex)); break;
      case Role::kTest: out.test.push_back(std::move(ex)); break;
    }
  }
  return out;
}

PredictionSet prediction_set(const Eigen::MatrixXd& probs, std::span<const PatientExample> patients) {
  PredictionSet set;
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    for (std::size_t i = 0; i < patients.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      set.scores[k].push_back(probs(row, static_cast<Eigen::Index>(k)));
      set.labels[k].push_back(patients[i].labels[static_cast<Eigen::Index>(k)] > 0.5 ? 1 : 0);
    }
  }
  return set;
}

}  // namespace arfdx::cli
