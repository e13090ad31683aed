#pragma once

// Seeded synthetic cohorts with a known generative model. Diagnoses are drawn
// independently; EHR values, missingness, image embeddings, chart reviews and
// discharge codes are then generated conditional on the diagnosis bits.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "arfdx/cohort.hpp"
#include "arfdx/featurize.hpp"
#include "arfdx/imaging.hpp"
#include "arfdx/labels.hpp"
#include "arfdx/types.hpp"

namespace arfdx {

struct SynthSpec {
  std::size_t n_patients = 2000;
  PerDiagnosis<double> prevalences{0.31, 0.22, 0.09};
  std::size_t n_numeric_vars = 12;
  std::size_t emb_dim = 16;
  // Mean shift of each numeric variable when the diagnosis is present.
  PerDiagnosis<std::vector<double>> ehr_signal;
  // Mean shift of each embedding coordinate when the diagnosis is present.
  PerDiagnosis<std::vector<double>> emb_signal;
  double missing_base = 0.2;
  PerDiagnosis<double> missing_shift{};
  // Weights for 1, 2, 3 and 4 chart reviews per patient.
  std::array<double, 4> review_count_weights{0.23, 0.48, 0.20, 0.09};
  double reviewer_noise = 0.5;
  double two_image_fraction = 0.3;
  std::uint64_t seed = 0;

  // Throws InvalidArgument. Empty signal vectors are read as all zeros.
  void validate() const;
};

// Each diagnosis shifts its own pair of numeric variables and its own pair of
// embedding coordinates, so both modalities carry part of the signal. Needs at
// least six numeric variables and six embedding coordinates.
SynthSpec default_synth_spec(std::size_t n_patients, std::uint64_t seed, double ehr_strength = 0.9,
                             double emb_strength = 0.9, std::size_t n_numeric_vars = 12,
                             std::size_t emb_dim = 16);

struct SynthCohort {
  std::vector<PatientStay> stays;
  std::vector<ImageEmbedding> embeddings;
  std::vector<DiagnosisLabels> truth;
  PhenotypeRuleset ruleset;
  FeaturizerConfig featurizer_config;
};

SynthCohort generate(const SynthSpec& spec);

// patient_id,pneumonia,heart_failure,copd with 0/1 cells.
std::string truth_csv(const SynthCohort& cohort);

}  // namespace arfdx
