#include "arfdx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <set>
#include <string>

#include "arfdx/csv.hpp"
#include "arfdx/error.hpp"
#include "arfdx/rng.hpp"

namespace arfdx {

namespace {

constexpr double kBaselineMean = 0.0;
constexpr int kNumReviewers = 8;

std::string numeric_name(std::size_t j) {
  std::string s = "var" + std::to_string(j);
  if (j < 10) s.insert(3, "0");
  return s;
}

std::string padded(std::size_t i, std::size_t width) {
  std::string s = std::to_string(i);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

double signal_at(const std::vector<double>& v, std::size_t j) { return j < v.size() ? v[j] : 0.0; }

template <typename T>
const T& pick(const std::set<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return *std::next(items.begin(), static_cast<std::ptrdiff_t>(d(rng)));
}

}  // namespace

void SynthSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (n_patients == 0) fail("n_patients must be positive");
  if (emb_dim == 0) fail("emb_dim must be at least 1");
  for (double p : prevalences) {
    if (!(p > 0.0 && p < 1.0)) fail("prevalences must lie in (0, 1)");
  }
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    if (!ehr_signal[k].empty() && ehr_signal[k].size() != n_numeric_vars) {
      fail("ehr_signal length must equal n_numeric_vars");
    }
    if (!emb_signal[k].empty() && emb_signal[k].size() != emb_dim) {
      fail("emb_signal length must equal emb_dim");
    }
  }
  if (!(missing_base >= 0.0 && missing_base <= 1.0)) fail("missing_base must lie in [0, 1]");
  double total = 0.0;
  for (double w : review_count_weights) {
    if (!(w >= 0.0)) fail("review_count_weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) fail("review_count_weights must not all be zero");
  if (!(reviewer_noise >= 0.0)) fail("reviewer_noise must be non-negative");
  if (!(two_image_fraction >= 0.0 && two_image_fraction <= 1.0)) {
    fail("two_image_fraction must lie in [0, 1]");
  }
}

SynthSpec default_synth_spec(std::size_t n_patients, std::uint64_t seed, double ehr_strength,
                             double emb_strength, std::size_t n_numeric_vars, std::size_t emb_dim) {
  if (n_numeric_vars < 2 * kNumDiagnoses || emb_dim < 2 * kNumDiagnoses) {
    throw Error(ErrorCode::kInvalidArgument, "default synth spec needs >= 6 numeric variables and embedding dims");
  }
  SynthSpec spec;
  spec.n_patients = n_patients;
  spec.seed = seed;
  spec.n_numeric_vars = n_numeric_vars;
  spec.emb_dim = emb_dim;
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    spec.ehr_signal[k].assign(n_numeric_vars, 0.0);
    spec.emb_signal[k].assign(emb_dim, 0.0);
    spec.ehr_signal[k][2 * k] = ehr_strength;
    spec.ehr_signal[k][2 * k + 1] = -ehr_strength;
    spec.emb_signal[k][2 * k] = emb_strength;
    spec.emb_signal[k][2 * k + 1] = emb_strength;
  }
  spec.missing_shift = {-0.1, 0.1, 0.05};
  return spec;
}

SynthCohort generate(const SynthSpec& spec) {
  spec.validate();

  SynthCohort out;
  out.ruleset = builtin_ruleset();
  for (std::size_t j = 0; j < spec.n_numeric_vars; ++j) {
    out.featurizer_config.numeric_vars.push_back(numeric_name(j));
  }
  out.featurizer_config.categorical_vars.push_back({"gender", {"F", "M"}});

  const std::set<std::string> other_codes{"E11.9", "I10", "N17.9", "R06.02"};
  const std::set<std::string> other_meds{"ACETAMINOPHEN", "HEPARIN", "INSULIN", "PANTOPRAZOLE"};
  std::discrete_distribution<int> review_count(spec.review_count_weights.begin(),
                                                     spec.review_count_weights.end());
  const SupportKind kinds[] = {SupportKind::kHfnc, SupportKind::kNiv, SupportKind::kImv};

  for (std::size_t i = 0; i < spec.n_patients; ++i) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto minutes_between = [&](Minutes lo, Minutes hi) {
      std::uniform_int_distribution<Minutes::rep> d(lo.count(), hi.count());
      return Minutes{d(rng)};
    };

    DiagnosisLabels truth;
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) truth.assigned[k] = unif(rng) < spec.prevalences[k];

    PatientStay stay;
    stay.patient_id = "P" + padded(i, 6);
    stay.admit_time = days(static_cast<std::int64_t>(i));
    const Minutes onset = stay.admit_time + minutes_between(hours(2), hours(96));
    stay.support_events.push_back({onset, kinds[std::uniform_int_distribution<int>(0, 2)(rng)]});
    if (unif(rng) < 0.5) {
      stay.support_events.push_back({onset + minutes_between(hours(1), hours(48)), SupportKind::kImv});
    }
    stay.unit_intervals.push_back({"MICU", stay.admit_time, stay.admit_time + days(10)});

    const TimeWindow window = observation_window(stay);
    double shift = 0.0;
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
      if (truth.assigned[k]) shift += spec.missing_shift[k];
    }
    const double p_missing = std::clamp(spec.missing_base + shift, 0.0, 1.0);
    for (std::size_t j = 0; j < spec.n_numeric_vars; ++j) {
      double mean = kBaselineMean;
      for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
        if (truth.assigned[k]) mean += signal_at(spec.ehr_signal[k], j);
      }
      const double value = mean + normal(rng);
      const bool missing = unif(rng) < p_missing;
      const double stale = normal(rng);
      const double late = normal(rng) + 10.0;
      const Minutes t = minutes_between(window.start + hours(1), window.end);
      if (missing) continue;
      const std::string name = numeric_name(j);
      stay.events.push_back({name, window.start, stale});
      stay.events.push_back({name, t, value});
      stay.events.push_back({name, window.end + hours(6), late});
    }
    stay.events.push_back({"gender", stay.admit_time, std::string(unif(rng) < 0.5 ? "F" : "M")});

    const int n_images = unif(rng) < spec.two_image_fraction ? 2 : 1;
    ImagingStudy primary{stay.patient_id + "-S1", onset + minutes_between(-hours(12), hours(12)), {}};
    if (primary.time < stay.admit_time) primary.time = stay.admit_time;
    for (int m = 0; m < n_images; ++m) {
      const std::string ref = primary.study_id + "-I" + std::to_string(m + 1);
      primary.image_refs.push_back(ref);
      ImageEmbedding emb{ref, std::vector<float>(spec.emb_dim)};
      for (std::size_t d = 0; d < spec.emb_dim; ++d) {
        double mean = 0.0;
        for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
          if (truth.assigned[k]) mean += signal_at(spec.emb_signal[k], d);
        }
        emb.vector[d] = static_cast<float>(mean + normal(rng));
      }
      out.embeddings.push_back(std::move(emb));
    }
    // Distractor study well away from onset, embedded as pure noise.
    ImagingStudy distractor{stay.patient_id + "-S2", onset + minutes_between(hours(72), hours(144)),
                            {stay.patient_id + "-S2-I1"}};
    ImageEmbedding noise{distractor.image_refs[0], std::vector<float>(spec.emb_dim)};
    for (auto& x : noise.vector) x = static_cast<float>(normal(rng));
    out.embeddings.push_back(std::move(noise));
    stay.studies.push_back(std::move(primary));
    stay.studies.push_back(std::move(distractor));

    const int n_reviews = review_count(rng) + 1;
    std::vector<int> reviewers(kNumReviewers);
    for (int r = 0; r < kNumReviewers; ++r) reviewers[r] = r + 1;
    std::shuffle(reviewers.begin(), reviewers.end(), rng);
    for (int r = 0; r < n_reviews; ++r) {
      ChartReview review;
      review.reviewer_id = "R" + std::to_string(reviewers[r]);
      for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
        const double z = truth.assigned[k] ? 1.0 : 0.0;
        const double raw = 1.0 + 3.0 * (1.0 - z) + spec.reviewer_noise * normal(rng);
        review.scores[k] = std::round(std::clamp(raw, 1.0, 4.0) * 2.0) / 2.0;
      }
      stay.reviews.push_back(std::move(review));
    }

    // Positives carry a listed code and a listed medication; negatives carry
    // at most one of the two.
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
      const PhenotypeRule& rule = out.ruleset.rules[k];
      const double u = unif(rng);
      const std::string& code = pick(rule.icd_codes, rng);
      const std::string& med = pick(rule.medications, rng);
      if (truth.assigned[k]) {
        stay.icd_codes.insert(code);
        stay.medications.insert(med);
      } else if (u < 0.15) {
        stay.icd_codes.insert(code);
      } else if (u < 0.30) {
        stay.medications.insert(med);
      }
    }
    stay.icd_codes.insert(pick(other_codes, rng));
    stay.medications.insert(pick(other_meds, rng));

    out.stays.push_back(std::move(stay));
    out.truth.push_back(truth);
  }
  return out;
}

std::string truth_csv(const SynthCohort& cohort) {
  std::string text = csv::format_row({"patient_id", "pneumonia", "heart_failure", "copd"});
  for (std::size_t i = 0; i < cohort.stays.size(); ++i) {
    std::vector<std::string> row{cohort.stays[i].patient_id};
    for (bool b : cohort.truth[i].assigned) row.push_back(b ? "1" : "0");
    text += csv::format_row(row);
  }
  return text;
}

}  // namespace arfdx
