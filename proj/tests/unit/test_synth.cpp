#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "arfdx/cli/pipeline.hpp"
#include "arfdx/cohort.hpp"
#include "arfdx/error.hpp"
#include "arfdx/labels.hpp"
#include "arfdx/synth.hpp"
#include "test_support.hpp"

using namespace arfdx;

namespace {

std::string ndjson(const SynthCohort& c) {
  std::string out;
  for (const auto& s : c.stays) out += stay_to_json(s) + "\n";
  return out;
}

}  // namespace

TEST(Synth, SameSeedSameBytes) {
  const auto a = generate(default_synth_spec(60, 5));
  const auto b = generate(default_synth_spec(60, 5));
  EXPECT_EQ(ndjson(a), ndjson(b));
  EXPECT_EQ(serialize_embeddings(a.embeddings), serialize_embeddings(b.embeddings));
  EXPECT_EQ(truth_csv(a), truth_csv(b));
  EXPECT_NE(ndjson(a), ndjson(generate(default_synth_spec(60, 6))));
}

TEST(Synth, PrefixStable) {
  const auto small = generate(default_synth_spec(10, 5));
  const auto large = generate(default_synth_spec(30, 5));
  for (std::size_t i = 0; i < small.stays.size(); ++i) EXPECT_EQ(stay_to_json(small.stays[i]), stay_to_json(large.stays[i]));
}

TEST(Synth, NoiselessReviewsRecoverTruth) {
  auto spec = default_synth_spec(300, 8);
  spec.reviewer_noise = 0.0;
  const auto c = generate(spec);
  for (std::size_t i = 0; i < c.stays.size(); ++i) EXPECT_EQ(aggregate_reviews(c.stays[i].reviews), c.truth[i]) << i;
}

TEST(Synth, CodesAndMedsAgreeWithPositives) {
  const auto c = generate(default_synth_spec(300, 9));
  for (std::size_t i = 0; i < c.stays.size(); ++i) {
    const auto cm = code_med_label(c.stays[i], c.ruleset);
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) EXPECT_EQ(cm.assigned[k], c.truth[i].assigned[k]);
  }
}

TEST(Synth, PrevalenceWithinThreeStandardErrors) {
  const auto spec = default_synth_spec(2000, 10);
  const auto c = generate(spec);
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    double pos = 0;
    for (const auto& t : c.truth) pos += t.assigned[k];
    const double p = spec.prevalences[k];
    const double se = std::sqrt(p * (1 - p) / 2000.0);
    EXPECT_NEAR(pos / 2000.0, p, 3 * se) << k;
  }
}

TEST(Synth, MissingnessFollowsShiftSign) {
  const auto spec = default_synth_spec(2000, 11);
  const auto c = generate(spec);
  std::vector<WindowValues> rows;
  for (const auto& s : c.stays) rows.push_back(extract_window_values(s, c.featurizer_config, observation_window(s)));
  const auto f = fit(rows, c.featurizer_config);
  std::vector<FeatureVector> encoded;
  for (const auto& r : rows) encoded.push_back(encode(r, f));
  const auto corr = missingness_correlation(encoded, c.truth, f);
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    double mean = 0;
    std::size_t n = 0;
    for (const auto& v : corr) {
      if (v.variable == "gender" || !v.spearman[k]) continue;
      mean += *v.spearman[k];
      ++n;
    }
    mean /= static_cast<double>(n);
    // Presence is the indicator, so a positive missingness shift means negative correlation.
    EXPECT_EQ(mean > 0, spec.missing_shift[k] < 0) << k << " mean " << mean;
  }
}

TEST(Synth, IngestRoundTripAndInclusion) {
  const auto c = generate(default_synth_spec(200, 12));
  std::istringstream in(ndjson(c));
  const auto parsed = parse_cohort(in);
  EXPECT_TRUE(parsed.rejects.empty());
  ASSERT_EQ(parsed.stays.size(), c.stays.size());
  const CohortConfig cfg;
  std::map<std::string, bool> have;
  for (const auto& e : c.embeddings) have[e.study_image_id] = true;
  for (const auto& s : parsed.stays) {
    EXPECT_FALSE(validate_stay(s).has_value());
    EXPECT_TRUE(include_stay(s, cfg)) << s.patient_id;
    for (const auto& ref : select_study(s).image_refs) EXPECT_TRUE(have.count(ref)) << ref;
  }
}

TEST(Synth, SpecValidation) {
  auto spec = default_synth_spec(10, 1);
  spec.prevalences[0] = 1.5;
  EXPECT_THROW(generate(spec), Error);
  EXPECT_THROW(default_synth_spec(10, 1, 0.9, 0.9, 4, 16), Error);
  spec = default_synth_spec(10, 1);
  spec.n_patients = 0;
  EXPECT_THROW(generate(spec), Error);
}

TEST(Synth, NullSignalIsChance) {
  auto spec = default_synth_spec(2000, 13, 0.0, 0.0);
  spec.missing_shift = {};
  const auto c = generate(spec);
  const auto labeled = cli::select_cohort(c.stays, {}, c.ruleset);
  std::vector<DiagnosisLabels> labels;
  for (const auto& l : labeled.labels) labels.push_back(*l.chart);
  std::vector<std::string> ids;
  for (const auto& s : labeled.stays) ids.push_back(s.patient_id);
  const auto split = make_splits(ids, 3)[0];
  EmbeddingMap emb;
  for (const auto& e : c.embeddings) emb[e.study_image_id] = e;
  const auto data = cli::prepare_split(labeled.stays, labels, split, c.featurizer_config, emb);
  HyperParams hp;
  hp.learning_rate = 0.01;
  for (ModelKind kind : {ModelKind::kEhrLinear, ModelKind::kImageLinear}) {
    const ModelSpec ms{kind, data.featurizer.dim, cli::embedding_width(emb), 0};
    const auto m = train(ms, hp, data.train, data.val, 1);
    const double test_auc = macro_auroc(predict(ms, m.params, data.test), data.test);
    EXPECT_NEAR(test_auc, 0.5, 0.07) << to_string(kind);
  }
}
