#include "arfdx/labels.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "arfdx/error.hpp"
#include "arfdx/io.hpp"

namespace arfdx {

DiagnosisLabels aggregate_reviews(std::span<const ChartReview> reviews) {
  if (reviews.empty()) throw Error(ErrorCode::kNoReviews, "no chart reviews to aggregate");
  DiagnosisLabels labels;
  labels.source = LabelSource::kChartReview;
  for (Diagnosis d : kAllDiagnoses) {
    double sum = 0.0;
    for (const auto& r : reviews) sum += r.score(d);
    labels.assigned[index_of(d)] = sum / static_cast<double>(reviews.size()) < kAssignThreshold;
  }
  return labels;
}

bool review_assigns(const ChartReview& review, Diagnosis d) {
  return review.score(d) < kAssignThreshold;
}

namespace {

std::string trim_upper(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool intersects(const std::set<std::string>& normalized_rule, const std::set<std::string>& raw,
                std::string (*normalize)(std::string_view)) {
  return std::any_of(raw.begin(), raw.end(),
                     [&](const std::string& item) { return normalized_rule.contains(normalize(item)); });
}

}  // namespace

std::string normalize_icd(std::string_view code) { return trim_upper(code); }
std::string normalize_medication(std::string_view name) { return trim_upper(name); }

PhenotypeRuleset parse_ruleset(std::string_view json_text) {
  using nlohmann::json;
  PhenotypeRuleset ruleset;
  try {
    const json j = json::parse(skip_comment_header(json_text));
    for (Diagnosis d : kAllDiagnoses) {
      const std::string name(diagnosis_name(d));
      const auto& entry = j.at(name);
      auto& rule = ruleset.rules[index_of(d)];
      for (const auto& c : entry.at("icd")) rule.icd_codes.insert(normalize_icd(c.get<std::string>()));
      for (const auto& m : entry.at("medications")) rule.medications.insert(normalize_medication(m.get<std::string>()));
      if (rule.icd_codes.empty() || rule.medications.empty()) {
        throw Error(ErrorCode::kFormatError, "ruleset for " + name + " needs codes and medications");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("ruleset: ") + e.what());
  }
  return ruleset;
}

PhenotypeRuleset load_ruleset(const std::filesystem::path& path) {
  return parse_ruleset(read_text_file(path));
}

std::string ruleset_to_json(const PhenotypeRuleset& ruleset) {
  nlohmann::ordered_json j;
  for (Diagnosis d : kAllDiagnoses) {
    const auto& rule = ruleset[d];
    j[std::string(diagnosis_name(d))] = {{"icd", rule.icd_codes}, {"medications", rule.medications}};
  }
  return j.dump(2);
}

DiagnosisLabels code_med_label(const PatientStay& stay, const PhenotypeRuleset& ruleset) {
  DiagnosisLabels labels;
  labels.source = LabelSource::kCodeMed;
  for (Diagnosis d : kAllDiagnoses) {
    const auto& rule = ruleset[d];
    labels.assigned[index_of(d)] = intersects(rule.icd_codes, stay.icd_codes, normalize_icd) &&
                                   intersects(rule.medications, stay.medications, normalize_medication);
  }
  return labels;
}

Agreement cohen_kappa(const AgreementTable& t) {
  const double n = static_cast<double>(t.total());
  if (n == 0) throw Error(ErrorCode::kDegenerateMarginals, "empty agreement table");
  const double p_o = static_cast<double>(t.both_yes + t.both_no) / n;
  const double p_first = static_cast<double>(t.both_yes + t.first_only) / n;
  const double p_second = static_cast<double>(t.both_yes + t.second_only) / n;
  const double p_e = p_first * p_second + (1.0 - p_first) * (1.0 - p_second);
  if (p_e >= 1.0) throw Error(ErrorCode::kDegenerateMarginals, "chance agreement is 1; kappa undefined");
  return {(p_o - p_e) / (1.0 - p_e), p_o, t};
}

PerDiagnosis<Agreement> rater_agreement(std::span<const std::vector<ChartReview>> patient_reviews) {
  PerDiagnosis<AgreementTable> tables{};
  std::size_t pairs = 0;
  for (const auto& reviews : patient_reviews) {
    for (std::size_t i = 0; i < reviews.size(); ++i) {
      for (std::size_t j = i + 1; j < reviews.size(); ++j) {
        ++pairs;
        for (Diagnosis d : kAllDiagnoses) {
          const bool a = review_assigns(reviews[i], d);
          const bool b = review_assigns(reviews[j], d);
          auto& t = tables[index_of(d)];
          if (a && b) ++t.both_yes;
          else if (a) ++t.first_only;
          else if (b) ++t.second_only;
          else ++t.both_no;
        }
      }
    }
  }
  if (pairs == 0) throw Error(ErrorCode::kTooFewReviews, "agreement needs a patient with two or more reviews");
  PerDiagnosis<Agreement> out;
  for (Diagnosis d : kAllDiagnoses) out[index_of(d)] = cohen_kappa(tables[index_of(d)]);
  return out;
}

PhysicianBenchmark physician_benchmark(std::span<const ChartReview> reviews, Rng& rng) {
  if (reviews.size() < 3) {
    throw Error(ErrorCode::kTooFewReviews, "physician benchmark needs three or more reviews");
  }
  std::uniform_int_distribution<std::size_t> pick(0, reviews.size() - 1);
  const std::size_t held = pick(rng);
  std::vector<ChartReview> rest;
  rest.reserve(reviews.size() - 1);
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    if (i != held) rest.push_back(reviews[i]);
  }
  PhysicianBenchmark out;
  out.held_out = reviews[held];
  for (Diagnosis d : kAllDiagnoses) out.ordinal_scores[index_of(d)] = 5.0 - out.held_out.score(d);
  out.consensus = aggregate_reviews(rest);
  return out;
}

}  // namespace arfdx
