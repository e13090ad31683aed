#include "arfdx/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arfdx/error.hpp"
#include "arfdx/io.hpp"

namespace arfdx {

using nlohmann::json;

std::string_view to_string(SupportKind kind) {
  switch (kind) {
    case SupportKind::kHfnc: return "HFNC";
    case SupportKind::kNiv: return "NIV";
    case SupportKind::kImv: return "IMV";
  }
  return "HFNC";
}

std::optional<Minutes> detect_arf_onset(const PatientStay& stay) {
  std::optional<Minutes> onset;
  for (const auto& ev : stay.support_events) {
    if (!onset || ev.time < *onset) onset = ev.time;
  }
  return onset;
}

namespace {

Minutes require_onset(const PatientStay& stay) {
  auto onset = detect_arf_onset(stay);
  if (!onset) throw Error(ErrorCode::kOnsetRequired, "stay " + stay.patient_id + " has no ARF onset");
  return *onset;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

bool exclude_surgical(const PatientStay& stay, const CohortConfig& cfg) {
  const Minutes onset = require_onset(stay);
  if (stay.post_surgical) return true;
  for (const auto& unit : stay.unit_intervals) {
    if (!cfg.surgical_units.contains(unit.unit_code)) continue;
    if (onset >= unit.start && onset <= unit.end + cfg.post_surgical_buffer) return true;
  }
  return false;
}

bool include_stay(const PatientStay& stay, const CohortConfig& cfg) {
  const auto onset = detect_arf_onset(stay);
  if (!onset) return false;
  if (*onset - stay.admit_time > cfg.onset_horizon) return false;
  if (stay.studies.empty()) return false;
  return !exclude_surgical(stay, cfg);
}

TimeWindow observation_window(const PatientStay& stay, const CohortConfig& cfg) {
  const Minutes onset = require_onset(stay);
  if (onset - stay.admit_time > cfg.min_window) return {stay.admit_time, onset};
  return {stay.admit_time, stay.admit_time + cfg.min_window};
}

const ImagingStudy& select_study(const PatientStay& stay) {
  if (stay.studies.empty()) throw Error(ErrorCode::kNoStudy, "stay " + stay.patient_id + " has no imaging study");
  const Minutes onset = require_onset(stay);
  const ImagingStudy* best = &stay.studies.front();
  auto distance = [&](const ImagingStudy& s) { return s.time > onset ? s.time - onset : onset - s.time; };
  for (const auto& study : stay.studies) {
    const auto d = distance(study);
    const auto best_d = distance(*best);
    if (d < best_d || (d == best_d && study.time < best->time)) best = &study;
    // identical times: keep the smaller id so the choice is order-free
    else if (d == best_d && study.time == best->time && study.study_id < best->study_id) best = &study;
  }
  return *best;
}

std::optional<SupportKind> parse_support_kind(std::string_view text, const CohortConfig& cfg) {
  const std::string key = lower(text);
  if (key == "hfnc") return SupportKind::kHfnc;
  if (key == "niv") return SupportKind::kNiv;
  if (key == "imv") return SupportKind::kImv;
  for (const auto& [alias, kind] : cfg.support_aliases) {
    if (lower(alias) == key) return kind;
  }
  return std::nullopt;
}

std::optional<std::string> validate_stay(const PatientStay& stay) {
  if (stay.patient_id.empty()) return "patient_id is empty";
  for (const auto& ev : stay.events) {
    if (ev.variable.empty()) return "event with empty variable name";
    if (ev.time < stay.admit_time) return "event '" + ev.variable + "' precedes admit_time";
    if (const double* v = std::get_if<double>(&ev.value); v && !std::isfinite(*v)) {
      return "non-finite value for '" + ev.variable + "'";
    }
  }
  for (const auto& s : stay.support_events) {
    if (s.time < stay.admit_time) return "support event precedes admit_time";
  }
  for (const auto& study : stay.studies) {
    if (study.time < stay.admit_time) return "study '" + study.study_id + "' precedes admit_time";
    if (study.image_refs.empty()) return "study '" + study.study_id + "' has no images";
  }
  std::map<std::string, std::vector<std::pair<Minutes, Minutes>>> by_unit;
  for (const auto& u : stay.unit_intervals) {
    if (u.end < u.start) return "unit interval '" + u.unit_code + "' ends before it starts";
    by_unit[u.unit_code].emplace_back(u.start, u.end);
  }
  for (auto& [code, spans] : by_unit) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first < spans[i - 1].second) return "overlapping intervals for unit '" + code + "'";
    }
  }
  for (const auto& r : stay.reviews) {
    for (double s : r.scores) {
      if (!(s >= 1.0 && s <= 4.0)) return "review rating outside [1, 4] from '" + r.reviewer_id + "'";
    }
  }
  return std::nullopt;
}

namespace {

json value_to_json(const ObservationValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  return nullptr;
}

ObservationValue value_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorCode::kFormatError, "event value must be number, string or null");
}

Minutes minutes_field(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw Error(ErrorCode::kFormatError, std::string(key) + " must be integer minutes");
  return Minutes{v.get<std::int64_t>()};
}

}  // namespace

std::string stay_to_json(const PatientStay& stay) {
  json j;
  j["patient_id"] = stay.patient_id;
  j["admit_time"] = stay.admit_time.count();
  j["events"] = json::array();
  for (const auto& ev : stay.events) {
    j["events"].push_back({{"variable", ev.variable}, {"time", ev.time.count()}, {"value", value_to_json(ev.value)}});
  }
  j["support_events"] = json::array();
  for (const auto& s : stay.support_events) {
    j["support_events"].push_back({{"time", s.time.count()}, {"support_kind", to_string(s.kind)}});
  }
  j["studies"] = json::array();
  for (const auto& st : stay.studies) {
    j["studies"].push_back({{"study_id", st.study_id}, {"time", st.time.count()}, {"image_refs", st.image_refs}});
  }
  j["unit_intervals"] = json::array();
  for (const auto& u : stay.unit_intervals) {
    j["unit_intervals"].push_back({{"unit_code", u.unit_code}, {"start", u.start.count()}, {"end", u.end.count()}});
  }
  j["reviews"] = json::array();
  for (const auto& r : stay.reviews) {
    json scores;
    for (Diagnosis d : kAllDiagnoses) scores[std::string(diagnosis_name(d))] = r.score(d);
    j["reviews"].push_back({{"reviewer_id", r.reviewer_id}, {"scores", scores}});
  }
  j["icd_codes"] = stay.icd_codes;
  j["medications"] = stay.medications;
  if (stay.post_surgical) j["post_surgical"] = true;
  return j.dump();
}

PatientStay stay_from_json(std::string_view line, const CohortConfig& cfg) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kFormatError, std::string("invalid JSON: ") + e.what());
  }
  try {
    PatientStay stay;
    stay.patient_id = j.at("patient_id").get<std::string>();
    stay.admit_time = minutes_field(j, "admit_time");
    for (const auto& ev : j.value("events", json::array())) {
      stay.events.push_back({ev.at("variable").get<std::string>(), minutes_field(ev, "time"),
                             value_from_json(ev.value("value", json(nullptr)))});
    }
    for (const auto& s : j.value("support_events", json::array())) {
      auto kind = parse_support_kind(s.at("support_kind").get<std::string>(), cfg);
      if (kind) stay.support_events.push_back({minutes_field(s, "time"), *kind});
    }
    for (const auto& st : j.value("studies", json::array())) {
      stay.studies.push_back({st.at("study_id").get<std::string>(), minutes_field(st, "time"),
                              st.at("image_refs").get<std::vector<std::string>>()});
    }
    for (const auto& u : j.value("unit_intervals", json::array())) {
      stay.unit_intervals.push_back(
          {u.at("unit_code").get<std::string>(), minutes_field(u, "start"), minutes_field(u, "end")});
    }
    for (const auto& r : j.value("reviews", json::array())) {
      ChartReview review;
      review.reviewer_id = r.at("reviewer_id").get<std::string>();
      const auto& scores = r.at("scores");
      for (Diagnosis d : kAllDiagnoses) {
        const std::string name(diagnosis_name(d));
        if (!scores.contains(name)) throw Error(ErrorCode::kFormatError, "review missing score for " + name);
        review.scores[index_of(d)] = scores.at(name).get<double>();
      }
      stay.reviews.push_back(std::move(review));
    }
    for (const auto& c : j.value("icd_codes", json::array())) stay.icd_codes.insert(c.get<std::string>());
    for (const auto& m : j.value("medications", json::array())) stay.medications.insert(m.get<std::string>());
    stay.post_surgical = j.value("post_surgical", false);
    return stay;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, e.what());
  }
}

IngestResult parse_cohort(std::istream& in, const CohortConfig& cfg) {
  IngestResult result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      PatientStay stay = stay_from_json(line, cfg);
      if (auto reason = validate_stay(stay)) {
        result.rejects.push_back({line_number, *reason});
        continue;
      }
      result.stays.push_back(std::move(stay));
    } catch (const Error& e) {
      result.rejects.push_back({line_number, e.what()});
    }
  }
  return result;
}

IngestResult read_cohort(const std::filesystem::path& path, const CohortConfig& cfg,
                         std::optional<std::filesystem::path> rejects_path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cohort file " + path.string());
  IngestResult result = parse_cohort(in, cfg);
  std::ostringstream rejects;
  for (const auto& r : result.rejects) rejects << r.line_number << '\t' << r.reason << '\n';
  if (!rejects_path) {
    rejects_path = path;
    *rejects_path += ".rejects";
  }
  write_file_atomic(*rejects_path, rejects.str());
  return result;
}

void write_cohort(std::ostream& out, std::span<const PatientStay> stays) {
  for (const auto& stay : stays) out << stay_to_json(stay) << '\n';
}

}  // namespace arfdx
