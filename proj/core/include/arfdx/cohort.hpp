#pragma once

// Cohort selection: ARF onset detection, inclusion/exclusion rules, the EHR
// observation window and the imaging-study choice, plus NDJSON ingestion of
// patient stays.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arfdx/types.hpp"

namespace arfdx {

enum class SupportKind { kHfnc, kNiv, kImv };

std::string_view to_string(SupportKind kind);

// Absent (monostate), numeric, or categorical token.
using ObservationValue = std::variant<std::monostate, double, std::string>;

struct ObservationEvent {
  std::string variable;
  Minutes time{0};
  ObservationValue value;
};

struct SupportEvent {
  Minutes time{0};
  SupportKind kind = SupportKind::kHfnc;
};

struct ImagingStudy {
  std::string study_id;
  Minutes time{0};
  std::vector<std::string> image_refs;
};

struct UnitInterval {
  std::string unit_code;
  Minutes start{0};
  Minutes end{0};
};

struct PatientStay {
  std::string patient_id;
  Minutes admit_time{0};
  std::vector<ObservationEvent> events;
  std::vector<SupportEvent> support_events;
  std::vector<ImagingStudy> studies;
  std::vector<UnitInterval> unit_intervals;
  std::vector<ChartReview> reviews;
  std::set<std::string> icd_codes;
  std::set<std::string> medications;
  // Set at ingestion for stays admitted to an ICU after a surgical procedure.
  bool post_surgical = false;
};

struct CohortConfig {
  Minutes onset_horizon = days(7);
  Minutes min_window = hours(24);
  std::set<std::string> surgical_units{"CSURG", "NSURG", "ORTHO", "SURG", "TSURG", "VSURG"};
  Minutes post_surgical_buffer = hours(24);
  // Site-specific support strings, matched case-insensitively. The canonical
  // names HFNC, NIV and IMV are always accepted.
  std::map<std::string, SupportKind> support_aliases{
      {"high flow nasal cannula", SupportKind::kHfnc},
      {"bipap mask", SupportKind::kNiv},
      {"bipap", SupportKind::kNiv},
      {"endotracheal tube", SupportKind::kImv},
  };
};

struct TimeWindow {
  Minutes start{0};
  Minutes end{0};

  bool contains(Minutes t) const { return start <= t && t <= end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// Earliest HFNC/NIV/IMV support time, or nullopt.
std::optional<Minutes> detect_arf_onset(const PatientStay& stay);

// Requires an onset (throws OnsetRequired otherwise).
bool exclude_surgical(const PatientStay& stay, const CohortConfig& cfg);

bool include_stay(const PatientStay& stay, const CohortConfig& cfg);

// (admit, onset) when onset - admit exceeds min_window, else (admit, admit + min_window).
TimeWindow observation_window(const PatientStay& stay, const CohortConfig& cfg = {});

// Study nearest the onset; an exact tie goes to the earlier study.
const ImagingStudy& select_study(const PatientStay& stay);

std::optional<SupportKind> parse_support_kind(std::string_view text, const CohortConfig& cfg);

// Empty when the stay satisfies the PatientStay invariants, otherwise the reason.
std::optional<std::string> validate_stay(const PatientStay& stay);

struct RejectedLine {
  std::size_t line_number = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<PatientStay> stays;
  std::vector<RejectedLine> rejects;
};

// One PatientStay per line. Blank lines and '#' comment lines are skipped.
IngestResult parse_cohort(std::istream& in, const CohortConfig& cfg = {});

// Reads the file and writes "<line>\t<reason>" records to `rejects_path`
// (defaults to "<path>.rejects").
IngestResult read_cohort(const std::filesystem::path& path, const CohortConfig& cfg = {},
                         std::optional<std::filesystem::path> rejects_path = std::nullopt);

std::string stay_to_json(const PatientStay& stay);
PatientStay stay_from_json(std::string_view line, const CohortConfig& cfg = {});

void write_cohort(std::ostream& out, std::span<const PatientStay> stays);

}  // namespace arfdx
