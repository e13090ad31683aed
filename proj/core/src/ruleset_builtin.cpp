// ICD-10 discharge codes and external-cohort medication names used for
// code+medication phenotyping.

#include <array>
#include <string_view>

#include "arfdx/labels.hpp"

namespace arfdx {

namespace {

using namespace std::string_view_literals;

constexpr std::array kPneumoniaCodes{
    "J69.0"sv,
    "A48.1"sv,
    "J09.X1"sv,
    "J10.00"sv,
    "J10.01"sv,
    "J10.08"sv,
    "J11.00"sv,
    "J11.08"sv,
    "J12.0"sv,
    "J12.1"sv,
    "J12.2"sv,
    "J12.3"sv,
    "J12.81"sv,
    "J12.89"sv,
    "J12.9"sv,
    "J13"sv,
    "J14"sv,
    "J15.0"sv,
    "J15.1"sv,
    "J15.20"sv,
    "J15.211"sv,
    "J15.212"sv,
    "J15.29"sv,
    "J15.3"sv,
    "J15.4"sv,
    "J15.5"sv,
    "J15.6"sv,
    "J15.7"sv,
    "J15.8"sv,
    "J15.9"sv,
    "J16.0"sv,
    "J16.8"sv,
    "J18.0"sv,
    "J18.1"sv,
    "J18.8"sv,
    "J18.9"sv,
};

constexpr std::array kHeartFailureCodes{
    "I11.0"sv,
    "I13.0"sv,
    "I13.2"sv,
    "I50.1"sv,
    "I50.20"sv,
    "I50.21"sv,
    "I50.22"sv,
    "I50.23"sv,
    "I50.30"sv,
    "I50.31"sv,
    "I50.32"sv,
    "I50.33"sv,
    "I50.40"sv,
    "I50.41"sv,
    "I50.42"sv,
    "I50.43"sv,
    "I50.810"sv,
    "I50.811"sv,
    "I50.812"sv,
    "I50.813"sv,
    "I50.814"sv,
    "I50.82"sv,
    "I50.83"sv,
    "I50.84"sv,
    "I50.89"sv,
    "I50.9"sv,
};

constexpr std::array kCopdCodes{
    "J41.0"sv,
    "J41.1"sv,
    "J41.8"sv,
    "J42"sv,
    "J43.0"sv,
    "J43.1"sv,
    "J43.2"sv,
    "J43.8"sv,
    "J43.9"sv,
    "J44.0"sv,
    "J44.1"sv,
    "J44.9"sv,
};

constexpr std::array kPneumoniaMeds{
    "Amoxicillin-Clavulanate Susp."sv,
    "Amoxicillin-Clavulanic Acid"sv,
    "Ampicillin-Sulbactam"sv,
    "Azithromycin"sv,
    "Aztreonam"sv,
    "CIPROFLOXACIN"sv,
    "CefTAZidime"sv,
    "CefTRIAxone"sv,
    "CefePIME"sv,
    "Cefpodoxime Proxetil"sv,
    "Ceftaroline"sv,
    "CeftriaXONE"sv,
    "Ciprofloxacin"sv,
    "Clindamycin"sv,
    "DiCLOxacillin"sv,
    "Doxycycline Hyclate"sv,
    "Ertapenem Sodium"sv,
    "Imipenem-Cilastatin"sv,
    "Levofloxacin"sv,
    "Linezolid"sv,
    "Meropenem"sv,
    "Moxifloxacin"sv,
    "Piperacillin-Tazobactam"sv,
    "Tigecycline"sv,
    "Tobramycin"sv,
    "Vancomycin"sv,
    "ceftazidime-avibactam"sv,
    "gatifloxacin"sv,
    "imipenem-cilastatin"sv,
    "moxifloxacin"sv,
};

constexpr std::array kHeartFailureMeds{
    "Bumetanide"sv,
    "Chlorothiazide"sv,
    "Ethacrynate Sodium"sv,
    "Furosemid"sv,
    "Furosemide"sv,
    "Furosemide in 0.9% Sodium Chloride"sv,
    "Furosemide-Heart Failure"sv,
    "Metolazone"sv,
    "Torsemide"sv,
};

constexpr std::array kCopdMeds{
    "MethylPREDNISolone Sodium Succ"sv,
    "Methylprednisolone"sv,
    "PredniSONE"sv,
    "predniSONE"sv,
};

template <std::size_t N, std::size_t M>
PhenotypeRule make_rule(const std::array<std::string_view, N>& codes, const std::array<std::string_view, M>& meds) {
  PhenotypeRule rule;
  for (auto c : codes) rule.icd_codes.insert(normalize_icd(c));
  for (auto m : meds) rule.medications.insert(normalize_medication(m));
  return rule;
}

}  // namespace

PhenotypeRuleset builtin_ruleset() {
  PhenotypeRuleset r;
  r.rules[index_of(Diagnosis::kPneumonia)] = make_rule(kPneumoniaCodes, kPneumoniaMeds);
  r.rules[index_of(Diagnosis::kHeartFailure)] = make_rule(kHeartFailureCodes, kHeartFailureMeds);
  r.rules[index_of(Diagnosis::kCopd)] = make_rule(kCopdCodes, kCopdMeds);
  return r;
}

}  // namespace arfdx
