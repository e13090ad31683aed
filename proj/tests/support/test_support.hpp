#pragma once

// Seeded generators and brute-force oracles shared by unit and acceptance
// tests. Oracles deliberately avoid the library's own helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "arfdx/cohort.hpp"
#include "arfdx/types.hpp"

namespace arfdx::testing {

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline std::size_t uniform_index(Gen& g, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

// Scores drawn either continuously or from a coarse grid so ties are common.
inline std::vector<double> random_scores(Gen& g, std::size_t n) {
  const bool coarse = uniform(g) < 0.5;
  std::vector<double> s(n);
  for (auto& v : s) v = coarse ? static_cast<double>(uniform_index(g, 0, 5)) / 5.0 : uniform(g);
  return s;
}

// Labels with at least one of each class; n >= 2.
inline std::vector<int> random_labels(Gen& g, std::size_t n) {
  std::vector<int> y(n);
  const double p = uniform(g, 0.1, 0.9);
  for (auto& v : y) v = uniform(g) < p ? 1 : 0;
  const auto ones = std::count(y.begin(), y.end(), 1);
  if (ones == 0) y[uniform_index(g, 0, n - 1)] = 1;
  if (ones == static_cast<std::ptrdiff_t>(n)) y[uniform_index(g, 0, n - 1)] = 0;
  return y;
}

// Pairwise concordance over every positive/negative pair.
inline double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) num += 1.0;
      else if (s[i] == s[j]) num += 0.5;
    }
  }
  return num / pairs;
}

// Step integration of precision over recall, one step per distinct threshold.
inline double step_aupr(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  double positives = 0.0;
  for (int v : y) positives += v;
  double prev_recall = 0.0, area = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1.0;
    }
    const double recall = tp / positives;
    area += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
  }
  return area;
}

inline PatientStay stay_with_onset(Minutes admit, Minutes onset) {
  PatientStay s;
  s.patient_id = "p";
  s.admit_time = admit;
  s.support_events.push_back({onset, SupportKind::kNiv});
  s.studies.push_back({"s1", onset, {"img1"}});
  return s;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("arfdx_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace arfdx::testing
