#pragma once

// Most-recent-value binary encoding of windowed EHR observations. Each numeric
// variable owns a block of `bins_per_var` range indicators cut at training
// quantiles; each categorical variable owns a one-hot block over its
// vocabulary. An all-zero block means the variable was not observed.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arfdx/cohort.hpp"
#include "arfdx/types.hpp"

namespace arfdx {

struct CategoricalVariable {
  std::string name;
  std::vector<std::string> vocabulary;
};

struct FeaturizerConfig {
  std::vector<std::string> numeric_vars;
  std::vector<CategoricalVariable> categorical_vars;
  std::size_t bins_per_var = 5;
  // Site variable name -> canonical name. Unmapped names pass through.
  std::map<std::string, std::string> variable_map;

  // Throws InvalidArgument when the config breaks its invariants.
  void validate() const;
};

std::string featurizer_config_to_json(const FeaturizerConfig& cfg);
FeaturizerConfig featurizer_config_from_json(std::string_view text);

// Latest value per canonical variable inside the window; missing variables
// are simply absent from the map.
using WindowValues = std::map<std::string, ObservationValue>;

// Value of the latest event for `var` with time in [window.start, window.end].
// Ties on time go to the later event in input order. Absent-valued events do
// not count as observations.
ObservationValue latest_value(std::span<const ObservationEvent> events, std::string_view var,
                              const TimeWindow& window);

WindowValues extract_window_values(const PatientStay& stay, const FeaturizerConfig& cfg,
                                   const TimeWindow& window);

enum class BlockKind { kNumeric, kCategorical };

struct FeatureBlock {
  std::string variable;
  BlockKind kind = BlockKind::kNumeric;
  std::size_t offset = 0;
  std::size_t width = 0;
  std::vector<double> edges;            // numeric only, ascending, <= width - 1 cut points
  std::vector<std::string> vocabulary;  // categorical only
};

struct FittedFeaturizer {
  std::size_t bins_per_var = 5;
  std::vector<FeatureBlock> blocks;
  std::size_t dim = 0;

  const FeatureBlock* find(std::string_view variable) const;

  std::string to_json() const;
  static FittedFeaturizer from_json(std::string_view text);
};

// Cut points at the k/bins quantiles. Fewer than two distinct values yields
// no edges; repeated edges collapse to one.
std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins);

FittedFeaturizer fit(std::span<const WindowValues> train, const FeaturizerConfig& cfg);

// Number of edges strictly below `value`.
std::size_t bin_index(double value, std::span<const double> edges);

class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::size_t dim) : bits_(dim, 0) {}

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool on = true) { bits_[i] = on ? 1 : 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  // Packed big-endian bit order: bit i lives in byte i/8 under mask 0x80 >> (i % 8).
  std::string to_hex() const;
  static FeatureVector from_hex(std::string_view hex, std::size_t dim);

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Throws BadValue for a non-finite or non-numeric value of a numeric variable.
FeatureVector encode(const WindowValues& values, const FittedFeaturizer& featurizer);

bool block_present(const FeatureVector& x, const FeatureBlock& block);

struct MissingnessCorrelation {
  std::string variable;
  // nullopt when the presence indicator or the label is constant.
  PerDiagnosis<std::optional<double>> spearman;
};

std::vector<MissingnessCorrelation> missingness_correlation(std::span<const FeatureVector> encoded,
                                                            std::span<const DiagnosisLabels> labels,
                                                            const FittedFeaturizer& featurizer);

}  // namespace arfdx
