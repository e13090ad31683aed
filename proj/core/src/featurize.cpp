#include "arfdx/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "arfdx/error.hpp"
#include "arfdx/io.hpp"
#include "arfdx/stats.hpp"

namespace arfdx {

using nlohmann::json;

void FeaturizerConfig::validate() const {
  if (bins_per_var < 2) throw Error(ErrorCode::kInvalidArgument, "bins_per_var must be >= 2");
  std::set<std::string> seen;
  for (const auto& v : numeric_vars) {
    if (!seen.insert(v).second) throw Error(ErrorCode::kInvalidArgument, "duplicate variable " + v);
  }
  for (const auto& c : categorical_vars) {
    if (!seen.insert(c.name).second) throw Error(ErrorCode::kInvalidArgument, "duplicate variable " + c.name);
    if (c.vocabulary.empty()) throw Error(ErrorCode::kInvalidArgument, "empty vocabulary for " + c.name);
  }
}

std::string featurizer_config_to_json(const FeaturizerConfig& cfg) {
  nlohmann::ordered_json j;
  j["numeric_vars"] = cfg.numeric_vars;
  j["categorical_vars"] = nlohmann::ordered_json::array();
  for (const auto& c : cfg.categorical_vars) {
    j["categorical_vars"].push_back({{"name", c.name}, {"vocabulary", c.vocabulary}});
  }
  j["bins_per_var"] = cfg.bins_per_var;
  j["variable_map"] = cfg.variable_map;
  return j.dump(2);
}

FeaturizerConfig featurizer_config_from_json(std::string_view text) {
  try {
    const json j = json::parse(skip_comment_header(text));
    FeaturizerConfig cfg;
    cfg.numeric_vars = j.at("numeric_vars").get<std::vector<std::string>>();
    for (const auto& c : j.value("categorical_vars", json::array())) {
      cfg.categorical_vars.push_back(
          {c.at("name").get<std::string>(), c.at("vocabulary").get<std::vector<std::string>>()});
    }
    cfg.bins_per_var = j.value("bins_per_var", std::size_t{5});
    cfg.variable_map = j.value("variable_map", std::map<std::string, std::string>{});
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("featurizer config: ") + e.what());
  }
}

ObservationValue latest_value(std::span<const ObservationEvent> events, std::string_view var,
                              const TimeWindow& window) {
  const ObservationEvent* latest = nullptr;
  for (const auto& ev : events) {
    if (ev.variable != var || !window.contains(ev.time)) continue;
    if (std::holds_alternative<std::monostate>(ev.value)) continue;
    if (!latest || ev.time >= latest->time) latest = &ev;
  }
  return latest ? latest->value : ObservationValue{};
}

WindowValues extract_window_values(const PatientStay& stay, const FeaturizerConfig& cfg,
                                   const TimeWindow& window) {
  std::vector<ObservationEvent> canonical;
  canonical.reserve(stay.events.size());
  for (const auto& ev : stay.events) {
    auto mapped = cfg.variable_map.find(ev.variable);
    canonical.push_back(ev);
    if (mapped != cfg.variable_map.end()) canonical.back().variable = mapped->second;
  }
  WindowValues values;
  auto take = [&](const std::string& name) {
    auto v = latest_value(canonical, name, window);
    if (!std::holds_alternative<std::monostate>(v)) values.emplace(name, std::move(v));
  };
  for (const auto& name : cfg.numeric_vars) take(name);
  for (const auto& c : cfg.categorical_vars) take(c.name);
  return values;
}

const FeatureBlock* FittedFeaturizer::find(std::string_view variable) const {
  for (const auto& b : blocks) {
    if (b.variable == variable) return &b;
  }
  return nullptr;
}

std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins) {
  std::sort(values.begin(), values.end());
  if (values.empty() || values.front() == values.back()) return {};
  std::vector<double> edges;
  for (std::size_t k = 1; k < bins; ++k) {
    const double e = stats::quantile_linear(values, static_cast<double>(k) / static_cast<double>(bins));
    if (edges.empty() || e != edges.back()) edges.push_back(e);
  }
  return edges;
}

FittedFeaturizer fit(std::span<const WindowValues> train, const FeaturizerConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "featurizer fit needs training rows");
  FittedFeaturizer f;
  f.bins_per_var = cfg.bins_per_var;
  std::size_t offset = 0;
  for (const auto& name : cfg.numeric_vars) {
    std::vector<double> observed;
    for (const auto& row : train) {
      auto it = row.find(name);
      if (it == row.end()) continue;
      if (const double* v = std::get_if<double>(&it->second); v && std::isfinite(*v)) observed.push_back(*v);
    }
    FeatureBlock block{name, BlockKind::kNumeric, offset, cfg.bins_per_var,
                       quantile_edges(std::move(observed), cfg.bins_per_var), {}};
    offset += block.width;
    f.blocks.push_back(std::move(block));
  }
  for (const auto& c : cfg.categorical_vars) {
    FeatureBlock block{c.name, BlockKind::kCategorical, offset, c.vocabulary.size(), {}, c.vocabulary};
    offset += block.width;
    f.blocks.push_back(std::move(block));
  }
  f.dim = offset;
  return f;
}

std::size_t bin_index(double value, std::span<const double> edges) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::string FeatureVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::vector<std::uint8_t> packed((bits_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  std::string hex;
  hex.reserve(packed.size() * 2);
  for (auto byte : packed) {
    hex += kDigits[byte >> 4];
    hex += kDigits[byte & 0xF];
  }
  return hex;
}

FeatureVector FeatureVector::from_hex(std::string_view hex, std::size_t dim) {
  if (hex.size() != 2 * ((dim + 7) / 8)) {
    throw Error(ErrorCode::kFormatError, "feature hex length does not match dimension");
  }
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw Error(ErrorCode::kFormatError, "invalid hex digit in feature vector");
  };
  FeatureVector x(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const unsigned byte = (nibble(hex[2 * (i / 8)]) << 4) | nibble(hex[2 * (i / 8) + 1]);
    x.set(i, (byte & (0x80u >> (i % 8))) != 0);
  }
  for (std::size_t i = dim; i < 8 * ((dim + 7) / 8); ++i) {
    const unsigned byte = (nibble(hex[2 * (i / 8)]) << 4) | nibble(hex[2 * (i / 8) + 1]);
    if (byte & (0x80u >> (i % 8))) throw Error(ErrorCode::kFormatError, "padding bits set in feature vector");
  }
  return x;
}

FeatureVector encode(const WindowValues& values, const FittedFeaturizer& featurizer) {
  FeatureVector x(featurizer.dim);
  for (const auto& block : featurizer.blocks) {
    auto it = values.find(block.variable);
    if (it == values.end() || std::holds_alternative<std::monostate>(it->second)) continue;
    if (block.kind == BlockKind::kNumeric) {
      const double* v = std::get_if<double>(&it->second);
      if (!v) throw Error(ErrorCode::kBadValue, "non-numeric value for numeric variable " + block.variable);
      if (!std::isfinite(*v)) throw Error(ErrorCode::kBadValue, "non-finite value for " + block.variable);
      x.set(block.offset + bin_index(*v, block.edges));
    } else {
      const std::string* token = std::get_if<std::string>(&it->second);
      if (!token) continue;
      auto pos = std::find(block.vocabulary.begin(), block.vocabulary.end(), *token);
      if (pos != block.vocabulary.end()) {
        x.set(block.offset + static_cast<std::size_t>(pos - block.vocabulary.begin()));
      }
    }
  }
  return x;
}

bool block_present(const FeatureVector& x, const FeatureBlock& block) {
  for (std::size_t i = 0; i < block.width; ++i) {
    if (x.test(block.offset + i)) return true;
  }
  return false;
}

std::vector<MissingnessCorrelation> missingness_correlation(std::span<const FeatureVector> encoded,
                                                            std::span<const DiagnosisLabels> labels,
                                                            const FittedFeaturizer& featurizer) {
  if (encoded.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "missingness_correlation: rows and labels differ in count");
  }
  if (encoded.size() < 2) throw Error(ErrorCode::kInvalidArgument, "missingness_correlation needs >= 2 patients");
  PerDiagnosis<std::vector<double>> label_cols;
  for (Diagnosis d : kAllDiagnoses) {
    for (const auto& l : labels) label_cols[index_of(d)].push_back(l[d] ? 1.0 : 0.0);
  }
  std::vector<MissingnessCorrelation> out;
  for (const auto& block : featurizer.blocks) {
    std::vector<double> present;
    present.reserve(encoded.size());
    for (const auto& x : encoded) present.push_back(block_present(x, block) ? 1.0 : 0.0);
    MissingnessCorrelation row{block.variable, {}};
    for (Diagnosis d : kAllDiagnoses) row.spearman[index_of(d)] = stats::spearman(present, label_cols[index_of(d)]);
    out.push_back(std::move(row));
  }
  return out;
}

std::string FittedFeaturizer::to_json() const {
  nlohmann::ordered_json j;
  j["bins_per_var"] = bins_per_var;
  j["dim"] = dim;
  j["variables"] = nlohmann::ordered_json::array();
  for (const auto& b : blocks) {
    nlohmann::ordered_json v;
    v["name"] = b.variable;
    v["kind"] = b.kind == BlockKind::kNumeric ? "numeric" : "categorical";
    v["offset"] = b.offset;
    v["width"] = b.width;
    if (b.kind == BlockKind::kNumeric) v["edges"] = b.edges;
    else v["vocabulary"] = b.vocabulary;
    j["variables"].push_back(std::move(v));
  }
  return j.dump(2);
}

FittedFeaturizer FittedFeaturizer::from_json(std::string_view text) {
  try {
    const json j = json::parse(skip_comment_header(text));
    FittedFeaturizer f;
    f.bins_per_var = j.at("bins_per_var").get<std::size_t>();
    f.dim = j.at("dim").get<std::size_t>();
    std::size_t offset = 0;
    for (const auto& v : j.at("variables")) {
      FeatureBlock b;
      b.variable = v.at("name").get<std::string>();
      const auto kind = v.at("kind").get<std::string>();
      b.offset = v.at("offset").get<std::size_t>();
      b.width = v.at("width").get<std::size_t>();
      if (kind == "numeric") {
        b.kind = BlockKind::kNumeric;
        b.edges = v.at("edges").get<std::vector<double>>();
        if (!std::is_sorted(b.edges.begin(), b.edges.end()) || b.edges.size() >= b.width) {
          throw Error(ErrorCode::kFormatError, "bad edges for " + b.variable);
        }
      } else if (kind == "categorical") {
        b.kind = BlockKind::kCategorical;
        b.vocabulary = v.at("vocabulary").get<std::vector<std::string>>();
        if (b.vocabulary.size() != b.width) throw Error(ErrorCode::kFormatError, "vocabulary width mismatch");
      } else {
        throw Error(ErrorCode::kFormatError, "unknown variable kind " + kind);
      }
      if (b.offset != offset) throw Error(ErrorCode::kFormatError, "non-contiguous block offsets");
      offset += b.width;
      f.blocks.push_back(std::move(b));
    }
    if (offset != f.dim) throw Error(ErrorCode::kFormatError, "dimension does not match blocks");
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("featurizer: ") + e.what());
  }
}

}  // namespace arfdx
