#include "arfdx/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>

#include "arfdx/rng.hpp"

namespace arfdx::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> d{
      {"run.seed", ""},
      {"run.out", "out"},
      {"paths.cohort", ""},
      {"paths.embeddings", ""},
      {"paths.ruleset", ""},
      {"paths.featurizer", ""},
      {"cohort.onset_horizon_hours", "168"},
      {"cohort.min_window_hours", "24"},
      {"cohort.post_surgical_buffer_hours", "24"},
      {"synth.n_patients", "2000"},
      {"synth.n_numeric_vars", "12"},
      {"synth.emb_dim", "16"},
      {"synth.prevalences", "0.31,0.22,0.09"},
      {"synth.ehr_signal", "0.9"},
      {"synth.emb_signal", "0.9"},
      {"synth.missing_base", "0.2"},
      {"synth.missing_shift", "-0.1,0.1,0.05"},
      {"synth.reviewer_noise", "0.5"},
      {"synth.two_image_fraction", "0.3"},
      {"labels.source", "chart_review"},
      {"featurize.bins_per_var", "5"},
      {"train.families", "ehr,image,combined"},
      {"train.learning_rates", "1e-4,1e-3,1e-2,1e-1,1,3"},
      {"train.momenta", "0.8,0.9"},
      {"train.weight_decays", "1e-4,1e-3,1e-2,1e-1"},
      {"train.batch_size", "32"},
      {"train.patience", "5"},
      {"train.max_epochs", "100"},
      {"train.hidden", "100"},
      {"explain.model", "combined"},
      {"explain.repetitions", "10"},
      {"explain.correlation_threshold", "0.6"},
  };
  return d;
}

RunConfig RunConfig::load(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides) {
  RunConfig cfg;
  cfg.values_ = defaults();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("config " + file->string() + ": " + e.message() + " at line " +
                        std::to_string(e.line()));
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError("config key '" + section + "' is outside any section");
      for (const auto& [key, node] : body) cfg.set(section + "." + key, node.data());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not section.key=value");
    cfg.set(trim(std::string_view(o).substr(0, eq)), trim(std::string_view(o).substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = trim(value);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::string_view s = get(key);
  while (!s.empty()) {
    const auto comma = s.find(',');
    std::string item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw ConfigError(key + ": expected numbers, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::uint64_t RunConfig::seed() const {
  const std::string& s = get("run.seed");
  if (s.empty()) throw ConfigError("run.seed is required (set it in the config or pass --seed)");
  return get_size("run.seed");
}

std::filesystem::path RunConfig::out_dir() const { return get("run.out"); }

std::filesystem::path RunConfig::path(const std::string& name, const std::string& default_name) const {
  const std::string& v = get("paths." + name);
  if (v.empty()) return out_dir() / default_name;
  return v;
}

std::string RunConfig::canonical() const {
  std::string text;
  for (const auto& [k, v] : values_) {
    if (k != "run.out") text += k + "=" + v + "\n";
  }
  return text;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

}  // namespace arfdx::cli
