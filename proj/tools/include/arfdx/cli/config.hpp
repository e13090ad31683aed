#pragma once

// Run configuration: INI-style "key = value" text with [section] headers.
// Precedence is command-line flags, then the config file, then built-in
// defaults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace arfdx::cli {

// Bad config file, unknown key or unparsable value. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  // Every known "section.key" with its default value.
  static const std::map<std::string, std::string>& defaults();

  // `overrides` are "section.key=value" strings applied after the file.
  static RunConfig load(const std::optional<std::filesystem::path>& file,
                        const std::vector<std::string>& overrides = {});

  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  // Throws ConfigError when run.seed is unset.
  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;
  // paths.<name>; an empty value resolves to `default_name` inside out_dir().
  std::filesystem::path path(const std::string& name, const std::string& default_name) const;

  // Sorted "section.key=value" lines of the effective configuration, without
  // run.out so relocated runs hash the same.
  std::string canonical() const;
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace arfdx::cli
