#include "arfdx/cli/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include "arfdx/error.hpp"
#include "commands.hpp"

namespace arfdx::cli {

namespace {

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ARFDX_THREADS"); env && *env) {
    std::size_t cap = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec != std::errc() || ptr != s.data() + s.size() || cap == 0) {
      throw ConfigError("ARFDX_THREADS must be a positive integer, got '" + std::string(s) + "'");
    }
    n = std::min(n, cap);
  }
  return n;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::map<std::string, std::pair<std::string, std::function<void(const Context&)>>> commands{
      {"synth", {"generate a synthetic cohort", cmd_synth}},
      {"label", {"chart-review and code+medication labels, agreement report", cmd_label}},
      {"split", {"patient-level train/validation/test splits", cmd_split}},
      {"featurize", {"fit and apply the EHR featurizer per split, missingness report", cmd_featurize}},
      {"train", {"hyperparameter sweep per model family and split", cmd_train}},
      {"evaluate", {"test metrics, cross-split summary, physician comparison, plot data", cmd_evaluate}},
      {"explain", {"grouped permutation importance", cmd_explain}},
  };

  CLI::App app{"Multimodal acute respiratory failure diagnosis pipeline", "arfdx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ARFDX_VERSION);
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "config file (INI)");
    sub->add_option("--seed", seed, "run seed, overrides run.seed");
    sub->add_option("--out", out_dir, "output directory, overrides run.out");
    sub->add_option("--set", overrides, "section.key=value override")->take_all();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::vector<std::string> all = overrides;
    if (seed) all.push_back("run.seed=" + std::to_string(*seed));
    if (out_dir) all.push_back("run.out=" + *out_dir);
    std::optional<std::filesystem::path> file;
    if (config_path) file = *config_path;
    Context ctx{command, RunConfig::load(file, all), thread_cap(), out};
    commands.at(command).second(ctx);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "arfdx " << command << ": config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const IoError& e) {
    err << "arfdx " << command << ": io error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "arfdx " << command << ": io error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    err << "arfdx " << command << ": error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitModuleError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"arfdx"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace arfdx::cli
