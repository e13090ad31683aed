#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arfdx::cli {

// Exit status: 0 success, 1 module error, 2 configuration or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitModuleError = 1;
inline constexpr int kExitConfigError = 2;

// arfdx synth|label|featurize|split|train|evaluate|explain --config <path> [--seed N] [--out DIR]
//       [--set section.key=value ...]
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arfdx::cli
