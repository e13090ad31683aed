#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "arfdx/cli/config.hpp"

namespace arfdx::cli {

struct Context {
  std::string command;
  RunConfig config;
  std::size_t threads = 1;
  std::ostream& out;
};

void cmd_synth(const Context& ctx);
void cmd_label(const Context& ctx);
void cmd_split(const Context& ctx);
void cmd_featurize(const Context& ctx);
void cmd_train(const Context& ctx);
void cmd_evaluate(const Context& ctx);
void cmd_explain(const Context& ctx);

}  // namespace arfdx::cli
