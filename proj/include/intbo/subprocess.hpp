#pragma once

#include <string>

namespace intbo {

struct CommandResult {
  int exit_code = 0;
  std::string output;  // captured standard output
};

/// Runs `command` through /bin/sh, feeding `input` on standard input and
/// capturing standard output. Standard error is inherited.
CommandResult run_command(const std::string& command, const std::string& input);

}  // namespace intbo
