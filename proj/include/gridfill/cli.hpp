#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gridfill {

/// Runs the `gridfill` command line. `args` excludes the program name.
/// Returns 0 on success, 2 on invalid input and 1 on runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Long option names ("--seed", ...) accepted by a subcommand.
std::vector<std::string> cli_option_names(const std::string& subcommand);

/// Names of all subcommands.
std::vector<std::string> cli_subcommands();

}  // namespace gridfill
