#pragma once

#include <iosfwd>

namespace sensnet {

// Runs the command-line tool. Returns the process exit status.
int run_cli(int argc, char** argv);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sensnet
