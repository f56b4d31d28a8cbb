#pragma once

#include <string>
#include <vector>

namespace vibronic::cli {

struct CliOptions {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;  // repeatable --set key=value
  int workers = 0;                     // 0: hardware concurrency
  bool plot = false;
};

// Runs one subcommand; returns the process exit code
// (0 success, 1 numerical failure, 2 configuration error).
int run_command(const CliOptions& opt);

// Full argv entry point used by the binary.
int run(int argc, char** argv);

}  // namespace vibronic::cli
