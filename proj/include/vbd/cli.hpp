#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vbd/datagen.hpp"
#include "vbd/model.hpp"

namespace vbd::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUserError = 2,
  kNumericalFailure = 3,
};

/// Resolved options for one command. Values come from the optional
/// --config JSON file first and are then overridden by explicit flags.
struct RunConfig {
  std::string command;
  std::optional<std::filesystem::path> params_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> dataset_path;
  std::uint64_t seed = 42;
  double days = 1080.0;
  std::size_t starts = 16;
  double noise_diabetic = 0.15;
  double noise_nondiabetic = 0.20;
  InitialFractions initial;
  std::vector<std::string> free_parameters = {"a_mean", "a_amp", "gamma_md", "gamma_nd"};
  unsigned threads = 0;
  bool force = false;
  bool quiet = false;
  bool timestamp = false;
};

/// Parses argv-style arguments (without the program name) and runs the
/// selected subcommand. Messages go to `out` / `err`; the return value is
/// one of ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_r0(const RunConfig& config, std::ostream& out);
int cmd_generate(const RunConfig& config, std::ostream& out);
int cmd_calibrate(const RunConfig& config, std::ostream& out);
int cmd_analyze(const RunConfig& config, std::ostream& out);

}  // namespace vbd::cli
