#pragma once

#include <cstdint>
#include <string>

#include "subpflow/config.hpp"

namespace subpflow {

/// Exit codes of the batch runner (and the CLI wrapping it).
enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kValidation = 2,
  kInstability = 3,
  kIo = 4,
};

struct RunOptions {
  std::string out_dir;  // empty: use the config's output.dir
  std::uint64_t seed = 0;
  bool quiet = false;
  Exec exec = Exec::parallel;
};

/// Orchestrates one subcommand over a parsed config; writes JSON-lines, CSV
/// and a plain-text summary into the output directory and returns an exit
/// code. Deterministic given (config, seed).
int run_solve(const ExperimentConfig& cfg, const RunOptions& opt);
int run_verify(const ExperimentConfig& cfg, const RunOptions& opt);
int run_moser(const ExperimentConfig& cfg, const RunOptions& opt);
int run_structure(const ExperimentConfig& cfg, const RunOptions& opt);
int run_sweep(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace subpflow
