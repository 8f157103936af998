#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subpflow/moser.hpp"
#include "subpflow/presets.hpp"
#include "subpflow/solver.hpp"

namespace subpflow {

struct VerificationEntry {
  std::vector<std::string> inequalities;  // "all" expands to every report
  std::vector<double> betas;
  CylinderSpec cylinder;  // t0 == NaN anchors at the final output time
};

struct MoserConfig {
  HeisenbergPoint center;
  double r = 0.25;
  double mu = 0.1;
  int levels = 3;
  double t0 = nan_time();
};

struct StructureModelConfig {
  std::string variant = "model";  // model | regularized | lifted
  double p = 2.0;
  double delta = 0.0;
  double reg_delta = 0.5;  // regularized: the added-term delta
  double eps = 0.5;        // lifted
  double lambda = std::numeric_limits<double>::quiet_NaN();  // default lambda_struct
};

struct StructureConfig {
  long samples = 10000;
  std::vector<StructureModelConfig> models;
};

struct SweepConfig {
  std::string parameter;  // delta | eps | h
  std::vector<double> values;
};

struct OutputConfig {
  std::string dir = "out";
  bool jsonl = true;
  bool csv = true;
  bool summary = true;
};

struct ExperimentConfig {
  ProblemSpec problem;
  PresetParams initial;  // kept for provenance in summaries
  std::optional<double> eps;
  double lift_lambda = std::numeric_limits<double>::quiet_NaN();
  std::vector<VerificationEntry> verification;
  std::optional<MoserConfig> moser;
  std::optional<StructureConfig> structure;
  std::optional<SweepConfig> sweeps;
  OutputConfig output;
};

/// Parses and validates a JSON experiment config; throws ValidationError
/// carrying a line/field diagnostic.
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

}  // namespace subpflow
