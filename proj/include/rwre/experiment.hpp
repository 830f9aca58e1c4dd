#pragma once

// Config-driven experiment runner behind the `rwre-lab` CLI. Each named
// experiment binds the simulation kernels to the analytic bounds and writes
// three artifacts into output_dir:
//   results.csv  — per-replicate (or per-item) rows, schema fixed per
//                  experiment and documented in the README; floats carry 17
//                  significant digits
//   summary.json — the fully resolved config echoed back, estimates, analytic
//                  values and a pass flag per check (no timestamps; reruns
//                  are byte-identical for a fixed config)
//   plot.dat     — whitespace-separated x-y columns for external plotting
//
// Exit-code contract: 0 = ran and all checks passed, 1 = ran but a check
// failed, 2 = the config did not validate (reported as ConfigError).

#include <cstdint>
#include <string>

#include <json.hpp>

namespace rwre::experiment {

inline constexpr const char* kExperimentNames[] = {
    "kalikow",        "rare_anomaly", "greens_ratio", "coupling",
    "animals",        "counterexample", "solomon",    "oracle_xcheck"};

struct ExperimentConfig {
  std::string experiment;
  std::string output_dir;
  std::uint64_t seed = 0;
  nlohmann::json raw;  // resolved config (defaults filled in), echoed verbatim
};

// Validates the common fields (experiment name, mandatory seed — wall-clock
// seeding is deliberately impossible — and output_dir). Experiment-specific
// fields are validated by run_experiment before any simulation starts.
// Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::string& path);

struct ExperimentResult {
  int exit_code = 0;  // 0 or 1; config errors surface as ConfigError instead
  nlohmann::json summary;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Backing for `rwre-lab bounds --spec f.json`: accepts either a full model
// object or {p, blue, red} and returns the analytic report.
nlohmann::json run_bounds_query(const nlohmann::json& q);

// Backing for `rwre-lab oracle --query f.json`: op dispatch over the exact
// finite-window solvers (local time, hitting probability, annealed sums).
nlohmann::json run_oracle_query(const nlohmann::json& q);

}  // namespace rwre::experiment
