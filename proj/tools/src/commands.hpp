#pragma once

#include <string>

#include "run_config.hpp"

namespace entroute::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitOracleMismatch = 2;

/// |z| above this fails oracle-check.
inline constexpr double kOracleZLimit = 4.0;

/// Experiment kind run by a subcommand; "rate" resolves to rate-single or
/// rate-vs-distance depending on whether placements are given.
std::string experiment_for(const std::string& subcommand, const json& doc);

/// Runs the configured experiment and writes its outputs. Returns the exit code.
int run_experiment(const RunConfig& config);

}  // namespace entroute::cli
