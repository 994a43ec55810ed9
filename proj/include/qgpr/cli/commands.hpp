#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgpr/cli/config.hpp"

namespace qgpr::cli {

/// Exit statuses of the qgpr executable.
enum ExitStatus : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitInputError = 2,
    kExitNumericError = 3,
};

/// Classical and quantum predictions at every test point, as a JSON report.
nlohmann::ordered_json cmd_predict(const RunConfig &config);

/// Condition number, sparsity, jitter and shot recommendations.
nlohmann::ordered_json cmd_diagnose(const RunConfig &config);

/// CSV table: axis value, mean error, variance error, success fraction.
std::string cmd_sweep(const RunConfig &config);

/// Human-readable table for a predict report.
std::string summarize_predict(const nlohmann::ordered_json &report);

/// Entry point behind `qgpr`; args excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace qgpr::cli
