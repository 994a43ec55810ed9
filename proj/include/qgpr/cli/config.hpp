#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgpr/estimator.hpp"
#include "qgpr/kernels.hpp"

namespace qgpr::cli {

enum class SweepAxis { ClockQubits, Shots };

struct SweepSettings {
    SweepAxis axis = SweepAxis::ClockQubits;
    std::vector<std::int64_t> values;
    /// Independent seeds averaged per axis value.
    int repeats = 1;
};

struct DiagnoseSettings {
    double kappa_bound = 1e3;
    double delta = 0.05;
    std::int64_t pilot_shots = 1000;
};

/// Fully resolved run configuration (file values with flag overrides applied).
struct RunConfig {
    std::optional<std::filesystem::path> dataset;
    bool header = false;
    KernelSpec<double> kernel;
    double noise_variance = 0.1;
    std::vector<VectorXd> test_points;
    /// Precomputed Gram matrix; only `diagnose` accepts it in place of a dataset.
    std::optional<MatrixXd> gram_matrix;
    int clock_qubits = 8;
    std::optional<double> t0;
    std::int64_t shots = 10000;
    std::uint64_t seed = 0;
    EstimationMode mode = EstimationMode::Exact;
    std::optional<std::filesystem::path> output;
    bool record_timings = false;
    DiagnoseSettings diagnose;
    SweepSettings sweep;

    void validate() const;
    [[nodiscard]] GprQlaOptions qla_options() const { return {clock_qubits, t0}; }
};

/// Parses a config document; relative dataset paths resolve against base_dir.
RunConfig parse_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);

RunConfig load_config(const std::filesystem::path &path);

/// The resolved config as embedded in every report.
nlohmann::ordered_json to_json(const RunConfig &config);

} // namespace qgpr::cli
