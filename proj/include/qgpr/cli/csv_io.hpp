#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qgpr/kernels.hpp"

namespace qgpr::cli {

/// Shortest decimal string that parses back to the same double.
std::string format_number(double value);

/// Rows of `d` feature columns followed by one target column.
TrainingSet<double> parse_csv(std::string_view text, bool has_header);

TrainingSet<double> ingest_csv(const std::filesystem::path &path, bool has_header);

/// Inverse of parse_csv (no header).
std::string to_csv(const TrainingSet<double> &training);

} // namespace qgpr::cli
