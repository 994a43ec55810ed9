#include "qgpr/cli/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "qgpr/errors.hpp"

namespace qgpr::cli {

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, long row, std::size_t col) {
    field = trim(field);
    double value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError("column " + std::to_string(col + 1) + ": '" + std::string(field) +
                             "' is not a number",
                         row);
    }
    return value;
}

} // namespace

TrainingSet<double> parse_csv(std::string_view text, bool has_header) {
    std::vector<std::vector<double>> rows;
    long row = 0;
    bool header_pending = has_header;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const std::string_view line =
            trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++row;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> values;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            values.push_back(parse_field(line.substr(start, comma == std::string_view::npos
                                                                ? std::string_view::npos
                                                                : comma - start),
                                         row, values.size()));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (values.size() < 2) {
            throw ParseError("need at least one feature column and a target column", row);
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw ParseError("expected " + std::to_string(rows.front().size()) + " columns, found " +
                                 std::to_string(values.size()),
                             row);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw ParseError("no data rows", 0);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
    MatrixXd points(n, d);
    VectorXd targets(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            points(i, j) = rows[i][j];
        }
        targets(i) = rows[i][d];
    }
    return TrainingSet<double>(std::move(points), std::move(targets));
}

TrainingSet<double> ingest_csv(const std::filesystem::path &path, bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open dataset '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), has_header);
}

std::string to_csv(const TrainingSet<double> &training) {
    std::string out;
    for (Eigen::Index i = 0; i < training.size(); ++i) {
        for (Eigen::Index j = 0; j < training.dim(); ++j) {
            out += format_number(training.points(i, j));
            out += ',';
        }
        out += format_number(training.targets(i));
        out += '\n';
    }
    return out;
}

} // namespace qgpr::cli
