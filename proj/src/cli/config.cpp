#include "qgpr/cli/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <string_view>

#include "qgpr/errors.hpp"

namespace qgpr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array kTopLevelKeys = {"dataset",      "header",     "kernel",      "noise_variance",
                                      "test_points",  "gram_matrix", "clock_qubits", "t0",
                                      "shots",        "seed",       "mode",        "output",
                                      "record_timings", "diagnose",  "sweep"};

void reject_unknown(const json &obj, std::span<const char *const> known, std::string_view where) {
    for (const auto &[key, _] : obj.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char *k) { return key == k; }) ==
            known.end()) {
            throw InputError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

VectorXd to_vector(const json &arr, std::string_view what) {
    if (!arr.is_array() || arr.empty()) {
        throw InputError(std::string(what) + " must be a non-empty array of numbers");
    }
    VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

json vector_json(const VectorXd &v) {
    json arr = json::array();
    for (double x : v) {
        arr.push_back(x);
    }
    return arr;
}

KernelSpec<double> parse_kernel(const json &k) {
    static constexpr std::array keys = {"family", "signal_variance", "lengthscale", "cutoff_radius"};
    reject_unknown(k, keys, "kernel");
    KernelSpec<double> spec;
    spec.family = kernel_family_from(k.value("family", std::string("squared-exponential")));
    spec.signal_variance = k.value("signal_variance", 1.0);
    spec.lengthscale = k.value("lengthscale", 1.0);
    spec.cutoff_radius = k.value("cutoff_radius", 1.0);
    spec.validate();
    return spec;
}

SweepAxis sweep_axis_from(std::string_view name) {
    if (name == "clock_qubits") {
        return SweepAxis::ClockQubits;
    }
    if (name == "shots") {
        return SweepAxis::Shots;
    }
    throw InputError("sweep axis must be 'clock_qubits' or 'shots'");
}

RunConfig parse_config_unchecked(const json &doc, const std::filesystem::path &base_dir) {
    if (!doc.is_object()) {
        throw InputError("config must be a JSON object");
    }
    reject_unknown(doc, kTopLevelKeys, "config");
    RunConfig c;
    if (doc.contains("dataset")) {
        std::filesystem::path p = doc["dataset"].get<std::string>();
        c.dataset = p.is_absolute() ? p : base_dir / p;
    }
    c.header = doc.value("header", false);
    if (doc.contains("kernel")) {
        c.kernel = parse_kernel(doc["kernel"]);
    }
    c.noise_variance = doc.value("noise_variance", c.noise_variance);
    if (doc.contains("test_points")) {
        for (const json &p : doc["test_points"]) {
            c.test_points.push_back(to_vector(p, "test point"));
        }
    }
    if (doc.contains("gram_matrix")) {
        const json &rows = doc["gram_matrix"];
        if (!rows.is_array() || rows.empty()) {
            throw InputError("gram_matrix must be a non-empty array of rows");
        }
        const auto n = static_cast<Eigen::Index>(rows.size());
        MatrixXd g(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const VectorXd row = to_vector(rows[static_cast<std::size_t>(i)], "gram_matrix row");
            if (row.size() != n) {
                throw InputError("gram_matrix must be square");
            }
            g.row(i) = row.transpose();
        }
        c.gram_matrix = std::move(g);
    }
    c.clock_qubits = doc.value("clock_qubits", c.clock_qubits);
    if (doc.contains("t0") && !doc["t0"].is_null()) {
        c.t0 = doc["t0"].get<double>();
    }
    c.shots = doc.value("shots", c.shots);
    c.seed = doc.value("seed", c.seed);
    c.mode = estimation_mode_from(doc.value("mode", std::string("exact")));
    if (doc.contains("output") && !doc["output"].is_null()) {
        std::filesystem::path p = doc["output"].get<std::string>();
        c.output = p.is_absolute() ? p : base_dir / p;
    }
    c.record_timings = doc.value("record_timings", false);
    if (doc.contains("diagnose")) {
        const json &d = doc["diagnose"];
        static constexpr std::array keys = {"kappa_bound", "delta", "pilot_shots"};
        reject_unknown(d, keys, "diagnose");
        c.diagnose.kappa_bound = d.value("kappa_bound", c.diagnose.kappa_bound);
        c.diagnose.delta = d.value("delta", c.diagnose.delta);
        c.diagnose.pilot_shots = d.value("pilot_shots", c.diagnose.pilot_shots);
    }
    if (doc.contains("sweep")) {
        const json &s = doc["sweep"];
        static constexpr std::array keys = {"axis", "values", "repeats"};
        reject_unknown(s, keys, "sweep");
        c.sweep.axis = sweep_axis_from(s.value("axis", std::string("clock_qubits")));
        if (s.contains("values")) {
            c.sweep.values = s["values"].get<std::vector<std::int64_t>>();
        }
        c.sweep.repeats = s.value("repeats", 1);
    }
    return c;
}

} // namespace

void RunConfig::validate() const {
    if (!(noise_variance > 0)) {
        throw InputError("noise_variance must be positive");
    }
    if (clock_qubits < 1 || clock_qubits > 16) {
        throw InputError("clock_qubits must be in [1, 16]");
    }
    if (t0 && !(*t0 > 0)) {
        throw InputError("t0 must be positive");
    }
    if (shots < 1) {
        throw InputError("shots must be >= 1");
    }
    if (!(diagnose.kappa_bound > 1) || !(diagnose.delta > 0) || diagnose.pilot_shots < 100) {
        throw InputError("diagnose needs kappa_bound > 1, delta > 0 and pilot_shots >= 100");
    }
    if (sweep.repeats < 1) {
        throw InputError("sweep.repeats must be >= 1");
    }
    for (std::int64_t v : sweep.values) {
        if (v < 1) {
            throw InputError("sweep values must be >= 1");
        }
    }
    kernel.validate();
}

RunConfig parse_config(const json &doc, const std::filesystem::path &base_dir) {
    try {
        RunConfig c = parse_config_unchecked(doc, base_dir);
        c.validate();
        return c;
    } catch (const json::exception &e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception &e) {
        throw InputError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

ordered_json to_json(const RunConfig &c) {
    ordered_json j;
    j["dataset"] = c.dataset ? json(c.dataset->generic_string()) : json(nullptr);
    j["header"] = c.header;
    j["kernel"] = {{"family", std::string(to_string(c.kernel.family))},
                   {"signal_variance", c.kernel.signal_variance},
                   {"lengthscale", c.kernel.lengthscale},
                   {"cutoff_radius", c.kernel.cutoff_radius}};
    j["noise_variance"] = c.noise_variance;
    json points = json::array();
    for (const VectorXd &p : c.test_points) {
        points.push_back(vector_json(p));
    }
    j["test_points"] = points;
    if (c.gram_matrix) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < c.gram_matrix->rows(); ++i) {
            rows.push_back(vector_json(c.gram_matrix->row(i).transpose()));
        }
        j["gram_matrix"] = rows;
    }
    j["clock_qubits"] = c.clock_qubits;
    j["t0"] = c.t0 ? json(*c.t0) : json(nullptr);
    j["shots"] = c.shots;
    j["seed"] = c.seed;
    j["mode"] = std::string(to_string(c.mode));
    j["output"] = c.output ? json(c.output->generic_string()) : json(nullptr);
    j["record_timings"] = c.record_timings;
    j["diagnose"] = {{"kappa_bound", c.diagnose.kappa_bound},
                     {"delta", c.diagnose.delta},
                     {"pilot_shots", c.diagnose.pilot_shots}};
    j["sweep"] = {{"axis", c.sweep.axis == SweepAxis::ClockQubits ? "clock_qubits" : "shots"},
                  {"values", c.sweep.values},
                  {"repeats", c.sweep.repeats}};
    return j;
}

} // namespace qgpr::cli
