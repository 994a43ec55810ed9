#include "qgpr/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <CLI11.hpp>

#include "qgpr/classical_gpr.hpp"
#include "qgpr/cli/csv_io.hpp"
#include "qgpr/errors.hpp"
#include "qgpr/estimator.hpp"

namespace qgpr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double relative(double err, double reference) { return err / std::max(std::abs(reference), 1e-12); }

GPModel<double> load_model(const RunConfig &config) {
    if (!config.dataset) {
        throw InputError("this command needs a dataset");
    }
    return build_model(ingest_csv(*config.dataset, config.header), config.kernel,
                       config.noise_variance);
}

void require_test_points(const RunConfig &config) {
    if (config.test_points.empty()) {
        throw InputError("config lists no test points");
    }
}

ordered_json estimation_json(const EstimationResult<double> &r) {
    ordered_json j;
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["shots"] = r.shots;
    j["raw_mean"] = r.raw_mean;
    j["success_fraction"] = r.success_fraction;
    j["scale"] = r.scale;
    j["seed"] = r.seed;
    j["mode"] = std::string(to_string(r.mode));
    j["qla"] = {{"clock_qubits", r.config.clock_qubits},
                {"t0", r.config.t0},
                {"c", r.config.c},
                {"epsilon", r.config.epsilon}};
    j["warnings"] = r.warnings;
    return j;
}

ordered_json diagnostics_json(const Diagnostics<double> &d) {
    ordered_json j;
    j["kappa"] = d.kappa;
    j["row_sparsity"] = d.row_sparsity;
    j["min_eig"] = d.min_eig;
    j["max_eig"] = d.max_eig;
    return j;
}

struct PointResult {
    Prediction<double> classical;
    EstimationResult<double> mean;
    EstimationResult<double> variance;
    double classical_ms = 0;
    double quantum_ms = 0;
};

PointResult run_point(const GPModel<double> &model, const VectorXd &x, const GprQlaOptions &opts,
                      std::int64_t shots, std::uint64_t seed, EstimationMode mode) {
    PointResult p;
    auto t = Clock::now();
    p.classical = predict_exact(model, x);
    p.classical_ms = elapsed_ms(t);
    t = Clock::now();
    p.mean = predict_mean_quantum(model, x, opts, shots, mix_seed(seed, 0), mode);
    p.variance = predict_variance_quantum(model, x, opts, shots, mix_seed(seed, 1), mode);
    p.quantum_ms = elapsed_ms(t);
    return p;
}

void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    f << content;
}

} // namespace

ordered_json cmd_predict(const RunConfig &config) {
    require_test_points(config);
    const GPModel<double> model = load_model(config);
    ordered_json report;
    report["command"] = "predict";
    report["config"] = to_json(config);
    report["diagnostics"] = diagnostics_json(diagnostics(model));
    ordered_json points = ordered_json::array();
    for (std::size_t i = 0; i < config.test_points.size(); ++i) {
        const VectorXd &x = config.test_points[i];
        const PointResult p = run_point(model, x, config.qla_options(), config.shots,
                                        mix_seed(config.seed, i), config.mode);
        ordered_json rec;
        rec["x"] = std::vector<double>(x.data(), x.data() + x.size());
        rec["classical"] = {{"mean", p.classical.mean}, {"variance", p.classical.variance}};
        rec["quantum"] = {{"mean", estimation_json(p.mean)}, {"variance", estimation_json(p.variance)}};
        const double mean_err = std::abs(p.mean.estimate - p.classical.mean);
        const double var_err = std::abs(p.variance.estimate - p.classical.variance);
        rec["errors"] = {{"mean_abs", mean_err},
                         {"mean_rel", relative(mean_err, p.classical.mean)},
                         {"variance_abs", var_err},
                         {"variance_rel", relative(var_err, p.classical.variance)}};
        if (config.record_timings) {
            rec["timings_ms"] = {{"classical", p.classical_ms}, {"quantum", p.quantum_ms}};
        }
        points.push_back(std::move(rec));
    }
    report["points"] = std::move(points);
    return report;
}

ordered_json cmd_diagnose(const RunConfig &config) {
    ordered_json report;
    report["command"] = "diagnose";
    report["config"] = to_json(config);
    std::optional<GPModel<double>> model;
    MatrixXd system;
    if (config.gram_matrix) {
        system = *config.gram_matrix;
        if (!is_hermitian(system, 0.0)) {
            throw InputError("gram_matrix must be symmetric");
        }
        system.diagonal().array() += config.noise_variance;
    } else {
        model = load_model(config);
        system = model->system;
    }
    const Diagnostics<double> d = diagnostics(system);
    ordered_json diag = diagnostics_json(d);
    diag["kappa_bound"] = config.diagnose.kappa_bound;
    const double jitter = recommended_jitter(d, config.diagnose.kappa_bound);
    diag["recommended_jitter"] = jitter;
    diag["recommended_noise_variance"] = config.noise_variance + jitter;
    report["diagnostics"] = std::move(diag);

    if (model && !config.test_points.empty()) {
        const auto pilot = predict_mean_quantum(*model, config.test_points.front(), config.qla_options(),
                                                config.diagnose.pilot_shots, mix_seed(config.seed, 0),
                                                EstimationMode::Sampled);
        ordered_json shots;
        shots["delta"] = config.diagnose.delta;
        shots["pilot_shots"] = pilot.shots;
        shots["pilot_std_error"] = pilot.std_error;
        shots["recommended_shots"] =
            pilot.shots > 0 ? json(shots_for_precision(config.diagnose.delta, pilot)) : json(nullptr);
        report["shots"] = std::move(shots);
    }
    return report;
}

std::string cmd_sweep(const RunConfig &config) {
    require_test_points(config);
    if (config.sweep.values.empty()) {
        throw InputError("sweep.values is empty");
    }
    const GPModel<double> model = load_model(config);
    std::vector<Prediction<double>> classical;
    for (const VectorXd &x : config.test_points) {
        classical.push_back(predict_exact(model, x));
    }
    const bool shots_axis = config.sweep.axis == SweepAxis::Shots;

    struct Row {
        double mean_error = 0, variance_error = 0, success = 0;
    };
    auto run_row = [&](std::size_t axis_index) {
        const std::int64_t value = config.sweep.values[axis_index];
        GprQlaOptions opts = config.qla_options();
        std::int64_t shots = config.shots;
        EstimationMode mode = config.mode;
        if (shots_axis) {
            shots = value;
            mode = EstimationMode::Sampled;
        } else {
            opts.clock_qubits = static_cast<int>(value);
        }
        Row row;
        int count = 0;
        for (int r = 0; r < config.sweep.repeats; ++r) {
            const std::uint64_t rep_seed = mix_seed(mix_seed(config.seed, axis_index), r);
            for (std::size_t i = 0; i < config.test_points.size(); ++i) {
                const PointResult p =
                    run_point(model, config.test_points[i], opts, shots, mix_seed(rep_seed, i), mode);
                row.mean_error += std::abs(p.mean.estimate - classical[i].mean);
                row.variance_error += std::abs(p.variance.estimate - classical[i].variance);
                row.success += p.mean.success_fraction;
                ++count;
            }
        }
        row.mean_error /= count;
        row.variance_error /= count;
        row.success /= count;
        return row;
    };

    std::vector<std::future<Row>> futures;
    for (std::size_t k = 0; k < config.sweep.values.size(); ++k) {
        futures.push_back(std::async(std::launch::async, run_row, k));
    }
    std::string csv = shots_axis ? "shots" : "clock_qubits";
    csv += ",mean_error,variance_error,success_fraction\n";
    for (std::size_t k = 0; k < futures.size(); ++k) {
        const Row row = futures[k].get();
        csv += std::to_string(config.sweep.values[k]) + ',' + format_number(row.mean_error) + ',' +
               format_number(row.variance_error) + ',' + format_number(row.success) + '\n';
    }
    return csv;
}

std::string summarize_predict(const ordered_json &report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %12s %12s %12s %12s %10s %10s\n", "x", "mean(cl)",
                  "mean(q)", "var(cl)", "var(q)", "mean_rel", "var_rel");
    out << line;
    for (const auto &p : report["points"]) {
        std::string x;
        for (const auto &c : p["x"]) {
            x += (x.empty() ? "" : ",") + format_number(c.get<double>());
        }
        std::snprintf(line, sizeof(line), "%-20s %12.6g %12.6g %12.6g %12.6g %10.3g %10.3g\n",
                      x.c_str(), p["classical"]["mean"].get<double>(),
                      p["quantum"]["mean"]["estimate"].get<double>(),
                      p["classical"]["variance"].get<double>(),
                      p["quantum"]["variance"]["estimate"].get<double>(),
                      p["errors"]["mean_rel"].get<double>(), p["errors"]["variance_rel"].get<double>());
        out << line;
    }
    const auto &d = report["diagnostics"];
    out << "kappa=" << format_number(d["kappa"].get<double>())
        << " row_sparsity=" << d["row_sparsity"].get<long>() << '\n';
    return out.str();
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Quantum-assisted Gaussian process regression simulator", "qgpr"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> shots;
    std::optional<int> clock_qubits;
    std::optional<std::string> mode;
    std::optional<std::string> out_path;

    std::vector<CLI::App *> subs;
    for (const char *name : {"predict", "diagnose", "sweep"}) {
        CLI::App *sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--shots", shots, "shots per estimate (sampled mode)");
        sub->add_option("--clock-qubits", clock_qubits, "phase-estimation clock width");
        sub->add_option("--mode", mode, "exact | sampled");
        sub->add_option("--out", out_path, "output file (JSON report or CSV table)");
        subs.push_back(sub);
    }
    subs[0]->description("classical and quantum predictions at the configured test points");
    subs[1]->description("condition number, sparsity, jitter and shot recommendations");
    subs[2]->description("error table over clock_qubits or shots");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "qgpr: " << e.what() << '\n';
        return kExitInputError;
    }

    try {
        RunConfig config = load_config(config_path);
        if (seed) config.seed = *seed;
        if (shots) config.shots = *shots;
        if (clock_qubits) config.clock_qubits = *clock_qubits;
        if (mode) config.mode = estimation_mode_from(*mode);
        if (out_path) config.output = std::filesystem::path(*out_path);
        config.validate();

        if (subs[0]->parsed()) {
            const ordered_json report = cmd_predict(config);
            if (config.output) {
                write_file(*config.output, report.dump(2) + "\n");
                out << summarize_predict(report);
            } else {
                out << report.dump(2) << '\n';
            }
        } else if (subs[1]->parsed()) {
            const ordered_json report = cmd_diagnose(config);
            if (config.output) {
                write_file(*config.output, report.dump(2) + "\n");
            }
            out << report.dump(2) << '\n';
        } else {
            const std::string csv = cmd_sweep(config);
            if (config.output) {
                write_file(*config.output, csv);
            } else {
                out << csv;
            }
        }
        return kExitOk;
    } catch (const InputError &e) {
        err << "qgpr: input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const NumericError &e) {
        err << "qgpr: numerical error: " << e.what() << '\n';
        return kExitNumericError;
    } catch (const std::exception &e) {
        err << "qgpr: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace qgpr::cli
