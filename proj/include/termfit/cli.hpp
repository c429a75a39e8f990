#pragma once

/**
 * @file cli.hpp
 * @brief Batch command line: synth -> fit -> evaluate -> diagnose.
 *
 * Subcommands
 *   synth     write a synthetic quote panel plus its generating truth
 *   fit       estimate daily curves, write per-method coefficient series
 *   evaluate  write report tables and plot-ready series
 *   diagnose  write the per-day collinearity dump
 *
 * Exit codes: 0 success, 2 input error, 3 calibration failure,
 * 4 evaluation unavailable. Failures leave an errors.json in the output
 * directory; artifact files are written only after computation finishes.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "termfit/calibration.hpp"
#include "termfit/evaluation.hpp"
#include "termfit/market_data.hpp"
#include "termfit/report_io.hpp"
#include "termfit/synthetic.hpp"

namespace termfit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitCalibrationFailure = 3;
inline constexpr int kExitEvaluationUnavailable = 4;

/// Maturities reported in the descriptive table.
inline const std::vector<double> kDescriptiveTaus = {1.0 / 12, 3.0 / 12, 6.0 / 12,
                                                     1.0,      2.0,      5.0,
                                                     10.0};

struct RunConfig {
    std::string input;
    std::string out_dir = ".";
    std::string model = "ns";        // ns | sv | both
    std::string methods = "all";     // comma list of ols,ridge,raise or all
    double grid_min = 0.05;
    double grid_max = 10.0;
    double grid_step = 0.05;
    double cn_threshold = 20.0;
    std::string unit = "decimal";    // default for rows without a unit field
    unsigned threads = 1;
    std::optional<int> lags;

    // synth only
    int days = 250;
    std::uint64_t seed = 42;
    double noise_bp = 0.0;
    double walk_bp = 2.0;
    double lambda1 = 2.0;
    double lambda2 = 3.5;
};

namespace detail {

inline void write_error_log(const std::string& out_dir, int code, const std::string& message) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) return;
    nlohmann::json j{{"code", code}, {"error", message}};
    std::ofstream out(std::filesystem::path(out_dir) / "errors.json");
    out << j.dump(2) << '\n';
}

inline std::vector<Model> parse_models(const std::string& token) {
    if (token == "ns") return {Model::NS};
    if (token == "sv") return {Model::SV};
    if (token == "both") return {Model::NS, Model::SV};
    throw ConfigError("model must be ns, sv or both, got '" + token + "'");
}

inline std::vector<Method> parse_methods(const std::string& csv) {
    if (csv == "all") return {Method::Ols, Method::Ridge, Method::Raise};
    std::vector<Method> out;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token == "ols") {
            out.push_back(Method::Ols);
        } else if (token == "ridge") {
            out.push_back(Method::Ridge);
        } else if (token == "raise") {
            out.push_back(Method::Raise);
        } else {
            throw ConfigError("unknown method '" + token + "'");
        }
    }
    if (out.empty()) throw ConfigError("no methods selected");
    return out;
}

inline RateUnit parse_unit(const std::string& token) {
    if (token == "decimal") return RateUnit::Decimal;
    if (token == "percent") return RateUnit::Percent;
    throw ConfigError("unit must be decimal or percent, got '" + token + "'");
}

inline CalibrationConfig calibration_config(const RunConfig& rc, Model model) {
    CalibrationConfig cc;
    cc.model = model;
    cc.grid_min = rc.grid_min;
    cc.grid_max = rc.grid_max;
    cc.grid_step = rc.grid_step;
    cc.cn_threshold = rc.cn_threshold;
    cc.methods = parse_methods(rc.methods);
    cc.rate_unit = parse_unit(rc.unit);
    cc.threads = rc.threads;
    cc.validate();
    return cc;
}

/// Parses the input file and assembles the panel. Throws ParseError /
/// ConfigError for input problems; returns the build result otherwise.
inline PanelBuildResult load_panel(const RunConfig& rc, const std::vector<Model>& models) {
    std::ifstream in(rc.input);
    if (!in) throw ParseError("cannot open input file '" + rc.input + "'");
    const std::vector<Quote> quotes = parse_quotes(in, parse_unit(rc.unit));
    if (quotes.empty()) throw ParseError("no data: '" + rc.input + "' has no quote rows");

    int min_points = 0;
    for (Model m : models)
        min_points = std::max(min_points, (m == Model::NS ? 3 : 4) + 1);
    return build_panel(quotes, min_points);
}

inline std::ofstream open_artifact(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(std::filesystem::path(out_dir) / name);
    if (!out) throw Error("cannot write " + name + " under '" + out_dir + "'");
    return out;
}

inline nlohmann::json panel_issues_json(const PanelBuildResult& panel) {
    nlohmann::json j;
    j["flagged_days"] = nlohmann::json::array();
    for (const auto& [date, reason] : panel.flagged)
        j["flagged_days"].push_back({{"date", date}, {"reason", reason}});
    j["warnings"] = panel.warnings;
    return j;
}

inline int cmd_fit(const RunConfig& rc) {
    const std::vector<Model> models = parse_models(rc.model);
    const PanelBuildResult panel = load_panel(rc, models);
    if (panel.snapshots.empty())
        throw CalibrationError("no usable days in panel (" +
                               std::to_string(panel.flagged.size()) + " flagged)");

    std::vector<EstimationSeries> estimated;
    int days_ok = 0;
    for (Model model : models) {
        estimated.push_back(estimate_series(panel.snapshots, calibration_config(rc, model)));
        days_ok += estimated.back().aggregates.days_ok;
    }
    if (days_ok == 0) throw CalibrationError("every day failed to calibrate");

    for (const EstimationSeries& series : estimated) {
        const std::string model_tag = to_string(series.config.model);
        for (Method m : series.config.methods) {
            auto out = open_artifact(rc.out_dir,
                                     "betas_" + model_tag + "_" + to_string(m) + ".csv");
            write_betas_csv(out, series, m);
        }
        auto diag = open_artifact(rc.out_dir, "diagnostics_" + model_tag + ".csv");
        write_diagnostics_csv(diag, series);
    }

    nlohmann::json summary = panel_issues_json(panel);
    summary["days_ok"] = days_ok;
    auto out = open_artifact(rc.out_dir, "run_summary.json");
    out << summary.dump(2) << '\n';
    return kExitOk;
}

inline int cmd_evaluate(const RunConfig& rc) {
    const std::vector<Model> models = parse_models(rc.model);
    const PanelBuildResult panel = load_panel(rc, models);

    std::vector<EstimationSeries> estimated;
    int days_ok = 0;
    for (Model model : models) {
        if (panel.snapshots.empty()) break;
        estimated.push_back(estimate_series(panel.snapshots, calibration_config(rc, model)));
        days_ok += estimated.back().aggregates.days_ok;
    }
    if (days_ok == 0)
        throw UndefinedMetricError("evaluation unavailable: no estimable days");

    const EvaluationReport report =
        build_report(panel.snapshots, estimated, kDescriptiveTaus, rc.lags);

    {
        auto out = open_artifact(rc.out_dir, "report_tables.csv");
        write_report_csv(out, report);
    }
    {
        auto out = open_artifact(rc.out_dir, "report_tables.json");
        out << report_to_json(report).dump(2) << '\n';
    }
    for (const EstimationSeries& series : estimated) {
        const std::string tag = to_string(series.config.model);
        {
            auto out = open_artifact(rc.out_dir, "plot_long_rate_" + tag + ".csv");
            write_method_series_csv(out, series, "long_rate",
                                    [](const DayEstimate& d, Method m) { return d.long_rate.at(m); });
        }
        {
            auto out = open_artifact(rc.out_dir, "plot_short_rate_" + tag + ".csv");
            write_method_series_csv(out, series, "short_rate",
                                    [](const DayEstimate& d, Method m) { return d.short_rate.at(m); });
        }
        {
            auto out = open_artifact(rc.out_dir, "plot_long_rate_se_" + tag + ".csv");
            write_method_series_csv(out, series, "se_beta0", [](const DayEstimate& d, Method m) {
                return d.fits.at(m).std_errors(0);
            });
        }
        {
            auto out = open_artifact(rc.out_dir, "plot_swap30_" + tag + ".csv");
            write_swap30_csv(out, series);
        }
    }
    return kExitOk;
}

inline int cmd_diagnose(const RunConfig& rc) {
    const std::vector<Model> models = parse_models(rc.model);
    const PanelBuildResult panel = load_panel(rc, models);
    if (panel.snapshots.empty())
        throw CalibrationError("no usable days in panel (" +
                               std::to_string(panel.flagged.size()) + " flagged)");

    std::vector<EstimationSeries> estimated;
    int days_ok = 0;
    for (Model model : models) {
        estimated.push_back(estimate_series(panel.snapshots, calibration_config(rc, model)));
        days_ok += estimated.back().aggregates.days_ok;
    }
    if (days_ok == 0) throw CalibrationError("every day failed to calibrate");

    for (const EstimationSeries& series : estimated) {
        auto out = open_artifact(rc.out_dir,
                                 "diagnostics_" + std::string(to_string(series.config.model)) + ".csv");
        write_diagnostics_csv(out, series);
    }
    return kExitOk;
}

inline int cmd_synth(const RunConfig& rc) {
    SynthConfig sc;
    sc.days = rc.days;
    sc.seed = rc.seed;
    sc.noise_std = rc.noise_bp * 1e-4;
    sc.beta_walk_std = rc.walk_bp * 1e-4;
    const std::vector<Model> models = parse_models(rc.model);
    if (models.size() != 1) throw ConfigError("synth generates one model, pick ns or sv");
    sc.shape = models[0] == Model::NS ? ShapeParams::ns(rc.lambda1)
                                      : ShapeParams::sv(rc.lambda1, rc.lambda2);

    const SynthPanel panel = generate_panel(sc);
    {
        auto out = open_artifact(rc.out_dir, "synthetic_quotes.csv");
        write_quotes_csv(out, panel.quotes);
    }
    {
        auto out = open_artifact(rc.out_dir, "synthetic_truth.json");
        out << truth_to_json(panel).dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace detail

/// Entry point shared by the binary and the tests. argv style, without
/// the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
    CLI::App app{"Nelson-Siegel / Svensson daily curve estimation with "
                 "collinearity-aware OLS, ridge and raise regression"};
    app.require_subcommand(1);

    RunConfig rc;
    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input)
            cmd->add_option("-i,--input", rc.input, "Quote CSV file")->required();
        cmd->add_option("-o,--out", rc.out_dir, "Output directory");
        cmd->add_option("--model", rc.model, "ns | sv | both");
        cmd->add_option("--methods", rc.methods, "Comma list of ols,ridge,raise or all");
        cmd->add_option("--grid-min", rc.grid_min, "Smallest lambda on the grid");
        cmd->add_option("--grid-max", rc.grid_max, "Largest lambda on the grid");
        cmd->add_option("--grid-step", rc.grid_step, "Lambda grid step");
        cmd->add_option("--cn-threshold", rc.cn_threshold, "Condition-number threshold");
        cmd->add_option("--unit", rc.unit, "Default rate unit: decimal | percent");
        cmd->add_option("--threads", rc.threads, "Worker threads for day estimation");
    };

    auto* fit = app.add_subcommand("fit", "Estimate daily curves, write coefficient series");
    add_common(fit, true);

    auto* evaluate = app.add_subcommand("evaluate", "Write report tables and plot data");
    add_common(evaluate, true);
    int lag_override = 0;
    auto* lag_option = evaluate->add_option("--lags", lag_override,
                                            "Newey-West lag count (default: automatic rule)");

    auto* diagnose = app.add_subcommand("diagnose", "Write per-day collinearity reports");
    add_common(diagnose, true);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic quote panel");
    synth->add_option("-o,--out", rc.out_dir, "Output directory");
    synth->add_option("--model", rc.model, "ns | sv");
    synth->add_option("--days", rc.days, "Panel length in days");
    synth->add_option("--seed", rc.seed, "Random seed");
    synth->add_option("--noise-bp", rc.noise_bp, "Quote noise std in basis points");
    synth->add_option("--walk-bp", rc.walk_bp, "Daily coefficient walk std in basis points");
    synth->add_option("--lambda1", rc.lambda1, "True shape parameter");
    synth->add_option("--lambda2", rc.lambda2, "True second shape parameter (sv)");

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help() << std::flush;
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    if (lag_option->count() > 0) rc.lags = lag_override;

    try {
        if (fit->parsed()) return detail::cmd_fit(rc);
        if (evaluate->parsed()) return detail::cmd_evaluate(rc);
        if (diagnose->parsed()) return detail::cmd_diagnose(rc);
        return detail::cmd_synth(rc);
    } catch (const ParseError& e) {
        detail::write_error_log(rc.out_dir, kExitInputError, e.what());
        err << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const ConfigError& e) {
        detail::write_error_log(rc.out_dir, kExitInputError, e.what());
        err << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const CalibrationError& e) {
        detail::write_error_log(rc.out_dir, kExitCalibrationFailure, e.what());
        err << "calibration failure: " << e.what() << '\n';
        return kExitCalibrationFailure;
    } catch (const UndefinedMetricError& e) {
        detail::write_error_log(rc.out_dir, kExitEvaluationUnavailable, e.what());
        err << "evaluation unavailable: " << e.what() << '\n';
        return kExitEvaluationUnavailable;
    } catch (const Error& e) {
        detail::write_error_log(rc.out_dir, kExitInputError, e.what());
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

}  // namespace termfit::cli
