#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fxlab/serialize.hpp"

namespace fxlab::pipeline {

enum class StationarityPolicy { AutoDifference, Fail };

/// Everything a batch run needs; parsed from a JSON config file.
struct PipelineConfig {
    std::filesystem::path usa_csv;
    std::filesystem::path ind_csv;
    std::string target;
    double train_fraction = 0.9;
    std::vector<std::string> models;  // subset of {"var","svr","lstm"}
    StationarityPolicy stationarity = StationarityPolicy::AutoDifference;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 42;

    // var
    std::size_t var_max_lag = 6;
    std::vector<std::string> second_difference;  // columns differenced twice for the VAR

    // tests
    std::size_t granger_lags = 3;

    // svr
    svr::SvrConfig svr_config;
    std::vector<svr::SvrConfig> svr_grid;  // empty -> no grid search
    std::size_t svr_folds = 3;

    // lstm
    Eigen::Index lstm_hidden = 16;
    lstm::TrainConfig lstm_train;
    double lstm_validation_fraction = 0.1;
    bool lstm_peephole_current_cell = false;  // output gate peeks at c_t instead of c_{t-1}

    // analysis
    std::size_t importance_trees = 200;
    std::size_t importance_depth = 6;

    void validate() const {
        detail::require(!usa_csv.empty() && !ind_csv.empty(), ErrorKind::ConfigError,
                        "usa_csv and ind_csv are required");
        detail::require(!target.empty(), ErrorKind::ConfigError, "target column is required");
        detail::require(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::ConfigError,
                        "train_fraction must lie in (0,1)");
        detail::require(!models.empty(), ErrorKind::ConfigError,
                        "at least one model must be selected");
        for (const auto& m : models)
            detail::require(m == "var" || m == "svr" || m == "lstm", ErrorKind::ConfigError,
                            "unknown model `" + m + "`");
        detail::require(std::find(second_difference.begin(), second_difference.end(), target) ==
                            second_difference.end(),
                        ErrorKind::ConfigError, "the target cannot be double-differenced");
    }

    bool wants(const std::string& model) const {
        return std::find(models.begin(), models.end(), model) != models.end();
    }
};

inline PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    c.usa_csv = j.at("usa_csv").get<std::string>();
    c.ind_csv = j.at("ind_csv").get<std::string>();
    c.target = j.at("target").get<std::string>();
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.models = j.value("models", std::vector<std::string>{"var", "svr", "lstm"});
    c.out_dir = j.value("out_dir", std::string("out"));
    c.seed = j.value("seed", c.seed);
    if (j.contains("stationarity")) {
        const auto s = j.at("stationarity").get<std::string>();
        detail::require(s == "auto-difference" || s == "fail", ErrorKind::ConfigError,
                        "stationarity must be `auto-difference` or `fail`");
        c.stationarity =
            s == "fail" ? StationarityPolicy::Fail : StationarityPolicy::AutoDifference;
    }
    if (j.contains("tests")) {
        c.granger_lags = j.at("tests").value("granger_lags", c.granger_lags);
    }
    if (j.contains("var")) {
        const auto& v = j.at("var");
        c.var_max_lag = v.value("max_lag", c.var_max_lag);
        c.second_difference =
            v.value("second_difference", std::vector<std::string>{});
    }
    if (j.contains("svr")) {
        const auto& s = j.at("svr");
        c.svr_config = svr_config_from_json(s, c.svr_config);
        c.svr_folds = s.value("folds", c.svr_folds);
        if (s.contains("grid")) {
            for (const auto& cell : s.at("grid"))
                c.svr_grid.push_back(svr_config_from_json(cell, c.svr_config));
        }
    }
    if (j.contains("lstm")) {
        const auto& l = j.at("lstm");
        c.lstm_hidden = l.value("hidden", c.lstm_hidden);
        c.lstm_train.learning_rate = l.value("learning_rate", c.lstm_train.learning_rate);
        c.lstm_train.epochs = l.value("epochs", c.lstm_train.epochs);
        c.lstm_train.clip_norm = l.value("clip_norm", c.lstm_train.clip_norm);
        c.lstm_train.patience = l.value("patience", c.lstm_train.patience);
        c.lstm_validation_fraction =
            l.value("validation_fraction", c.lstm_validation_fraction);
        c.lstm_peephole_current_cell =
            l.value("peephole_current_cell", c.lstm_peephole_current_cell);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        c.importance_trees = a.value("trees", c.importance_trees);
        c.importance_depth = a.value("max_depth", c.importance_depth);
    }
    c.validate();
    return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    detail::require(in.good(), ErrorKind::ConfigError, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        detail::fail(ErrorKind::ConfigError, path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

// ---- file output -------------------------------------------------------

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::create_directories(path.parent_path().empty() ? "."
                                                                   : path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        detail::require(out.good(), ErrorKind::MissingFile, "cannot write " + tmp);
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

/// Shortest-round-trip formatting, same as the JSON writer uses.
inline std::string format_double(double v) { return json(v).dump(); }

// ---- panel construction -------------------------------------------------

/// Model-ready data: the target series taken from the USA file plus the
/// USA-minus-IND delta of every other column, one frame.
struct Panel {
    TimeSeriesFrame frame;        // columns: [target, deltas...]
    std::size_t boundary = 0;     // first test row
    std::string target;
};

inline Panel build_panel(const PipelineConfig& config) {
    const TimeSeriesFrame usa = load_csv(config.usa_csv);
    const TimeSeriesFrame ind = load_csv(config.ind_csv, usa.names());
    const TimeSeriesFrame deltas = country_delta(usa, ind);
    const std::size_t target_col = usa.column_index(config.target);

    std::vector<std::string> names{config.target};
    Eigen::MatrixXd values(static_cast<Eigen::Index>(usa.rows()),
                           static_cast<Eigen::Index>(usa.cols()));
    values.col(0) =
        usa.values().col(static_cast<Eigen::Index>(target_col));
    Eigen::Index at = 1;
    for (std::size_t c = 0; c < usa.cols(); ++c) {
        if (c == target_col) continue;
        names.push_back(usa.names()[c]);
        values.col(at++) = deltas.values().col(static_cast<Eigen::Index>(c));
    }

    Panel panel{TimeSeriesFrame(usa.dates(), std::move(names), std::move(values)),
                SplitSpec::from_fraction(config.train_fraction, usa.rows()).boundary_index,
                config.target};
    detail::require(panel.boundary >= 2 && panel.boundary < panel.frame.rows(),
                    ErrorKind::EmptyPartition, "train/test split leaves an empty partition");
    return panel;
}

/// VAR input: every column differenced once, columns listed in
/// `second_difference` differenced twice, aligned on the shortest length.
inline TimeSeriesFrame build_var_input(const TimeSeriesFrame& panel,
                                       const std::vector<std::string>& second_difference) {
    TimeSeriesFrame diffs = difference_frame(panel);
    if (second_difference.empty()) return diffs;
    Eigen::MatrixXd values = diffs.values().bottomRows(
        static_cast<Eigen::Index>(diffs.rows() - 1));
    for (const auto& name : second_difference) {
        const auto c = static_cast<Eigen::Index>(diffs.column_index(name));
        const auto col = diffs.values().col(c);
        values.col(c) = col.tail(values.rows()) - col.head(values.rows());
    }
    std::vector<YearMonth> dates(diffs.dates().begin() + 1, diffs.dates().end());
    return TimeSeriesFrame(std::move(dates), diffs.names(), std::move(values));
}

/// Supervised layout shared by the SVR and LSTM branches: predict the scaled
/// target at t from the scaled panel row at t-1.
struct SupervisedDesign {
    Eigen::MatrixXd X;   // (n-1) x k, row r = scaled panel row r
    Eigen::VectorXd y;   // scaled target at row r+1
    std::vector<std::string> feature_names;
    std::size_t n_train = 0;  // rows of X whose target is a training row
};

inline SupervisedDesign build_supervised(const Panel& panel, const ScalingParams& scaling) {
    const TimeSeriesFrame scaled = minmax_transform(panel.frame, scaling);
    const auto n = static_cast<Eigen::Index>(scaled.rows());
    SupervisedDesign design;
    design.X = scaled.values().topRows(n - 1);
    design.y = scaled.values().col(0).tail(n - 1);
    for (const auto& name : scaled.names()) design.feature_names.push_back(name + "_lag1");
    design.n_train = panel.boundary - 1;  // X row r predicts panel row r+1
    return design;
}

inline ScalingParams fit_scaling(const Panel& panel) {
    return minmax_fit(panel.frame, SplitSpec{0.0, panel.boundary});
}

// ---- commands -----------------------------------------------------------

/// ADF on every column and its first difference, the Granger matrix and
/// Durbin-Watson on the differenced panel. Writes adf/granger/dw JSON + CSV.
inline void cmd_tests(const PipelineConfig& config) {
    const Panel panel = build_panel(config);
    const TimeSeriesFrame diffs = difference_frame(panel.frame);

    json adf = json::array();
    std::string adf_csv = "test,series,differenced,statistic,critical_5pct,lags,decision\n";
    for (const auto& name : panel.frame.names()) {
        for (int d : {0, 1}) {
            const auto series = d == 0 ? panel.frame.column(name) : diffs.column(name);
            const auto result =
                stats::adf_test(series, stats::adf_default_max_lag(series.size()));
            adf.push_back(to_json(result, name, d));
            adf_csv += "adf," + name + "," + std::to_string(d) + "," +
                       format_double(result.statistic) + "," +
                       format_double(result.critical_5pct) + "," +
                       std::to_string(result.lag_order_used) + "," +
                       (result.reject_unit_root ? "stationary" : "non-stationary") + "\n";
        }
    }
    write_json(config.out_dir / "adf.json", adf);
    write_file_atomic(config.out_dir / "adf.csv", adf_csv);

    json granger = json::array();
    std::string granger_csv = "test,cause,effect,lags,f_statistic,p_value,decision\n";
    for (const auto& r : stats::granger_matrix(diffs, config.granger_lags)) {
        granger.push_back(to_json(r));
        granger_csv += "granger," + r.cause + "," + r.effect + "," + std::to_string(r.lags) +
                       "," + format_double(r.f_statistic) + "," + format_double(r.p_value) +
                       "," + (r.reject_noncausality ? "causal" : "non-causal") + "\n";
    }
    write_json(config.out_dir / "granger.json", granger);
    write_file_atomic(config.out_dir / "granger.csv", granger_csv);

    json dw = json::array();
    std::string dw_csv = "test,series,statistic,interpretation\n";
    for (const auto& name : diffs.names()) {
        const auto r = stats::durbin_watson(diffs.column(name));
        dw.push_back(to_json(r, name));
        dw_csv += std::string("durbin-watson,") + name + "," + format_double(r.statistic) +
                  "," + stats::to_string(r.interpretation) + "\n";
    }
    write_json(config.out_dir / "dw.json", dw);
    write_file_atomic(config.out_dir / "dw.csv", dw_csv);
}

namespace detail_pipeline {

inline void enforce_stationarity(const PipelineConfig& config, const TimeSeriesFrame& var_input) {
    for (const auto& name : var_input.names()) {
        const auto series = var_input.column(name);
        stats::AdfResult result;
        try {
            result = stats::adf_test(series, stats::adf_default_max_lag(series.size()));
        } catch (const FxError& e) {
            // A constant differenced column has no unit root to test.
            if (e.kind() == ErrorKind::SingularRegression) continue;
            throw;
        }
        if (result.reject_unit_root) continue;
        const std::string msg = "column `" + name +
                                "` still fails the ADF test after differencing (statistic " +
                                format_double(result.statistic) + " vs critical " +
                                format_double(result.critical_5pct) + ")";
        if (config.stationarity == StationarityPolicy::Fail)
            detail::fail(ErrorKind::DegenerateInput, msg);
        std::cerr << "warning: " << msg << "\n";
    }
}

inline lstm::SupervisedSequence make_sequence(const SupervisedDesign& design, std::size_t first,
                                              std::size_t last) {
    lstm::SupervisedSequence seq;
    for (std::size_t r = first; r < last; ++r) {
        seq.inputs.push_back(design.X.row(static_cast<Eigen::Index>(r)).transpose());
        seq.targets.push_back(design.y(static_cast<Eigen::Index>(r)));
    }
    return seq;
}

}  // namespace detail_pipeline

/// Fit one model on the training span and write `<model>.json` (plus
/// grid_cv.csv / loss_history.csv where applicable). Deterministic given the
/// master seed.
inline void cmd_fit(const PipelineConfig& config, const std::string& model) {
    detail::require(model == "var" || model == "svr" || model == "lstm",
                    ErrorKind::ConfigError, "unknown model `" + model + "`");
    const Panel panel = build_panel(config);

    if (model == "var") {
        const TimeSeriesFrame var_input =
            build_var_input(panel.frame, config.second_difference);
        detail_pipeline::enforce_stationarity(config, var_input);
        const std::size_t offset = panel.frame.rows() - var_input.rows();
        const std::size_t train_rows = panel.boundary - offset;  // rows before the test span
        const TimeSeriesFrame train = var_input.slice_rows(0, train_rows);
        const std::size_t p = var::select_lag_aic(train, config.var_max_lag);
        const var::VarModel fitted = var::fit_var(train, p);
        write_json(config.out_dir / "var.json", to_json(fitted));
        return;
    }

    const ScalingParams scaling = fit_scaling(panel);
    const SupervisedDesign design = build_supervised(panel, scaling);
    const auto n_train = static_cast<Eigen::Index>(design.n_train);

    if (model == "svr") {
        svr::SvrConfig chosen = config.svr_config;
        if (!config.svr_grid.empty()) {
            const auto result = svr::grid_search(design.X.topRows(n_train),
                                                 design.y.head(n_train), config.svr_grid,
                                                 config.svr_folds);
            chosen = result.best;
            std::string csv = "C,gamma,epsilon,mean_rmse,status\n";
            for (const auto& cell : result.table) {
                csv += format_double(cell.config.C) + "," + format_double(cell.config.gamma) +
                       "," + format_double(cell.config.epsilon) + "," +
                       (cell.ok ? format_double(cell.mean_rmse) : "") + "," +
                       (cell.ok ? "ok" : cell.error) + "\n";
            }
            write_file_atomic(config.out_dir / "grid_cv.csv", csv);
        }
        const auto fitted = svr::fit_svr(design.X.topRows(n_train), design.y.head(n_train),
                                         chosen);
        write_json(config.out_dir / "svr.json", to_json(fitted));
        return;
    }

    // lstm
    const std::size_t total = design.n_train;
    auto val_len = static_cast<std::size_t>(
        std::floor(config.lstm_validation_fraction * static_cast<double>(total)));
    val_len = std::max<std::size_t>(val_len, 1);
    detail::require(val_len < total, ErrorKind::EmptyPartition,
                    "training span too short for a validation tail");
    const auto train_seq = detail_pipeline::make_sequence(design, 0, total - val_len);
    const auto val_seq = detail_pipeline::make_sequence(design, total - val_len, total);

    lstm::TrainConfig tc = config.lstm_train;
    tc.seed = config.seed;
    lstm::LstmParams init =
        lstm::LstmParams::random(design.X.cols(), config.lstm_hidden, tc.seed);
    init.output_gate_uses_current_cell = config.lstm_peephole_current_cell;
    const auto trained = lstm::train(init, train_seq, val_seq, tc);
    write_json(config.out_dir / "lstm.json", to_json(trained.params));

    std::string csv = "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < trained.history.size(); ++e) {
        csv += std::to_string(e + 1) + "," + format_double(trained.history[e].train) + "," +
               format_double(trained.history[e].val) + "\n";
    }
    write_file_atomic(config.out_dir / "loss_history.csv", csv);
}

struct EvaluateOutcome {
    std::map<std::string, metrics::MetricsReport> reports;
    std::map<std::string, std::vector<double>> predictions;  // levels, per model
    std::vector<double> actual;
};

/// Score every selected model's one-step-ahead level forecasts over the test
/// span; writes report.json, predictions.csv and features.json.
inline EvaluateOutcome cmd_evaluate(const PipelineConfig& config) {
    const Panel panel = build_panel(config);
    const std::size_t n = panel.frame.rows();
    const std::size_t boundary = panel.boundary;
    const std::size_t test_count = n - boundary;
    const Eigen::VectorXd target_levels = panel.frame.values().col(0);

    EvaluateOutcome outcome;
    for (std::size_t t = boundary; t < n; ++t)
        outcome.actual.push_back(target_levels(static_cast<Eigen::Index>(t)));

    auto read_model_json = [&](const std::string& name) {
        const auto path = config.out_dir / (name + ".json");
        std::ifstream in(path);
        detail::require(in.good(), ErrorKind::MissingFile,
                        "model file " + path.string() + " (run `fxlab fit " + name + "` first)");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            detail::fail(ErrorKind::ConfigError, path.string() + ": " + e.what());
        }
        return j;
    };

    if (config.wants("var")) {
        const var::VarModel model = var_from_json(read_model_json("var"));
        const TimeSeriesFrame var_input =
            build_var_input(panel.frame, config.second_difference);
        const std::size_t offset = n - var_input.rows();
        std::vector<double> anchors;
        for (std::size_t t = boundary; t < n; ++t)
            anchors.push_back(target_levels(static_cast<Eigen::Index>(t - 1)));
        outcome.predictions["var"] =
            var::rolling_one_step(model, var_input, boundary - offset, test_count,
                                  config.target, anchors);
    }

    if (config.wants("svr")) {
        const ScalingParams scaling = fit_scaling(panel);
        const SupervisedDesign design = build_supervised(panel, scaling);
        const svr::SvrModel model = svr_from_json(read_model_json("svr"));
        std::vector<double> preds;
        for (std::size_t t = boundary; t < n; ++t) {
            const double scaled = svr::predict_svr(
                model, design.X.row(static_cast<Eigen::Index>(t - 1)).transpose());
            preds.push_back(minmax_inverse_value(scaled, scaling, config.target));
        }
        outcome.predictions["svr"] = preds;
    }

    if (config.wants("lstm")) {
        const ScalingParams scaling = fit_scaling(panel);
        const SupervisedDesign design = build_supervised(panel, scaling);
        const lstm::LstmParams model = lstm_from_json(read_model_json("lstm"));
        const auto full_seq = detail_pipeline::make_sequence(
            design, 0, static_cast<std::size_t>(design.X.rows()));
        const auto fwd = lstm::forward_sequence(model, full_seq);
        std::vector<double> preds;
        for (std::size_t t = boundary; t < n; ++t)
            preds.push_back(
                minmax_inverse_value(fwd.predictions[t - 1], scaling, config.target));
        outcome.predictions["lstm"] = preds;
    }

    json report = json::object();
    for (const auto& [name, preds] : outcome.predictions) {
        outcome.reports[name] = metrics::evaluate(preds, outcome.actual);
        report[name] = to_json(outcome.reports[name]);
    }
    write_json(config.out_dir / "report.json", report);

    std::string csv = "date,actual";
    for (const auto& [name, preds] : outcome.predictions) csv += "," + name;
    csv += "\n";
    for (std::size_t i = 0; i < test_count; ++i) {
        csv += panel.frame.dates()[boundary + i].str() + "," +
               format_double(outcome.actual[i]);
        for (const auto& [name, preds] : outcome.predictions)
            csv += "," + format_double(preds[i]);
        csv += "\n";
    }
    write_file_atomic(config.out_dir / "predictions.csv", csv);

    // Feature analysis degrades to an error note when the panel cannot
    // support it (a constant column, say) instead of failing the evaluation.
    json features = json::object();
    try {
        const auto correlation = analysis::correlation_matrix(panel.frame);
        features["correlation"] = to_json(correlation);
        std::string csv = "name";
        for (const auto& name : correlation.names) csv += "," + name;
        csv += "\n";
        for (Eigen::Index r = 0; r < correlation.values.rows(); ++r) {
            csv += correlation.names[static_cast<std::size_t>(r)];
            for (Eigen::Index c = 0; c < correlation.values.cols(); ++c)
                csv += "," + format_double(correlation.values(r, c));
            csv += "\n";
        }
        write_file_atomic(config.out_dir / "correlation.csv", csv);
    } catch (const FxError& e) {
        features["correlation"] = json{{"error", e.what()}};
    }
    try {
        const ScalingParams scaling = fit_scaling(panel);
        const SupervisedDesign design = build_supervised(panel, scaling);
        const auto n_train = static_cast<Eigen::Index>(design.n_train);
        std::vector<double> y_train(design.y.data(), design.y.data() + n_train);
        const auto importance = analysis::tree_importance(
            design.X.topRows(n_train), y_train, config.importance_trees,
            config.importance_depth, config.seed, design.feature_names);
        features["importance"] = to_json(importance);
        std::string csv = "feature,importance\n";
        for (std::size_t j = 0; j < importance.names.size(); ++j)
            csv += importance.names[j] + "," + format_double(importance.importances[j]) + "\n";
        write_file_atomic(config.out_dir / "importance.csv", csv);
    } catch (const FxError& e) {
        features["importance"] = json{{"error", e.what()}};
    }
    write_json(config.out_dir / "features.json", features);
    return outcome;
}

/// All stages: tests, every selected model fit, evaluation.
inline void cmd_run(const PipelineConfig& config) {
    cmd_tests(config);
    for (const auto& model : config.models) cmd_fit(config, model);
    cmd_evaluate(config);
}

}  // namespace fxlab::pipeline
