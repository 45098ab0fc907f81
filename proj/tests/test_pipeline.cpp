#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "fxlab/pipeline.hpp"
#include "support/synthetic.hpp"
#include "support/test_util.hpp"

using namespace fxlab;
using pipeline::PipelineConfig;

namespace {

json small_config(const testutil::TempDir& dir, std::vector<std::string> models) {
    return json{{"usa_csv", dir.file("usa.csv").string()},
                {"ind_csv", dir.file("ind.csv").string()},
                {"target", "forex"},
                {"train_fraction", 0.9},
                {"models", models},
                {"out_dir", dir.file("out").string()},
                {"seed", 7},
                {"svr", {{"tolerance", 1e-4}, {"max_iterations", 500000}}},
                {"lstm", {{"epochs", 40}, {"patience", 60}}},
                {"analysis", {{"trees", 40}, {"max_depth", 5}}}};
}

PipelineConfig write_and_load(const testutil::TempDir& dir, const json& cfg,
                              std::size_t months = 150, std::uint64_t data_seed = 2024) {
    synthetic::PanelSpec spec;
    spec.months = months;
    spec.seed = data_seed;
    const auto pair = synthetic::make_panel(spec);
    testutil::write_file(dir.file("usa.csv"), pair.usa);
    testutil::write_file(dir.file("ind.csv"), pair.ind);
    testutil::write_file(dir.file("config.json"), cfg.dump(2));
    return pipeline::load_config(dir.file("config.json"));
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

}  // namespace

TEST_CASE("config parsing and validation") {
    testutil::TempDir dir("cfg");
    SECTION("defaults fill in") {
        const auto config = write_and_load(dir, small_config(dir, {"var"}));
        REQUIRE(config.train_fraction == 0.9);
        REQUIRE(config.var_max_lag == 6);
        REQUIRE(config.seed == 7);
        REQUIRE(config.granger_lags == 3);
    }
    SECTION("bad values rejected") {
        auto cfg = small_config(dir, {"var"});
        cfg["train_fraction"] = 1.5;
        testutil::write_file(dir.file("bad.json"), cfg.dump());
        REQUIRE_THROWS_AS(pipeline::load_config(dir.file("bad.json")), FxError);

        cfg = small_config(dir, {});
        testutil::write_file(dir.file("bad2.json"), cfg.dump());
        REQUIRE_THROWS_AS(pipeline::load_config(dir.file("bad2.json")), FxError);

        cfg = small_config(dir, {"gru"});
        testutil::write_file(dir.file("bad3.json"), cfg.dump());
        REQUIRE_THROWS_AS(pipeline::load_config(dir.file("bad3.json")), FxError);
    }
    SECTION("target cannot be double-differenced") {
        auto cfg = small_config(dir, {"var"});
        cfg["var"]["second_difference"] = {"forex"};
        testutil::write_file(dir.file("bad4.json"), cfg.dump());
        REQUIRE_THROWS_AS(pipeline::load_config(dir.file("bad4.json")), FxError);
    }
}

TEST_CASE("panel puts the target first and deltas after") {
    testutil::TempDir dir("panel");
    const auto config = write_and_load(dir, small_config(dir, {"var"}));
    const auto panel = pipeline::build_panel(config);
    REQUIRE(panel.frame.names().front() == "forex");
    REQUIRE(panel.frame.cols() == 8);
    REQUIRE(panel.frame.rows() == 150);
    REQUIRE(panel.boundary == 135);

    // Delta column = USA - IND, spot-check one cell.
    const auto usa = load_csv(config.usa_csv);
    const auto ind = load_csv(config.ind_csv);
    const auto cpi_col = panel.frame.column_index("cpi");
    REQUIRE_THAT(panel.frame.values()(10, static_cast<Eigen::Index>(cpi_col)),
                 Catch::Matchers::WithinAbs(usa.values()(10, 1) - ind.values()(10, 1), 1e-12));
    // Target comes from the USA file, untouched.
    REQUIRE(panel.frame.values()(10, 0) == usa.values()(10, 0));
}

TEST_CASE("cmd_tests emits the full report set") {
    testutil::TempDir dir("tests");
    const auto config = write_and_load(dir, small_config(dir, {"var"}));
    pipeline::cmd_tests(config);

    const auto adf = read_json(config.out_dir / "adf.json");
    REQUIRE(adf.size() == 16);  // level + differenced for 8 columns

    // Paper-shaped pattern: the target is a unit-root level whose first
    // difference is stationary.
    bool level_seen = false, diff_seen = false;
    for (const auto& entry : adf) {
        if (entry["series"] != "forex") continue;
        if (entry["differenced"] == 0) {
            REQUIRE(entry["decision"] == "non-stationary");
            level_seen = true;
        } else {
            REQUIRE(entry["decision"] == "stationary");
            diff_seen = true;
        }
    }
    REQUIRE(level_seen);
    REQUIRE(diff_seen);

    const auto granger = read_json(config.out_dir / "granger.json");
    REQUIRE(granger.size() == 8 * 7);
    for (const auto& entry : granger) {
        REQUIRE(entry["p_value"].get<double>() >= 0.0);
        REQUIRE(entry["p_value"].get<double>() <= 1.0);
    }

    const auto dw = read_json(config.out_dir / "dw.json");
    REQUIRE(dw.size() == 8);
    for (const auto& entry : dw) {
        const double stat = entry["statistic"].get<double>();
        REQUIRE(stat >= 0.0);
        REQUIRE(stat <= 4.0);
    }

    REQUIRE(std::filesystem::exists(config.out_dir / "adf.csv"));
    REQUIRE(std::filesystem::exists(config.out_dir / "granger.csv"));
    REQUIRE(std::filesystem::exists(config.out_dir / "dw.csv"));
}

TEST_CASE("cmd_fit writes model files with the documented schema") {
    testutil::TempDir dir("fit");
    const auto config = write_and_load(dir, small_config(dir, {"var", "svr", "lstm"}));

    SECTION("var") {
        pipeline::cmd_fit(config, "var");
        const auto j = read_json(config.out_dir / "var.json");
        REQUIRE(j.contains("p"));
        REQUIRE(j.contains("alpha"));
        REQUIRE(j.contains("A"));
        REQUIRE(j.contains("sigma"));
        REQUIRE(j["names"][0] == "forex");
        REQUIRE(j["A"].size() == j["p"].get<std::size_t>());
    }
    SECTION("svr with a grid writes the cv table") {
        auto cfg = small_config(dir, {"svr"});
        cfg["svr"]["grid"] = {{{"C", 1.0}}, {{"C", 1000.0}}};
        const auto config2 = write_and_load(dir, cfg);
        pipeline::cmd_fit(config2, "svr");
        const auto j = read_json(config2.out_dir / "svr.json");
        REQUIRE(j.contains("support_vectors"));
        REQUIRE(j.contains("dual_coefs"));
        REQUIRE(j.contains("bias"));
        const auto table = testutil::read_file(config2.out_dir / "grid_cv.csv");
        REQUIRE(table.find("C,gamma,epsilon,mean_rmse,status") == 0);
        REQUIRE(std::count(table.begin(), table.end(), '\n') == 3);  // header + 2 cells
    }
    SECTION("lstm writes params and loss history") {
        pipeline::cmd_fit(config, "lstm");
        const auto j = read_json(config.out_dir / "lstm.json");
        REQUIRE(j["input_dim"] == 8);
        REQUIRE(j["hidden_dim"] == 16);
        REQUIRE(j.contains("W_xi"));
        REQUIRE(j.contains("W_hy"));
        const auto history = testutil::read_file(config.out_dir / "loss_history.csv");
        REQUIRE(history.find("epoch,train_loss,val_loss") == 0);
    }
    SECTION("lstm with zero epochs fails at fit time") {
        auto cfg = small_config(dir, {"lstm"});
        cfg["lstm"]["epochs"] = 0;
        const auto config2 = write_and_load(dir, cfg);
        REQUIRE_THROWS_AS(pipeline::cmd_fit(config2, "lstm"), FxError);
    }
}

TEST_CASE("cmd_evaluate scores fitted models and emits reports") {
    testutil::TempDir dir("eval");
    const auto config = write_and_load(dir, small_config(dir, {"var", "svr", "lstm"}));

    SECTION("missing model file is an error naming the file") {
        try {
            pipeline::cmd_evaluate(config);
            FAIL("expected MissingFile");
        } catch (const FxError& e) {
            REQUIRE(e.kind() == ErrorKind::MissingFile);
            REQUIRE(std::string(e.what()).find("var.json") != std::string::npos);
        }
    }
    SECTION("full evaluation") {
        for (const auto& m : config.models) pipeline::cmd_fit(config, m);
        const auto outcome = pipeline::cmd_evaluate(config);

        const auto report = read_json(config.out_dir / "report.json");
        REQUIRE(report.size() == 3);
        for (const auto& [name, entry] : report.items()) {
            const double mape = entry["mape"].get<double>();
            const double acc = entry["accuracy_pct"].get<double>();
            REQUIRE(acc == 100.0 - 100.0 * mape);
            REQUIRE(entry["n"].get<std::size_t>() == 15);
            REQUIRE(entry["rmse"].get<double>() >= 0.0);
        }

        // predictions.csv must load back through the data module.
        const auto preds = load_csv(config.out_dir / "predictions.csv");
        REQUIRE(preds.rows() == 15);
        REQUIRE(preds.names() ==
                std::vector<std::string>{"actual", "lstm", "svr", "var"});

        const auto features = read_json(config.out_dir / "features.json");
        REQUIRE(features["correlation"]["names"].size() == 8);
        REQUIRE(features["importance"]["names"].size() == 8);
        double sum = 0.0;
        for (const auto& v : features["importance"]["importances"]) sum += v.get<double>();
        REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));

        // CSV twins of the feature reports.
        const auto corr_csv = testutil::read_file(config.out_dir / "correlation.csv");
        REQUIRE(corr_csv.find("name,forex,") == 0);
        const auto imp_csv = testutil::read_file(config.out_dir / "importance.csv");
        REQUIRE(imp_csv.find("feature,importance") == 0);
        REQUIRE(imp_csv.find("forex_lag1") != std::string::npos);
    }
}

TEST_CASE("lstm peephole flag flows from config into the saved model") {
    testutil::TempDir dir("peep");
    auto cfg = small_config(dir, {"lstm"});
    cfg["lstm"]["epochs"] = 3;
    cfg["lstm"]["peephole_current_cell"] = true;
    const auto config = write_and_load(dir, cfg);
    pipeline::cmd_fit(config, "lstm");
    const auto j = read_json(config.out_dir / "lstm.json");
    REQUIRE(j["output_gate_uses_current_cell"] == true);
}

TEST_CASE("second difference switch reshapes the var input") {
    testutil::TempDir dir("d2");
    auto cfg = small_config(dir, {"var"});
    cfg["var"]["second_difference"] = {"cpi"};
    const auto config = write_and_load(dir, cfg);
    const auto panel = pipeline::build_panel(config);
    const auto plain = pipeline::build_var_input(panel.frame, {});
    const auto twice = pipeline::build_var_input(panel.frame, {"cpi"});
    REQUIRE(twice.rows() == plain.rows() - 1);
    const auto c = static_cast<Eigen::Index>(plain.column_index("cpi"));
    // Second difference = difference of consecutive first differences.
    REQUIRE_THAT(twice.values()(0, c),
                 Catch::Matchers::WithinAbs(plain.values()(1, c) - plain.values()(0, c), 1e-12));
    // Non-listed columns just drop their first row.
    const auto f = static_cast<Eigen::Index>(plain.column_index("forex"));
    REQUIRE(twice.values()(0, f) == plain.values()(1, f));

    pipeline::cmd_fit(config, "var");
    pipeline::cmd_evaluate(config);
    REQUIRE(std::filesystem::exists(config.out_dir / "report.json"));
}

TEST_CASE("stationarity policy `fail` rejects stubborn columns") {
    testutil::TempDir dir("policy");
    auto cfg = small_config(dir, {"var"});
    cfg["stationarity"] = "fail";
    synthetic::PanelSpec spec;
    spec.months = 150;
    spec.seed = 88;
    spec.integrated_delta = true;  // cpi delta stays non-stationary after one difference
    const auto pair = synthetic::make_panel(spec);
    testutil::write_file(dir.file("usa.csv"), pair.usa);
    testutil::write_file(dir.file("ind.csv"), pair.ind);
    testutil::write_file(dir.file("config.json"), cfg.dump());
    const auto config = pipeline::load_config(dir.file("config.json"));
    REQUIRE_THROWS_AS(pipeline::cmd_fit(config, "var"), FxError);

    auto relaxed = cfg;
    relaxed["stationarity"] = "auto-difference";
    testutil::write_file(dir.file("config2.json"), relaxed.dump());
    const auto config2 = pipeline::load_config(dir.file("config2.json"));
    pipeline::cmd_fit(config2, "var");  // warns instead
    REQUIRE(std::filesystem::exists(config2.out_dir / "var.json"));
}

TEST_CASE("identity sanity: persistence on a constant series scores 100%") {
    testutil::TempDir dir("sanity");
    // Constant target, wandering deltas; the persistence model is a
    // hand-written zero VAR.
    std::string usa = "date,forex,cpi,iip\n", ind = usa;
    YearMonth ym{2000, 1};
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double cpi_u = 100.0, cpi_i = 90.0, iip_u = 50.0, iip_i = 40.0;
    for (int t = 0; t < 80; ++t) {
        cpi_u += u(rng);
        cpi_i += u(rng);
        iip_u += u(rng);
        iip_i += u(rng);
        usa += ym.str() + ",50," + std::to_string(cpi_u) + "," + std::to_string(iip_u) + "\n";
        ind += ym.str() + ",50," + std::to_string(cpi_i) + "," + std::to_string(iip_i) + "\n";
        ym = ym.next();
    }
    testutil::write_file(dir.file("usa.csv"), usa);
    testutil::write_file(dir.file("ind.csv"), ind);

    const json cfg{{"usa_csv", dir.file("usa.csv").string()},
                   {"ind_csv", dir.file("ind.csv").string()},
                   {"target", "forex"},
                   {"models", {"var"}},
                   {"out_dir", dir.file("out").string()}};
    testutil::write_file(dir.file("config.json"), cfg.dump());
    const auto config = pipeline::load_config(dir.file("config.json"));

    var::VarModel persistence;
    persistence.lag_order = 1;
    persistence.names = {"forex", "cpi", "iip"};
    persistence.intercepts = Eigen::VectorXd::Zero(3);
    persistence.lag_coeffs = {Eigen::MatrixXd::Zero(3, 3)};
    persistence.sigma = Eigen::MatrixXd::Zero(3, 3);
    std::filesystem::create_directories(config.out_dir);
    pipeline::write_json(config.out_dir / "var.json", to_json(persistence));

    const auto outcome = pipeline::cmd_evaluate(config);
    REQUIRE(outcome.reports.at("var").mape == 0.0);
    REQUIRE(outcome.reports.at("var").accuracy_pct == 100.0);

    // Feature analysis cannot run on a constant target; it degrades to notes.
    const auto features = read_json(config.out_dir / "features.json");
    REQUIRE(features["correlation"].contains("error"));
    REQUIRE(features["importance"].contains("error"));
}

TEST_CASE("same seed reproduces byte-identical outputs") {
    testutil::TempDir dir("det");
    const auto config = write_and_load(dir, small_config(dir, {"var", "svr", "lstm"}));

    auto run_into = [&](const std::string& sub) {
        PipelineConfig c = config;
        c.out_dir = dir.file(sub);
        pipeline::cmd_run(c);
        return c.out_dir;
    };
    const auto a = run_into("out_a");
    const auto b = run_into("out_b");
    for (const auto* name :
         {"adf.json", "granger.json", "dw.json", "var.json", "svr.json", "lstm.json",
          "report.json", "features.json", "predictions.csv", "loss_history.csv"}) {
        REQUIRE(testutil::read_file(a / name) == testutil::read_file(b / name));
    }
}
