// fxlab: batch driver for the forecasting pipeline.
// Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "fxlab/pipeline.hpp"

namespace {

struct Cli {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

fxlab::pipeline::PipelineConfig resolve_config(const Cli& cli) {
    auto config = fxlab::pipeline::load_config(cli.config_path);
    // Seed precedence: --seed, then FXLAB_SEED, then the config file value.
    if (const char* env = std::getenv("FXLAB_SEED"); env != nullptr && !cli.seed) {
        try {
            config.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw fxlab::FxError(fxlab::ErrorKind::ConfigError,
                                 std::string("FXLAB_SEED is not an integer: ") + env);
        }
    }
    if (cli.seed) config.seed = *cli.seed;
    if (cli.out_dir) config.out_dir = *cli.out_dir;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fxlab: stationarity tests, VAR / SVR / LSTM fits and forecast reports\n"
                 "for two-country monthly macroeconomic panels"};
    app.require_subcommand(1);

    Cli cli;
    std::string fit_model;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", cli.config_path, "JSON pipeline config")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--seed", cli.seed, "override the master seed");
        cmd->add_option("--out", cli.out_dir, "override the output directory");
    };

    auto* tests = app.add_subcommand("tests", "run ADF, Granger and Durbin-Watson tests");
    add_common(tests);
    auto* fit = app.add_subcommand("fit", "fit one model on the training span");
    fit->add_option("model", fit_model, "var | svr | lstm")->required();
    add_common(fit);
    auto* evaluate = app.add_subcommand("evaluate", "score fitted models on the test span");
    add_common(evaluate);
    auto* run = app.add_subcommand("run", "tests, all selected fits, then evaluate");
    add_common(run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // --help exits 0, any usage error exits 2
    }

    fxlab::pipeline::PipelineConfig config;
    try {
        config = resolve_config(cli);
        if (fit->parsed()) {
            // Unknown model names are a usage problem, not a runtime one.
            fxlab::detail::require(fit_model == "var" || fit_model == "svr" ||
                                       fit_model == "lstm",
                                   fxlab::ErrorKind::ConfigError,
                                   "unknown model `" + fit_model + "`");
        }
    } catch (const fxlab::FxError& e) {
        std::cerr << "fxlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fxlab: " << e.what() << "\n";
        return 2;
    }

    try {
        if (tests->parsed()) {
            fxlab::pipeline::cmd_tests(config);
        } else if (fit->parsed()) {
            fxlab::pipeline::cmd_fit(config, fit_model);
        } else if (evaluate->parsed()) {
            fxlab::pipeline::cmd_evaluate(config);
        } else if (run->parsed()) {
            fxlab::pipeline::cmd_run(config);
        }
    } catch (const fxlab::FxError& e) {
        std::cerr << "fxlab: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fxlab: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
