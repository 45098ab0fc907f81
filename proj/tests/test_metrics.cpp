#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fxlab/metrics.hpp"

using namespace fxlab;

TEST_CASE("mape hand values") {
    REQUIRE(metrics::mape(std::vector<double>{3.0, 7.0}, std::vector<double>{3.0, 7.0}) == 0.0);
    // |110-100|/100 = 0.1, |180-200|/200 = 0.1 -> mean 0.1
    REQUIRE_THAT(metrics::mape(std::vector<double>{110.0, 180.0}, std::vector<double>{100.0, 200.0}),
                 Catch::Matchers::WithinAbs(0.1, 1e-15));
    REQUIRE_THROWS_AS(metrics::mape(std::vector<double>{1.0}, std::vector<double>{0.0}), FxError);
    REQUIRE_THROWS_AS(metrics::mape(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}), FxError);
}

TEST_CASE("mpe hand values") {
    REQUIRE(metrics::mpe(std::vector<double>{5.0}, std::vector<double>{5.0}) == 0.0);
    // (+0.1 - 0.1)/2 = 0: systematic errors cancel
    REQUIRE_THAT(metrics::mpe(std::vector<double>{110.0, 180.0}, std::vector<double>{100.0, 200.0}),
                 Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("rmse hand values") {
    REQUIRE(metrics::rmse(std::vector<double>{2.0}, std::vector<double>{2.0}) == 0.0);
    REQUIRE(metrics::rmse(std::vector<double>{3.0}, std::vector<double>{0.0}) == 3.0);
    // sqrt((1+4)/2)
    REQUIRE_THAT(metrics::rmse(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}),
                 Catch::Matchers::WithinAbs(std::sqrt(2.5), 1e-15));
}

TEST_CASE("evaluate ties accuracy to mape exactly") {
    SECTION("perfect prediction") {
        const auto report = metrics::evaluate(std::vector<double>{4.0, 5.0}, std::vector<double>{4.0, 5.0});
        REQUIRE(report.mape == 0.0);
        REQUIRE(report.mpe == 0.0);
        REQUIRE(report.rmse == 0.0);
        REQUIRE(report.accuracy_pct == 100.0);
        REQUIRE(report.n == 2);
    }
    SECTION("published error levels map to published accuracies") {
        // Reports with known MAPE values; accuracy must come out as
        // 100 - 100*mape without re-rounding.
        struct Case {
            double mape, accuracy;
        };
        for (const auto& c : {Case{0.0369, 96.31}, Case{0.0283, 97.17}, Case{0.0217, 97.83}}) {
            // One-term vectors realize any target mape exactly: pred = (1+m)*actual.
            const std::vector<double> actual{100.0};
            const std::vector<double> pred{100.0 * (1.0 + c.mape)};
            const auto report = metrics::evaluate(pred, actual);
            REQUIRE_THAT(report.mape, Catch::Matchers::WithinAbs(c.mape, 1e-12));
            REQUIRE_THAT(report.accuracy_pct, Catch::Matchers::WithinAbs(c.accuracy, 0.005));
            REQUIRE(report.accuracy_pct == 100.0 - 100.0 * report.mape);
        }
    }
}

TEST_CASE("metric properties on fuzzed vectors") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> val(-100.0, 100.0);
    std::uniform_int_distribution<int> len(1, 20);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = len(rng);
        std::vector<double> pred(n), actual(n);
        for (int i = 0; i < n; ++i) {
            pred[i] = val(rng);
            do {
                actual[i] = val(rng);
            } while (actual[i] == 0.0);
        }
        const auto report = metrics::evaluate(pred, actual);
        REQUIRE(std::fabs(report.mpe) <= report.mape + 1e-12);
        REQUIRE(report.accuracy_pct + 100.0 * report.mape == 100.0);
        double mean_err = 0.0;
        for (int i = 0; i < n; ++i) mean_err += (pred[i] - actual[i]) / n;
        REQUIRE(report.rmse >= std::fabs(mean_err) - 1e-12);

        // permutation invariance: reverse the pairing order
        std::vector<double> pred_r(pred.rbegin(), pred.rend());
        std::vector<double> actual_r(actual.rbegin(), actual.rend());
        const auto report_r = metrics::evaluate(pred_r, actual_r);
        REQUIRE_THAT(report_r.mape, Catch::Matchers::WithinRel(report.mape, 1e-12) ||
                                        Catch::Matchers::WithinAbs(report.mape, 1e-15));
        REQUIRE_THAT(report_r.rmse, Catch::Matchers::WithinRel(report.rmse, 1e-12) ||
                                        Catch::Matchers::WithinAbs(report.rmse, 1e-15));
    }
}
