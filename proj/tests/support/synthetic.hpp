#pragma once

// Two-country synthetic panel: every macro variable is a per-country random
// walk (so levels carry a unit root and first differences are stationary),
// and the target's increments follow a lagged linear function of the delta
// increments plus noise.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace synthetic {

struct PanelSpec {
    std::size_t months = 297;
    int start_year = 1994;
    int start_month = 4;
    std::uint64_t seed = 20240601;
    double forex_start = 45.0;
    double forex_noise = 0.4;
    bool integrated_delta = false;  // make `cpi` an I(2) pair (delta stays non-stationary)
};

struct CsvPair {
    std::string usa;
    std::string ind;
};

inline CsvPair make_panel(const PanelSpec& spec) {
    const std::vector<std::string> vars{"cpi",      "iip",        "interest", "money_supply",
                                        "reserves", "stock_index", "trade"};
    const std::vector<double> beta{0.3, -0.2, 0.15, 0.1, -0.25, 0.2, 0.12};

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = spec.months;
    const std::size_t k = vars.size();

    std::vector<std::vector<double>> usa(k, std::vector<double>(n));
    std::vector<std::vector<double>> ind(k, std::vector<double>(n));
    for (std::size_t j = 0; j < k; ++j) {
        usa[j][0] = 100.0 + 10.0 * g(rng);
        ind[j][0] = 90.0 + 10.0 * g(rng);
        double usa_slope = 0.0;
        for (std::size_t t = 1; t < n; ++t) {
            if (spec.integrated_delta && j == 0) {
                // I(2) pair: the USA leg accumulates a drifting slope, so the
                // first difference of the delta still carries a unit root.
                usa_slope += 0.5 * g(rng);
                usa[j][t] = usa[j][t - 1] + usa_slope;
            } else {
                usa[j][t] = usa[j][t - 1] + 0.02 + 0.5 * g(rng);
            }
            ind[j][t] = ind[j][t - 1] + 0.01 + 0.5 * g(rng);
        }
    }

    std::vector<double> forex(n);
    forex[0] = spec.forex_start;
    forex[1] = forex[0] + spec.forex_noise * g(rng);
    for (std::size_t t = 2; t < n; ++t) {
        double signal = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double d_now = usa[j][t - 1] - ind[j][t - 1];
            const double d_prev = usa[j][t - 2] - ind[j][t - 2];
            signal += beta[j] * (d_now - d_prev);
        }
        forex[t] = forex[t - 1] + signal + spec.forex_noise * g(rng);
    }

    auto render = [&](const std::vector<std::vector<double>>& macro) {
        std::string csv = "date,forex";
        for (const auto& v : vars) csv += "," + v;
        csv += "\n";
        int year = spec.start_year, month = spec.start_month;
        char date[8];
        for (std::size_t t = 0; t < n; ++t) {
            std::snprintf(date, sizeof(date), "%04d-%02d", year, month);
            csv += date;
            csv += "," + std::to_string(forex[t]);
            for (std::size_t j = 0; j < k; ++j) csv += "," + std::to_string(macro[j][t]);
            csv += "\n";
            if (++month == 13) {
                month = 1;
                ++year;
            }
        }
        return csv;
    };

    return {render(usa), render(ind)};
}

}  // namespace synthetic
