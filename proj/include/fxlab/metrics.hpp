#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fxlab/error.hpp"

namespace fxlab::metrics {

/// The four headline numbers of a forecast evaluation. accuracy_pct is
/// 100 - 100*mape computed in the same arithmetic, never re-derived.
struct MetricsReport {
    double mape = 0.0;          // fraction
    double mpe = 0.0;           // fraction, signed
    double rmse = 0.0;          // target units
    double accuracy_pct = 0.0;  // = 100 - 100*mape
    std::size_t n = 0;
};

namespace detail_metrics {

inline void check_lengths(std::span<const double> pred, std::span<const double> actual) {
    detail::require(pred.size() == actual.size(), ErrorKind::LengthMismatch,
                    "prediction and actual lengths differ");
    detail::require(!pred.empty(), ErrorKind::LengthMismatch, "empty input");
}

inline void check_nonzero(std::span<const double> actual) {
    for (std::size_t i = 0; i < actual.size(); ++i)
        detail::require(actual[i] != 0.0, ErrorKind::ZeroActual,
                        "actual value at index " + std::to_string(i) + " is zero");
}

}  // namespace detail_metrics

/// (1/n) sum |(pred - actual)/actual|
inline double mape(std::span<const double> pred, std::span<const double> actual) {
    detail_metrics::check_lengths(pred, actual);
    detail_metrics::check_nonzero(actual);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        sum += std::fabs((pred[i] - actual[i]) / actual[i]);
    return sum / static_cast<double>(pred.size());
}

/// (1/n) sum (pred - actual)/actual; positive means over-prediction.
inline double mpe(std::span<const double> pred, std::span<const double> actual) {
    detail_metrics::check_lengths(pred, actual);
    detail_metrics::check_nonzero(actual);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - actual[i]) / actual[i];
    return sum / static_cast<double>(pred.size());
}

/// sqrt(sum (pred - actual)^2 / n)
inline double rmse(std::span<const double> pred, std::span<const double> actual) {
    detail_metrics::check_lengths(pred, actual);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        sum += (pred[i] - actual[i]) * (pred[i] - actual[i]);
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

inline MetricsReport evaluate(std::span<const double> pred, std::span<const double> actual) {
    MetricsReport report;
    report.mape = mape(pred, actual);
    report.mpe = mpe(pred, actual);
    report.rmse = rmse(pred, actual);
    report.accuracy_pct = 100.0 - 100.0 * report.mape;
    report.n = pred.size();
    return report;
}

inline double mape(const std::vector<double>& pred, const std::vector<double>& actual) {
    return mape(std::span<const double>(pred), std::span<const double>(actual));
}
inline double mpe(const std::vector<double>& pred, const std::vector<double>& actual) {
    return mpe(std::span<const double>(pred), std::span<const double>(actual));
}
inline double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    return rmse(std::span<const double>(pred), std::span<const double>(actual));
}
inline MetricsReport evaluate(const std::vector<double>& pred,
                              const std::vector<double>& actual) {
    return evaluate(std::span<const double>(pred), std::span<const double>(actual));
}

}  // namespace fxlab::metrics
