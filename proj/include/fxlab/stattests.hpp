#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fxlab/distributions.hpp"
#include "fxlab/error.hpp"
#include "fxlab/frame.hpp"
#include "fxlab/ols.hpp"

namespace fxlab::stats {

enum class AdfRegression { Constant, ConstantAndTrend };

/// Outcome of the augmented Dickey-Fuller unit-root test. The decision is
/// taken at the 5% level only: reject_unit_root iff statistic < critical_5pct.
struct AdfResult {
    double statistic = 0.0;  // DF_tau = gamma_hat / se_gamma
    double gamma_hat = 0.0;
    double se_gamma = 0.0;
    std::size_t lag_order_used = 0;
    AdfRegression regression_kind = AdfRegression::Constant;
    double critical_5pct = 0.0;
    bool reject_unit_root = false;
};

struct GrangerResult {
    std::string cause;
    std::string effect;
    std::size_t lags = 0;
    double f_statistic = 0.0;
    double p_value = 1.0;
    bool reject_noncausality = false;  // p_value < 0.05
};

enum class DwInterpretation { PositiveAutocorr, None, NegativeAutocorr };

struct DwResult {
    double statistic = 0.0;  // in [0, 4]
    DwInterpretation interpretation = DwInterpretation::None;
};

/// Finite-sample 5% Dickey-Fuller critical value, via the MacKinnon response
/// surface cv(T) = b_inf + b1/T + b2/T^2 + b3/T^3. Near T ~ 290 the constant
/// kind evaluates to about -2.87, the textbook threshold for samples of a few
/// hundred monthly observations.
inline double adf_critical_5pct(std::size_t n_obs, AdfRegression kind) {
    detail::require(n_obs > 0, ErrorKind::SeriesTooShort, "empty regression sample");
    const double t = static_cast<double>(n_obs);
    if (kind == AdfRegression::Constant) {
        return -2.86154 - 2.8903 / t - 4.234 / (t * t) - 40.04 / (t * t * t);
    }
    return -3.41049 - 4.3904 / t - 9.036 / (t * t) - 45.374 / (t * t * t);
}

/// Schwert's rule of thumb, the default lag ceiling: floor(12*(n/100)^0.25).
inline std::size_t adf_default_max_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
}

namespace detail_adf {

// Design for: dy_t = a [+ b*t] + gamma*y_{t-1} + sum_i d_i*dy_{t-i} + e_t,
// over rows t = first_t .. n-1.
inline void build_design(std::span<const double> y, std::size_t p, std::size_t first_t,
                         AdfRegression kind, Eigen::MatrixXd& X, Eigen::VectorXd& dy) {
    const std::size_t n = y.size();
    const std::size_t rows = n - first_t;
    const bool trend = kind == AdfRegression::ConstantAndTrend;
    const std::size_t cols = (trend ? 2 : 1) + 1 + p;
    X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    dy.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t t = first_t; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first_t);
        dy(r) = y[t] - y[t - 1];
        Eigen::Index c = 0;
        X(r, c++) = 1.0;
        if (trend) X(r, c++) = static_cast<double>(t);
        X(r, c++) = y[t - 1];
        for (std::size_t i = 1; i <= p; ++i) X(r, c++) = y[t - i] - y[t - i - 1];
    }
}

}  // namespace detail_adf

/// Augmented Dickey-Fuller test. The lag order is chosen by minimizing AIC
/// over 0..max_lag on a common effective sample, then the reported regression
/// is refit with that order on the longest sample it allows.
inline AdfResult adf_test(std::span<const double> series, std::size_t max_lag,
                          AdfRegression kind = AdfRegression::Constant) {
    const std::size_t n = series.size();
    detail::require(n >= max_lag + 10, ErrorKind::SeriesTooShort,
                    "series length " + std::to_string(n) + " < max_lag + 10");
    for (double v : series)
        detail::require(std::isfinite(v), ErrorKind::NonNumericCell, "non-finite series value");

    const std::size_t gamma_col = kind == AdfRegression::ConstantAndTrend ? 2 : 1;

    // Lag selection: common sample t = max_lag+1 .. n-1 keeps AIC comparable.
    std::size_t best_p = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    const double t_common = static_cast<double>(n - max_lag - 1);
    Eigen::MatrixXd X;
    Eigen::VectorXd dy;
    for (std::size_t p = 0; p <= max_lag; ++p) {
        detail_adf::build_design(series, p, max_lag + 1, kind, X, dy);
        const double rss = ols_rss(X, dy);
        const double k = static_cast<double>(X.cols());
        const double aic = t_common * std::log(rss / t_common) + 2.0 * k;
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }

    detail_adf::build_design(series, best_p, best_p + 1, kind, X, dy);
    const OlsFit fit = ols_fit(X, dy);
    const auto gc = static_cast<Eigen::Index>(gamma_col);

    AdfResult result;
    result.gamma_hat = fit.coef(gc);
    result.se_gamma = fit.standard_error(gc);
    detail::require(result.se_gamma > 0.0, ErrorKind::SingularRegression,
                    "zero standard error on the unit-root coefficient");
    result.statistic = result.gamma_hat / result.se_gamma;
    result.lag_order_used = best_p;
    result.regression_kind = kind;
    result.critical_5pct = adf_critical_5pct(static_cast<std::size_t>(X.rows()), kind);
    result.reject_unit_root = result.statistic < result.critical_5pct;
    return result;
}

inline AdfResult adf_test(const std::vector<double>& series, std::size_t max_lag,
                          AdfRegression kind = AdfRegression::Constant) {
    return adf_test(std::span<const double>(series), max_lag, kind);
}

/// Granger F-test: does adding `cause` lags improve the regression of
/// `effect` on its own lags? F = [(RSS_r - RSS_u)/L] / [RSS_u/(n - 2L - 1)]
/// with n the number of regression observations.
inline GrangerResult granger_causality(const TimeSeriesFrame& frame, const std::string& cause,
                                       const std::string& effect, std::size_t lags) {
    detail::require(lags >= 1, ErrorKind::ShapeMismatch, "lags must be >= 1");
    detail::require(frame.rows() >= 3 * lags + 10, ErrorKind::SeriesTooShort,
                    "need at least 3*lags + 10 rows");
    const auto y = frame.column(effect);
    const auto x = frame.column(cause);

    const std::size_t n = y.size();
    const std::size_t rows = n - lags;
    const auto L = static_cast<Eigen::Index>(lags);

    Eigen::VectorXd resp(rows);
    Eigen::MatrixXd Xr(rows, 1 + L);
    Eigen::MatrixXd Xu(rows, 1 + 2 * L);
    for (std::size_t t = lags; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - lags);
        resp(r) = y[t];
        Xr(r, 0) = 1.0;
        Xu(r, 0) = 1.0;
        for (Eigen::Index i = 1; i <= L; ++i) {
            Xr(r, i) = y[t - static_cast<std::size_t>(i)];
            Xu(r, i) = y[t - static_cast<std::size_t>(i)];
            Xu(r, L + i) = x[t - static_cast<std::size_t>(i)];
        }
    }

    const double df2 = static_cast<double>(rows) - 2.0 * static_cast<double>(lags) - 1.0;
    detail::require(df2 > 0.0, ErrorKind::SeriesTooShort, "no residual degrees of freedom left");

    const double rss_r = ols_rss(Xr, resp);
    const double rss_u = ols_rss(Xu, resp);
    detail::require(rss_u > 0.0, ErrorKind::SingularRegression,
                    "unrestricted regression fits exactly; F undefined");

    GrangerResult result;
    result.cause = cause;
    result.effect = effect;
    result.lags = lags;
    result.f_statistic = std::max(0.0, (rss_r - rss_u) / static_cast<double>(lags) /
                                           (rss_u / df2));
    result.p_value = dist::f_sf(result.f_statistic, static_cast<double>(lags), df2);
    result.reject_noncausality = result.p_value < 0.05;
    return result;
}

/// All ordered column pairs (diagonal omitted), row-major by cause.
inline std::vector<GrangerResult> granger_matrix(const TimeSeriesFrame& frame,
                                                 std::size_t lags) {
    std::vector<GrangerResult> results;
    for (const auto& cause : frame.names())
        for (const auto& effect : frame.names())
            if (cause != effect) results.push_back(granger_causality(frame, cause, effect, lags));
    return results;
}

/// Durbin-Watson statistic: sum of squared successive differences over the
/// sum of squares. Always lands in [0, 4]; ~2 means no first-order
/// autocorrelation.
inline DwResult durbin_watson(std::span<const double> residuals, double band_lo = 1.7,
                              double band_hi = 2.3) {
    detail::require(residuals.size() >= 2, ErrorKind::SeriesTooShort,
                    "need at least 2 residuals");
    double num = 0.0, den = residuals[0] * residuals[0];
    for (std::size_t t = 1; t < residuals.size(); ++t) {
        const double step = residuals[t] - residuals[t - 1];
        num += step * step;
        den += residuals[t] * residuals[t];
    }
    detail::require(den > 0.0, ErrorKind::AllZero, "all residuals are zero");
    DwResult result;
    result.statistic = num / den;
    if (result.statistic < band_lo)
        result.interpretation = DwInterpretation::PositiveAutocorr;
    else if (result.statistic > band_hi)
        result.interpretation = DwInterpretation::NegativeAutocorr;
    else
        result.interpretation = DwInterpretation::None;
    return result;
}

inline DwResult durbin_watson(const std::vector<double>& residuals, double band_lo = 1.7,
                              double band_hi = 2.3) {
    return durbin_watson(std::span<const double>(residuals), band_lo, band_hi);
}

inline const char* to_string(DwInterpretation i) {
    switch (i) {
        case DwInterpretation::PositiveAutocorr: return "positive-autocorr";
        case DwInterpretation::None: return "none";
        case DwInterpretation::NegativeAutocorr: return "negative-autocorr";
    }
    return "unknown";
}

}  // namespace fxlab::stats
