#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fxlab/error.hpp"
#include "fxlab/frame.hpp"
#include "fxlab/ols.hpp"

namespace fxlab::var {

/// VAR(p) fitted by equation-wise least squares.
/// coefficient(tau)(j, i) is the effect of variable i's tau-th lag on
/// variable j; intercepts line up with `names`.
struct VarModel {
    std::size_t lag_order = 0;
    std::vector<std::string> names;
    Eigen::VectorXd intercepts;               // k
    std::vector<Eigen::MatrixXd> lag_coeffs;  // p matrices, each k x k
    Eigen::MatrixXd residuals;                // (n - p) x k
    Eigen::MatrixXd sigma;                    // k x k, E'E / T_eff

    std::size_t dim() const noexcept { return names.size(); }
};

namespace detail_var {

// Lagged design over response rows first_t..n-1: [1, y_{t-1}, ..., y_{t-p}].
inline void build_design(const Eigen::MatrixXd& values, std::size_t p, std::size_t first_t,
                         Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
    const auto n = static_cast<std::size_t>(values.rows());
    const auto k = values.cols();
    const std::size_t rows = n - first_t;
    X.resize(static_cast<Eigen::Index>(rows), 1 + static_cast<Eigen::Index>(p) * k);
    Y.resize(static_cast<Eigen::Index>(rows), k);
    for (std::size_t t = first_t; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first_t);
        Y.row(r) = values.row(static_cast<Eigen::Index>(t));
        X(r, 0) = 1.0;
        for (std::size_t tau = 1; tau <= p; ++tau)
            X.block(r, 1 + static_cast<Eigen::Index>(tau - 1) * k, 1, k) =
                values.row(static_cast<Eigen::Index>(t - tau));
    }
}

inline Eigen::MatrixXd solve_equations(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    detail::require(qr.rank() == X.cols(), ErrorKind::SingularRegression,
                    "VAR design matrix is rank deficient");
    return qr.solve(Y);
}

}  // namespace detail_var

/// Fit all k equations of a VAR(p) on the frame's rows.
inline VarModel fit_var(const TimeSeriesFrame& frame, std::size_t p) {
    const std::size_t n = frame.rows();
    const std::size_t k = frame.cols();
    detail::require(p >= 1, ErrorKind::ShapeMismatch, "lag order must be >= 1");
    detail::require(n >= k * p + p + 2, ErrorKind::SeriesTooShort,
                    "not enough rows to identify a VAR(" + std::to_string(p) + ")");

    Eigen::MatrixXd X, Y;
    detail_var::build_design(frame.values(), p, p, X, Y);
    const Eigen::MatrixXd B = detail_var::solve_equations(X, Y);  // (1 + p*k) x k

    VarModel model;
    model.lag_order = p;
    model.names = frame.names();
    model.intercepts = B.row(0).transpose();
    for (std::size_t tau = 1; tau <= p; ++tau) {
        // Rows of B for lag tau are "effect of variable i" -> transpose to (j, i).
        model.lag_coeffs.push_back(
            B.middleRows(1 + static_cast<Eigen::Index>((tau - 1) * k),
                         static_cast<Eigen::Index>(k))
                .transpose());
    }
    model.residuals = Y - X * B;
    model.sigma = model.residuals.transpose() * model.residuals /
                  static_cast<double>(model.residuals.rows());
    assert((X.transpose() * model.residuals).norm() <=
           1e-8 * (X.transpose() * Y).norm() + 1e-12);
    return model;
}

/// Argmin over p = 1..max_lag of AIC(p) = ln det Sigma_p + 2(k^2 p + k)/T,
/// all candidates fitted on the common sample rows max_lag..n-1. Ties break
/// to the smaller p.
inline std::size_t select_lag_aic(const TimeSeriesFrame& frame, std::size_t max_lag) {
    const std::size_t n = frame.rows();
    const std::size_t k = frame.cols();
    detail::require(max_lag >= 1, ErrorKind::ShapeMismatch, "max_lag must be >= 1");
    detail::require(n >= k * max_lag + max_lag + 10, ErrorKind::SeriesTooShort,
                    "not enough rows to compare lags up to " + std::to_string(max_lag));

    const double t_eff = static_cast<double>(n - max_lag);
    std::size_t best_p = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= max_lag; ++p) {
        Eigen::MatrixXd X, Y;
        detail_var::build_design(frame.values(), p, max_lag, X, Y);
        const Eigen::MatrixXd B = detail_var::solve_equations(X, Y);
        const Eigen::MatrixXd E = Y - X * B;
        const Eigen::MatrixXd sigma = E.transpose() * E / t_eff;
        const double log_det = std::log(sigma.determinant());
        const double n_params = static_cast<double>(k * k * p + k);
        const double aic = log_det + 2.0 * n_params / t_eff;
        if (aic < best_aic) {
            best_aic = aic;
            best_p = p;
        }
    }
    return best_p;
}

/// Iterated multi-step forecast; forecasts feed back as inputs.
/// `history` holds the last p observed rows, oldest first.
inline Eigen::MatrixXd forecast_var(const VarModel& model, const Eigen::MatrixXd& history,
                                    std::size_t horizon) {
    const auto k = static_cast<Eigen::Index>(model.dim());
    const auto p = static_cast<Eigen::Index>(model.lag_order);
    detail::require(history.rows() == p && history.cols() == k, ErrorKind::ShapeMismatch,
                    "history must be lag_order x dim");

    Eigen::MatrixXd buffer(p + static_cast<Eigen::Index>(horizon), k);
    buffer.topRows(p) = history;
    for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(horizon); ++h) {
        Eigen::VectorXd next = model.intercepts;
        for (Eigen::Index tau = 1; tau <= p; ++tau)
            next += model.lag_coeffs[static_cast<std::size_t>(tau - 1)] *
                    buffer.row(p + h - tau).transpose();
        buffer.row(p + h) = next.transpose();
    }
    return buffer.bottomRows(static_cast<Eigen::Index>(horizon));
}

/// One-step-ahead forecasts of the target's *level* over a test window.
/// The model is fitted on differenced data; each prediction uses actual
/// lagged differences (no error accumulation) and is re-anchored to the
/// actual level that precedes it: level_hat[t] = anchor[t] + diff_hat[t].
/// `test_first`/`test_count` index rows of `diff_frame`.
inline std::vector<double> rolling_one_step(const VarModel& model,
                                            const TimeSeriesFrame& diff_frame,
                                            std::size_t test_first, std::size_t test_count,
                                            const std::string& target,
                                            const std::vector<double>& level_anchor) {
    detail::require(diff_frame.names() == model.names, ErrorKind::NameMismatch,
                    "frame columns do not match the fitted model");
    detail::require(level_anchor.size() == test_count, ErrorKind::ShapeMismatch,
                    "one level anchor per test point required");
    if (test_count == 0) return {};
    const std::size_t p = model.lag_order;
    detail::require(test_first >= p && test_first + test_count <= diff_frame.rows(),
                    ErrorKind::ShapeMismatch, "test range leaves no room for lagged values");

    const auto target_row = static_cast<Eigen::Index>(diff_frame.column_index(target));
    std::vector<double> levels(test_count);
    for (std::size_t i = 0; i < test_count; ++i) {
        const std::size_t t = test_first + i;
        double diff_hat = model.intercepts(target_row);
        for (std::size_t tau = 1; tau <= p; ++tau)
            diff_hat += model.lag_coeffs[tau - 1].row(target_row).dot(
                diff_frame.values().row(static_cast<Eigen::Index>(t - tau)));
        levels[i] = level_anchor[i] + diff_hat;
    }
    return levels;
}

}  // namespace fxlab::var
