#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fxlab/error.hpp"

namespace fxlab::svr {

struct SvrConfig {
    double C = 1000.0;
    double gamma = 0.001;
    double epsilon = 0.1;
    double tolerance = 1e-6;
    std::size_t max_iterations = 2'000'000;

    void validate() const {
        detail::require(C > 0.0, ErrorKind::ConfigError, "C must be positive");
        detail::require(gamma > 0.0, ErrorKind::ConfigError, "gamma must be positive");
        detail::require(epsilon >= 0.0, ErrorKind::ConfigError, "epsilon must be >= 0");
        detail::require(tolerance > 0.0, ErrorKind::ConfigError, "tolerance must be positive");
        detail::require(tolerance < epsilon + C, ErrorKind::ConfigError,
                        "tolerance must be smaller than epsilon + C");
        detail::require(max_iterations >= 1, ErrorKind::ConfigError,
                        "max_iterations must be >= 1");
    }
};

/// Kernel expansion f(x) = sum_i dual_coefs[i] * k(sv_i, x) + bias.
/// Only vectors with nonzero dual coefficient are stored. For degenerate
/// training data (all targets inside one epsilon tube) the model is the
/// constant mean and `degenerate` is set.
struct SvrModel {
    Eigen::MatrixXd support_vectors;  // m x d
    Eigen::VectorXd dual_coefs;       // m, each in [-C, C] \ {0}
    double bias = 0.0;
    SvrConfig config;
    bool degenerate = false;
};

inline double rbf_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double gamma) {
    detail::require(x1.size() == x2.size(), ErrorKind::DimensionMismatch,
                    "kernel arguments have different dimensions");
    detail::require(gamma >= 0.0, ErrorKind::ConfigError, "gamma must be >= 0");
    return std::exp(-gamma * (x1 - x2).squaredNorm());
}

inline double predict_svr(const SvrModel& model, const Eigen::VectorXd& x) {
    if (model.support_vectors.rows() > 0) {
        detail::require(x.size() == model.support_vectors.cols(), ErrorKind::DimensionMismatch,
                        "query dimension does not match training dimension");
    }
    double value = model.bias;
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        value += model.dual_coefs(i) *
                 rbf_kernel(model.support_vectors.row(i).transpose(), x, model.config.gamma);
    }
    return value;
}

/// Fit result carrying the full dual vector (one beta per training row),
/// which the KKT checks need; SvrModel keeps only the support vectors.
struct SvrFit {
    SvrModel model;
    Eigen::VectorXd beta;  // n, beta_i = alpha_i - alpha_i^*
    std::size_t iterations = 0;
};

namespace detail_svr {

inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, double gamma) {
    const Eigen::Index n = X.rows();
    Eigen::VectorXd sq = X.rowwise().squaredNorm();
    Eigen::MatrixXd K = -2.0 * (X * X.transpose());
    K.colwise() += sq;
    K.rowwise() += sq.transpose();
    return (-gamma * K.array()).exp();
}

}  // namespace detail_svr

/// Solve the epsilon-SVR dual
///   min 1/2 b'Kb + eps*sum|b_i| - y'b   s.t.  sum b_i = 0, |b_i| <= C
/// by sequential two-coefficient optimization with maximal-violating-pair
/// selection on the equivalent smooth 2n-variable problem in (alpha, alpha*).
/// Converged when the largest KKT violation drops below config.tolerance.
inline SvrFit fit_svr_detailed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const SvrConfig& config) {
    config.validate();
    const Eigen::Index n = X.rows();
    detail::require(n >= 2, ErrorKind::TooFewSamples, "need at least 2 training rows");
    detail::require(X.allFinite() && y.allFinite(), ErrorKind::NonNumericCell,
                    "non-finite training data");
    detail::require(y.size() == n, ErrorKind::LengthMismatch, "X rows and y length differ");

    SvrFit fit;
    fit.model.config = config;
    fit.beta = Eigen::VectorXd::Zero(n);

    // Whole target range inside one tube: optimum is beta = 0, any feasible
    // bias; flag it and use the mean.
    if (y.maxCoeff() - y.minCoeff() <= 2.0 * config.epsilon) {
        fit.model.degenerate = true;
        fit.model.bias = y.mean();
        fit.model.support_vectors.resize(0, X.cols());
        fit.model.dual_coefs.resize(0);
        return fit;
    }

    const double C = config.C;
    const double eps = config.epsilon;
    const Eigen::MatrixXd K = detail_svr::kernel_matrix(X, config.gamma);

    // 2n coordinates: u < n is alpha_u (z=+1), u >= n is alpha*_{u-n} (z=-1).
    // G_u = z_u*(K beta)_i + eps - z_u*y_i; beta starts at zero.
    std::vector<double> xcoef(static_cast<std::size_t>(2 * n), 0.0);
    Eigen::VectorXd G(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        G(i) = eps - y(i);
        G(n + i) = eps + y(i);
    }
    auto zsign = [n](Eigen::Index u) { return u < n ? 1.0 : -1.0; };
    auto sample = [n](Eigen::Index u) { return u < n ? u : u - n; };

#ifndef NDEBUG
    auto objective = [&]() {
        // 1/2 x'(G + p) with p_u = eps - z_u y_i; valid because G = Qx + p.
        double obj = 0.0;
        for (Eigen::Index u = 0; u < 2 * n; ++u) {
            const double p_u = eps - zsign(u) * y(sample(u));
            obj += 0.5 * xcoef[static_cast<std::size_t>(u)] * (G(u) + p_u);
        }
        return obj;
    };
    double prev_obj = objective();
#endif

    double b_low = 0.0, b_high = 0.0;
    std::size_t iter = 0;
    for (;; ++iter) {
        // Maximal violating pair over -z_u G_u.
        Eigen::Index u_best = -1, v_best = -1;
        b_low = -std::numeric_limits<double>::infinity();
        b_high = std::numeric_limits<double>::infinity();
        for (Eigen::Index u = 0; u < 2 * n; ++u) {
            const double xu = xcoef[static_cast<std::size_t>(u)];
            const double score = -zsign(u) * G(u);
            const bool in_up = (u < n) ? xu < C : xu > 0.0;
            const bool in_low = (u < n) ? xu > 0.0 : xu < C;
            if (in_up && score > b_low) {
                b_low = score;
                u_best = u;
            }
            if (in_low && score < b_high) {
                b_high = score;
                v_best = u;
            }
        }
        if (u_best < 0 || v_best < 0 || b_low - b_high < config.tolerance) break;
        detail::require(iter < config.max_iterations, ErrorKind::NoConvergence,
                        "SMO did not converge in " + std::to_string(config.max_iterations) +
                            " iterations (violation " + std::to_string(b_low - b_high) + ")");

        const Eigen::Index i = sample(u_best), j = sample(v_best);
        const double zu = zsign(u_best), zv = zsign(v_best);
        double& xu = xcoef[static_cast<std::size_t>(u_best)];
        double& xv = xcoef[static_cast<std::size_t>(v_best)];
        const double old_u = xu, old_v = xv;

        if (zu != zv) {
            const double quad = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), 1e-12);
            const double delta = (-G(u_best) - G(v_best)) / quad;
            const double diff = xu - xv;
            xu += delta;
            xv += delta;
            if (diff > 0.0 && xv < 0.0) {
                xv = 0.0;
                xu = diff;
            } else if (diff <= 0.0 && xu < 0.0) {
                xu = 0.0;
                xv = -diff;
            }
            if (diff > 0.0 && xu > C) {
                xu = C;
                xv = C - diff;
            } else if (diff <= 0.0 && xv > C) {
                xv = C;
                xu = C + diff;
            }
        } else {
            const double quad = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), 1e-12);
            const double delta = (G(u_best) - G(v_best)) / quad;
            const double sum = xu + xv;
            xu -= delta;
            xv += delta;
            if (sum > C) {
                if (xu > C) {
                    xu = C;
                    xv = sum - C;
                } else if (xv > C) {
                    xv = C;
                    xu = sum - C;
                }
            } else {
                if (xv < 0.0) {
                    xv = 0.0;
                    xu = sum;
                } else if (xu < 0.0) {
                    xu = 0.0;
                    xv = sum;
                }
            }
        }

        const double du = xu - old_u, dv = xv - old_v;
        if (du == 0.0 && dv == 0.0) break;  // numerically stuck at a bound
        const double dbeta_i = zu * du, dbeta_j = zv * dv;
        fit.beta(i) += dbeta_i;
        fit.beta(j) += dbeta_j;
        for (Eigen::Index w = 0; w < 2 * n; ++w) {
            const Eigen::Index s = sample(w);
            G(w) += zsign(w) * (K(s, i) * dbeta_i + K(s, j) * dbeta_j);
        }

#ifndef NDEBUG
        const double obj = objective();
        assert(obj <= prev_obj + 1e-9 * (1.0 + std::fabs(prev_obj)));
        prev_obj = obj;
#endif
    }
    fit.iterations = iter;

    // Bias from free support vectors; midpoint of the KKT interval otherwise.
    const Eigen::VectorXd kbeta = K * fit.beta;
    double bias_sum = 0.0;
    int bias_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double b = fit.beta(i);
        if (std::fabs(b) > 1e-12 && std::fabs(b) < C * (1.0 - 1e-12)) {
            bias_sum += y(i) - kbeta(i) - (b > 0.0 ? eps : -eps);
            ++bias_count;
        }
    }
    fit.model.bias = bias_count > 0 ? bias_sum / bias_count : 0.5 * (b_low + b_high);

    const double keep_threshold = 1e-12 * C;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::fabs(fit.beta(i)) > keep_threshold) kept.push_back(i);
    fit.model.support_vectors.resize(static_cast<Eigen::Index>(kept.size()), X.cols());
    fit.model.dual_coefs.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) {
        fit.model.support_vectors.row(static_cast<Eigen::Index>(r)) = X.row(kept[r]);
        fit.model.dual_coefs(static_cast<Eigen::Index>(r)) = fit.beta(kept[r]);
    }
    return fit;
}

inline SvrModel fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const SvrConfig& config) {
    return fit_svr_detailed(X, y, config).model;
}

/// Largest KKT violation over the training set, in target units:
///   beta_i = 0      -> residual may not leave the tube
///   0 < |beta| < C  -> residual sits on the tube edge, signed like beta
///   |beta| = C      -> residual on or outside the tube edge
inline double kkt_max_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const SvrFit& fit) {
    const double C = fit.model.config.C;
    const double eps = fit.model.config.epsilon;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double f = predict_svr(fit.model, X.row(i).transpose());
        const double r = y(i) - f;
        const double b = fit.beta(i);
        double v = 0.0;
        if (std::fabs(b) <= 1e-12 * std::max(1.0, C)) {
            v = std::max(0.0, std::fabs(r) - eps);
        } else if (std::fabs(b) >= C * (1.0 - 1e-9)) {
            v = b > 0.0 ? std::max(0.0, eps - r) : std::max(0.0, r + eps);
        } else {
            v = std::fabs(r - (b > 0.0 ? eps : -eps));
        }
        worst = std::max(worst, v);
    }
    return worst;
}

struct GridCell {
    SvrConfig config;
    double mean_rmse = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string error;
};

struct GridSearchResult {
    SvrConfig best;
    std::vector<GridCell> table;
};

/// Expanding-window cross-validation: fold j trains on everything before its
/// validation block, so no fold ever sees the future. Picks the smallest mean
/// validation RMSE; ties resolve to smaller C, then smaller gamma.
inline GridSearchResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const std::vector<SvrConfig>& grid, std::size_t folds) {
    detail::require(!grid.empty(), ErrorKind::ConfigError, "empty hyperparameter grid");
    detail::require(folds >= 2, ErrorKind::ConfigError, "need at least 2 folds");
    const auto n = static_cast<std::size_t>(X.rows());
    detail::require(n >= (folds + 1) * 2, ErrorKind::TooFewSamples,
                    "not enough rows for the requested folds");

    std::vector<std::size_t> bounds;  // folds+1 boundaries over [0, n]
    for (std::size_t j = 1; j <= folds + 1; ++j) bounds.push_back(n * j / (folds + 1));

    GridSearchResult result;
    for (const auto& candidate : grid) {
        GridCell cell;
        cell.config = candidate;
        double sq_sum = 0.0;
        std::size_t count = 0;
        try {
            for (std::size_t j = 0; j < folds; ++j) {
                const std::size_t train_end = bounds[j];
                const std::size_t val_end = bounds[j + 1];
                const auto model = fit_svr(X.topRows(static_cast<Eigen::Index>(train_end)),
                                           y.head(static_cast<Eigen::Index>(train_end)),
                                           candidate);
                for (std::size_t r = train_end; r < val_end; ++r) {
                    const double err =
                        predict_svr(model, X.row(static_cast<Eigen::Index>(r)).transpose()) -
                        y(static_cast<Eigen::Index>(r));
                    sq_sum += err * err;
                    ++count;
                }
            }
            cell.mean_rmse = std::sqrt(sq_sum / static_cast<double>(count));
            cell.ok = true;
        } catch (const FxError& e) {
            cell.error = e.what();
        }
        result.table.push_back(cell);
    }

    bool have_best = false;
    double best_rmse = std::numeric_limits<double>::infinity();
    for (const auto& cell : result.table) {
        if (!cell.ok) continue;
        const bool better =
            cell.mean_rmse < best_rmse ||
            (cell.mean_rmse == best_rmse &&
             (cell.config.C < result.best.C ||
              (cell.config.C == result.best.C && cell.config.gamma < result.best.gamma)));
        if (!have_best || better) {
            result.best = cell.config;
            best_rmse = cell.mean_rmse;
            have_best = true;
        }
    }
    detail::require(have_best, ErrorKind::AllCellsFailed, "every grid cell failed to fit");
    return result;
}

}  // namespace fxlab::svr
