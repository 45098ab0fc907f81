#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "fxlab/error.hpp"

namespace fxlab {

/// Ordinary least squares fit of y on X (X includes any intercept column).
struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double sigma2 = 0.0;         // rss / (n - k)
    Eigen::MatrixXd xtx_inverse; // for standard errors

    double standard_error(Eigen::Index j) const {
        return std::sqrt(sigma2 * xtx_inverse(j, j));
    }
};

/// Rank-checked OLS via column-pivoted QR. Throws SingularRegression on a
/// rank-deficient design.
inline OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    detail::require(X.rows() == y.size(), ErrorKind::ShapeMismatch,
                    "design and response row counts differ");
    detail::require(X.rows() > X.cols(), ErrorKind::SeriesTooShort,
                    "need more observations than regressors");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    detail::require(qr.rank() == X.cols(), ErrorKind::SingularRegression,
                    "design matrix is rank deficient");
    OlsFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    fit.rss = fit.residuals.squaredNorm();
    fit.sigma2 = fit.rss / static_cast<double>(X.rows() - X.cols());
    fit.xtx_inverse = (X.transpose() * X).ldlt().solve(
        Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    return fit;
}

/// Residual sum of squares only; cheaper path for information criteria.
inline double ols_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    detail::require(qr.rank() == X.cols(), ErrorKind::SingularRegression,
                    "design matrix is rank deficient");
    return (y - X * qr.solve(y)).squaredNorm();
}

}  // namespace fxlab
