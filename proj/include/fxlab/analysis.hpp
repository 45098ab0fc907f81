#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fxlab/error.hpp"
#include "fxlab/frame.hpp"

namespace fxlab::analysis {

struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // symmetric, unit diagonal, entries in [-1,1]
};

struct ImportanceReport {
    std::vector<std::string> names;
    std::vector<double> importances;  // non-negative, sums to 1
    std::size_t trees = 0;
    std::uint64_t seed = 0;
};

/// Sample Pearson correlation; both arguments need nonzero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size(), ErrorKind::LengthMismatch,
                    "inputs have different lengths");
    detail::require(x.size() >= 2, ErrorKind::SeriesTooShort, "need at least 2 observations");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    detail::require(sxx > 0.0 && syy > 0.0, ErrorKind::ZeroVariance,
                    "constant input has no correlation");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(std::span<const double>(x), std::span<const double>(y));
}

inline CorrelationMatrix correlation_matrix(const TimeSeriesFrame& frame) {
    detail::require(frame.rows() >= 2, ErrorKind::SeriesTooShort, "need at least 2 rows");
    const auto k = static_cast<Eigen::Index>(frame.cols());
    CorrelationMatrix out;
    out.names = frame.names();
    out.values = Eigen::MatrixXd::Identity(k, k);
    std::vector<std::vector<double>> cols;
    for (const auto& name : frame.names()) cols.push_back(frame.column(name));
    for (Eigen::Index i = 0; i < k; ++i) {
        // Diagonal is 1 by definition, but a constant column is still an error.
        const auto& ci = cols[static_cast<std::size_t>(i)];
        const bool constant = std::all_of(ci.begin(), ci.end(),
                                          [&](double v) { return v == ci.front(); });
        detail::require(!constant, ErrorKind::ZeroVariance,
                        "column `" + frame.names()[static_cast<std::size_t>(i)] + "` is constant");
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double r = pearson(ci, cols[static_cast<std::size_t>(j)]);
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    }
    return out;
}

namespace detail_tree {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double weighted_decrease = 0.0;  // (n_node/n_total) * variance decrease
};

inline double variance(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
    if (idx.size() < 2) return 0.0;
    double mean = 0.0;
    for (auto i : idx) mean += y[i];
    mean /= static_cast<double>(idx.size());
    double v = 0.0;
    for (auto i : idx) v += (y[i] - mean) * (y[i] - mean);
    return v / static_cast<double>(idx.size());
}

// Exhaustive best split over midpoints of sorted unique values of the
// candidate features; ties break toward the lower feature index.
inline SplitChoice best_split(const Eigen::MatrixXd& X, const std::vector<double>& y,
                              const std::vector<std::size_t>& idx,
                              const std::vector<std::size_t>& features, std::size_t n_total) {
    SplitChoice best;
    const double node_var = variance(y, idx);
    if (node_var <= 0.0 || idx.size() < 2) return best;
    const double node_frac = static_cast<double>(idx.size()) / static_cast<double>(n_total);

    std::vector<std::size_t> sorted = idx;
    for (std::size_t f : features) {
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return X(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) <
                   X(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f));
        });
        // Prefix sums over the sorted order make each threshold O(1).
        std::vector<double> prefix(sorted.size() + 1, 0.0), prefix_sq(sorted.size() + 1, 0.0);
        for (std::size_t r = 0; r < sorted.size(); ++r) {
            prefix[r + 1] = prefix[r] + y[sorted[r]];
            prefix_sq[r + 1] = prefix_sq[r] + y[sorted[r]] * y[sorted[r]];
        }
        const double total = static_cast<double>(sorted.size());
        for (std::size_t r = 1; r < sorted.size(); ++r) {
            const double lo = X(static_cast<Eigen::Index>(sorted[r - 1]),
                                static_cast<Eigen::Index>(f));
            const double hi = X(static_cast<Eigen::Index>(sorted[r]),
                                static_cast<Eigen::Index>(f));
            if (lo == hi) continue;
            const double nl = static_cast<double>(r), nr = total - nl;
            const double var_l = prefix_sq[r] / nl - (prefix[r] / nl) * (prefix[r] / nl);
            const double sum_r = prefix.back() - prefix[r];
            const double sq_r = prefix_sq.back() - prefix_sq[r];
            const double var_r = sq_r / nr - (sum_r / nr) * (sum_r / nr);
            const double decrease = node_var - (nl / total) * var_l - (nr / total) * var_r;
            const double weighted = node_frac * decrease;
            if (weighted > best.weighted_decrease) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (lo + hi);
                best.weighted_decrease = weighted;
            }
        }
    }
    return best;
}

inline void grow(const Eigen::MatrixXd& X, const std::vector<double>& y,
                 const std::vector<std::size_t>& idx, std::size_t depth, std::size_t max_depth,
                 std::size_t n_total, std::size_t mtry, std::mt19937_64& rng,
                 std::vector<double>& credit) {
    if (depth >= max_depth || idx.size() < 2) return;
    const auto d = static_cast<std::size_t>(X.cols());
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng);
    features.resize(std::min(mtry, d));
    std::sort(features.begin(), features.end());  // lower-index tie break

    const SplitChoice split = best_split(X, y, idx, features, n_total);
    if (!split.found) return;
    credit[split.feature] += split.weighted_decrease;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
        if (X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(split.feature)) <=
            split.threshold)
            left.push_back(i);
        else
            right.push_back(i);
    }
    grow(X, y, left, depth + 1, max_depth, n_total, mtry, rng, credit);
    grow(X, y, right, depth + 1, max_depth, n_total, mtry, rng, credit);
}

}  // namespace detail_tree

/// Variance-reduction feature importance from an ensemble of regression
/// trees: bootstrap rows, ceil(sqrt(d)) random candidate features per split,
/// each split credits its feature with (node fraction) x (variance decrease).
/// Credits are summed over the ensemble and normalized to 1.
inline ImportanceReport tree_importance(const Eigen::MatrixXd& X, const std::vector<double>& y,
                                        std::size_t trees, std::size_t max_depth,
                                        std::uint64_t seed,
                                        const std::vector<std::string>& names = {}) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto d = static_cast<std::size_t>(X.cols());
    detail::require(n >= 10, ErrorKind::TooFewSamples, "need at least 10 samples");
    detail::require(y.size() == n, ErrorKind::LengthMismatch, "X rows and y length differ");
    detail::require(trees >= 1, ErrorKind::ConfigError, "need at least one tree");
    detail::require(max_depth >= 1, ErrorKind::ConfigError, "max_depth must be >= 1");

    const auto mtry =
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    std::vector<double> credit(d, 0.0);

    for (std::size_t t = 0; t < trees; ++t) {
        // Per-tree generator derived from the master seed: order-independent.
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (t + 1));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) i = pick(rng);
        detail_tree::grow(X, y, idx, 0, max_depth, n, mtry, rng, credit);
    }

    const double total = std::accumulate(credit.begin(), credit.end(), 0.0);
    detail::require(total > 0.0, ErrorKind::ZeroVariance,
                    "no split reduced variance; target may be constant");

    ImportanceReport report;
    report.names = names;
    if (report.names.empty())
        for (std::size_t j = 0; j < d; ++j) report.names.push_back("x" + std::to_string(j));
    report.trees = trees;
    report.seed = seed;
    for (double c : credit) report.importances.push_back(c / total);
    return report;
}

}  // namespace fxlab::analysis
