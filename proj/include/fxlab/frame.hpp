#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fxlab/error.hpp"

namespace fxlab {

/// Calendar month stamp, the only date granularity the toolkit knows about.
struct YearMonth {
    int year = 0;
    int month = 1;  // 1..12

    /// Months since year 0; adjacent calendar months differ by exactly 1.
    int index() const noexcept { return year * 12 + (month - 1); }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
        return std::string(buf);
    }

    YearMonth next() const noexcept {
        return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
    }

    friend bool operator==(const YearMonth& a, const YearMonth& b) noexcept {
        return a.year == b.year && a.month == b.month;
    }
    friend bool operator<(const YearMonth& a, const YearMonth& b) noexcept {
        return a.index() < b.index();
    }
};

/// Strict YYYY-MM parse; anything else is rejected.
inline std::optional<YearMonth> parse_year_month(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u}) {
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
    }
    int year = 0, month = 0;
    std::from_chars(text.data(), text.data() + 4, year);
    std::from_chars(text.data() + 5, text.data() + 7, month);
    if (month < 1 || month > 12) return std::nullopt;
    return YearMonth{year, month};
}

/// Date-indexed matrix of named monthly series. Immutable by convention:
/// operations return new frames. Invariants (checked at construction):
/// strictly increasing gap-free monthly dates, all values finite, >= 1 row.
class TimeSeriesFrame {
public:
    TimeSeriesFrame(std::vector<YearMonth> dates, std::vector<std::string> names,
                    Eigen::MatrixXd values)
        : dates_(std::move(dates)), names_(std::move(names)), values_(std::move(values)) {
        detail::require(!dates_.empty(), ErrorKind::SeriesTooShort, "frame needs at least one row");
        detail::require(values_.rows() == static_cast<Eigen::Index>(dates_.size()) &&
                            values_.cols() == static_cast<Eigen::Index>(names_.size()),
                        ErrorKind::ShapeMismatch, "value matrix does not match dates x names");
        for (std::size_t i = 1; i < dates_.size(); ++i) {
            detail::require(dates_[i].index() == dates_[i - 1].index() + 1, ErrorKind::MonthGap,
                            "expected " + dates_[i - 1].next().str() + ", found " + dates_[i].str());
        }
        detail::require(values_.allFinite(), ErrorKind::NonNumericCell,
                        "frame contains NaN or Inf");
    }

    const std::vector<YearMonth>& dates() const noexcept { return dates_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

    std::size_t rows() const noexcept { return dates_.size(); }
    std::size_t cols() const noexcept { return names_.size(); }

    std::size_t column_index(const std::string& name) const {
        auto it = std::find(names_.begin(), names_.end(), name);
        detail::require(it != names_.end(), ErrorKind::NameMismatch, "no column named " + name);
        return static_cast<std::size_t>(it - names_.begin());
    }

    std::vector<double> column(const std::string& name) const {
        Eigen::VectorXd col = values_.col(static_cast<Eigen::Index>(column_index(name)));
        return std::vector<double>(col.data(), col.data() + col.size());
    }

    /// Row slice [first, last); dates travel with the values.
    TimeSeriesFrame slice_rows(std::size_t first, std::size_t last) const {
        detail::require(first < last && last <= rows(), ErrorKind::EmptyPartition,
                        "empty or out-of-range row slice");
        std::vector<YearMonth> d(dates_.begin() + static_cast<std::ptrdiff_t>(first),
                                 dates_.begin() + static_cast<std::ptrdiff_t>(last));
        return TimeSeriesFrame(std::move(d), names_,
                               values_.middleRows(static_cast<Eigen::Index>(first),
                                                  static_cast<Eigen::Index>(last - first)));
    }

private:
    std::vector<YearMonth> dates_;
    std::vector<std::string> names_;
    Eigen::MatrixXd values_;
};

/// Per-column [min, max] fitted on training rows only.
struct ScalingParams {
    std::vector<std::string> names;
    std::vector<double> min;
    std::vector<double> max;
    std::size_t fitted_on_rows = 0;
};

/// Chronological train/test boundary. boundary_index = floor(fraction * rows).
struct SplitSpec {
    double train_fraction = 0.9;
    std::size_t boundary_index = 0;

    static SplitSpec from_fraction(double fraction, std::size_t n_rows) {
        detail::require(fraction > 0.0 && fraction < 1.0, ErrorKind::EmptyPartition,
                        "train_fraction must lie in (0,1)");
        return SplitSpec{fraction, static_cast<std::size_t>(std::floor(fraction * n_rows))};
    }
};

namespace csv_detail {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

}  // namespace csv_detail

/// Load a monthly CSV: header row, first column `date` as YYYY-MM, remaining
/// columns finite decimals. Column order is preserved from the file.
inline TimeSeriesFrame load_csv(const std::filesystem::path& path,
                                const std::vector<std::string>& expected_columns = {}) {
    std::ifstream in(path);
    detail::require(in.good(), ErrorKind::MissingFile, path.string());

    std::string line;
    detail::require(static_cast<bool>(std::getline(in, line)), ErrorKind::ColumnMismatch,
                    path.string() + ": missing header row");
    auto header = csv_detail::split_line(line);
    for (auto& h : header) h = csv_detail::trim(h);
    detail::require(!header.empty() && header[0] == "date", ErrorKind::ColumnMismatch,
                    path.string() + ": first column must be `date`");
    detail::require(header.size() >= 2, ErrorKind::ColumnMismatch,
                    path.string() + ": no value columns");
    std::vector<std::string> names(header.begin() + 1, header.end());

    if (!expected_columns.empty()) {
        detail::require(names == expected_columns, ErrorKind::ColumnMismatch,
                        path.string() + ": columns do not match the expected list");
    }

    std::vector<YearMonth> dates;
    std::vector<double> flat;
    std::size_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (csv_detail::trim(line).empty()) continue;
        auto cells = csv_detail::split_line(line);
        detail::require(cells.size() == header.size(), ErrorKind::ColumnMismatch,
                        path.string() + ": row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        auto ym = parse_year_month(csv_detail::trim(cells[0]));
        detail::require(ym.has_value(), ErrorKind::MalformedDate,
                        path.string() + ": row " + std::to_string(row_no) + ": `" + cells[0] + "`");
        if (!dates.empty()) {
            detail::require(ym->index() == dates.back().index() + 1, ErrorKind::MonthGap,
                            path.string() + ": expected " + dates.back().next().str() +
                                ", found " + ym->str());
        }
        dates.push_back(*ym);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const std::string cell = csv_detail::trim(cells[c]);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            const bool ok = ec == std::errc() && ptr == cell.data() + cell.size() &&
                            std::isfinite(v);
            detail::require(ok, ErrorKind::NonNumericCell,
                            path.string() + ": row " + std::to_string(row_no) + ", column `" +
                                names[c - 1] + "`: `" + cells[c] + "`");
            flat.push_back(v);
        }
    }
    detail::require(!dates.empty(), ErrorKind::SeriesTooShort,
                    path.string() + ": file contains no data rows");

    Eigen::MatrixXd values(dates.size(), names.size());
    for (std::size_t r = 0; r < dates.size(); ++r)
        for (std::size_t c = 0; c < names.size(); ++c)
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                flat[r * names.size() + c];

    return TimeSeriesFrame(std::move(dates), std::move(names), std::move(values));
}

/// Element-wise USA minus IND. Frames must agree on dates and names.
inline TimeSeriesFrame country_delta(const TimeSeriesFrame& usa, const TimeSeriesFrame& ind) {
    detail::require(usa.dates() == ind.dates() ||
                        (usa.rows() == ind.rows() &&
                         std::equal(usa.dates().begin(), usa.dates().end(), ind.dates().begin())),
                    ErrorKind::DateMismatch, "country frames cover different months");
    detail::require(usa.names() == ind.names(), ErrorKind::NameMismatch,
                    "country frames have different columns");
    return TimeSeriesFrame(usa.dates(), usa.names(), usa.values() - ind.values());
}

/// Fit per-column min/max on the training rows only (no test leakage).
inline ScalingParams minmax_fit(const TimeSeriesFrame& frame, const SplitSpec& split) {
    detail::require(split.boundary_index >= 2 && split.boundary_index <= frame.rows(),
                    ErrorKind::EmptyPartition, "need at least 2 training rows to fit scaling");
    ScalingParams params;
    params.names = frame.names();
    params.fitted_on_rows = split.boundary_index;
    const auto train = frame.values().topRows(static_cast<Eigen::Index>(split.boundary_index));
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        const double lo = train.col(c).minCoeff();
        const double hi = train.col(c).maxCoeff();
        detail::require(lo < hi, ErrorKind::DegenerateColumn,
                        "column `" + frame.names()[static_cast<std::size_t>(c)] +
                            "` is constant over the training rows");
        params.min.push_back(lo);
        params.max.push_back(hi);
    }
    return params;
}

inline TimeSeriesFrame minmax_transform(const TimeSeriesFrame& frame,
                                        const ScalingParams& params) {
    detail::require(frame.names() == params.names, ErrorKind::NameMismatch,
                    "scaling params were fitted on different columns");
    Eigen::MatrixXd out = frame.values();
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const auto i = static_cast<std::size_t>(c);
        out.col(c) = (out.col(c).array() - params.min[i]) / (params.max[i] - params.min[i]);
    }
    return TimeSeriesFrame(frame.dates(), frame.names(), std::move(out));
}

inline TimeSeriesFrame minmax_inverse(const TimeSeriesFrame& frame, const ScalingParams& params) {
    detail::require(frame.names() == params.names, ErrorKind::NameMismatch,
                    "scaling params were fitted on different columns");
    Eigen::MatrixXd out = frame.values();
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const auto i = static_cast<std::size_t>(c);
        out.col(c) = out.col(c).array() * (params.max[i] - params.min[i]) + params.min[i];
    }
    return TimeSeriesFrame(frame.dates(), frame.names(), std::move(out));
}

inline double minmax_transform_value(double x, const ScalingParams& params,
                                     const std::string& name) {
    auto it = std::find(params.names.begin(), params.names.end(), name);
    detail::require(it != params.names.end(), ErrorKind::NameMismatch, "no column named " + name);
    const auto i = static_cast<std::size_t>(it - params.names.begin());
    return (x - params.min[i]) / (params.max[i] - params.min[i]);
}

inline double minmax_inverse_value(double x, const ScalingParams& params,
                                   const std::string& name) {
    auto it = std::find(params.names.begin(), params.names.end(), name);
    detail::require(it != params.names.end(), ErrorKind::NameMismatch, "no column named " + name);
    const auto i = static_cast<std::size_t>(it - params.names.begin());
    return x * (params.max[i] - params.min[i]) + params.min[i];
}

/// Repeated first differences; output length = |series| - order.
inline std::vector<double> difference(const std::vector<double>& series, std::size_t order = 1) {
    detail::require(order >= 1, ErrorKind::ShapeMismatch, "difference order must be >= 1");
    detail::require(series.size() > order, ErrorKind::SeriesTooShort,
                    "series of length " + std::to_string(series.size()) +
                        " cannot be differenced " + std::to_string(order) + " time(s)");
    std::vector<double> out = series;
    for (std::size_t k = 0; k < order; ++k) {
        for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
        out.pop_back();
    }
    return out;
}

/// Exact inverse of difference(); `initial` holds the first `order` values of
/// the original series.
inline std::vector<double> invert_difference(const std::vector<double>& diffs,
                                             const std::vector<double>& initial) {
    detail::require(!initial.empty(), ErrorKind::ShapeMismatch,
                    "need at least one initial value");
    const std::size_t order = initial.size();
    if (order == 1) {
        std::vector<double> out;
        out.reserve(diffs.size() + 1);
        out.push_back(initial[0]);
        for (double d : diffs) out.push_back(out.back() + d);
        return out;
    }
    // Undo one level: the (order-1)-fold difference of the original is a
    // cumulative sum of `diffs` anchored at the (order-1)-fold difference of
    // `initial`, then recurse on the remaining levels.
    const std::vector<double> anchor = difference(initial, order - 1);
    const std::vector<double> inner = invert_difference(diffs, {anchor[0]});
    return invert_difference(inner, std::vector<double>(initial.begin(), initial.end() - 1));
}

/// Difference every column once; the result is dated at the later month of
/// each pair, so row t of the output is x[t+1] - x[t].
inline TimeSeriesFrame difference_frame(const TimeSeriesFrame& frame) {
    detail::require(frame.rows() >= 2, ErrorKind::SeriesTooShort,
                    "need at least 2 rows to difference");
    const Eigen::Index n = static_cast<Eigen::Index>(frame.rows());
    Eigen::MatrixXd d = frame.values().bottomRows(n - 1) - frame.values().topRows(n - 1);
    std::vector<YearMonth> dates(frame.dates().begin() + 1, frame.dates().end());
    return TimeSeriesFrame(std::move(dates), frame.names(), std::move(d));
}

/// No shuffling: train = first floor(fraction*n) rows, test = the rest.
inline std::pair<TimeSeriesFrame, TimeSeriesFrame> chronological_split(
    const TimeSeriesFrame& frame, double train_fraction) {
    const auto split = SplitSpec::from_fraction(train_fraction, frame.rows());
    detail::require(split.boundary_index >= 2, ErrorKind::EmptyPartition,
                    "train partition has fewer than 2 rows");
    detail::require(split.boundary_index < frame.rows(), ErrorKind::EmptyPartition,
                    "test partition is empty");
    return {frame.slice_rows(0, split.boundary_index),
            frame.slice_rows(split.boundary_index, frame.rows())};
}

}  // namespace fxlab
