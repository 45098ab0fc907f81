#pragma once

#include <stdexcept>
#include <string>

namespace fxlab {

/// Every failure mode the library can signal. Tests match on the kind,
/// messages carry the human-readable detail (file, row, column, ...).
enum class ErrorKind {
    MissingFile,
    MalformedDate,
    NonNumericCell,
    MonthGap,
    ColumnMismatch,
    DateMismatch,
    NameMismatch,
    DegenerateColumn,
    SeriesTooShort,
    EmptyPartition,
    SingularRegression,
    AllZero,
    DimensionMismatch,
    ShapeMismatch,
    LengthMismatch,
    ZeroActual,
    ZeroVariance,
    NoConvergence,
    DegenerateInput,
    AllCellsFailed,
    TooFewSamples,
    NonFiniteLoss,
    ConfigError,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingFile: return "MissingFile";
        case ErrorKind::MalformedDate: return "MalformedDate";
        case ErrorKind::NonNumericCell: return "NonNumericCell";
        case ErrorKind::MonthGap: return "MonthGap";
        case ErrorKind::ColumnMismatch: return "ColumnMismatch";
        case ErrorKind::DateMismatch: return "DateMismatch";
        case ErrorKind::NameMismatch: return "NameMismatch";
        case ErrorKind::DegenerateColumn: return "DegenerateColumn";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::EmptyPartition: return "EmptyPartition";
        case ErrorKind::SingularRegression: return "SingularRegression";
        case ErrorKind::AllZero: return "AllZero";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ZeroActual: return "ZeroActual";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::AllCellsFailed: return "AllCellsFailed";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class FxError : public std::runtime_error {
public:
    FxError(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) {
    throw FxError(kind, detail);
}

inline void require(bool cond, ErrorKind kind, const std::string& detail) {
    if (!cond) fail(kind, detail);
}
}  // namespace detail

}  // namespace fxlab
