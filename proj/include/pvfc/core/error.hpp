#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pvfc {

/// Every failure the toolkit reports. The CLI maps the category of a code
/// onto its exit status.
enum class ErrorCode {
    // configuration
    InvalidArgument,
    ConfigError,
    RecipeMismatch,
    IncompleteGrid,
    // data
    EmptyIntersection,
    DuplicateColumn,
    SpanTooShort,
    MissingColumn,
    MalformedTimestamp,
    MisalignedStart,
    Misaligned,
    UnknownCategory,
    UnlabeledDay,
    SeriesTooShort,
    PeriodsNotAscending,
    TooShort,
    ShapeMismatch,
    NoWindows,
    MissingKnownFeatures,
    IoError,
    // numeric
    ZeroIrradiance,
    OutOfRange,
    DegenerateColumn,
    DivergedLoss,
    ZeroYMax,
};

enum class ErrorCategory { Config, Data, Numeric };

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::RecipeMismatch: return "RecipeMismatch";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::DuplicateColumn: return "DuplicateColumn";
    case ErrorCode::SpanTooShort: return "SpanTooShort";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::MisalignedStart: return "MisalignedStart";
    case ErrorCode::Misaligned: return "Misaligned";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::UnlabeledDay: return "UnlabeledDay";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::PeriodsNotAscending: return "PeriodsNotAscending";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoWindows: return "NoWindows";
    case ErrorCode::MissingKnownFeatures: return "MissingKnownFeatures";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ZeroIrradiance: return "ZeroIrradiance";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::ZeroYMax: return "ZeroYMax";
    }
    return "Unknown";
}

constexpr ErrorCategory category_of(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
    case ErrorCode::RecipeMismatch:
    case ErrorCode::IncompleteGrid:
        return ErrorCategory::Config;
    case ErrorCode::ZeroIrradiance:
    case ErrorCode::OutOfRange:
    case ErrorCode::DegenerateColumn:
    case ErrorCode::DivergedLoss:
    case ErrorCode::ZeroYMax:
        return ErrorCategory::Numeric;
    default:
        return ErrorCategory::Data;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

} // namespace pvfc
