#pragma once

#include <stdexcept>
#include <string>

namespace rbal {

/// Error conditions raised by the library. Grouped by the category that the
/// command-line front end maps to an exit code.
enum class Errc {
    // validation
    EmptyInput,
    NegativeEntry,
    SumNotOne,
    LengthMismatch,
    DimensionMismatch,
    LabelOutOfRange,
    InvalidParameter,
    InsufficientInitialLabels,
    EmptyTestSet,
    ZeroVarianceFeature,
    ParseError,
    NonFiniteFeature,
    ConfigError,
    // numeric
    NonPosDefResult,
    NonPosDefScale,
    NonPosDefCovariance,
    NonConvergence,
    ReducibleChain,
    DegenerateCovariance,
    // i/o
    IoError,
};

enum class ErrorCategory { Validation, Numeric, Io };

inline ErrorCategory category(Errc code) {
    switch (code) {
    case Errc::NonPosDefResult:
    case Errc::NonPosDefScale:
    case Errc::NonPosDefCovariance:
    case Errc::NonConvergence:
    case Errc::ReducibleChain:
    case Errc::DegenerateCovariance:
        return ErrorCategory::Numeric;
    case Errc::IoError:
        return ErrorCategory::Io;
    default:
        return ErrorCategory::Validation;
    }
}

inline const char* to_string(Errc code) {
    switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::SumNotOne: return "SumNotOne";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::InsufficientInitialLabels: return "InsufficientInitialLabels";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::ZeroVarianceFeature: return "ZeroVarianceFeature";
    case Errc::ParseError: return "ParseError";
    case Errc::NonFiniteFeature: return "NonFiniteFeature";
    case Errc::ConfigError: return "ConfigError";
    case Errc::NonPosDefResult: return "NonPosDefResult";
    case Errc::NonPosDefScale: return "NonPosDefScale";
    case Errc::NonPosDefCovariance: return "NonPosDefCovariance";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::ReducibleChain: return "ReducibleChain";
    case Errc::DegenerateCovariance: return "DegenerateCovariance";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace rbal
