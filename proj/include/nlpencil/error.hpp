#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlpencil {

/// Failure categories surfaced by the library. The CLI maps every kind except
/// `InvalidArgument` and `Parse` to exit status 2.
enum class ErrorKind {
    InvalidArgument,
    Parse,
    InvalidProblem,
    DimensionMismatch,
    NonElliptic,
    ContourTooClose,
    NonIntegerWinding,
    RankAmbiguous,
    NoConvergence,
    NotAnEigenvalue,
    LineNotClean,
    UnsupportedProblemClass,
    OutOfDomain,
    SingularSystem,
    GridIncompatible,
};

[[nodiscard]] inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonElliptic: return "NonElliptic";
    case ErrorKind::ContourTooClose: return "ContourTooClose";
    case ErrorKind::NonIntegerWinding: return "NonIntegerWinding";
    case ErrorKind::RankAmbiguous: return "RankAmbiguous";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorKind::LineNotClean: return "LineNotClean";
    case ErrorKind::UnsupportedProblemClass: return "UnsupportedProblemClass";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::GridIncompatible: return "GridIncompatible";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// Usage-level failures (bad flags, malformed files) as opposed to
    /// numerical/domain outcomes.
    [[nodiscard]] bool is_usage() const noexcept {
        return kind_ == ErrorKind::InvalidArgument || kind_ == ErrorKind::Parse;
    }

private:
    ErrorKind kind_;
};

/// Error carrying the height of the offending weight line.
class LineNotCleanError : public Error {
public:
    explicit LineNotCleanError(double height)
        : Error(ErrorKind::LineNotClean, "line Im(lambda) = " + std::to_string(height) +
                                             " carries an eigenvalue"),
          height_(height) {}

    [[nodiscard]] double height() const noexcept { return height_; }

private:
    double height_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace nlpencil
