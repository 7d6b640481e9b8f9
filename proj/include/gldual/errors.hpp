#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gldual {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NotPositiveDefinite,
    NotPositiveSemidefinite,
    NoConvergence,
    NotConvex,
    NotConcave,
    NotInBstar,
    LeftBstar,
    NotInBstarT,
    SingularNode,
    MixedSignF,
    HypothesisViolated,
    PreconditionViolated,
    ParseError,
    UnknownKey,
    MissingRequired,
    IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Iterative solver gave up; carries the best iterate it saw.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> best, double best_residual)
        : Error(ErrorKind::NoConvergence, what),
          best_(std::move(best)),
          best_residual_(best_residual) {}

    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double best_residual() const noexcept { return best_residual_; }

private:
    std::vector<double> best_;
    double best_residual_;
};

/// Parse failure with the 1-based line number of the offending input.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, int line, const std::string& what)
        : Error(kind, "line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::NotConcave: return "NotConcave";
    case ErrorKind::NotInBstar: return "NotInBstar";
    case ErrorKind::LeftBstar: return "LeftBstar";
    case ErrorKind::NotInBstarT: return "NotInBstarT";
    case ErrorKind::SingularNode: return "SingularNode";
    case ErrorKind::MixedSignF: return "MixedSignF";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::MissingRequired: return "MissingRequired";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace gldual
