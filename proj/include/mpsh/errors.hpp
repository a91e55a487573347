#pragma once

#include <stdexcept>
#include <string>

namespace mpsh {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidArgument,   // precondition on dimensions, ranges or matrix properties
    OutsideCone,       // spectrum outside the closed (or open) cone where required
    NewtonDiverged,
    ConeEscape,
    IllPosedRHS,
    ChiNotPositive,
    TargetNotAdmissible,
    DirichletFailure,
    ScheduleExhausted,
    Parse,
    Internal
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutsideCone: return "OutsideCone";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::ConeEscape: return "ConeEscape";
    case ErrorKind::IllPosedRHS: return "IllPosedRHS";
    case ErrorKind::ChiNotPositive: return "ChiNotPositive";
    case ErrorKind::TargetNotAdmissible: return "TargetNotAdmissible";
    case ErrorKind::DirichletFailure: return "DirichletFailure";
    case ErrorKind::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::InvalidArgument, what);
}

} // namespace mpsh
