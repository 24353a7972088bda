#pragma once

#include <stdexcept>
#include <string>

namespace horocat {

/// Machine-readable failure reasons. The CLI maps these onto exit codes.
enum class ErrorKind {
    NonSymmetric,
    InvalidSignature,
    DimensionMismatch,
    NotAnIsometry,
    InvalidPoint,
    DegenerateSegment,
    NotLoxodromic,
    BudgetExceeded,
    NotInBall,
    StabilizerNontrivial,
    NotFixed,
    RankDeficientCusp,
    NoDisjointLevel,
    InsideHoroball,
    ConvergenceFailure,
    InvalidGenerator,
    NothingToPlot,
    ConfigError,
    IoError,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::InvalidSignature: return "InvalidSignature";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotAnIsometry: return "NotAnIsometry";
    case ErrorKind::InvalidPoint: return "InvalidPoint";
    case ErrorKind::DegenerateSegment: return "DegenerateSegment";
    case ErrorKind::NotLoxodromic: return "NotLoxodromic";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotInBall: return "NotInBall";
    case ErrorKind::StabilizerNontrivial: return "StabilizerNontrivial";
    case ErrorKind::NotFixed: return "NotFixed";
    case ErrorKind::RankDeficientCusp: return "RankDeficientCusp";
    case ErrorKind::NoDisjointLevel: return "NoDisjointLevel";
    case ErrorKind::InsideHoroball: return "InsideHoroball";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::InvalidGenerator: return "InvalidGenerator";
    case ErrorKind::NothingToPlot: return "NothingToPlot";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
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

} // namespace horocat
