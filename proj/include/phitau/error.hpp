#pragma once

#include <stdexcept>
#include <string>

namespace phitau {

enum class ErrorCode {
    ZeroAtPrecision,
    InsufficientPrecision,
    TruncationMismatch,
    NotInvertible,
    NegativeExponent,
    WindowTooNarrow,
    WeightSign,
    FamilyRadius,
    NotCloseEnough,
    NoConvergence,
    SingularDiagonal,
    HypothesisFails,
    RankMismatch,
    Precondition,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ZeroAtPrecision: return "ZeroAtPrecision";
        case ErrorCode::InsufficientPrecision: return "InsufficientPrecision";
        case ErrorCode::TruncationMismatch: return "TruncationMismatch";
        case ErrorCode::NotInvertible: return "NotInvertible";
        case ErrorCode::NegativeExponent: return "NegativeExponent";
        case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
        case ErrorCode::WeightSign: return "WeightSign";
        case ErrorCode::FamilyRadius: return "FamilyRadius";
        case ErrorCode::NotCloseEnough: return "NotCloseEnough";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SingularDiagonal: return "SingularDiagonal";
        case ErrorCode::HypothesisFails: return "HypothesisFails";
        case ErrorCode::RankMismatch: return "RankMismatch";
        case ErrorCode::Precondition: return "Precondition";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace phitau
