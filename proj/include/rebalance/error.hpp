#pragma once

#include <stdexcept>
#include <string>

namespace rebalance {

enum class ErrorCode {
    NotBinary,         // label column does not map to exactly two classes
    DistanceMismatch,  // euclidean distance requested over nominal columns
    AllNominal,        // interpolation requires at least one continuous column
    SvmDiverged,       // non-finite SVM weights
    IllConditioned,    // singular covariance despite regularization
    Diverged,          // non-finite training loss
    Degenerate,        // an operation emptied a class
    UndefinedAuc,      // single-class labels
    InvalidArgument,
    IoError,
    ParseError,
    Internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotBinary: return "NotBinary";
        case ErrorCode::DistanceMismatch: return "DistanceMismatch";
        case ErrorCode::AllNominal: return "AllNominal";
        case ErrorCode::SvmDiverged: return "SvmDiverged";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::UndefinedAuc: return "UndefinedAuc";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace rebalance
