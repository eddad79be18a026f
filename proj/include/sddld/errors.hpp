#pragma once

#include <stdexcept>
#include <string>

namespace sddld {

enum class ErrorCode {
    IndexOutOfRange,
    AsymmetricInput,
    DimensionMismatch,
    NotALaplacian,
    NotSDD,
    NotATree,
    NotPositiveDefinite,
    DisconnectedGraph,
    VertexMismatch,
    InvalidParameter,
    StretchBelowMinimum,
    SparsificationFailed,
    ChainStalled,
    ParseError,
    OracleTooLarge,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::IndexOutOfRange:     return "IndexOutOfRange";
        case ErrorCode::AsymmetricInput:     return "AsymmetricInput";
        case ErrorCode::DimensionMismatch:   return "DimensionMismatch";
        case ErrorCode::NotALaplacian:       return "NotALaplacian";
        case ErrorCode::NotSDD:              return "NotSDD";
        case ErrorCode::NotATree:            return "NotATree";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::DisconnectedGraph:   return "DisconnectedGraph";
        case ErrorCode::VertexMismatch:      return "VertexMismatch";
        case ErrorCode::InvalidParameter:    return "InvalidParameter";
        case ErrorCode::StretchBelowMinimum: return "StretchBelowMinimum";
        case ErrorCode::SparsificationFailed:return "SparsificationFailed";
        case ErrorCode::ChainStalled:        return "ChainStalled";
        case ErrorCode::ParseError:          return "ParseError";
        case ErrorCode::OracleTooLarge:      return "OracleTooLarge";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace sddld
