#pragma once

#include <stdexcept>
#include <string>

namespace tcm {

// Error taxonomy shared by every module. The CLI maps codes to exit
// status: config/data problems exit 1, anything hit mid-run exits 2.
enum class ErrorCode {
    InvalidDataset,
    InvalidQuery,
    Shape,
    InvalidK,
    UndefinedTypicality,
    BudgetExhausted,
    InvalidProbabilities,
    InvalidRadius,
    MissingClassifier,
    InvalidInput,
    InvalidSpec,
    Format,
    AggregationMismatch,
    Validation,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidDataset:       return "invalid-dataset";
        case ErrorCode::InvalidQuery:         return "invalid-query";
        case ErrorCode::Shape:                return "shape";
        case ErrorCode::InvalidK:             return "invalid-k";
        case ErrorCode::UndefinedTypicality:  return "undefined-typicality";
        case ErrorCode::BudgetExhausted:      return "budget-exhausted";
        case ErrorCode::InvalidProbabilities: return "invalid-probabilities";
        case ErrorCode::InvalidRadius:        return "invalid-radius";
        case ErrorCode::MissingClassifier:    return "missing-classifier";
        case ErrorCode::InvalidInput:         return "invalid-input";
        case ErrorCode::InvalidSpec:          return "invalid-spec";
        case ErrorCode::Format:               return "format";
        case ErrorCode::AggregationMismatch:  return "aggregation-mismatch";
        case ErrorCode::Validation:           return "validation";
        case ErrorCode::Io:                   return "io";
    }
    return "unknown";
}

}  // namespace tcm
