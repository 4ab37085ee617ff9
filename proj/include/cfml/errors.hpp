#pragma once

#include <stdexcept>
#include <string>

namespace cfml {

enum class ErrorCode {
    ZeroNorm,
    EmptyInput,
    DimensionMismatch,
    NonFiniteFunction,
    NonPositiveTemperature,
    InvalidLabel,
    InvalidSpec,
    OverlappingSplit,
    EmptySplit,
    IoError,
    FormatError,
    DivergenceDetected,
    EmptyDataset,
    InvalidGroupSize,
    EmbeddingDimMismatch,
    InsufficientClasses,
    InsufficientSamples,
    EmptyClass,
    EmptyTrainSet,
    LengthMismatch,
    ConfigError,
};

const char* error_code_name(ErrorCode code);

/// Single exception type for the whole library; the code tells callers
/// (and tests) which contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace cfml
