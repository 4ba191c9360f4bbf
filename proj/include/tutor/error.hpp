#pragma once

#include <stdexcept>
#include <string>

namespace tutor {

struct TutorError : std::runtime_error {
    explicit TutorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape of an operand does not match what the operation expects.
struct DimensionError : TutorError {
    explicit DimensionError(const std::string& msg) : TutorError(msg) {}
};

// A computation produced or received a non-finite value.
struct NumericError : TutorError {
    explicit NumericError(const std::string& msg) : TutorError(msg) {}
};

// Invalid configuration value or combination.
struct ConfigError : TutorError {
    explicit ConfigError(const std::string& msg) : TutorError(msg) {}
};

// Caller violated an operation precondition.
struct PreconditionError : TutorError {
    explicit PreconditionError(const std::string& msg) : TutorError(msg) {}
};

// Index outside the valid range.
struct BoundsError : TutorError {
    explicit BoundsError(const std::string& msg) : TutorError(msg) {}
};

struct IoError : TutorError {
    explicit IoError(const std::string& msg) : TutorError(msg) {}
};

// Teacher checkpoint incompatible with the target task.
struct TransferError : TutorError {
    explicit TransferError(const std::string& msg) : TutorError(msg) {}
};

}  // namespace tutor
