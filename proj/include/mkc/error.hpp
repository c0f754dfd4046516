#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mkc {

enum class ErrorKind {
    ZeroMass,
    DimensionMismatch,
    InvalidParameter,
    InconsistentCoefficients,
    QuadratureFailure,
    SizeExceeded,
    ConstraintViolated,
    CFLViolation,
    PositivityViolated,
    DegenerateCDF,
    NonPositiveValues,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (and tests) can dispatch on it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
    if (!condition) {
        fail(kind, message);
    }
}

} // namespace mkc
