#include "mkc/error.hpp"

namespace mkc {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::InconsistentCoefficients: return "InconsistentCoefficients";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::SizeExceeded: return "SizeExceeded";
    case ErrorKind::ConstraintViolated: return "ConstraintViolated";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::PositivityViolated: return "PositivityViolated";
    case ErrorKind::DegenerateCDF: return "DegenerateCDF";
    case ErrorKind::NonPositiveValues: return "NonPositiveValues";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

} // namespace mkc
