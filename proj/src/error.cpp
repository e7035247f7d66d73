#include "cdrflow/error.hpp"

namespace cdrflow {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::MissingInitials: return "MissingInitials";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::AllAnomalous: return "AllAnomalous";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
        case ErrorKind::SingularRegression: return "SingularRegression";
    }
    return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonFinite:
        case ErrorKind::NumericalBreakdown:
        case ErrorKind::SingularRegression:
            return true;
        default:
            return false;
    }
}

}  // namespace cdrflow
