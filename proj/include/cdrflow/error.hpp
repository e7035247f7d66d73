#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdrflow {

enum class ErrorKind {
    InvalidArgument,
    Io,
    MalformedRow,
    EmptyInput,
    TooShort,
    MissingInitials,
    DegenerateInput,
    AllAnomalous,
    LengthMismatch,
    NonFinite,
    ZeroVariance,
    NumericalBreakdown,
    SingularRegression,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// True for failures of a numerical procedure (as opposed to bad input data).
[[nodiscard]] bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// A single input row could not be parsed. `reason()` is a short machine
/// token (e.g. "field_count", "bad_time") used as the drop-reason key.
class MalformedRow : public Error {
public:
    MalformedRow(std::string reason, const std::string& detail)
        : Error(ErrorKind::MalformedRow, reason + ": " + detail), reason_(std::move(reason)) {}

    [[nodiscard]] const std::string& reason() const noexcept { return reason_; }

private:
    std::string reason_;
};

}  // namespace cdrflow
