#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdrflow::text {

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;

/// Splits on `delimiter` and trims surrounding whitespace from each field.
/// No quoting: none of the supported formats quote their fields.
[[nodiscard]] std::vector<std::string_view> split(std::string_view line, char delimiter);

/// Splits on runs of whitespace.
[[nodiscard]] std::vector<std::string_view> split_ws(std::string_view s);

[[nodiscard]] std::optional<std::int64_t> to_int(std::string_view s) noexcept;
[[nodiscard]] std::optional<double> to_double(std::string_view s) noexcept;

[[nodiscard]] bool iequals(std::string_view a, std::string_view b) noexcept;

/// Shortest representation that reads back to the identical double.
[[nodiscard]] std::string format_double(double v);

/// Reads every line of a file, stripping a trailing '\r'. Throws Error(Io).
[[nodiscard]] std::vector<std::string> read_lines(const std::string& path);

}  // namespace cdrflow::text
