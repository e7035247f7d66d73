#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

/// UTC calendar helpers. Every timestamp in the project is an integer count of
/// seconds since 1970-01-01T00:00:00Z; no dataset documents a time zone.
namespace cdrflow::timeutil {

using EpochSeconds = std::int64_t;

/// Returns nullopt when the fields do not name a valid calendar instant.
[[nodiscard]] std::optional<EpochSeconds> from_civil(int year, int month, int day, int hour,
                                                     int minute, int second);

/// Canonical form: `YYYY-MM-DDTHH:MM:SSZ`.
[[nodiscard]] std::string format_iso8601(EpochSeconds t);

/// Accepts the canonical form; the trailing `Z` is optional.
[[nodiscard]] std::optional<EpochSeconds> parse_iso8601(std::string_view text);

/// Seconds elapsed since the most recent UTC midnight, in [0, 86400).
[[nodiscard]] std::int64_t seconds_of_day(EpochSeconds t);

/// Largest multiple of `width` not greater than `t` (floor, also for negatives).
[[nodiscard]] EpochSeconds floor_to(EpochSeconds t, std::int64_t width);

/// Month abbreviation ("Jan".."Dec") to 1..12.
[[nodiscard]] std::optional<int> month_from_abbrev(std::string_view abbrev);

[[nodiscard]] bool is_weekday_abbrev(std::string_view abbrev);

}  // namespace cdrflow::timeutil
