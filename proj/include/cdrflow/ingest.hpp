#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cdrflow/timeutil.hpp"

/// Parsing of the three raw CDR layouts (CRAWDAD, Nodobo, Telecom Italia) and
/// of the canonical event CSV into normalized records, plus row cleaning.
namespace cdrflow::ingest {

enum class CallKind { Voice, Sms };
enum class Direction { Incoming, Outgoing, Missed };

[[nodiscard]] std::string_view to_string(CallKind kind) noexcept;
[[nodiscard]] std::string_view to_string(Direction direction) noexcept;

/// One event-level record. Member order fixes the sort order used by
/// `preprocess`: timestamp first, then the remaining fields.
struct CdrEvent {
    timeutil::EpochSeconds timestamp = 0;
    std::string user_id;
    std::optional<std::string> other_id;
    CallKind kind = CallKind::Voice;
    Direction direction = Direction::Incoming;
    std::int64_t duration_s = 0;  ///< 0 for SMS and missed calls

    auto operator<=>(const CdrEvent&) const = default;
};

/// One Telecom Italia grid-cell row. `timestamp` is kept as the raw ordered
/// index found in the file; see `TimeMapping` for conversion to seconds.
struct AggregatedActivity {
    std::int64_t timestamp = 0;
    std::int64_t grid_id = 1;
    double sms_in = 0.0;
    double sms_out = 0.0;
    double call_in = 0.0;
    double call_out = 0.0;

    auto operator<=>(const AggregatedActivity&) const = default;
};

/// Maps a raw aggregated timestamp to epoch seconds:
/// `epoch_s + raw * step_ms / 1000`. The default treats the column as epoch
/// milliseconds.
struct TimeMapping {
    timeutil::EpochSeconds epoch_s = 0;
    std::int64_t step_ms = 1;

    [[nodiscard]] timeutil::EpochSeconds to_seconds(std::int64_t raw) const;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    std::map<std::string, std::size_t> drop_reasons;

    void drop(const std::string& reason) {
        ++rows_dropped;
        ++drop_reasons[reason];
    }
};

struct ParseOptions {
    char delimiter = ',';
    /// CRAWDAD rows carry no subscriber column; every row is attributed to this id.
    std::string user_id = "crawdad";
};

// Each parser throws MalformedRow on a bad row.
[[nodiscard]] CdrEvent parse_crawdad(std::string_view line, const ParseOptions& options = {});
[[nodiscard]] CdrEvent parse_nodobo(std::string_view line, const ParseOptions& options = {});
[[nodiscard]] AggregatedActivity parse_telecom_italia(std::string_view line,
                                                      const ParseOptions& options = {});
/// `user,other,direction,kind,duration_s,timestamp_iso8601`
[[nodiscard]] CdrEvent parse_canonical(std::string_view line, const ParseOptions& options = {});

/// Parses "Thu Sep 9 19:35:37 100 2010". The numeric token between the clock
/// and the year is validated and discarded; it may also be absent.
[[nodiscard]] timeutil::EpochSeconds parse_nodobo_timestamp(std::string_view text);

inline constexpr std::string_view kCanonicalHeader =
    "user,other,direction,kind,duration_s,timestamp_iso8601";
inline constexpr std::string_view kActivityHeader =
    "grid_id,timestamp,sms_in,sms_out,call_in,call_out";

[[nodiscard]] std::string to_canonical_row(const CdrEvent& event);
[[nodiscard]] std::string to_activity_row(const AggregatedActivity& row);

struct RowError {
    std::string reason;
    std::string detail;
};

template <class Record>
using ParseResult = std::variant<Record, RowError>;

template <class Record>
struct Cleaned {
    std::vector<Record> records;
    IngestReport report;
};

/// Drops failed rows (counted by reason), removes exact duplicates of the
/// normalized record (reason "duplicate") and sorts by timestamp.
template <class Record>
[[nodiscard]] Cleaned<Record> preprocess(std::vector<ParseResult<Record>> rows);

extern template Cleaned<CdrEvent> preprocess(std::vector<ParseResult<CdrEvent>>);
extern template Cleaned<AggregatedActivity> preprocess(std::vector<ParseResult<AggregatedActivity>>);

enum class Format { Crawdad, Nodobo, TelecomItalia, Canonical };

[[nodiscard]] std::optional<Format> parse_format(std::string_view name);
[[nodiscard]] std::string_view to_string(Format format) noexcept;

enum class HeaderMode { Auto, Present, Absent };

/// Runs the parser for `format` over text lines. Blank lines are skipped.
/// In Auto mode the first line is taken as a header when it fails to parse
/// and contains no digit.
[[nodiscard]] Cleaned<CdrEvent> ingest_events(std::span<const std::string> lines, Format format,
                                              const ParseOptions& options = {},
                                              HeaderMode header = HeaderMode::Auto);
[[nodiscard]] Cleaned<AggregatedActivity> ingest_activity(std::span<const std::string> lines,
                                                          const ParseOptions& options = {},
                                                          HeaderMode header = HeaderMode::Auto);

}  // namespace cdrflow::ingest
