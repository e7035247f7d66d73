#include "cdrflow/ingest.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::ingest {

namespace {

using text::iequals;

void expect_fields(const std::vector<std::string_view>& fields, std::size_t n,
                   std::string_view line) {
    if (fields.size() != n) {
        throw MalformedRow("field_count",
                           fmt::format("expected {} fields, got {} in '{}'", n, fields.size(), line));
    }
}

CallKind parse_kind(std::string_view token) {
    if (iequals(token, "voice") || iequals(token, "call")) {
        return CallKind::Voice;
    }
    if (iequals(token, "sms")) {
        return CallKind::Sms;
    }
    throw MalformedRow("unknown_kind", fmt::format("'{}'", token));
}

Direction parse_direction(std::string_view token) {
    if (iequals(token, "incoming")) {
        return Direction::Incoming;
    }
    if (iequals(token, "outgoing")) {
        return Direction::Outgoing;
    }
    if (iequals(token, "missed")) {
        return Direction::Missed;
    }
    throw MalformedRow("unknown_direction", fmt::format("'{}'", token));
}

std::int64_t parse_duration(std::string_view token) {
    const auto v = text::to_int(token);
    if (!v || *v < 0) {
        throw MalformedRow("bad_duration", fmt::format("'{}'", token));
    }
    return *v;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) != 0;
    });
}

int parse_clock_part(std::string_view s, std::string_view what) {
    if (s.size() != 2 || !all_digits(s)) {
        throw MalformedRow("bad_time", fmt::format("{} '{}'", what, s));
    }
    return (s[0] - '0') * 10 + (s[1] - '0');
}

void normalize(CdrEvent& e) {
    if (e.kind == CallKind::Sms || e.direction == Direction::Missed) {
        e.duration_s = 0;
    }
}

std::string require_user(std::string_view token) {
    if (token.empty()) {
        throw MalformedRow("empty_user", "user id is empty");
    }
    return std::string(token);
}

/// Column-name lines: every alphanumeric token starts with a letter or '_',
/// so "timestamp_iso8601" qualifies while "u013,7162098935" does not.
bool looks_like_header(std::string_view s) {
    bool at_token_start = true;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        const bool word = std::isalnum(u) != 0 || c == '_';
        if (word && at_token_start && std::isdigit(u) != 0) {
            return false;
        }
        at_token_start = !word;
    }
    return true;
}

template <class Record, class Parser>
Cleaned<Record> run(std::span<const std::string> lines, HeaderMode header, Parser parse) {
    std::vector<ParseResult<Record>> rows;
    rows.reserve(lines.size());
    bool first = true;
    for (const auto& raw : lines) {
        const auto line = text::trim(raw);
        if (line.empty()) {
            continue;
        }
        const bool is_first = first;
        first = false;
        if (is_first && header == HeaderMode::Present) {
            continue;
        }
        try {
            rows.emplace_back(parse(line));
        } catch (const MalformedRow& err) {
            if (is_first && header == HeaderMode::Auto && looks_like_header(line)) {
                continue;
            }
            rows.emplace_back(RowError{err.reason(), err.what()});
        }
    }
    return preprocess<Record>(std::move(rows));
}

}  // namespace

std::string_view to_string(CallKind kind) noexcept {
    return kind == CallKind::Voice ? "Voice" : "SMS";
}

std::string_view to_string(Direction direction) noexcept {
    switch (direction) {
        case Direction::Incoming: return "Incoming";
        case Direction::Outgoing: return "Outgoing";
        case Direction::Missed: return "Missed";
    }
    return "Incoming";
}

timeutil::EpochSeconds TimeMapping::to_seconds(std::int64_t raw) const {
    const std::int64_t scaled = raw * step_ms;
    const std::int64_t whole = scaled / 1000 - ((scaled % 1000) < 0 ? 1 : 0);
    return epoch_s + whole;
}

CdrEvent parse_crawdad(std::string_view line, const ParseOptions& options) {
    const auto f = text::split(line, options.delimiter);
    expect_fields(f, 5, line);
    const auto date = f[0];
    const auto time = f[1];
    if (date.size() != 8 || !all_digits(date)) {
        throw MalformedRow("bad_date", fmt::format("'{}'", date));
    }
    if (time.size() != 6 || !all_digits(time)) {
        throw MalformedRow("bad_time", fmt::format("'{}'", time));
    }
    const int y = std::stoi(std::string(date.substr(0, 4)));
    const int mo = std::stoi(std::string(date.substr(4, 2)));
    const int d = std::stoi(std::string(date.substr(6, 2)));
    const int h = std::stoi(std::string(time.substr(0, 2)));
    const int mi = std::stoi(std::string(time.substr(2, 2)));
    const int s = std::stoi(std::string(time.substr(4, 2)));
    if (!timeutil::from_civil(y, mo, d, 0, 0, 0)) {
        throw MalformedRow("bad_date", fmt::format("'{}'", date));
    }
    const auto ts = timeutil::from_civil(y, mo, d, h, mi, s);
    if (!ts) {
        throw MalformedRow("bad_time", fmt::format("'{}'", time));
    }
    CdrEvent e;
    e.timestamp = *ts;
    e.user_id = require_user(options.user_id);
    e.kind = parse_kind(f[2]);
    e.direction = parse_direction(f[3]);
    e.duration_s = parse_duration(f[4]);
    normalize(e);
    return e;
}

timeutil::EpochSeconds parse_nodobo_timestamp(std::string_view text) {
    const auto tok = text::split_ws(text);
    if (tok.size() != 5 && tok.size() != 6) {
        throw MalformedRow("bad_timestamp", fmt::format("'{}'", text));
    }
    if (!timeutil::is_weekday_abbrev(tok[0])) {
        throw MalformedRow("bad_timestamp", fmt::format("weekday '{}'", tok[0]));
    }
    const auto month = timeutil::month_from_abbrev(tok[1]);
    if (!month) {
        throw MalformedRow("bad_timestamp", fmt::format("month '{}'", tok[1]));
    }
    const auto day = text::to_int(tok[2]);
    const auto year = text::to_int(tok.back());
    if (!day || !year || !all_digits(tok[2]) || !all_digits(tok.back())) {
        throw MalformedRow("bad_timestamp", fmt::format("'{}'", text));
    }
    if (tok.size() == 6 && !all_digits(tok[4])) {
        throw MalformedRow("bad_timestamp_token", fmt::format("'{}'", tok[4]));
    }
    if (!timeutil::from_civil(static_cast<int>(*year), *month, static_cast<int>(*day), 0, 0, 0)) {
        throw MalformedRow("bad_date", fmt::format("'{}'", text));
    }
    const auto clock = text::split(tok[3], ':');
    if (clock.size() != 3) {
        throw MalformedRow("bad_time", fmt::format("'{}'", tok[3]));
    }
    const int h = parse_clock_part(clock[0], "hour");
    const int mi = parse_clock_part(clock[1], "minute");
    const int s = parse_clock_part(clock[2], "second");
    const auto ts = timeutil::from_civil(static_cast<int>(*year), *month, static_cast<int>(*day),
                                         h, mi, s);
    if (!ts) {
        throw MalformedRow("bad_timestamp", fmt::format("'{}'", text));
    }
    return *ts;
}

CdrEvent parse_nodobo(std::string_view line, const ParseOptions& options) {
    const auto f = text::split(line, options.delimiter);
    expect_fields(f, 5, line);
    CdrEvent e;
    e.user_id = require_user(f[0]);
    if (!f[1].empty()) {
        e.other_id = std::string(f[1]);
    }
    e.kind = CallKind::Voice;
    e.direction = parse_direction(f[2]);
    e.duration_s = parse_duration(f[3]);
    e.timestamp = parse_nodobo_timestamp(f[4]);
    normalize(e);
    return e;
}

AggregatedActivity parse_telecom_italia(std::string_view line, const ParseOptions& options) {
    const auto f = text::split(line, options.delimiter);
    if (f.size() < 6) {
        throw MalformedRow("field_count",
                           fmt::format("expected at least 6 fields, got {} in '{}'", f.size(), line));
    }
    AggregatedActivity a;
    const auto grid = text::to_int(f[0]);
    if (!grid || *grid < 1) {
        throw MalformedRow("bad_grid", fmt::format("'{}'", f[0]));
    }
    const auto ts = text::to_int(f[1]);
    if (!ts) {
        throw MalformedRow("bad_timestamp", fmt::format("'{}'", f[1]));
    }
    a.grid_id = *grid;
    a.timestamp = *ts;
    double* fields[] = {&a.sms_in, &a.sms_out, &a.call_in, &a.call_out};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto token = f[2 + i];
        if (token.empty()) {
            // Telecom Italia leaves cells blank when no activity was recorded.
            *fields[i] = 0.0;
            continue;
        }
        const auto v = text::to_double(token);
        if (!v) {
            throw MalformedRow("bad_number", fmt::format("'{}'", token));
        }
        if (*v < 0.0) {
            throw MalformedRow("negative_activity", fmt::format("'{}'", token));
        }
        *fields[i] = *v;
    }
    return a;
}

CdrEvent parse_canonical(std::string_view line, const ParseOptions& options) {
    const auto f = text::split(line, options.delimiter);
    expect_fields(f, 6, line);
    CdrEvent e;
    e.user_id = require_user(f[0]);
    if (!f[1].empty()) {
        e.other_id = std::string(f[1]);
    }
    e.direction = parse_direction(f[2]);
    e.kind = parse_kind(f[3]);
    e.duration_s = parse_duration(f[4]);
    const auto ts = timeutil::parse_iso8601(f[5]);
    if (!ts) {
        throw MalformedRow("bad_timestamp", fmt::format("'{}'", f[5]));
    }
    e.timestamp = *ts;
    normalize(e);
    return e;
}

std::string to_canonical_row(const CdrEvent& e) {
    return fmt::format("{},{},{},{},{},{}", e.user_id, e.other_id.value_or(""),
                       to_string(e.direction), to_string(e.kind), e.duration_s,
                       timeutil::format_iso8601(e.timestamp));
}

std::string to_activity_row(const AggregatedActivity& a) {
    return fmt::format("{},{},{},{},{},{}", a.grid_id, a.timestamp, text::format_double(a.sms_in),
                       text::format_double(a.sms_out), text::format_double(a.call_in),
                       text::format_double(a.call_out));
}

template <class Record>
Cleaned<Record> preprocess(std::vector<ParseResult<Record>> rows) {
    Cleaned<Record> out;
    out.report.rows_read = rows.size();
    out.records.reserve(rows.size());
    for (auto& row : rows) {
        if (auto* rec = std::get_if<Record>(&row)) {
            out.records.push_back(std::move(*rec));
        } else {
            out.report.drop(std::get<RowError>(row).reason);
        }
    }
    std::sort(out.records.begin(), out.records.end());
    const auto tail = std::unique(out.records.begin(), out.records.end());
    const auto dups = static_cast<std::size_t>(std::distance(tail, out.records.end()));
    out.records.erase(tail, out.records.end());
    for (std::size_t i = 0; i < dups; ++i) {
        out.report.drop("duplicate");
    }
    out.report.rows_kept = out.records.size();
    return out;
}

template Cleaned<CdrEvent> preprocess(std::vector<ParseResult<CdrEvent>>);
template Cleaned<AggregatedActivity> preprocess(std::vector<ParseResult<AggregatedActivity>>);

std::optional<Format> parse_format(std::string_view name) {
    if (iequals(name, "crawdad")) return Format::Crawdad;
    if (iequals(name, "nodobo")) return Format::Nodobo;
    if (iequals(name, "telecom_italia") || iequals(name, "telecom-italia")) return Format::TelecomItalia;
    if (iequals(name, "canonical")) return Format::Canonical;
    return std::nullopt;
}

std::string_view to_string(Format format) noexcept {
    switch (format) {
        case Format::Crawdad: return "crawdad";
        case Format::Nodobo: return "nodobo";
        case Format::TelecomItalia: return "telecom_italia";
        case Format::Canonical: return "canonical";
    }
    return "canonical";
}

Cleaned<CdrEvent> ingest_events(std::span<const std::string> lines, Format format,
                                const ParseOptions& options, HeaderMode header) {
    switch (format) {
        case Format::Crawdad:
            return run<CdrEvent>(lines, header,
                                 [&](std::string_view l) { return parse_crawdad(l, options); });
        case Format::Nodobo:
            return run<CdrEvent>(lines, header,
                                 [&](std::string_view l) { return parse_nodobo(l, options); });
        case Format::Canonical:
            return run<CdrEvent>(lines, header,
                                 [&](std::string_view l) { return parse_canonical(l, options); });
        case Format::TelecomItalia:
            break;
    }
    throw Error(ErrorKind::InvalidArgument,
                "telecom_italia rows are aggregated activity, not events; use ingest_activity");
}

Cleaned<AggregatedActivity> ingest_activity(std::span<const std::string> lines,
                                            const ParseOptions& options, HeaderMode header) {
    return run<AggregatedActivity>(
        lines, header, [&](std::string_view l) { return parse_telecom_italia(l, options); });
}

}  // namespace cdrflow::ingest
