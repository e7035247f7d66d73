#include "cdrflow/timeutil.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <fmt/format.h>

namespace cdrflow::timeutil {

namespace {

constexpr std::int64_t kDay = 86400;

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) {
        return false;
    }
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && ptr == text.data() + pos + len;
}

}  // namespace

std::optional<EpochSeconds> from_civil(int year, int month, int day, int hour, int minute,
                                       int second) {
    using namespace std::chrono;
    if (month < 1 || month > 12 || day < 1 || day > 31) {
        return std::nullopt;
    }
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59) {
        return std::nullopt;
    }
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<EpochSeconds>(days) * kDay + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601(EpochSeconds t) {
    using namespace std::chrono;
    const EpochSeconds day_index = floor_to(t, kDay) / kDay;
    const std::int64_t sod = t - day_index * kDay;
    const year_month_day ymd{sys_days{days{day_index}}};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       sod / 3600, (sod / 60) % 60, sod % 60);
}

std::optional<EpochSeconds> parse_iso8601(std::string_view text) {
    if (!text.empty() && text.back() == 'Z') {
        text.remove_suffix(1);
    }
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!parse_fixed(text, 0, 4, y) || !parse_fixed(text, 5, 2, mo) || !parse_fixed(text, 8, 2, d) ||
        !parse_fixed(text, 11, 2, h) || !parse_fixed(text, 14, 2, mi) ||
        !parse_fixed(text, 17, 2, s)) {
        return std::nullopt;
    }
    return from_civil(y, mo, d, h, mi, s);
}

std::int64_t seconds_of_day(EpochSeconds t) { return t - floor_to(t, kDay); }

EpochSeconds floor_to(EpochSeconds t, std::int64_t width) {
    const EpochSeconds q = t / width;
    const EpochSeconds r = t % width;
    return (r < 0 ? q - 1 : q) * width;
}

std::optional<int> month_from_abbrev(std::string_view abbrev) {
    static constexpr std::array<std::string_view, 12> kMonths = {
        "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (std::size_t i = 0; i < kMonths.size(); ++i) {
        if (kMonths[i] == abbrev) {
            return static_cast<int>(i) + 1;
        }
    }
    return std::nullopt;
}

bool is_weekday_abbrev(std::string_view abbrev) {
    static constexpr std::array<std::string_view, 7> kDays = {"Mon", "Tue", "Wed", "Thu",
                                                             "Fri", "Sat", "Sun"};
    for (auto d : kDays) {
        if (d == abbrev) {
            return true;
        }
    }
    return false;
}

}  // namespace cdrflow::timeutil
