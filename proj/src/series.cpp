#include "cdrflow/series.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::series {

namespace {

struct Range {
    timeutil::EpochSeconds start;
    std::size_t buckets;
};

template <class Times>
Range bucket_range(const Times& times, const BucketOptions& options) {
    if (options.width_s <= 0) {
        throw Error(ErrorKind::InvalidArgument, "bucket width must be positive");
    }
    if (times.empty()) {
        throw Error(ErrorKind::EmptyInput, "no records to bucketize");
    }
    const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    const auto start = options.start.value_or(timeutil::floor_to(*lo, options.width_s));
    const auto end = options.end.value_or(*hi + 1);
    if (end <= start) {
        throw Error(ErrorKind::EmptyInput, "empty bucket range");
    }
    const auto span = end - start;
    const auto buckets = static_cast<std::size_t>((span + options.width_s - 1) / options.width_s);
    return {start, buckets};
}

ActivitySeries make_series(const Range& r, const BucketOptions& options) {
    ActivitySeries s;
    s.start = r.start;
    s.bucket_width_s = options.width_s;
    s.values.assign(r.buckets, 0.0);
    s.metric = options.metric;
    s.label = options.label;
    return s;
}

std::optional<std::size_t> slot(const ActivitySeries& s, const BucketOptions& options,
                                timeutil::EpochSeconds t) {
    if (t < s.start) {
        return std::nullopt;
    }
    if (options.end && t >= *options.end) {
        return std::nullopt;
    }
    const auto i = static_cast<std::size_t>((t - s.start) / s.bucket_width_s);
    if (i >= s.values.size()) {
        return std::nullopt;
    }
    return i;
}

}  // namespace

std::string_view to_string(Metric metric) noexcept {
    switch (metric) {
        case Metric::EventCount: return "count";
        case Metric::TotalDurationSeconds: return "duration";
        case Metric::ActivitySum: return "activity";
    }
    return "count";
}

std::optional<Metric> parse_metric(std::string_view name) {
    if (text::iequals(name, "count")) return Metric::EventCount;
    if (text::iequals(name, "duration")) return Metric::TotalDurationSeconds;
    if (text::iequals(name, "activity")) return Metric::ActivitySum;
    return std::nullopt;
}

ActivitySeries ActivitySeries::with_values(std::vector<double> v) const {
    ActivitySeries out = *this;
    out.values = std::move(v);
    return out;
}

double ActivityFields::sum(const ingest::AggregatedActivity& row) const noexcept {
    double total = 0.0;
    if (sms_in) total += row.sms_in;
    if (sms_out) total += row.sms_out;
    if (call_in) total += row.call_in;
    if (call_out) total += row.call_out;
    return total;
}

ActivitySeries bucketize(std::span<const ingest::CdrEvent> events, const BucketOptions& options) {
    if (options.metric == Metric::ActivitySum) {
        throw Error(ErrorKind::InvalidArgument,
                    "activity metric applies to aggregated rows; use count or duration");
    }
    std::vector<timeutil::EpochSeconds> times;
    times.reserve(events.size());
    for (const auto& e : events) {
        times.push_back(e.timestamp);
    }
    auto s = make_series(bucket_range(times, options), options);
    for (const auto& e : events) {
        if (const auto i = slot(s, options, e.timestamp)) {
            s.values[*i] += options.metric == Metric::EventCount
                                ? 1.0
                                : static_cast<double>(e.duration_s);
        }
    }
    return s;
}

ActivitySeries bucketize(std::span<const ingest::AggregatedActivity> rows,
                         const BucketOptions& options) {
    if (options.metric == Metric::TotalDurationSeconds) {
        throw Error(ErrorKind::InvalidArgument, "aggregated rows carry no call durations");
    }
    std::vector<timeutil::EpochSeconds> times;
    times.reserve(rows.size());
    for (const auto& r : rows) {
        times.push_back(options.time_mapping.to_seconds(r.timestamp));
    }
    auto s = make_series(bucket_range(times, options), options);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (const auto i = slot(s, options, times[k])) {
            s.values[*i] +=
                options.metric == Metric::EventCount ? 1.0 : options.fields.sum(rows[k]);
        }
    }
    return s;
}

DifferencedSeries difference(std::span<const double> values, std::size_t d) {
    if (values.size() <= d) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("differencing order {} needs more than {} values", d, values.size()));
    }
    DifferencedSeries out;
    out.order_d = d;
    out.values.assign(values.begin(), values.end());
    for (std::size_t pass = 0; pass < d; ++pass) {
        out.initials.push_back(out.values.front());
        for (std::size_t t = 0; t + 1 < out.values.size(); ++t) {
            out.values[t] = out.values[t + 1] - out.values[t];
        }
        out.values.pop_back();
    }
    return out;
}

std::vector<double> undifference(const DifferencedSeries& diff) {
    if (diff.initials.size() != diff.order_d) {
        throw Error(ErrorKind::MissingInitials,
                    fmt::format("order {} needs {} initial values, have {}", diff.order_d,
                                diff.order_d, diff.initials.size()));
    }
    std::vector<double> cur = diff.values;
    for (std::size_t j = diff.order_d; j-- > 0;) {
        std::vector<double> next;
        next.reserve(cur.size() + 1);
        next.push_back(diff.initials[j]);
        for (double step : cur) {
            next.push_back(next.back() + step);
        }
        cur = std::move(next);
    }
    return cur;
}

std::size_t split_point(std::size_t n, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
    }
    if (n < 2) {
        throw Error(ErrorKind::TooShort, "splitting needs at least 2 values");
    }
    // The epsilon absorbs representation error such as 10 * 0.7 = 6.999...
    auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));
    return std::clamp<std::size_t>(k, 1, n - 1);
}

std::pair<ActivitySeries, ActivitySeries> split(const ActivitySeries& series,
                                                double train_fraction) {
    const auto k = split_point(series.size(), train_fraction);
    const auto mid = series.values.begin() + static_cast<std::ptrdiff_t>(k);
    ActivitySeries train = series.with_values({series.values.begin(), mid});
    ActivitySeries test = series.with_values({mid, series.values.end()});
    test.start = series.bucket_start(k);
    return {std::move(train), std::move(test)};
}

std::string to_csv(const ActivitySeries& series) {
    std::string out(kSeriesHeader);
    out += '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += timeutil::format_iso8601(series.bucket_start(i));
        out += ',';
        out += text::format_double(series.values[i]);
        out += '\n';
    }
    return out;
}

ActivitySeries from_csv(std::span<const std::string> lines, std::optional<std::int64_t> width_s,
                        Metric metric) {
    std::vector<timeutil::EpochSeconds> times;
    std::vector<double> values;
    std::size_t lineno = 0;
    for (const auto& raw : lines) {
        ++lineno;
        const auto line = text::trim(raw);
        if (line.empty() || line == kSeriesHeader) {
            continue;
        }
        const auto f = text::split(line, ',');
        if (f.size() != 2) {
            throw MalformedRow("field_count", fmt::format("series line {}: '{}'", lineno, line));
        }
        const auto t = timeutil::parse_iso8601(f[0]);
        const auto v = text::to_double(f[1]);
        if (!t || !v) {
            throw MalformedRow("bad_value", fmt::format("series line {}: '{}'", lineno, line));
        }
        if (*v < 0.0) {
            throw MalformedRow("negative_activity", fmt::format("series line {}", lineno));
        }
        times.push_back(*t);
        values.push_back(*v);
    }
    if (values.empty()) {
        throw Error(ErrorKind::EmptyInput, "series file has no rows");
    }
    ActivitySeries s;
    s.start = times.front();
    s.metric = metric;
    if (width_s) {
        s.bucket_width_s = *width_s;
    } else if (times.size() >= 2) {
        s.bucket_width_s = times[1] - times[0];
    }
    if (s.bucket_width_s <= 0) {
        throw MalformedRow("bad_spacing", "bucket starts must increase");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] != s.bucket_start(i)) {
            throw MalformedRow("bad_spacing",
                               fmt::format("row {} is not on the {} s grid", i + 1, s.bucket_width_s));
        }
    }
    s.values = std::move(values);
    return s;
}

}  // namespace cdrflow::series
