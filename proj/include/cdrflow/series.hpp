#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdrflow/ingest.hpp"
#include "cdrflow/timeutil.hpp"

namespace cdrflow::series {

enum class Metric { EventCount, TotalDurationSeconds, ActivitySum };

[[nodiscard]] std::string_view to_string(Metric metric) noexcept;
[[nodiscard]] std::optional<Metric> parse_metric(std::string_view name);

inline constexpr std::int64_t kDefaultBucketWidth = 600;
inline constexpr std::int64_t kDefaultEventBucketWidth = 3600;

/// Regularly bucketed activity. Bucket i covers
/// [start + i * bucket_width_s, start + (i + 1) * bucket_width_s).
struct ActivitySeries {
    timeutil::EpochSeconds start = 0;
    std::int64_t bucket_width_s = kDefaultBucketWidth;
    std::vector<double> values;
    Metric metric = Metric::EventCount;
    std::string label;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] timeutil::EpochSeconds bucket_start(std::size_t i) const noexcept {
        return start + static_cast<std::int64_t>(i) * bucket_width_s;
    }
    /// Same geometry and metadata, different values.
    [[nodiscard]] ActivitySeries with_values(std::vector<double> v) const;
};

/// Which Telecom Italia columns contribute to an ActivitySum bucket.
struct ActivityFields {
    bool sms_in = true;
    bool sms_out = true;
    bool call_in = true;
    bool call_out = true;

    [[nodiscard]] double sum(const ingest::AggregatedActivity& row) const noexcept;
};

struct BucketOptions {
    std::int64_t width_s = kDefaultBucketWidth;
    Metric metric = Metric::EventCount;
    /// Defaults to the first timestamp floored to a multiple of width_s.
    std::optional<timeutil::EpochSeconds> start;
    /// Exclusive upper bound; defaults to just past the last timestamp.
    /// Records outside [start, end) are ignored.
    std::optional<timeutil::EpochSeconds> end;
    ActivityFields fields;
    ingest::TimeMapping time_mapping;
    std::string label;
};

/// Empty buckets are materialized with value 0. Throws EmptyInput when no
/// record falls inside the bucket range.
[[nodiscard]] ActivitySeries bucketize(std::span<const ingest::CdrEvent> events,
                                       const BucketOptions& options);
[[nodiscard]] ActivitySeries bucketize(std::span<const ingest::AggregatedActivity> rows,
                                       const BucketOptions& options);

struct DifferencedSeries {
    std::size_t order_d = 0;
    /// initials[j] is the first element of the j-times differenced series.
    std::vector<double> initials;
    std::vector<double> values;
};

/// Applies v[t] - v[t-1] `d` times. Throws TooShort unless values.size() > d.
[[nodiscard]] DifferencedSeries difference(std::span<const double> values, std::size_t d);
/// Inverse of `difference`. Throws MissingInitials when initials.size() != order_d.
[[nodiscard]] std::vector<double> undifference(const DifferencedSeries& diff);

/// Chronological split; train gets floor(n * train_fraction) values, clamped so
/// both sides hold at least one value. Throws TooShort when n < 2.
[[nodiscard]] std::pair<ActivitySeries, ActivitySeries> split(const ActivitySeries& series,
                                                              double train_fraction);
[[nodiscard]] std::size_t split_point(std::size_t n, double train_fraction);

inline constexpr std::string_view kSeriesHeader = "bucket_start_iso8601,value";

/// Two-column CSV `bucket_start_iso8601,value` with header.
[[nodiscard]] std::string to_csv(const ActivitySeries& series);
/// Reads the two-column CSV. The bucket width is inferred from the first two
/// rows unless given; rows must be evenly spaced.
[[nodiscard]] ActivitySeries from_csv(std::span<const std::string> lines,
                                      std::optional<std::int64_t> width_s = std::nullopt,
                                      Metric metric = Metric::EventCount);

}  // namespace cdrflow::series
