#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdrflow/cluster.hpp"
#include "cdrflow/ingest.hpp"
#include "cdrflow/timeutil.hpp"

/// Synthetic CDR corpora shaped like a campus dataset: a diurnal weekly
/// pattern, short bursts of extra activity at fixed instants and an outage
/// hour with no activity at all.
namespace cdrflow::synth {

struct Burst {
    timeutil::EpochSeconds at = 0;
    std::int64_t length_s = 20 * 60;
};

struct Profile {
    std::string name;
    timeutil::EpochSeconds start = 0;
    std::size_t days = 9;
    std::int64_t bucket_width_s = 3600;
    std::size_t users = 27;
    /// Multiplies the hourly base rates.
    double rate_scale = 1.0;
    /// Extra events per burst are drawn uniformly from this range.
    std::size_t burst_min = 500;
    std::size_t burst_max = 700;
    std::vector<Burst> bursts;
    /// Start of an hour-long outage with no events at all.
    std::optional<timeutil::EpochSeconds> outage;
    /// Per-bucket step size of a random walk on the log of the rate. Zero
    /// disables it.
    double drift_sd = 0.0;
};

/// "weekly" (default: Sep 16-24 2010, four bursts, Sep 24 17:00 outage),
/// "clean" (same week, no anomalies) and "daily" (one day of 5-minute
/// buckets with a drifting level).
[[nodiscard]] std::optional<Profile> profile_by_name(std::string_view name);
[[nodiscard]] std::vector<std::string> profile_names();

struct Corpus {
    Profile profile;
    /// Sorted by timestamp and free of duplicates.
    std::vector<ingest::CdrEvent> events;
    /// Ground-truth anomalous buckets for `profile.bucket_width_s` buckets
    /// counted from `profile.start`.
    std::vector<cluster::AnomalyLabel> truth;

    [[nodiscard]] std::size_t bucket_count() const noexcept;
};

[[nodiscard]] Corpus generate(const Profile& profile, std::uint64_t seed);

/// `bucket_index,bucket_start_iso8601,reason`
[[nodiscard]] std::string truth_csv(const Corpus& corpus);
[[nodiscard]] std::string events_csv(const Corpus& corpus);

}  // namespace cdrflow::synth
