#include "cdrflow/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace cdrflow::synth {

namespace {

// Mean events per hour by hour of day on a weekday: quiet nights, a morning
// ramp and a broad daytime plateau, so the busiest level is also the most
// common one.
constexpr std::array<double, 24> kHourlyRate = {40,  25,  18,  15,  15,  20,  45,  110,
                                                190, 240, 250, 255, 260, 255, 250, 250,
                                                255, 260, 265, 260, 250, 230, 160, 80};

timeutil::EpochSeconds at(int y, int mo, int d, int h, int mi) {
    return *timeutil::from_civil(y, mo, d, h, mi, 0);
}

double base_rate(timeutil::EpochSeconds t) {
    const auto sod = timeutil::seconds_of_day(t);
    const auto hour = static_cast<std::size_t>(sod / 3600);
    const double frac = static_cast<double>(sod % 3600) / 3600.0;
    const double a = kHourlyRate[hour];
    const double b = kHourlyRate[(hour + 1) % 24];
    // Interpolate within the hour so sub-hourly buckets vary smoothly.
    const double rate = a + frac * (b - a);
    const auto day = timeutil::floor_to(t, 86400) / 86400;
    // 1970-01-01 was a Thursday: day index 2 and 3 (mod 7) are Sat and Sun.
    const auto dow = ((day % 7) + 7) % 7;
    return (dow == 2 || dow == 3) ? 0.85 * rate : rate;
}

class EventFactory {
public:
    EventFactory(std::size_t users, std::mt19937_64& rng) : rng_(rng) {
        for (std::size_t u = 0; u < users; ++u) {
            users_.push_back(fmt::format("u{:03}", u + 1));
        }
    }

    ingest::CdrEvent make(timeutil::EpochSeconds t) {
        std::uniform_int_distribution<std::size_t> pick_user(0, users_.size() - 1);
        std::uniform_int_distribution<std::int64_t> pick_other(7000000000LL, 7999999999LL);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::exponential_distribution<double> duration(1.0 / 120.0);
        ingest::CdrEvent e;
        e.timestamp = t;
        e.user_id = users_[pick_user(rng_)];
        e.other_id = std::to_string(pick_other(rng_));
        const double kind = unit(rng_);
        const double dir = unit(rng_);
        if (kind < 0.3) {
            e.kind = ingest::CallKind::Voice;
            e.direction = dir < 0.45   ? ingest::Direction::Incoming
                          : dir < 0.9 ? ingest::Direction::Outgoing
                                      : ingest::Direction::Missed;
            if (e.direction != ingest::Direction::Missed) {
                e.duration_s = 1 + static_cast<std::int64_t>(duration(rng_));
            }
        } else {
            e.kind = ingest::CallKind::Sms;
            e.direction = dir < 0.5 ? ingest::Direction::Incoming : ingest::Direction::Outgoing;
        }
        return e;
    }

private:
    std::mt19937_64& rng_;
    std::vector<std::string> users_;
};

}  // namespace

std::vector<std::string> profile_names() { return {"weekly", "clean", "daily"}; }

std::optional<Profile> profile_by_name(std::string_view name) {
    Profile p;
    p.name = std::string(name);
    p.start = at(2010, 9, 16, 0, 0);
    if (name == "weekly" || name == "clean") {
        if (name == "weekly") {
            p.bursts = {{at(2010, 9, 17, 17, 32)}, {at(2010, 9, 19, 17, 40)},
                        {at(2010, 9, 22, 12, 48)}, {at(2010, 9, 24, 21, 37)}};
            p.outage = at(2010, 9, 24, 17, 0);
        }
        return p;
    }
    if (name == "daily") {
        p.start = at(2010, 9, 24, 0, 0);
        p.days = 1;
        p.bucket_width_s = 300;
        p.rate_scale = 1.0;
        p.drift_sd = 0.02;
        return p;
    }
    return std::nullopt;
}

std::size_t Corpus::bucket_count() const noexcept {
    return static_cast<std::size_t>(static_cast<std::int64_t>(profile.days) * 86400 /
                                    profile.bucket_width_s);
}

Corpus generate(const Profile& profile, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    EventFactory factory(profile.users, rng);
    Corpus corpus;
    corpus.profile = profile;

    const std::int64_t width = profile.bucket_width_s;
    const auto buckets = corpus.bucket_count();
    const auto in_outage = [&](timeutil::EpochSeconds t) {
        return profile.outage && t >= *profile.outage && t < *profile.outage + 3600;
    };

    std::normal_distribution<double> step(0.0, 1.0);
    double drift = 0.0;
    for (std::size_t b = 0; b < buckets; ++b) {
        const auto t0 = profile.start + static_cast<std::int64_t>(b) * width;
        if (profile.drift_sd > 0.0) {
            drift += profile.drift_sd * step(rng);
        }
        // The drift is a random walk on the log rate, so the level wanders
        // without ever being clipped at zero.
        const double mean = profile.rate_scale * base_rate(t0) * static_cast<double>(width) /
                            3600.0 * std::exp(drift);
        std::poisson_distribution<int> count(mean);
        const int n = count(rng);
        std::uniform_int_distribution<std::int64_t> offset(0, width - 1);
        for (int i = 0; i < n; ++i) {
            const auto t = t0 + offset(rng);
            auto e = factory.make(t);
            if (!in_outage(t)) {
                corpus.events.push_back(std::move(e));
            }
        }
    }

    std::uniform_int_distribution<std::size_t> burst_size(profile.burst_min, profile.burst_max);
    for (const auto& burst : profile.bursts) {
        // Bursts stay inside the bucket that contains their start.
        const auto bucket_end = timeutil::floor_to(burst.at - profile.start, width) + profile.start + width;
        const auto end = std::min(burst.at + burst.length_s, bucket_end);
        std::uniform_int_distribution<std::int64_t> when(burst.at, end - 1);
        const auto n = burst_size(rng);
        for (std::size_t i = 0; i < n; ++i) {
            corpus.events.push_back(factory.make(when(rng)));
        }
        corpus.truth.push_back({static_cast<std::size_t>((burst.at - profile.start) / width),
                                cluster::AnomalyReason::HighActivityCluster});
    }
    if (profile.outage) {
        for (auto t = *profile.outage; t < *profile.outage + 3600; t += width) {
            corpus.truth.push_back({static_cast<std::size_t>((t - profile.start) / width),
                                    cluster::AnomalyReason::ZeroActivity});
        }
    }
    std::sort(corpus.truth.begin(), corpus.truth.end());
    std::sort(corpus.events.begin(), corpus.events.end());
    corpus.events.erase(std::unique(corpus.events.begin(), corpus.events.end()),
                        corpus.events.end());
    return corpus;
}

std::string truth_csv(const Corpus& corpus) {
    std::string out = "bucket_index,bucket_start_iso8601,reason\n";
    for (const auto& label : corpus.truth) {
        out += fmt::format("{},{},{}\n", label.bucket,
                           timeutil::format_iso8601(corpus.profile.start +
                                                    static_cast<std::int64_t>(label.bucket) *
                                                        corpus.profile.bucket_width_s),
                           cluster::to_string(label.reason));
    }
    return out;
}

std::string events_csv(const Corpus& corpus) {
    std::string out(ingest::kCanonicalHeader);
    out += '\n';
    for (const auto& e : corpus.events) {
        out += ingest::to_canonical_row(e);
        out += '\n';
    }
    return out;
}

}  // namespace cdrflow::synth
