#include <doctest.h>

#include <algorithm>

#include "cdrflow/cluster.hpp"
#include "cdrflow/error.hpp"
#include "cdrflow/scrub.hpp"
#include "support.hpp"

using namespace cdrflow;
using cluster::AnomalyReason;
using cluster::AnomalyReport;

namespace {

AnomalyReport labels(std::initializer_list<std::pair<std::size_t, AnomalyReason>> items) {
    AnomalyReport r;
    for (auto [i, why] : items) r.anomalous_buckets.push_back({i, why});
    std::sort(r.anomalous_buckets.begin(), r.anomalous_buckets.end());
    return r;
}

}  // namespace

TEST_SUITE("scrub") {

TEST_CASE("spike replaced by the normal mean") {
    const auto s = testing::make_series({10, 12, 500, 11});
    const auto out =
        scrub::make_anomaly_free(s, labels({{2, AnomalyReason::HighActivityCluster}}));
    CHECK(out.replacement_value == 11.0);
    CHECK(out.series.values == std::vector<double>{10, 12, 11, 11});
    CHECK(out.replaced_indices == std::vector<std::size_t>{2});
}

TEST_CASE("empty report is the identity") {
    const auto s = testing::make_series({3, 1, 4, 1, 5});
    const auto out = scrub::make_anomaly_free(s, {});
    CHECK(out.series.values == s.values);
    CHECK(out.replaced_indices.empty());
}

TEST_CASE("zero-activity buckets rise to the mean") {
    const auto s = testing::make_series({0, 8, 8, 8});
    const auto out = scrub::make_anomaly_free(s, labels({{0, AnomalyReason::ZeroActivity}}));
    CHECK(out.series.values == std::vector<double>{8, 8, 8, 8});
}

TEST_CASE("all buckets anomalous") {
    const auto s = testing::make_series({1, 2});
    try {
        (void)scrub::make_anomaly_free(s, labels({{0, AnomalyReason::ZeroActivity},
                                                  {1, AnomalyReason::HighActivityCluster}}));
        FAIL("expected AllAnomalous");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AllAnomalous);
    }
}

TEST_CASE("untouched values are preserved and results stay in range") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto v = testing::white_noise(80, seed, 10.0);
        for (auto& x : v) x = std::abs(x) + 1.0;
        v[seed % 80] = 1000.0;
        const auto s = testing::make_series(v);
        const auto r = labels({{seed % 80, AnomalyReason::HighActivityCluster}});
        const auto out = scrub::make_anomaly_free(s, r);
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i == seed % 80) {
                CHECK(out.series.values[i] == out.replacement_value);
                continue;
            }
            CHECK(out.series.values[i] == v[i]);
            lo = std::min(lo, v[i]);
            hi = std::max(hi, v[i]);
        }
        const auto [mn, mx] = std::minmax_element(out.series.values.begin(), out.series.values.end());
        CHECK(*mn >= lo);
        CHECK(*mx <= hi);
    }
}

TEST_CASE("re-scrubbing with nothing detected is a no-op") {
    std::vector<double> v(48, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 100.0 + static_cast<double>(i % 5);
    v[20] = 900.0;
    const auto s = testing::make_series(v);
    cluster::DetectOptions o;
    const auto first = scrub::make_anomaly_free(s, cluster::detect_anomalies(s, o));
    const auto again = cluster::detect_anomalies(first.series, o);
    CHECK(again.indices(AnomalyReason::HighActivityCluster).empty());
    const auto second = scrub::make_anomaly_free(first.series, again);
    CHECK(second.series.values == first.series.values);
}

TEST_CASE("pooled mean across series") {
    const auto a = testing::make_series({10, 500, 10});
    const auto b = testing::make_series({20, 20, 20, 20});
    const auto ra = labels({{1, AnomalyReason::HighActivityCluster}});
    const AnomalyReport rb;
    const std::vector<scrub::LabeledSeries> pool{{&a, &ra}, {&b, &rb}};
    const auto out = scrub::make_anomaly_free_pooled(pool);
    CHECK(out.replacement_value == (10.0 + 10.0 + 80.0) / 6.0);
    CHECK(out.series.values[1] == out.replacement_value);
    CHECK(out.series.values[0] == 10.0);
    CHECK(out.series.size() == 3);
}

TEST_CASE("sidecar lists replaced buckets") {
    const auto s = testing::make_series({10, 12, 500, 11});
    const auto out =
        scrub::make_anomaly_free(s, labels({{2, AnomalyReason::HighActivityCluster}}));
    CHECK(scrub::sidecar_csv(out) ==
          "bucket_index,bucket_start_iso8601,replacement_value\n2,2010-09-16T02:00:00Z,11\n");
}

}  // TEST_SUITE
