#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cdrflow/cluster.hpp"
#include "cdrflow/series.hpp"

namespace cdrflow::scrub {

struct ScrubbedSeries {
    series::ActivitySeries series;
    std::vector<std::size_t> replaced_indices;
    double replacement_value = 0.0;
};

/// Replaces every anomalous bucket (either reason) with the mean of the
/// non-anomalous buckets. Throws AllAnomalous when no bucket is left to
/// average.
[[nodiscard]] ScrubbedSeries make_anomaly_free(const series::ActivitySeries& source,
                                               const cluster::AnomalyReport& report);

struct LabeledSeries {
    const series::ActivitySeries* series;
    const cluster::AnomalyReport* report;
};

/// Cross-series variant: the replacement value is the mean over the
/// non-anomalous buckets of every series in `pool` (the first entry is the one
/// being scrubbed).
[[nodiscard]] ScrubbedSeries make_anomaly_free_pooled(std::span<const LabeledSeries> pool);

/// Sidecar CSV `bucket_index,bucket_start_iso8601,replacement_value`.
[[nodiscard]] std::string sidecar_csv(const ScrubbedSeries& scrubbed);

}  // namespace cdrflow::scrub
