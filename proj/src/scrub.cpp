#include "cdrflow/scrub.hpp"

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::scrub {

namespace {

std::vector<bool> anomaly_mask(const series::ActivitySeries& s, const cluster::AnomalyReport& r) {
    std::vector<bool> mask(s.size(), false);
    for (const auto& label : r.anomalous_buckets) {
        if (label.bucket >= s.size()) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("anomaly index {} outside series of length {}", label.bucket,
                                    s.size()));
        }
        mask[label.bucket] = true;
    }
    return mask;
}

ScrubbedSeries apply(const series::ActivitySeries& source, const std::vector<bool>& mask,
                     double replacement) {
    ScrubbedSeries out{source, {}, replacement};
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            out.series.values[i] = replacement;
            out.replaced_indices.push_back(i);
        }
    }
    return out;
}

}  // namespace

ScrubbedSeries make_anomaly_free(const series::ActivitySeries& source,
                                 const cluster::AnomalyReport& report) {
    const LabeledSeries only{&source, &report};
    return make_anomaly_free_pooled(std::span<const LabeledSeries>(&only, 1));
}

ScrubbedSeries make_anomaly_free_pooled(std::span<const LabeledSeries> pool) {
    if (pool.empty()) {
        throw Error(ErrorKind::EmptyInput, "nothing to scrub");
    }
    double sum = 0.0;
    std::size_t count = 0;
    std::vector<bool> first_mask;
    for (std::size_t p = 0; p < pool.size(); ++p) {
        const auto& s = *pool[p].series;
        auto mask = anomaly_mask(s, *pool[p].report);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!mask[i]) {
                sum += s.values[i];
                ++count;
            }
        }
        if (p == 0) {
            first_mask = std::move(mask);
        }
    }
    if (count == 0) {
        throw Error(ErrorKind::AllAnomalous, "every bucket is anomalous; no mean to substitute");
    }
    return apply(*pool.front().series, first_mask, sum / static_cast<double>(count));
}

std::string sidecar_csv(const ScrubbedSeries& scrubbed) {
    std::string out = "bucket_index,bucket_start_iso8601,replacement_value\n";
    for (auto i : scrubbed.replaced_indices) {
        out += fmt::format("{},{},{}\n", i, timeutil::format_iso8601(scrubbed.series.bucket_start(i)),
                           text::format_double(scrubbed.replacement_value));
    }
    return out;
}

}  // namespace cdrflow::scrub
