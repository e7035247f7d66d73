#include "cdrflow/cluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::cluster {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<Point> distinct_points(std::span<const Point> points) {
    std::vector<Point> unique(points.begin(), points.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    return unique;
}

void validate(std::span<const Point> points, std::size_t k) {
    if (points.empty()) {
        throw Error(ErrorKind::EmptyInput, "k-means needs at least one point");
    }
    if (k == 0) {
        throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
    }
    const auto dim = points.front().size();
    if (dim == 0) {
        throw Error(ErrorKind::InvalidArgument, "points must have at least one coordinate");
    }
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw Error(ErrorKind::InvalidArgument, "points differ in dimension");
        }
    }
}

/// Returns the inertia of the new assignment.
double assign_nearest(std::span<const Point> points, std::span<const Point> centroids,
                      std::vector<std::size_t>& assignments) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = squared_distance(points[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double d = squared_distance(points[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        assignments[i] = best;
        total += best_d;
    }
    return total;
}

void update_means(std::span<const Point> points, std::vector<Point>& centroids,
                  std::vector<std::size_t>& assignments) {
    const auto k = centroids.size();
    const auto dim = points.front().size();
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& s = sums[assignments[i]];
        for (std::size_t j = 0; j < dim; ++j) {
            s[j] += points[i][j];
        }
        ++counts[assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < dim; ++j) {
            centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }
    // Empty-cluster repair: move the centroid onto the point that is farthest
    // from its own centroid, and hand that point over.
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) {
            continue;
        }
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (counts[assignments[i]] <= 1) {
                continue;
            }
            const double d = squared_distance(points[i], centroids[assignments[i]]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far_d < 0.0) {
            continue;
        }
        --counts[assignments[far]];
        assignments[far] = c;
        counts[c] = 1;
        centroids[c] = points[far];
    }
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        d += diff * diff;
    }
    return d;
}

double inertia_of(std::span<const Point> points, std::span<const Point> centroids,
                  std::span<const std::size_t> assignments) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        total += squared_distance(points[i], centroids[assignments[i]]);
    }
    return total;
}

ClusterModel kmeans(std::span<const Point> points, const KMeansOptions& options) {
    validate(points, options.k);
    const auto unique = distinct_points(points);
    if (options.k > unique.size()) {
        throw Error(ErrorKind::DegenerateInput,
                    fmt::format("k = {} exceeds the {} distinct points", options.k, unique.size()));
    }

    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(unique.size());
    std::iota(order.begin(), order.end(), 0);
    ClusterModel m;
    m.k = options.k;
    m.seed = options.seed;
    for (std::size_t c = 0; c < options.k; ++c) {
        std::uniform_int_distribution<std::size_t> pick(c, order.size() - 1);
        std::swap(order[c], order[pick(rng)]);
        m.centroids.push_back(unique[order[c]]);
    }

    m.assignments.assign(points.size(), 0);
    double inertia = assign_nearest(points, m.centroids, m.assignments);
    m.inertia_trace.push_back(inertia);
    std::vector<std::size_t> next(points.size());
    while (m.iterations < options.max_iter) {
        update_means(points, m.centroids, m.assignments);
        ++m.iterations;
        const double updated = assign_nearest(points, m.centroids, next);
        m.inertia_trace.push_back(updated);
        const bool stable = next == m.assignments;
        const bool small_gain = inertia - updated <= options.tol * inertia;
        m.assignments.swap(next);
        inertia = updated;
        if (stable) {
            m.converged = true;
            break;
        }
        if (small_gain) {
            break;
        }
    }
    if (!m.converged) {
        // Leave the model with centroids equal to the means of the final
        // assignment.
        update_means(points, m.centroids, m.assignments);
    }
    m.inertia = inertia_of(points, m.centroids, m.assignments);
    return m;
}

std::uint64_t restart_seed(std::uint64_t base, std::size_t i) noexcept {
    return i == 0 ? base : splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(i)));
}

ClusterModel best_of_restarts(std::span<const Point> points, const KMeansOptions& options,
                              std::size_t restarts) {
    if (restarts == 0) {
        throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
    }
    std::optional<ClusterModel> best;
    for (std::size_t r = 0; r < restarts; ++r) {
        KMeansOptions run = options;
        run.seed = restart_seed(options.seed, r);
        auto m = kmeans(points, run);
        if (!best || m.inertia < best->inertia) {
            best = std::move(m);
        }
    }
    return std::move(*best);
}

std::string_view to_string(AnomalyReason reason) noexcept {
    return reason == AnomalyReason::HighActivityCluster ? "HighActivityCluster" : "ZeroActivity";
}

std::optional<AnomalyReason> parse_reason(std::string_view token) {
    if (token == "HighActivityCluster") return AnomalyReason::HighActivityCluster;
    if (token == "ZeroActivity") return AnomalyReason::ZeroActivity;
    return std::nullopt;
}

bool ActiveWindow::contains(timeutil::EpochSeconds t) const noexcept {
    const auto sod = timeutil::seconds_of_day(t);
    if (from_s <= to_s) {
        return sod >= from_s && sod < to_s;
    }
    return sod >= from_s || sod < to_s;
}

std::optional<ActiveWindow> parse_window(std::string_view spec) {
    const auto parts = text::split(spec, '-');
    if (parts.size() != 2) {
        return std::nullopt;
    }
    auto clock = [](std::string_view s) -> std::optional<std::int64_t> {
        const auto hm = text::split(s, ':');
        if (hm.size() != 2) return std::nullopt;
        const auto h = text::to_int(hm[0]);
        const auto m = text::to_int(hm[1]);
        if (!h || !m || *h < 0 || *h > 24 || *m < 0 || *m > 59 || (*h == 24 && *m != 0)) {
            return std::nullopt;
        }
        return *h * 3600 + *m * 60;
    };
    const auto from = clock(parts[0]);
    const auto to = clock(parts[1]);
    if (!from || !to) {
        return std::nullopt;
    }
    return ActiveWindow{*from, *to};
}

std::vector<std::size_t> AnomalyReport::indices() const {
    std::vector<std::size_t> out;
    for (const auto& l : anomalous_buckets) {
        out.push_back(l.bucket);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> AnomalyReport::indices(AnomalyReason reason) const {
    std::vector<std::size_t> out;
    for (const auto& l : anomalous_buckets) {
        if (l.reason == reason) {
            out.push_back(l.bucket);
        }
    }
    return out;
}

AnomalyReport detect_anomalies(const series::ActivitySeries& series, const DetectOptions& options,
                               ClusterModel& model_out) {
    if (series.values.empty()) {
        throw Error(ErrorKind::EmptyInput, "series is empty");
    }
    if (options.k == 0 || series.size() < options.k) {
        throw Error(ErrorKind::DegenerateInput,
                    fmt::format("series of length {} cannot hold {} clusters", series.size(),
                                options.k));
    }
    std::vector<Point> points;
    points.reserve(series.size());
    for (double v : series.values) {
        points.push_back({v});
    }
    std::vector<double> distinct(series.values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    KMeansOptions km;
    km.k = std::min(options.k, distinct.size());
    km.max_iter = options.max_iter;
    km.tol = options.tol;
    km.seed = options.seed;
    model_out = best_of_restarts(points, km, options.restarts);

    AnomalyReport report;
    if (model_out.k > 1) {
        std::vector<std::size_t> counts(model_out.k, 0);
        for (auto a : model_out.assignments) {
            ++counts[a];
        }
        std::size_t top = 0;
        for (std::size_t c = 1; c < model_out.k; ++c) {
            if (model_out.centroids[c][0] > model_out.centroids[top][0]) {
                top = c;
            }
        }
        bool smallest = true;
        for (std::size_t c = 0; c < model_out.k; ++c) {
            if (c != top && counts[c] <= counts[top]) {
                smallest = false;
            }
        }
        if (smallest) {
            report.anomalous_cluster_index = top;
            for (std::size_t i = 0; i < series.size(); ++i) {
                if (model_out.assignments[i] == top) {
                    report.anomalous_buckets.push_back({i, AnomalyReason::HighActivityCluster});
                }
            }
        }
    }
    if (options.zero_window) {
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (series.values[i] == 0.0 && options.zero_window->contains(series.bucket_start(i))) {
                report.anomalous_buckets.push_back({i, AnomalyReason::ZeroActivity});
            }
        }
    }
    std::sort(report.anomalous_buckets.begin(), report.anomalous_buckets.end());
    return report;
}

AnomalyReport detect_anomalies(const series::ActivitySeries& series, const DetectOptions& options) {
    ClusterModel unused;
    return detect_anomalies(series, options, unused);
}

std::string to_csv(const AnomalyReport& report, const series::ActivitySeries& series) {
    std::string out(kReportHeader);
    out += '\n';
    for (const auto& l : report.anomalous_buckets) {
        out += fmt::format("{},{},{},{}\n", l.bucket,
                           timeutil::format_iso8601(series.bucket_start(l.bucket)),
                           text::format_double(series.values.at(l.bucket)), to_string(l.reason));
    }
    return out;
}

AnomalyReport report_from_csv(std::span<const std::string> lines,
                              const series::ActivitySeries& series) {
    AnomalyReport report;
    for (const auto& raw : lines) {
        const auto line = text::trim(raw);
        if (line.empty() || line == kReportHeader) {
            continue;
        }
        const auto f = text::split(line, ',');
        if (f.size() != 4) {
            throw MalformedRow("field_count", fmt::format("report row '{}'", line));
        }
        const auto idx = text::to_int(f[0]);
        const auto reason = parse_reason(f[3]);
        if (!idx || *idx < 0 || !reason) {
            throw MalformedRow("bad_value", fmt::format("report row '{}'", line));
        }
        const auto bucket = static_cast<std::size_t>(*idx);
        if (bucket >= series.size()) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("report index {} outside series of length {}", bucket,
                                    series.size()));
        }
        report.anomalous_buckets.push_back({bucket, *reason});
    }
    std::sort(report.anomalous_buckets.begin(), report.anomalous_buckets.end());
    report.anomalous_buckets.erase(
        std::unique(report.anomalous_buckets.begin(), report.anomalous_buckets.end()),
        report.anomalous_buckets.end());
    return report;
}

}  // namespace cdrflow::cluster
