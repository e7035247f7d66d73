#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdrflow/series.hpp"

namespace cdrflow::cluster {

using Point = std::vector<double>;

struct KMeansOptions {
    std::size_t k = 3;
    std::size_t max_iter = 300;
    /// Stop once the relative inertia improvement of a round falls below tol.
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

struct ClusterModel {
    std::size_t k = 0;
    std::vector<Point> centroids;
    std::vector<std::size_t> assignments;
    double inertia = 0.0;
    /// Number of centroid-update rounds performed.
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    /// Inertia after every assignment step (iterations + 1 entries).
    std::vector<double> inertia_trace;
    /// True when the run ended because assignments stopped changing.
    bool converged = false;
};

/// Lloyd's algorithm. Centroids start at k distinct input points drawn
/// uniformly without replacement; nearest-centroid ties go to the lowest
/// index; a centroid left without points jumps to the point farthest from its
/// own centroid. Throws DegenerateInput when k exceeds the number of distinct
/// points.
[[nodiscard]] ClusterModel kmeans(std::span<const Point> points, const KMeansOptions& options);

/// Seed used by restart `i`; restart 0 uses the base seed itself.
[[nodiscard]] std::uint64_t restart_seed(std::uint64_t base, std::size_t i) noexcept;

/// Minimum-inertia model over `restarts` runs (earliest run wins ties).
[[nodiscard]] ClusterModel best_of_restarts(std::span<const Point> points,
                                            const KMeansOptions& options, std::size_t restarts);

[[nodiscard]] double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Sum of squared distances of points to their assigned centroids.
[[nodiscard]] double inertia_of(std::span<const Point> points, std::span<const Point> centroids,
                                std::span<const std::size_t> assignments);

enum class AnomalyReason { HighActivityCluster, ZeroActivity };

[[nodiscard]] std::string_view to_string(AnomalyReason reason) noexcept;
[[nodiscard]] std::optional<AnomalyReason> parse_reason(std::string_view token);

struct AnomalyLabel {
    std::size_t bucket = 0;
    AnomalyReason reason = AnomalyReason::HighActivityCluster;

    auto operator<=>(const AnomalyLabel&) const = default;
};

/// Time-of-day range [from_s, to_s) in seconds after UTC midnight. A range
/// with from_s > to_s wraps past midnight.
struct ActiveWindow {
    std::int64_t from_s = 8 * 3600;
    std::int64_t to_s = 22 * 3600;

    [[nodiscard]] bool contains(timeutil::EpochSeconds t) const noexcept;
};

/// Parses "HH:MM-HH:MM".
[[nodiscard]] std::optional<ActiveWindow> parse_window(std::string_view text);

struct DetectOptions {
    std::size_t k = 3;
    std::size_t restarts = 10;
    std::uint64_t seed = 0;
    std::size_t max_iter = 300;
    double tol = 1e-6;
    std::optional<ActiveWindow> zero_window;
};

struct AnomalyReport {
    /// Sorted by (bucket, reason).
    std::vector<AnomalyLabel> anomalous_buckets;
    std::optional<std::size_t> anomalous_cluster_index;

    [[nodiscard]] std::vector<std::size_t> indices() const;
    [[nodiscard]] std::vector<std::size_t> indices(AnomalyReason reason) const;
};

/// Clusters the series values in one dimension. The cluster with the highest
/// centroid is anomalous only when it also has strictly the fewest members;
/// otherwise no HighActivityCluster labels are produced. Zero-valued buckets
/// starting inside `zero_window` are labeled ZeroActivity. When the series has
/// fewer distinct values than k, k is lowered to that count.
[[nodiscard]] AnomalyReport detect_anomalies(const series::ActivitySeries& series,
                                             const DetectOptions& options);

[[nodiscard]] AnomalyReport detect_anomalies(const series::ActivitySeries& series,
                                             const DetectOptions& options, ClusterModel& model_out);

inline constexpr std::string_view kReportHeader = "bucket_index,bucket_start_iso8601,value,reason";

[[nodiscard]] std::string to_csv(const AnomalyReport& report, const series::ActivitySeries& series);
/// Reads a report written by `to_csv`, validating indices against `series`.
[[nodiscard]] AnomalyReport report_from_csv(std::span<const std::string> lines,
                                            const series::ActivitySeries& series);

}  // namespace cdrflow::cluster
