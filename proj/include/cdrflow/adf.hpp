#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdrflow::arima {

/// Monte Carlo quantiles of the Dickey-Fuller t-statistic (constant, no
/// trend) under the unit-root null, one row per series length.
struct AdfTable {
    static constexpr int kVersion = 1;

    std::uint64_t seed = 0;
    std::size_t replications = 0;
    std::vector<std::size_t> sample_sizes;
    std::vector<double> probabilities;
    /// quantiles[i][j]: quantile at probabilities[j] for sample_sizes[i].
    std::vector<std::vector<double>> quantiles;

    /// Quantile at a tabulated probability, interpolated linearly in n
    /// (clamped to the tabulated range).
    [[nodiscard]] double quantile(std::size_t prob_index, std::size_t n) const;
    /// Quantile at an arbitrary probability inside the tabulated range.
    [[nodiscard]] double quantile_at(double probability, std::size_t n) const;
    /// Left-tail probability of `statistic`, interpolated linearly between
    /// tabulated quantiles and clamped to the outermost tabulated levels.
    [[nodiscard]] double p_value(double statistic, std::size_t n) const;

    [[nodiscard]] std::string serialize() const;
    /// Throws MalformedRow on a bad file.
    [[nodiscard]] static AdfTable parse(std::string_view text);
};

[[nodiscard]] std::vector<std::size_t> default_adf_sample_sizes();
[[nodiscard]] std::vector<double> default_adf_probabilities();

inline constexpr std::uint64_t kAdfTableSeed = 20100916;
inline constexpr std::size_t kAdfTableReplications = 100000;

/// Simulates `replications` Gaussian random walks per sample size. Throws
/// InvalidArgument when replications < 10000. `jobs` > 1 builds sample sizes
/// concurrently; the result does not depend on it.
[[nodiscard]] AdfTable build_adf_table(std::span<const std::size_t> sample_sizes,
                                       std::size_t replications, std::uint64_t seed,
                                       std::size_t jobs = 1);

/// The table compiled into the library from data/adf_table_constant_v1.txt.
[[nodiscard]] const AdfTable& shipped_adf_table();

/// t-ratio of gamma in  dy_t = a + gamma * y_{t-1} + e_t  (no lagged differences).
[[nodiscard]] double dickey_fuller_tstat(std::span<const double> y);

enum class AdfRegression { ConstantOnly };
enum class AdfConclusion { Stationary, NonStationary };

[[nodiscard]] std::string_view to_string(AdfConclusion c) noexcept;

struct AdfResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t lags_used = 0;
    std::size_t nobs = 0;
    AdfRegression regression = AdfRegression::ConstantOnly;
    AdfConclusion conclusion = AdfConclusion::NonStationary;
};

inline constexpr double kAdfAlpha = 0.05;

/// floor(12 * (n / 100)^(1/4)), capped at n / 2 - 2.
[[nodiscard]] std::size_t schwert_lag(std::size_t n) noexcept;

/// Regresses dy_t on a constant, y_{t-1} and `lags` lagged differences
/// (Schwert rule when not given). Needs at least 20 values.
[[nodiscard]] AdfResult adf_test(std::span<const double> values,
                                 std::optional<std::size_t> lags = std::nullopt,
                                 const AdfTable* table = nullptr);

}  // namespace cdrflow::arima
