#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cdrflow::arima {

/// Sample autocorrelation with the biased (1/n) autocovariance estimator.
struct AcfResult {
    std::size_t max_lag = 0;
    /// values[k] for k = 0..max_lag; values[0] == 1.
    std::vector<double> values;
    std::size_t n = 0;
    /// 1.96 / sqrt(n).
    double conf_bound = 0.0;
    /// Bartlett band for lag k: 1.96 * sqrt((1 + 2 * sum_{j<k} r_j^2) / n).
    /// bartlett_bounds[0] is unused and set to 0.
    std::vector<double> bartlett_bounds;
};

struct PacfResult {
    std::size_t max_lag = 0;
    /// values[k] for k = 1..max_lag; values[0] is set to 1 so lags index directly.
    std::vector<double> values;
    double conf_bound = 0.0;
};

/// min(50, n / 4), at least 1.
[[nodiscard]] std::size_t default_max_lag(std::size_t n) noexcept;

/// Throws TooShort unless values.size() > max_lag >= 1, ZeroVariance for a
/// constant series.
[[nodiscard]] AcfResult acf(std::span<const double> values, std::size_t max_lag);

/// Durbin-Levinson recursion on the sample autocorrelations. Throws
/// NumericalBreakdown when the prediction-error variance drops below 1e-12.
[[nodiscard]] PacfResult pacf(std::span<const double> values, std::size_t max_lag);
[[nodiscard]] PacfResult pacf_from_acf(const AcfResult& acf);

/// `lag,value,conf_bound`
[[nodiscard]] std::string correlogram_csv(std::span<const double> values, std::size_t first_lag,
                                          double conf_bound);

}  // namespace cdrflow::arima
