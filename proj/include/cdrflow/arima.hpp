#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cdrflow/correlogram.hpp"

namespace cdrflow::arima {

struct ArimaSpec {
    std::size_t p = 0;
    std::size_t d = 0;
    std::size_t q = 0;

    bool operator==(const ArimaSpec&) const = default;
};

/// Throws InvalidArgument unless p + q >= 1 or d >= 1.
void validate(const ArimaSpec& spec);

/// Coefficients of the model on the d-times differenced series w:
///   w_t = c + sum_i phi_i w_{t-i} + e_t + sum_j theta_j e_{t-j}
struct ArimaModel {
    ArimaSpec spec;
    double c = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    /// Mean of squared residuals.
    double sigma2 = 0.0;
    /// Conditional innovations for t = p .. len(w) - 1.
    std::vector<double> residuals;
    bool converged = true;
    bool stationary = true;
    bool invertible = true;
    std::size_t iterations = 0;
    std::vector<std::string> warnings;
};

struct FitOptions {
    /// Estimate c when the model has AR or MA terms; a pure (0,d,0) model never
    /// carries a constant.
    bool include_constant = true;
    std::size_t max_iter = 500;
    double grad_tol = 1e-8;
};

/// Conditional-sum-of-squares estimation (pre-sample innovations zero) by
/// damped Gauss-Newton with backtracking, from five deterministic starts.
/// Throws TooShort when values.size() < p + q + d + 2. Non-convergence,
/// a non-stationary AR part or a non-invertible MA part only set flags and
/// warnings.
[[nodiscard]] ArimaModel fit(std::span<const double> values, const ArimaSpec& spec,
                             const FitOptions& options = {});

/// Innovations of the ARMA part over an already differenced series with the
/// model's fixed coefficients; entries before index p are zero.
[[nodiscard]] std::vector<double> innovations(const ArimaModel& model, std::span<const double> w);

/// Fixed-origin multi-step forecast in original units; future innovations are
/// set to zero. Needs history.size() >= p + d.
[[nodiscard]] std::vector<double> forecast(const ArimaModel& model, std::span<const double> history,
                                           std::size_t horizon);

struct Evaluation {
    double mse = 0.0;
    double mae = 0.0;
    /// Rolling one-step-ahead predictions, one per test value.
    std::vector<double> predictions;
};

/// Rolling one-step-ahead forecasts over `test` with fixed coefficients,
/// conditioning on train followed by the test values already seen.
[[nodiscard]] Evaluation evaluate(const ArimaModel& model, std::span<const double> train,
                                  std::span<const double> test);

/// Box-Jenkins cut-off heuristic. A function "cuts off" at lag k <= 10 when
/// |r_k| exceeds its band and the next three lags lie inside it (PACF band
/// 1.96/sqrt(n), ACF band Bartlett). The earlier cut-off decides the model:
/// PACF first gives (k, d, 0), ACF first gives (0, d, k), equal lags give
/// (k, d, k); no cut-off in either gives (1, d, 1).
[[nodiscard]] ArimaSpec suggest_order(const AcfResult& acf, const PacfResult& pacf, std::size_t d);

/// Moduli of the inverse roots of 1 - phi_1 z - ... (AR) or 1 + theta_1 z + ... (MA).
[[nodiscard]] std::vector<double> inverse_root_moduli(std::span<const double> coefficients,
                                                      bool moving_average);

}  // namespace cdrflow::arima
