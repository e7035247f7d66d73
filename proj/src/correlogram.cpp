#include "cdrflow/correlogram.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::arima {

std::size_t default_max_lag(std::size_t n) noexcept {
    return std::max<std::size_t>(1, std::min<std::size_t>(50, n / 4));
}

AcfResult acf(std::span<const double> values, std::size_t max_lag) {
    const auto n = values.size();
    if (max_lag == 0 || n <= max_lag) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("acf up to lag {} needs more than {} values", max_lag, n));
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t t = 0; t < n; ++t) {
        centered[t] = values[t] - mean;
    }
    std::vector<double> gamma(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) {
            s += centered[t] * centered[t - k];
        }
        gamma[k] = s / static_cast<double>(n);
    }
    if (!(gamma[0] > 0.0)) {
        throw Error(ErrorKind::ZeroVariance, "series has zero variance");
    }

    AcfResult r;
    r.max_lag = max_lag;
    r.n = n;
    r.conf_bound = 1.96 / std::sqrt(static_cast<double>(n));
    r.values.resize(max_lag + 1);
    r.values[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        r.values[k] = std::clamp(gamma[k] / gamma[0], -1.0, 1.0);
    }
    r.bartlett_bounds.assign(max_lag + 1, 0.0);
    double acc = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        r.bartlett_bounds[k] = 1.96 * std::sqrt(acc / static_cast<double>(n));
        acc += 2.0 * r.values[k] * r.values[k];
    }
    return r;
}

PacfResult pacf_from_acf(const AcfResult& a) {
    const auto m = a.max_lag;
    const auto& r = a.values;
    PacfResult out;
    out.max_lag = m;
    out.conf_bound = a.conf_bound;
    out.values.assign(m + 1, 0.0);
    out.values[0] = 1.0;

    std::vector<double> phi(m + 1, 0.0);
    std::vector<double> prev(m + 1, 0.0);
    double err = 1.0;  // prediction-error variance relative to gamma(0)
    for (std::size_t k = 1; k <= m; ++k) {
        if (err < 1e-12) {
            throw Error(ErrorKind::NumericalBreakdown,
                        fmt::format("Durbin-Levinson breakdown at lag {}", k));
        }
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) {
            num -= prev[j] * r[k - j];
        }
        const double kk = num / err;
        phi[k] = kk;
        for (std::size_t j = 1; j < k; ++j) {
            phi[j] = prev[j] - kk * prev[k - j];
        }
        err *= (1.0 - kk * kk);
        out.values[k] = std::clamp(kk, -1.0, 1.0);
        std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k + 1), prev.begin());
    }
    return out;
}

PacfResult pacf(std::span<const double> values, std::size_t max_lag) {
    return pacf_from_acf(acf(values, max_lag));
}

std::string correlogram_csv(std::span<const double> values, std::size_t first_lag,
                            double conf_bound) {
    std::string out = "lag,value,conf_bound\n";
    for (std::size_t k = first_lag; k < values.size(); ++k) {
        out += fmt::format("{},{},{}\n", k, text::format_double(values[k]),
                           text::format_double(conf_bound));
    }
    return out;
}

}  // namespace cdrflow::arima
