#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "cdrflow/arima.hpp"
#include "cdrflow/timeutil.hpp"

namespace cdrflow::arima {

/// A fitted model plus the geometry of the series it was trained on.
struct SavedModel {
    ArimaModel model;
    timeutil::EpochSeconds series_start = 0;
    std::int64_t bucket_width_s = 0;
    std::size_t train_length = 0;
};

inline constexpr std::string_view kModelHeader = "parameter,value";

/// Two-column CSV, one row per scalar. Coefficients appear as phi1..phiP and
/// theta1..thetaQ; each warning is its own `warning` row.
[[nodiscard]] std::string to_csv(const SavedModel& saved);
/// Throws MalformedRow when required rows are missing or unparsable.
[[nodiscard]] SavedModel model_from_csv(std::span<const std::string> lines);

}  // namespace cdrflow::arima
