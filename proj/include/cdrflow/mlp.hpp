#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdrflow/scrub.hpp"
#include "cdrflow/series.hpp"

/// One-hidden-layer feed-forward regressor used to measure how anomalous
/// buckets degrade next-bucket prediction.
namespace cdrflow::mlp {

/// Sliding windows: inputs[i] = series[i .. i + window), targets[i] = series[i + window].
struct SupervisedSet {
    std::size_t window = 0;
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;

    [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
};

/// Throws TooShort unless values.size() > window >= 1.
[[nodiscard]] SupervisedSet make_supervised(std::span<const double> values, std::size_t window);

/// Mean of squared differences. Throws EmptyInput or LengthMismatch.
[[nodiscard]] double mse(std::span<const double> pred, std::span<const double> actual);

/// Per-feature min/max scaling to [-1, 1], centred for the tanh layer. A
/// constant feature maps to 2 * (x - min) - 1.
struct MinMaxScaler {
    std::vector<double> lo;
    std::vector<double> hi;

    static MinMaxScaler fit(std::span<const std::vector<double>> rows);
    [[nodiscard]] double scale(std::size_t j) const noexcept;
    [[nodiscard]] double normalize(double x, std::size_t j) const noexcept;
    [[nodiscard]] double denormalize(double x, std::size_t j) const noexcept;
};

/// Layer sizes [inputs, hidden, 1]; tanh hidden units, identity output.
/// Parameters are stored flat: hidden weights (row-major, hidden x inputs),
/// hidden biases, output weights, output bias.
class MlpModel {
public:
    MlpModel() = default;
    MlpModel(std::size_t inputs, std::size_t hidden);

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed);

    [[nodiscard]] std::size_t inputs() const noexcept { return inputs_; }
    [[nodiscard]] std::size_t hidden() const noexcept { return hidden_; }
    [[nodiscard]] std::vector<double>& params() noexcept { return params_; }
    [[nodiscard]] const std::vector<double>& params() const noexcept { return params_; }

    /// Output for an already-normalized input row.
    [[nodiscard]] double forward(std::span<const double> x) const;

    /// MSE over normalized rows; when `grad` is non-null it receives dMSE/dparams.
    double loss(std::span<const std::vector<double>> x, std::span<const double> y,
                std::vector<double>* grad = nullptr) const;

    MinMaxScaler input_scaler;
    MinMaxScaler target_scaler;

    /// Prediction in original units for a raw input row.
    [[nodiscard]] double predict(std::span<const double> raw) const;

private:
    std::size_t inputs_ = 0;
    std::size_t hidden_ = 0;
    std::vector<double> params_;
};

struct TrainConfig {
    std::size_t hidden = 10;
    std::size_t epochs = 2000;
    double learning_rate = 0.05;
    double train_fraction = 0.70;
    double val_fraction = 0.15;
    std::size_t patience = 200;
    std::uint64_t seed = 0;
};

struct EpochPoint {
    double mse_train = 0.0;
    double mse_val = 0.0;

    bool operator==(const EpochPoint&) const = default;
};

/// MSEs are in original (denormalized) units. curve[e] is the state after e
/// gradient steps; curve[0] is the initial model.
struct FitReport {
    double mse_train = 0.0;
    double mse_val = 0.0;
    double mse_test = 0.0;
    std::size_t best_epoch = 0;
    std::vector<EpochPoint> curve;

    bool operator==(const FitReport&) const = default;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};

/// Chronological train/validation/test sizes; throws TooShort if any is empty.
[[nodiscard]] SplitSizes split_sizes(std::size_t rows, const TrainConfig& config);

struct TrainResult {
    MlpModel model;
    FitReport report;
};

/// Full-batch gradient descent with early stopping on validation MSE; the
/// returned model holds the parameters of the best epoch. Throws NonFinite on
/// divergence.
[[nodiscard]] TrainResult train(const SupervisedSet& set, const TrainConfig& config);

struct Comparison {
    FitReport raw;
    FitReport clean;
};

/// Trains identical models on the raw and scrubbed series.
[[nodiscard]] Comparison compare_anomaly_effect(const series::ActivitySeries& raw,
                                                const scrub::ScrubbedSeries& scrubbed,
                                                std::size_t window, const TrainConfig& config,
                                                bool concurrent = false);

/// `epoch,mse_train,mse_val` followed by a `# summary` comment line.
[[nodiscard]] std::string curve_csv(const FitReport& report);

}  // namespace cdrflow::mlp
