#include "cdrflow/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::mlp {

namespace {

struct Normalized {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

Normalized normalize_rows(const MlpModel& model, const SupervisedSet& set, std::size_t from,
                          std::size_t to) {
    Normalized out;
    out.x.reserve(to - from);
    out.y.reserve(to - from);
    for (std::size_t i = from; i < to; ++i) {
        std::vector<double> row(set.window);
        for (std::size_t j = 0; j < set.window; ++j) {
            row[j] = model.input_scaler.normalize(set.inputs[i][j], j);
        }
        out.x.push_back(std::move(row));
        out.y.push_back(model.target_scaler.normalize(set.targets[i], 0));
    }
    return out;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

SupervisedSet make_supervised(std::span<const double> values, std::size_t window) {
    if (window == 0) {
        throw Error(ErrorKind::InvalidArgument, "window must be at least 1");
    }
    if (values.size() <= window) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("window {} needs more than {} values", window, values.size()));
    }
    SupervisedSet set;
    set.window = window;
    for (std::size_t i = 0; i + window < values.size(); ++i) {
        set.inputs.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(i),
                                values.begin() + static_cast<std::ptrdiff_t>(i + window));
        set.targets.push_back(values[i + window]);
    }
    return set;
}

double mse(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("{} predictions vs {} actual values", pred.size(), actual.size()));
    }
    if (pred.empty()) {
        throw Error(ErrorKind::EmptyInput, "mse of empty sequences");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        total += d * d;
    }
    return total / static_cast<double>(pred.size());
}

MinMaxScaler MinMaxScaler::fit(std::span<const std::vector<double>> rows) {
    MinMaxScaler s;
    if (rows.empty()) {
        return s;
    }
    s.lo = rows.front();
    s.hi = rows.front();
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            s.lo[j] = std::min(s.lo[j], r[j]);
            s.hi[j] = std::max(s.hi[j], r[j]);
        }
    }
    return s;
}

double MinMaxScaler::scale(std::size_t j) const noexcept {
    const double range = hi[j] - lo[j];
    return range > 0.0 ? range : 1.0;
}

double MinMaxScaler::normalize(double x, std::size_t j) const noexcept {
    return 2.0 * (x - lo[j]) / scale(j) - 1.0;
}

double MinMaxScaler::denormalize(double x, std::size_t j) const noexcept {
    return (x + 1.0) * 0.5 * scale(j) + lo[j];
}

MlpModel::MlpModel(std::size_t inputs, std::size_t hidden)
    : inputs_(inputs), hidden_(hidden), params_(hidden * inputs + 2 * hidden + 1, 0.0) {
    if (inputs == 0 || hidden == 0) {
        throw Error(ErrorKind::InvalidArgument, "layer sizes must be positive");
    }
}

void MlpModel::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double a1 = std::sqrt(6.0 / static_cast<double>(inputs_ + hidden_));
    const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_ + 1));
    std::uniform_real_distribution<double> d1(-a1, a1);
    std::uniform_real_distribution<double> d2(-a2, a2);
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t i = 0; i < hidden_ * inputs_; ++i) {
        params_[i] = d1(rng);
    }
    const std::size_t w2 = hidden_ * inputs_ + hidden_;
    for (std::size_t h = 0; h < hidden_; ++h) {
        params_[w2 + h] = d2(rng);
    }
}

double MlpModel::forward(std::span<const double> x) const {
    const double* w1 = params_.data();
    const double* b1 = w1 + hidden_ * inputs_;
    const double* w2 = b1 + hidden_;
    double out = w2[hidden_];
    for (std::size_t h = 0; h < hidden_; ++h) {
        double z = b1[h];
        for (std::size_t j = 0; j < inputs_; ++j) {
            z += w1[h * inputs_ + j] * x[j];
        }
        out += w2[h] * std::tanh(z);
    }
    return out;
}

double MlpModel::loss(std::span<const std::vector<double>> x, std::span<const double> y,
                      std::vector<double>* grad) const {
    const double* w1 = params_.data();
    const double* b1 = w1 + hidden_ * inputs_;
    const double* w2 = b1 + hidden_;
    if (grad) {
        grad->assign(params_.size(), 0.0);
    }
    std::vector<double> act(hidden_);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double out = w2[hidden_];
        for (std::size_t h = 0; h < hidden_; ++h) {
            double z = b1[h];
            for (std::size_t j = 0; j < inputs_; ++j) {
                z += w1[h * inputs_ + j] * x[i][j];
            }
            act[h] = std::tanh(z);
            out += w2[h] * act[h];
        }
        const double err = out - y[i];
        total += err * err;
        if (!grad) {
            continue;
        }
        // d(err^2 / n) / d(out)
        const double g_out = 2.0 * err * inv_n;
        auto& g = *grad;
        double* gw1 = g.data();
        double* gb1 = gw1 + hidden_ * inputs_;
        double* gw2 = gb1 + hidden_;
        gw2[hidden_] += g_out;
        for (std::size_t h = 0; h < hidden_; ++h) {
            gw2[h] += g_out * act[h];
            const double g_z = g_out * w2[h] * (1.0 - act[h] * act[h]);
            gb1[h] += g_z;
            for (std::size_t j = 0; j < inputs_; ++j) {
                gw1[h * inputs_ + j] += g_z * x[i][j];
            }
        }
    }
    return total * inv_n;
}

double MlpModel::predict(std::span<const double> raw) const {
    std::vector<double> x(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        x[j] = input_scaler.normalize(raw[j], j);
    }
    return target_scaler.denormalize(forward(x), 0);
}

SplitSizes split_sizes(std::size_t rows, const TrainConfig& config) {
    if (config.train_fraction <= 0.0 || config.val_fraction <= 0.0 ||
        config.train_fraction + config.val_fraction >= 1.0) {
        throw Error(ErrorKind::InvalidArgument, "split fractions must be positive and sum below 1");
    }
    const auto n = static_cast<double>(rows);
    SplitSizes s;
    s.train = static_cast<std::size_t>(std::floor(n * config.train_fraction + 1e-9));
    s.val = static_cast<std::size_t>(std::floor(n * config.val_fraction + 1e-9));
    s.test = rows - std::min(rows, s.train + s.val);
    if (s.train == 0 || s.val == 0 || s.test == 0) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("{} rows cannot fill train/validation/test splits", rows));
    }
    return s;
}

TrainResult train(const SupervisedSet& set, const TrainConfig& config) {
    const auto sizes = split_sizes(set.size(), config);
    MlpModel model(set.window, config.hidden);
    model.initialize(config.seed);

    std::vector<std::vector<double>> train_inputs(set.inputs.begin(),
                                                  set.inputs.begin() + static_cast<std::ptrdiff_t>(sizes.train));
    model.input_scaler = MinMaxScaler::fit(train_inputs);
    std::vector<std::vector<double>> train_targets;
    for (std::size_t i = 0; i < sizes.train; ++i) {
        train_targets.push_back({set.targets[i]});
    }
    model.target_scaler = MinMaxScaler::fit(train_targets);

    const auto tr = normalize_rows(model, set, 0, sizes.train);
    const auto va = normalize_rows(model, set, sizes.train, sizes.train + sizes.val);
    const auto te = normalize_rows(model, set, sizes.train + sizes.val, set.size());
    // Denormalization is affine, so squared errors scale by range^2.
    const double half_range = 0.5 * model.target_scaler.scale(0);
    const double unit = half_range * half_range;

    FitReport report;
    std::vector<double> grad;
    double train_loss = model.loss(tr.x, tr.y, &grad);
    report.curve.push_back({train_loss * unit, model.loss(va.x, va.y) * unit});
    std::vector<double> best_params = model.params();
    double best_val = report.curve.back().mse_val;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto& p = model.params();
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] -= config.learning_rate * grad[i];
        }
        if (!all_finite(p)) {
            throw Error(ErrorKind::NonFinite,
                        fmt::format("parameters diverged at epoch {} (learning rate {})", epoch,
                                    config.learning_rate));
        }
        train_loss = model.loss(tr.x, tr.y, &grad);
        const double val_loss = model.loss(va.x, va.y);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss) ||
            !all_finite(grad)) {
            throw Error(ErrorKind::NonFinite,
                        fmt::format("loss diverged at epoch {} (learning rate {})", epoch,
                                    config.learning_rate));
        }
        report.curve.push_back({train_loss * unit, val_loss * unit});
        if (report.curve.back().mse_val < best_val) {
            best_val = report.curve.back().mse_val;
            report.best_epoch = epoch;
            best_params = p;
        } else if (epoch - report.best_epoch >= config.patience) {
            break;
        }
    }

    model.params() = best_params;
    report.mse_train = report.curve[report.best_epoch].mse_train;
    report.mse_val = report.curve[report.best_epoch].mse_val;
    report.mse_test = model.loss(te.x, te.y) * unit;
    return {std::move(model), std::move(report)};
}

Comparison compare_anomaly_effect(const series::ActivitySeries& raw,
                                  const scrub::ScrubbedSeries& scrubbed, std::size_t window,
                                  const TrainConfig& config, bool concurrent) {
    if (raw.values.empty() || scrubbed.series.values.empty()) {
        throw Error(ErrorKind::EmptyInput, "both series must be non-empty");
    }
    const auto raw_set = make_supervised(raw.values, window);
    const auto clean_set = make_supervised(scrubbed.series.values, window);
    if (concurrent) {
        auto raw_job = std::async(std::launch::async, [&] { return train(raw_set, config); });
        auto clean = train(clean_set, config);
        return {raw_job.get().report, std::move(clean.report)};
    }
    auto r = train(raw_set, config);
    auto c = train(clean_set, config);
    return {std::move(r.report), std::move(c.report)};
}

std::string curve_csv(const FitReport& report) {
    std::string out = "epoch,mse_train,mse_val\n";
    for (std::size_t e = 0; e < report.curve.size(); ++e) {
        out += fmt::format("{},{},{}\n", e, text::format_double(report.curve[e].mse_train),
                           text::format_double(report.curve[e].mse_val));
    }
    out += fmt::format("# summary best_epoch={} mse_train={} mse_val={} mse_test={}\n",
                       report.best_epoch, text::format_double(report.mse_train),
                       text::format_double(report.mse_val), text::format_double(report.mse_test));
    return out;
}

}  // namespace cdrflow::mlp
