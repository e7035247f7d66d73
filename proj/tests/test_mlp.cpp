#include <doctest.h>

#include <cmath>
#include <random>

#include "cdrflow/error.hpp"
#include "cdrflow/mlp.hpp"
#include "cdrflow/scrub.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cdrflow;
using namespace cdrflow::mlp;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

/// Noisy daily-cycle series, always positive.
std::vector<double> cyclic(std::size_t n, std::uint64_t seed) {
    auto v = testing::white_noise(n, seed, 3.0);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] += 100.0 + 40.0 * std::sin(2.0 * M_PI * static_cast<double>(i) / 24.0);
    }
    return v;
}

double max_relative_gradient_error(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(1, 6);
    std::normal_distribution<double> z(0.0, 1.0);
    MlpModel m(size(rng), size(rng));
    for (auto& p : m.params()) p = z(rng);
    std::vector<std::vector<double>> x(5, std::vector<double>(m.inputs()));
    std::vector<double> y(5);
    for (auto& row : x) {
        for (auto& v : row) v = z(rng);
    }
    for (auto& v : y) v = z(rng);

    std::vector<double> grad;
    (void)m.loss(x, y, &grad);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        const double keep = m.params()[i];
        m.params()[i] = keep + h;
        const double up = m.loss(x, y);
        m.params()[i] = keep - h;
        const double down = m.loss(x, y);
        m.params()[i] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double rel = std::abs(numeric - grad[i]) / std::max(std::abs(numeric) + std::abs(grad[i]), 1e-8);
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("sliding windows") {
    const auto s = make_supervised(std::vector<double>{1, 2, 3, 4}, 2);
    CHECK(s.inputs == std::vector<std::vector<double>>{{1, 2}, {2, 3}});
    CHECK(s.targets == std::vector<double>{3, 4});
    const auto flat = make_supervised(std::vector<double>(9, 7.0), 4);
    for (double t : flat.targets) CHECK(t == 7.0);
    CHECK(kind_of([] { (void)make_supervised(std::vector<double>{1, 2, 3}, 3); }) == ErrorKind::TooShort);
}

TEST_CASE("mean squared error") {
    CHECK(mse(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
    CHECK(mse(std::vector<double>{1, 2}, std::vector<double>{3, 2}) == 2.0);
    CHECK(mse(std::vector<double>{0}, std::vector<double>{3}) == 9.0);
    CHECK(kind_of([] { (void)mse(std::vector<double>{1}, std::vector<double>{1, 2}); }) ==
          ErrorKind::LengthMismatch);
    CHECK(kind_of([] { (void)mse(std::vector<double>{}, std::vector<double>{}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("normalization round trip") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    std::vector<std::vector<double>> rows(50, std::vector<double>(3));
    for (auto& r : rows) {
        for (auto& v : r) v = u(rng);
    }
    const auto sc = MinMaxScaler::fit(rows);
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(sc.denormalize(sc.normalize(r[j], j), j) - r[j]) <= 1e-12 * std::abs(r[j]) + 1e-12);
            CHECK(sc.normalize(r[j], j) >= -1.0);
            CHECK(sc.normalize(r[j], j) <= 1.0);
        }
    }
}

TEST_CASE("backprop gradient matches central differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CHECK(max_relative_gradient_error(seed) < 1e-4);
    }
}

TEST_CASE("zero learning rate leaves the model untouched") {
    const auto set = make_supervised(cyclic(200, 1), 6);
    TrainConfig c;
    c.learning_rate = 0.0;
    c.epochs = 50;
    c.patience = 1000;
    c.seed = 3;
    const auto r = train(set, c);
    MlpModel fresh(6, c.hidden);
    fresh.initialize(c.seed);
    CHECK(r.model.params() == fresh.params());
    CHECK(r.report.best_epoch == 0);
    for (const auto& p : r.report.curve) CHECK(p.mse_train == r.report.curve[0].mse_train);
    CHECK(r.report.mse_train == r.report.curve[0].mse_train);
}

TEST_CASE("copy task is learned") {
    auto v = cyclic(400, 2);
    auto set = make_supervised(v, 3);
    for (std::size_t i = 0; i < set.size(); ++i) set.targets[i] = set.inputs[i].back();
    // Oracle: the task is exactly linear, so least squares leaves no residual.
    std::vector<std::vector<double>> rows;
    for (const auto& in : set.inputs) rows.push_back({1.0, in[0], in[1], in[2]});
    const auto beta = oracle::least_squares(rows, set.targets);
    double resid = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < 4; ++j) fit += beta[j] * rows[i][j];
        resid = std::max(resid, std::abs(fit - set.targets[i]));
    }
    REQUIRE(resid < 1e-8);

    TrainConfig c;
    c.hidden = 4;
    c.epochs = 2000;
    c.learning_rate = 0.5;
    c.seed = 1;
    const auto r = train(set, c);
    std::vector<double> test(set.targets.end() - static_cast<std::ptrdiff_t>(split_sizes(set.size(), c).test),
                             set.targets.end());
    const double m = testing::mean(test);
    double var = 0.0;
    for (double t : test) var += (t - m) * (t - m);
    var /= static_cast<double>(test.size());
    CHECK(r.report.mse_test < 1e-3 * var);
}

TEST_CASE("report fields are consistent") {
    const auto set = make_supervised(cyclic(300, 4), 8);
    TrainConfig c;
    c.seed = 9;
    c.epochs = 400;
    const auto r = train(set, c);
    const auto& rep = r.report;
    CHECK(rep.curve.size() >= rep.best_epoch + 1);
    double min_val = rep.curve[0].mse_val;
    for (const auto& p : rep.curve) min_val = std::min(min_val, p.mse_val);
    CHECK(rep.mse_val == min_val);
    CHECK(rep.curve[rep.best_epoch].mse_val == min_val);

    // Denormalized test MSE recomputed from raw predictions.
    const auto sz = split_sizes(set.size(), c);
    std::vector<double> pred, actual;
    for (std::size_t i = sz.train + sz.val; i < set.size(); ++i) {
        pred.push_back(r.model.predict(set.inputs[i]));
        actual.push_back(set.targets[i]);
    }
    CHECK(mse(pred, actual) == doctest::Approx(rep.mse_test).epsilon(1e-9));
}

TEST_CASE("training is deterministic") {
    const auto set = make_supervised(cyclic(250, 5), 6);
    TrainConfig c;
    c.seed = 17;
    c.epochs = 300;
    CHECK(train(set, c).report == train(set, c).report);
}

TEST_CASE("train loss falls monotonically below the stability threshold") {
    const auto set = make_supervised(cyclic(300, 6), 6);
    TrainConfig c;
    c.seed = 2;
    c.epochs = 500;
    c.patience = 10000;
    c.learning_rate = 4.0;
    bool monotone = false;
    for (int halvings = 0; halvings < 12 && !monotone; ++halvings, c.learning_rate /= 2.0) {
        try {
            const auto r = train(set, c);
            monotone = true;
            for (std::size_t e = 1; e < r.report.curve.size(); ++e) {
                if (r.report.curve[e].mse_train > r.report.curve[e - 1].mse_train) monotone = false;
            }
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::NonFinite);
        }
    }
    CHECK(monotone);
}

TEST_CASE("divergence is reported, not hidden") {
    const auto set = make_supervised(cyclic(200, 7), 6);
    TrainConfig c;
    c.learning_rate = 1e6;
    c.epochs = 200;
    CHECK(kind_of([&] { (void)train(set, c); }) == ErrorKind::NonFinite);
}

TEST_CASE("split sizes") {
    TrainConfig c;
    const auto s = split_sizes(100, c);
    CHECK(s.train == 70);
    CHECK(s.val == 15);
    CHECK(s.test == 15);
    CHECK(kind_of([&] { (void)split_sizes(5, c); }) == ErrorKind::TooShort);
}

TEST_CASE("identical inputs give identical reports") {
    const auto raw = testing::make_series(cyclic(200, 8));
    scrub::ScrubbedSeries same{raw, {}, 0.0};
    TrainConfig c;
    c.epochs = 200;
    const auto cmp = compare_anomaly_effect(raw, same, 6, c);
    CHECK(cmp.raw == cmp.clean);
    const auto par = compare_anomaly_effect(raw, same, 6, c, true);
    CHECK(par.raw == cmp.raw);
}

TEST_CASE("test error grows with spike size") {
    const auto base = cyclic(300, 9);
    const double sd = 40.0 / std::sqrt(2.0);  // spread of the clean signal
    TrainConfig c;
    c.seed = 4;
    c.epochs = 600;
    double prev = -1.0;
    for (double mult : {5.0, 10.0, 20.0}) {
        auto v = base;
        v[280] += mult * sd;
        const auto r = train(make_supervised(v, 8), c);
        CHECK(r.report.mse_test > prev);
        prev = r.report.mse_test;
    }
}

TEST_CASE("curve csv layout") {
    FitReport r;
    r.curve = {{4.0, 5.0}, {2.0, 3.0}};
    r.best_epoch = 1;
    r.mse_train = 2.0;
    r.mse_val = 3.0;
    r.mse_test = 3.5;
    const auto csv = curve_csv(r);
    CHECK(csv.rfind("epoch,mse_train,mse_val\n0,4,5\n1,2,3\n# summary", 0) == 0);
}

}  // TEST_SUITE
