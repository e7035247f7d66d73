#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "cdrflow/series.hpp"

namespace cdrflow::testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = z(rng);
    return x;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto x = white_noise(n, seed);
    for (std::size_t i = 1; i < n; ++i) x[i] += x[i - 1];
    return x;
}

/// y_t = c + sum phi_i y_{t-i} + e_t + sum theta_j e_{t-j}, after a burn-in.
inline std::vector<double> simulate_arma(std::size_t n, std::span<const double> phi,
                                         std::span<const double> theta, std::uint64_t seed,
                                         double c = 0.0, double sd = 1.0) {
    const std::size_t burn = 500;
    const auto e = white_noise(n + burn, seed, sd);
    std::vector<double> y(n + burn, 0.0);
    for (std::size_t t = 0; t < n + burn; ++t) {
        double v = c + e[t];
        for (std::size_t i = 0; i < phi.size() && i < t; ++i) v += phi[i] * y[t - 1 - i];
        for (std::size_t j = 0; j < theta.size() && j < t; ++j) v += theta[j] * e[t - 1 - j];
        y[t] = v;
    }
    return {y.begin() + static_cast<std::ptrdiff_t>(burn), y.end()};
}

inline series::ActivitySeries make_series(std::vector<double> values, std::int64_t width = 3600,
                                          std::int64_t start = 1284595200 /* 2010-09-16 */) {
    series::ActivitySeries s;
    s.start = start;
    s.bucket_width_s = width;
    s.values = std::move(values);
    return s;
}

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Fresh per-test scratch directory under the system temp dir.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("cdrflow_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

}  // namespace cdrflow::testing
