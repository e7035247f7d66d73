#include "cdrflow/adf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::arima {

namespace detail {
extern const char* const kShippedAdfTable;
}

namespace {

double type7_quantile(const std::vector<double>& sorted, double p) {
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> simulate_row(std::size_t n, std::size_t replications, std::uint64_t seed,
                                 std::span<const double> probabilities) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> walk(n);
    std::vector<double> stats(replications);
    for (std::size_t r = 0; r < replications; ++r) {
        double y = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            y += noise(rng);
            walk[t] = y;
        }
        stats[r] = dickey_fuller_tstat(walk);
    }
    std::sort(stats.begin(), stats.end());
    std::vector<double> row;
    row.reserve(probabilities.size());
    for (double p : probabilities) {
        row.push_back(type7_quantile(stats, p));
    }
    return row;
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t n) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

std::vector<std::size_t> default_adf_sample_sizes() { return {25, 50, 100, 250, 500, 1000}; }

std::vector<double> default_adf_probabilities() {
    return {0.001, 0.005, 0.01, 0.025, 0.05, 0.075, 0.10, 0.125, 0.15, 0.20, 0.25, 0.30,
            0.35,  0.40,  0.45, 0.50,  0.55, 0.60,  0.65, 0.70,  0.75, 0.80, 0.85, 0.90,
            0.925, 0.95,  0.975, 0.99, 0.995, 0.999};
}

double dickey_fuller_tstat(std::span<const double> y) {
    const std::size_t m = y.size() - 1;
    double mx = 0.0, md = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        mx += y[t - 1];
        md += y[t] - y[t - 1];
    }
    mx /= static_cast<double>(m);
    md /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double x = y[t - 1] - mx;
        const double d = (y[t] - y[t - 1]) - md;
        sxx += x * x;
        sxy += x * d;
        syy += d * d;
    }
    const double gamma = sxy / sxx;
    const double sse = std::max(0.0, syy - gamma * sxy);
    const double s2 = sse / static_cast<double>(m - 2);
    return gamma / std::sqrt(s2 / sxx);
}

AdfTable build_adf_table(std::span<const std::size_t> sample_sizes, std::size_t replications,
                         std::uint64_t seed, std::size_t jobs) {
    if (replications < 10000) {
        throw Error(ErrorKind::InvalidArgument, "ADF table needs at least 10000 replications");
    }
    if (sample_sizes.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no sample sizes given");
    }
    AdfTable table;
    table.seed = seed;
    table.replications = replications;
    table.sample_sizes.assign(sample_sizes.begin(), sample_sizes.end());
    std::sort(table.sample_sizes.begin(), table.sample_sizes.end());
    table.probabilities = default_adf_probabilities();
    for (auto n : table.sample_sizes) {
        if (n < 10) {
            throw Error(ErrorKind::InvalidArgument, "ADF table sample sizes must be at least 10");
        }
    }
    table.quantiles.resize(table.sample_sizes.size());
    const auto build = [&](std::size_t i) {
        const auto n = table.sample_sizes[i];
        table.quantiles[i] = simulate_row(n, replications, row_seed(seed, n), table.probabilities);
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < table.sample_sizes.size(); ++i) {
            build(i);
        }
    } else {
        std::size_t next = 0;
        while (next < table.sample_sizes.size()) {
            std::vector<std::future<void>> batch;
            for (std::size_t j = 0; j < jobs && next < table.sample_sizes.size(); ++j, ++next) {
                batch.push_back(std::async(std::launch::async, build, next));
            }
            for (auto& f : batch) {
                f.get();
            }
        }
    }
    return table;
}

double AdfTable::quantile(std::size_t prob_index, std::size_t n) const {
    if (n <= sample_sizes.front()) {
        return quantiles.front()[prob_index];
    }
    if (n >= sample_sizes.back()) {
        return quantiles.back()[prob_index];
    }
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(sample_sizes.begin(), sample_sizes.end(), n) - sample_sizes.begin());
    const auto lo = hi - 1;
    const double w = static_cast<double>(n - sample_sizes[lo]) /
                     static_cast<double>(sample_sizes[hi] - sample_sizes[lo]);
    return quantiles[lo][prob_index] + w * (quantiles[hi][prob_index] - quantiles[lo][prob_index]);
}

double AdfTable::quantile_at(double probability, std::size_t n) const {
    if (probability <= probabilities.front()) {
        return quantile(0, n);
    }
    if (probability >= probabilities.back()) {
        return quantile(probabilities.size() - 1, n);
    }
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(probabilities.begin(), probabilities.end(), probability) -
        probabilities.begin());
    const auto lo = hi - 1;
    const double w = (probability - probabilities[lo]) / (probabilities[hi] - probabilities[lo]);
    return quantile(lo, n) + w * (quantile(hi, n) - quantile(lo, n));
}

double AdfTable::p_value(double statistic, std::size_t n) const {
    std::vector<double> q(probabilities.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        q[j] = quantile(j, n);
    }
    if (statistic <= q.front()) {
        return probabilities.front();
    }
    if (statistic >= q.back()) {
        return probabilities.back();
    }
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
        if (statistic < q[j + 1]) {
            const double span = q[j + 1] - q[j];
            const double w = span > 0.0 ? (statistic - q[j]) / span : 0.0;
            return probabilities[j] + w * (probabilities[j + 1] - probabilities[j]);
        }
    }
    return probabilities.back();
}

std::string AdfTable::serialize() const {
    std::string out = fmt::format(
        "# cdrflow adf-table v{}\n# regression=constant\n# seed={}\n# replications={}\n"
        "# rows: series length; columns: cumulative probability of the DF t-statistic\n",
        kVersion, seed, replications);
    out += "n";
    for (double p : probabilities) {
        out += fmt::format(",{}", text::format_double(p));
    }
    out += '\n';
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        out += fmt::format("{}", sample_sizes[i]);
        for (double q : quantiles[i]) {
            out += fmt::format(",{:.6f}", q);
        }
        out += '\n';
    }
    return out;
}

AdfTable AdfTable::parse(std::string_view text_in) {
    AdfTable t;
    bool have_version = false;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos < text_in.size()) {
        auto end = text_in.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text_in.size();
        }
        const auto line = text::trim(text_in.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const auto body = text::trim(line.substr(1));
            if (body.starts_with("cdrflow adf-table v")) {
                const auto v = text::to_int(body.substr(19));
                if (!v || *v != kVersion) {
                    throw MalformedRow("bad_version", std::string(body));
                }
                have_version = true;
            } else if (body.starts_with("seed=")) {
                t.seed = static_cast<std::uint64_t>(text::to_int(body.substr(5)).value_or(0));
            } else if (body.starts_with("replications=")) {
                t.replications =
                    static_cast<std::size_t>(text::to_int(body.substr(13)).value_or(0));
            }
            continue;
        }
        const auto fields = text::split(line, ',');
        if (!have_header) {
            if (fields.front() != "n") {
                throw MalformedRow("bad_header", std::string(line));
            }
            for (std::size_t j = 1; j < fields.size(); ++j) {
                const auto p = text::to_double(fields[j]);
                if (!p || *p <= 0.0 || *p >= 1.0) {
                    throw MalformedRow("bad_probability", std::string(fields[j]));
                }
                t.probabilities.push_back(*p);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != t.probabilities.size() + 1) {
            throw MalformedRow("field_count", std::string(line));
        }
        const auto n = text::to_int(fields[0]);
        if (!n || *n < 10) {
            throw MalformedRow("bad_sample_size", std::string(fields[0]));
        }
        std::vector<double> row;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const auto q = text::to_double(fields[j]);
            if (!q) {
                throw MalformedRow("bad_number", std::string(fields[j]));
            }
            row.push_back(*q);
        }
        t.sample_sizes.push_back(static_cast<std::size_t>(*n));
        t.quantiles.push_back(std::move(row));
    }
    if (!have_version || !have_header || t.sample_sizes.empty() || t.probabilities.empty()) {
        throw MalformedRow("incomplete", "ADF table is missing its version, header or rows");
    }
    if (!std::is_sorted(t.sample_sizes.begin(), t.sample_sizes.end()) ||
        !std::is_sorted(t.probabilities.begin(), t.probabilities.end())) {
        throw MalformedRow("unsorted", "ADF table rows or columns are not ascending");
    }
    return t;
}

const AdfTable& shipped_adf_table() {
    static const AdfTable table = [] {
        const std::string_view raw = detail::kShippedAdfTable;
        if (raw.empty()) {
            throw Error(ErrorKind::InvalidArgument,
                        "no ADF table was compiled in; regenerate data/adf_table_constant_v1.txt");
        }
        return AdfTable::parse(raw);
    }();
    return table;
}

std::string_view to_string(AdfConclusion c) noexcept {
    return c == AdfConclusion::Stationary ? "Stationary" : "NonStationary";
}

std::size_t schwert_lag(std::size_t n) noexcept {
    const auto rule = static_cast<std::size_t>(
        std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    const std::size_t cap = n / 2 >= 2 ? n / 2 - 2 : 0;
    return std::min(rule, cap);
}

AdfResult adf_test(std::span<const double> values, std::optional<std::size_t> lags,
                   const AdfTable* table) {
    const auto n = values.size();
    if (n < 20) {
        throw Error(ErrorKind::TooShort, fmt::format("ADF test needs at least 20 values, got {}", n));
    }
    const std::size_t L = lags.value_or(schwert_lag(n));
    const std::size_t k = L + 2;
    if (n < L + 1 + k + 1) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("{} lags leave too few observations in a series of {}", L, n));
    }
    const std::size_t m = n - 1 - L;

    std::vector<double> dy(n - 1);
    for (std::size_t t = 1; t < n; ++t) {
        dy[t - 1] = values[t] - values[t - 1];
    }
    // Row r regresses dy[L + r] on 1, y[L + r], dy[L + r - 1], ..., dy[r].
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    Eigen::VectorXd Y(static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < m; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const std::size_t t = L + r;
        Y(row) = dy[t];
        X(row, 0) = 1.0;
        X(row, 1) = values[t];
        for (std::size_t i = 1; i <= L; ++i) {
            X(row, static_cast<Eigen::Index>(1 + i)) = dy[t - i];
        }
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(static_cast<Eigen::Index>(k))
                                  .triangularView<Eigen::Upper>();
    const double scale = R.diagonal().cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * scale) {
        throw Error(ErrorKind::SingularRegression, "ADF regressors are collinear");
    }
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd resid = Y - X * beta;
    const double s2 = resid.squaredNorm() / static_cast<double>(m - k);
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
    const double var_gamma = s2 * Rinv.row(1).squaredNorm();
    if (!(var_gamma > 0.0) || !std::isfinite(var_gamma)) {
        throw Error(ErrorKind::SingularRegression, "degenerate ADF residual variance");
    }

    AdfResult out;
    out.statistic = beta(1) / std::sqrt(var_gamma);
    out.lags_used = L;
    out.nobs = m;
    const AdfTable& tab = table ? *table : shipped_adf_table();
    out.p_value = tab.p_value(out.statistic, m + 1);
    out.conclusion = out.p_value <= kAdfAlpha ? AdfConclusion::Stationary
                                              : AdfConclusion::NonStationary;
    return out;
}

}  // namespace cdrflow::arima
