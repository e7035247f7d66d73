#include "cdrflow/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/series.hpp"

namespace cdrflow::arima {

namespace {

/// Parameter layout: [c?] [phi_1..phi_p] [theta_1..theta_q].
struct Layout {
    bool has_const;
    std::size_t p;
    std::size_t q;

    [[nodiscard]] std::size_t size() const { return (has_const ? 1 : 0) + p + q; }
    [[nodiscard]] std::size_t phi(std::size_t i) const { return (has_const ? 1 : 0) + i; }
    [[nodiscard]] std::size_t theta(std::size_t j) const { return (has_const ? 1 : 0) + p + j; }
};

struct Coefs {
    double c = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
};

Coefs unpack(const Layout& L, const Eigen::VectorXd& x) {
    Coefs k;
    k.c = L.has_const ? x(0) : 0.0;
    for (std::size_t i = 0; i < L.p; ++i) k.phi.push_back(x(static_cast<Eigen::Index>(L.phi(i))));
    for (std::size_t j = 0; j < L.q; ++j) k.theta.push_back(x(static_cast<Eigen::Index>(L.theta(j))));
    return k;
}

/// Innovations e_t for t in [0, m), zero before p.
std::vector<double> css_innovations(const Coefs& k, std::span<const double> w) {
    const std::size_t p = k.phi.size();
    const std::size_t q = k.theta.size();
    std::vector<double> e(w.size(), 0.0);
    for (std::size_t t = p; t < w.size(); ++t) {
        double pred = k.c;
        for (std::size_t i = 1; i <= p; ++i) pred += k.phi[i - 1] * w[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) pred += k.theta[j - 1] * e[t - j];
        e[t] = w[t] - pred;
    }
    return e;
}

double css(const Coefs& k, std::span<const double> w) {
    const auto e = css_innovations(k, w);
    double s = 0.0;
    for (std::size_t t = k.phi.size(); t < e.size(); ++t) s += e[t] * e[t];
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

/// Residual vector r (t = p..m-1) and Jacobian dr/dx.
void residuals_and_jacobian(const Layout& L, const Eigen::VectorXd& x, std::span<const double> w,
                            Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const auto k = unpack(L, x);
    const auto e = css_innovations(k, w);
    const std::size_t m = w.size();
    const std::size_t P = L.size();
    const auto rows = static_cast<Eigen::Index>(m - L.p);
    r.resize(rows);
    J.setZero(rows, static_cast<Eigen::Index>(P));
    // de[t][col] kept for all t (zero before p) to run the MA recursion.
    Eigen::MatrixXd de = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(P));
    for (std::size_t t = L.p; t < m; ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        if (L.has_const) de(ti, 0) = -1.0;
        for (std::size_t i = 0; i < L.p; ++i) {
            de(ti, static_cast<Eigen::Index>(L.phi(i))) = -w[t - i - 1];
        }
        for (std::size_t j = 0; j < L.q; ++j) {
            if (t >= j + 1) de(ti, static_cast<Eigen::Index>(L.theta(j))) = -e[t - j - 1];
        }
        for (std::size_t j = 1; j <= L.q && j <= t; ++j) {
            de.row(ti) -= k.theta[j - 1] * de.row(ti - static_cast<Eigen::Index>(j));
        }
        const auto row = static_cast<Eigen::Index>(t - L.p);
        r(row) = e[t];
        J.row(row) = de.row(ti);
    }
}

struct Run {
    Eigen::VectorXd x;
    double s = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t iterations = 0;
};

Run gauss_newton(const Layout& L, Eigen::VectorXd x, std::span<const double> w,
                 const FitOptions& opt) {
    Run run;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    double mu = 0.0;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        residuals_and_jacobian(L, x, w, r, J);
        const double s = r.squaredNorm();
        run.x = x;
        run.s = s;
        run.iterations = it;
        if (!std::isfinite(s)) {
            return run;
        }
        const Eigen::VectorXd g = 2.0 * J.transpose() * r;
        if (g.cwiseAbs().maxCoeff() <= opt.grad_tol * std::max(1.0, s)) {
            run.converged = true;
            return run;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::MatrixXd A = JtJ;
            for (Eigen::Index i = 0; i < A.rows(); ++i) {
                A(i, i) += mu * A(i, i) + 1e-12 * (1.0 + A(i, i));
            }
            const Eigen::VectorXd step = A.ldlt().solve(-J.transpose() * r);
            const double slope = g.dot(step);
            if (!step.allFinite() || slope >= 0.0) {
                mu = std::max(1e-6, mu * 10.0);
                continue;
            }
            for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
                const Eigen::VectorXd trial = x + alpha * step;
                const double st = css(unpack(L, trial), w);
                if (st <= s + 1e-4 * alpha * slope) {
                    if (s - st <= 1e-15 * s) {
                        // No measurable progress left: numerically stationary.
                        run.x = trial;
                        run.s = st;
                        run.converged = true;
                        run.iterations = it + 1;
                        return run;
                    }
                    x = trial;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                mu = std::max(1e-6, mu * 10.0);
            }
        }
        if (!accepted) {
            return run;
        }
        mu *= 0.1;
    }
    run.iterations = opt.max_iter;
    return run;
}

std::vector<double> binomial_row(std::size_t d) {
    std::vector<double> c(d + 1, 0.0);
    c[0] = 1.0;
    for (std::size_t i = 1; i <= d; ++i) {
        for (std::size_t k = i; k > 0; --k) c[k] += c[k - 1];
    }
    return c;
}

}  // namespace

void validate(const ArimaSpec& spec) {
    if (spec.p + spec.q == 0 && spec.d == 0) {
        throw Error(ErrorKind::InvalidArgument, "ARIMA(0,0,0) has nothing to fit");
    }
}

std::vector<double> inverse_root_moduli(std::span<const double> coefficients, bool moving_average) {
    const auto n = static_cast<Eigen::Index>(coefficients.size());
    if (n == 0) {
        return {};
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        C(0, i) = moving_average ? -coefficients[static_cast<std::size_t>(i)]
                                 : coefficients[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        C(i, i - 1) = 1.0;
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(C, false);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.push_back(std::abs(solver.eigenvalues()(i)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

ArimaModel fit(std::span<const double> values, const ArimaSpec& spec, const FitOptions& options) {
    validate(spec);
    if (values.size() < spec.p + spec.q + spec.d + 2) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("ARIMA({},{},{}) needs at least {} values, got {}", spec.p, spec.d,
                                spec.q, spec.p + spec.q + spec.d + 2, values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFinite, "series contains a non-finite value");
        }
    }
    const auto w = series::difference(values, spec.d).values;

    ArimaModel model;
    model.spec = spec;
    const Layout L{options.include_constant && spec.p + spec.q > 0, spec.p, spec.q};

    if (L.size() > 0) {
        double mean_w = 0.0;
        for (double v : w) mean_w += v;
        mean_w /= static_cast<double>(w.size());

        const std::pair<double, double> offsets[] = {
            {0.0, 0.0}, {0.3, 0.3}, {-0.3, -0.3}, {0.3, -0.3}, {-0.3, 0.3}};
        std::optional<Run> best;
        for (const auto& [dphi, dtheta] : offsets) {
            Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L.size()));
            for (std::size_t i = 0; i < L.p; ++i) x0(static_cast<Eigen::Index>(L.phi(i))) = dphi;
            for (std::size_t j = 0; j < L.q; ++j) x0(static_cast<Eigen::Index>(L.theta(j))) = dtheta;
            if (L.has_const) {
                x0(0) = mean_w * (1.0 - dphi * static_cast<double>(L.p));
            }
            auto run = gauss_newton(L, x0, w, options);
            if (std::isfinite(run.s) && (!best || run.s < best->s)) {
                best = std::move(run);
            }
        }
        if (!best) {
            throw Error(ErrorKind::NonFinite, "every optimizer start diverged");
        }
        const auto k = unpack(L, best->x);
        model.c = k.c;
        model.phi = k.phi;
        model.theta = k.theta;
        model.converged = best->converged;
        model.iterations = best->iterations;
        if (!model.converged) {
            model.warnings.push_back("NonConvergence: returned the best iterate");
        }
    }

    const auto e = innovations(model, w);
    model.residuals.assign(e.begin() + static_cast<std::ptrdiff_t>(spec.p), e.end());
    double s = 0.0;
    for (double v : model.residuals) s += v * v;
    model.sigma2 = model.residuals.empty() ? 0.0 : s / static_cast<double>(model.residuals.size());

    const auto ar = inverse_root_moduli(model.phi, false);
    const auto ma = inverse_root_moduli(model.theta, true);
    model.stationary = ar.empty() || ar.back() < 1.0;
    model.invertible = ma.empty() || ma.back() < 1.0;
    if (!model.stationary) {
        model.warnings.push_back("NonStationary: AR polynomial has a root on or inside the unit circle");
    }
    if (!model.invertible) {
        model.warnings.push_back("NonInvertible: MA polynomial has a root on or inside the unit circle");
    }
    return model;
}

std::vector<double> innovations(const ArimaModel& model, std::span<const double> w) {
    return css_innovations(Coefs{model.c, model.phi, model.theta}, w);
}

std::vector<double> forecast(const ArimaModel& model, std::span<const double> history,
                             std::size_t horizon) {
    const auto& spec = model.spec;
    if (horizon == 0) {
        throw Error(ErrorKind::InvalidArgument, "horizon must be at least 1");
    }
    if (history.size() < spec.p + spec.d || history.size() <= spec.d) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("forecasting needs at least {} history values", spec.p + spec.d + 1));
    }
    // levels[j] is the history differenced j times.
    std::vector<std::vector<double>> levels{{history.begin(), history.end()}};
    for (std::size_t j = 0; j < spec.d; ++j) {
        levels.push_back(series::difference(levels.back(), 1).values);
    }
    std::vector<double> w = levels.back();
    std::vector<double> e = innovations(model, w);
    const std::size_t m = w.size();
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = m + h;
        double pred = model.c;
        for (std::size_t i = 1; i <= spec.p; ++i) pred += model.phi[i - 1] * w[t - i];
        for (std::size_t j = 1; j <= spec.q && j <= t; ++j) pred += model.theta[j - 1] * e[t - j];
        w.push_back(pred);
        e.push_back(0.0);
    }
    std::vector<double> out(w.begin() + static_cast<std::ptrdiff_t>(m), w.end());
    for (std::size_t j = spec.d; j-- > 0;) {
        double last = levels[j].back();
        for (auto& v : out) {
            last += v;
            v = last;
        }
    }
    return out;
}

Evaluation evaluate(const ArimaModel& model, std::span<const double> train,
                    std::span<const double> test) {
    const auto& spec = model.spec;
    if (test.empty()) {
        throw Error(ErrorKind::EmptyInput, "test span is empty");
    }
    if (train.size() < spec.p + spec.d || train.size() <= spec.d) {
        throw Error(ErrorKind::TooShort, "training span too short to condition on");
    }
    std::vector<double> full(train.begin(), train.end());
    full.insert(full.end(), test.begin(), test.end());
    const auto w = series::difference(full, spec.d).values;
    const auto e = innovations(model, w);
    const auto binom = binomial_row(spec.d);

    Evaluation out;
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const std::size_t t = train.size() + i;
        const std::size_t tw = t - spec.d;
        // One-step prediction of w_t from the ARMA recursion.
        double pred_w = model.c;
        for (std::size_t k = 1; k <= spec.p; ++k) pred_w += model.phi[k - 1] * w[tw - k];
        for (std::size_t j = 1; j <= spec.q && j <= tw; ++j) pred_w += model.theta[j - 1] * e[tw - j];
        // y_t = w_t - sum_{k>=1} (-1)^k C(d,k) y_{t-k}
        double pred = pred_w;
        for (std::size_t k = 1; k <= spec.d; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            pred -= sign * binom[k] * full[t - k];
        }
        out.predictions.push_back(pred);
        const double err = full[t] - pred;
        se += err * err;
        ae += std::abs(err);
    }
    out.mse = se / static_cast<double>(test.size());
    out.mae = ae / static_cast<double>(test.size());
    return out;
}

namespace {

std::optional<std::size_t> cutoff_lag(const std::vector<double>& r,
                                      const std::vector<double>& bounds, double flat_bound,
                                      std::size_t max_lag) {
    const auto band = [&](std::size_t k) { return bounds.empty() ? flat_bound : bounds[k]; };
    const std::size_t last = std::min<std::size_t>(10, max_lag);
    for (std::size_t k = 1; k <= last; ++k) {
        if (std::abs(r[k]) <= band(k)) {
            continue;
        }
        bool quiet = true;
        for (std::size_t j = k + 1; j <= std::min(k + 3, max_lag); ++j) {
            if (std::abs(r[j]) > band(j)) {
                quiet = false;
                break;
            }
        }
        if (quiet) {
            return k;
        }
    }
    return std::nullopt;
}

}  // namespace

ArimaSpec suggest_order(const AcfResult& acf, const PacfResult& pacf, std::size_t d) {
    const auto kp = cutoff_lag(pacf.values, {}, pacf.conf_bound, pacf.max_lag);
    const auto kq = cutoff_lag(acf.values, acf.bartlett_bounds, acf.conf_bound, acf.max_lag);
    if (!kp && !kq) {
        return {1, d, 1};
    }
    if (kp && (!kq || *kp < *kq)) {
        return {*kp, d, 0};
    }
    if (kq && (!kp || *kq < *kp)) {
        return {0, d, *kq};
    }
    return {*kp, d, *kq};
}

}  // namespace cdrflow::arima
