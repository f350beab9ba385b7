#include "esgvine/garch.hpp"

#include "esgvine/error.hpp"
#include "esgvine/random.hpp"
#include "nelder_mead.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace esgvine {

namespace {

constexpr double kUClamp = 1e-10;

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Unconstrained coordinates: log gamma0, logit persistence, logit ARCH share,
// log(nu - 2).
GarchParams from_unconstrained(const std::vector<double>& s) {
    GarchParams p;
    p.gamma0 = std::exp(s[0]);
    const double persistence = logistic(s[1]);
    const double share = logistic(s[2]);
    p.gamma1 = share * persistence;
    p.beta1 = (1.0 - share) * persistence;
    p.nu = 2.0 + std::exp(s[3]);
    return p;
}

std::vector<double> to_unconstrained(const GarchParams& p) {
    const double persistence = p.gamma1 + p.beta1;
    return {std::log(p.gamma0), logit(persistence), logit(p.gamma1 / persistence), std::log(p.nu - 2.0)};
}

double sample_variance(const std::vector<double>& eps) {
    double ss = 0.0;
    for (double e : eps) ss += e * e;
    return ss / static_cast<double>(eps.size() - 1);
}

double loglik_demeaned(const GarchParams& p, const std::vector<double>& eps, double var0) {
    const double nu = p.nu;
    const double log_const = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                             0.5 * std::log(std::numbers::pi * (nu - 2.0));
    double s2 = var0;
    double ll = 0.0;
    for (std::size_t t = 0; t < eps.size(); ++t) {
        if (t > 0) s2 = p.gamma0 + p.gamma1 * eps[t - 1] * eps[t - 1] + p.beta1 * s2;
        ll += log_const - 0.5 * std::log(s2) - (nu + 1.0) / 2.0 * std::log1p(eps[t] * eps[t] / (s2 * (nu - 2.0)));
    }
    return ll;
}

std::vector<double> demean(const std::vector<double>& x, double mean) {
    std::vector<double> eps(x.size());
    std::transform(x.begin(), x.end(), eps.begin(), [mean](double v) { return v - mean; });
    return eps;
}

}  // namespace

double standardized_t_cdf(double z, double nu) {
    const boost::math::students_t_distribution<double> t(nu);
    return boost::math::cdf(t, z * std::sqrt(nu / (nu - 2.0)));
}

double standardized_t_quantile(double p, double nu) {
    const boost::math::students_t_distribution<double> t(nu);
    return boost::math::quantile(t, p) * std::sqrt((nu - 2.0) / nu);
}

std::vector<double> garch_sigma(const GarchParams& p, const std::vector<double>& eps) {
    std::vector<double> sigma(eps.size());
    if (eps.empty()) return sigma;
    double s2 = sample_variance(eps);
    for (std::size_t t = 0; t < eps.size(); ++t) {
        if (t > 0) s2 = p.gamma0 + p.gamma1 * eps[t - 1] * eps[t - 1] + p.beta1 * s2;
        sigma[t] = std::sqrt(s2);
    }
    return sigma;
}

double garch_loglik(const GarchParams& p, const std::vector<double>& series) {
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    const auto eps = demean(series, mean);
    return loglik_demeaned(p, eps, sample_variance(eps));
}

MarginalFit fit_garch_t(const std::vector<double>& series, const GarchOptions& options) {
    if (series.size() < options.min_length) {
        throw DataError("series too short for GARCH: " + std::to_string(series.size()) + " < " +
                        std::to_string(options.min_length));
    }
    for (double v : series) {
        if (!std::isfinite(v)) throw DataError("series contains a non-finite value");
    }
    MarginalFit fit;
    fit.mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    const auto eps = demean(series, fit.mean);
    const double var0 = sample_variance(eps);
    if (!(var0 > 0.0)) throw DataError("degenerate series: zero variance");

    auto objective = [&](const std::vector<double>& s) {
        const double ll = loglik_demeaned(from_unconstrained(s), eps, var0);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    // Deterministic starts spanning low and high persistence.
    const std::vector<std::array<double, 3>> starts{{0.05, 0.90, 6.0}, {0.10, 0.80, 8.0}, {0.02, 0.50, 5.0},
                                                    {0.01, 0.01, 10.0}};
    detail::MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& st : starts) {
        GarchParams p0{var0 * (1.0 - st[0] - st[1]), st[0], st[1], st[2]};
        const auto first = detail::nelder_mead(objective, to_unconstrained(p0), {0.5, 0.5, 0.5, 0.5}, 1e-8,
                                               options.max_iterations);
        // A restart from the optimum escapes premature simplex collapse.
        auto r = detail::nelder_mead(objective, first.x, {0.1, 0.1, 0.1, 0.1}, 1e-9, options.max_iterations);
        // Short series can leave a flat direction (nu -> inf, or the ARCH
        // share once persistence vanishes) where the simplex never shrinks;
        // a restart that no longer moves the objective counts as converged.
        if (!r.converged && std::isfinite(r.value)) {
            r.converged = first.value - r.value <= 1e-7 * (1.0 + std::abs(r.value));
        }
        if (r.value < best.value) best = r;
    }
    if (!std::isfinite(best.value) || !best.converged) {
        throw NumericalError("GARCH fit did not converge within " + std::to_string(options.max_iterations) +
                             " iterations");
    }
    fit.params = from_unconstrained(best.x);
    if (!(fit.params.gamma1 + fit.params.beta1 < 1.0 - 1e-8)) {
        throw NumericalError("GARCH optimum violates stationarity (gamma1 + beta1 = " +
                             std::to_string(fit.params.gamma1 + fit.params.beta1) + ")");
    }
    fit.loglik = -best.value;
    fit.converged = true;
    fit.sigma = garch_sigma(fit.params, eps);
    fit.u = pit(fit, series);
    return fit;
}

std::vector<double> pit(const MarginalFit& fit, const std::vector<double>& series) {
    const auto eps = demean(series, fit.mean);
    const auto sigma = fit.sigma.size() == series.size() ? fit.sigma : garch_sigma(fit.params, eps);
    const boost::math::students_t_distribution<double> t(fit.params.nu);
    const double scale = std::sqrt(fit.params.nu / (fit.params.nu - 2.0));
    std::vector<double> u(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double z = eps[i] / sigma[i];
        u[i] = std::clamp(boost::math::cdf(t, z * scale), kUClamp, 1.0 - kUClamp);
    }
    return u;
}

std::vector<double> simulate_garch_t(const GarchParams& p, std::size_t n, std::uint64_t seed) {
    constexpr std::size_t burn_in = 500;
    Rng rng(seed);
    const boost::math::students_t_distribution<double> t(p.nu);
    const double scale = std::sqrt((p.nu - 2.0) / p.nu);
    double s2 = p.gamma0 / (1.0 - p.gamma1 - p.beta1);
    double prev = 0.0;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n + burn_in; ++i) {
        if (i > 0) s2 = p.gamma0 + p.gamma1 * prev * prev + p.beta1 * s2;
        prev = std::sqrt(s2) * boost::math::quantile(t, rng.uniform()) * scale;
        if (i >= burn_in) out.push_back(prev);
    }
    return out;
}

}  // namespace esgvine
