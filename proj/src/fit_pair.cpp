#include "esgvine/copula.hpp"

#include "bivariate_normal.hpp"
#include "copula_base.hpp"
#include "esgvine/error.hpp"
#include "nelder_mead.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace esgvine {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kBrentBits = 30;
constexpr int kProfileBits = 16;
constexpr std::uintmax_t kBrentIterations = 200;

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

bool near_edge(double v, double lo, double hi) {
    const double tol = 1e-3 * (hi - lo);
    return v - lo < tol || hi - v < tol;
}

double safe_loglik(const PairCopula& pc, const std::vector<double>& u1, const std::vector<double>& u2) {
    const double ll = loglik(pc, u1, u2);
    return std::isfinite(ll) ? ll : kNegInf;
}

// Maximizes a one-dimensional log-likelihood on [lo, hi].
template <class F>
std::pair<double, double> brent_max(F&& ll, double lo, double hi, int bits = kBrentBits) {
    std::uintmax_t iters = kBrentIterations;
    const auto r = boost::math::tools::brent_find_minima(
        [&](double x) {
            const double v = ll(x);
            return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
        },
        lo, hi, bits, iters);
    return {r.first, -r.second};
}

// Gaussian log-likelihood through its sufficient statistics in normal scores.
struct GaussianStats {
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    double n = 0.0;

    GaussianStats(const std::vector<double>& u1, const std::vector<double>& u2) {
        for (std::size_t i = 0; i < u1.size(); ++i) {
            const double x = detail::norm_quantile(u1[i]);
            const double y = detail::norm_quantile(u2[i]);
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        n = static_cast<double>(u1.size());
    }

    double loglik(double rho) const {
        const double s = 1.0 - rho * rho;
        return -0.5 * n * std::log(s) - (rho * rho * (sxx + syy) - 2.0 * rho * sxy) / (2.0 * s);
    }
};

std::optional<PairCopula> finish(PairCopula pc, double ll, bool boundary) {
    if (!std::isfinite(ll)) return std::nullopt;
    pc.loglik = ll;
    pc.boundary = boundary;
    return pc;
}

// Student-t nu by profile likelihood with rho held fixed; nu searched on
// log(nu - 2) over the estimation box.
std::pair<double, double> profile_nu(double rho, const std::vector<double>& u1, const std::vector<double>& u2) {
    const auto box = estimation_box(Family::StudentT);
    const double lo = std::log(box.lower[1] - 2.0);
    const double hi = std::log(box.upper[1] - 2.0);
    const auto [s, ll] = brent_max(
        [&](double s_) {
            const auto pc = detail::bare_pair_copula({Family::StudentT, 0}, {rho, 2.0 + std::exp(s_)});
            return safe_loglik(pc, u1, u2);
        },
        lo, hi, kProfileBits);
    return {2.0 + std::exp(s), ll};
}

std::optional<PairCopula> fit_itau(const std::vector<double>& u1, const std::vector<double>& u2, FamilyId id,
                                   double tau_hat) {
    const auto range = tau_range(id);
    const double tau = std::clamp(tau_hat, range[0], range[1]);
    bool boundary = tau != tau_hat;
    std::vector<double> params;
    try {
        params = params_from_tau(id, tau);
    } catch (const ParameterError&) {
        return std::nullopt;
    }
    if (id.base == Family::StudentT) {
        const auto box = estimation_box(Family::StudentT);
        const auto [nu, ll] = profile_nu(params[0], u1, u2);
        params.push_back(nu);
        boundary = boundary || near_edge(nu, box.lower[1], box.upper[1]);
        return finish(make_pair_copula(id, params), ll, boundary);
    }
    const auto pc = make_pair_copula(id, params);
    return finish(pc, safe_loglik(pc, u1, u2), boundary);
}

std::optional<PairCopula> fit_one_param_mle(const std::vector<double>& u1, const std::vector<double>& u2,
                                            FamilyId id, double tau_hat) {
    const auto box = estimation_box(id.base);
    double lo = box.lower[0];
    double hi = box.upper[0];
    if (id.base == Family::Gaussian) {
        const GaussianStats stats(u1, u2);
        const auto [rho, ll] = brent_max([&](double r) { return stats.loglik(r); }, lo, hi);
        return finish(make_pair_copula(id, {rho}), ll, near_edge(rho, lo, hi));
    }
    if (id.base == Family::Frank) {
        // Frank's sign follows the sample's concordance; theta = 0 is excluded.
        if (tau_hat >= 0.0) lo = 1e-6;
        else hi = -1e-6;
    }
    const auto [theta, ll] = brent_max(
        [&](double th) { return safe_loglik(detail::bare_pair_copula(id, {th}), u1, u2); }, lo, hi);
    return finish(make_pair_copula(id, {theta}), ll, near_edge(theta, lo, hi));
}

// Two-parameter MLE in a logistic-transformed box: coarse grid, then Nelder-Mead.
std::optional<PairCopula> fit_two_param_mle(const std::vector<double>& u1, const std::vector<double>& u2,
                                            FamilyId id, std::vector<double> seed_params) {
    const auto box = estimation_box(id.base);
    auto to_params = [&](const std::vector<double>& s) {
        return std::vector<double>{box.lower[0] + (box.upper[0] - box.lower[0]) * logistic(s[0]),
                                   box.lower[1] + (box.upper[1] - box.lower[1]) * logistic(s[1])};
    };
    auto negative_ll = [&](const std::vector<double>& s) {
        const auto p = to_params(s);
        try {
            return -safe_loglik(detail::bare_pair_copula(id, p), u1, u2);
        } catch (const ParameterError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<double> best_s;
    double best = std::numeric_limits<double>::infinity();
    if (!seed_params.empty()) {
        auto to_s = [&](double v, std::size_t k) {
            const double frac = (v - box.lower[k]) / (box.upper[k] - box.lower[k]);
            return logit(std::clamp(frac, 1e-6, 1.0 - 1e-6));
        };
        best_s = {to_s(seed_params[0], 0), to_s(seed_params[1], 1)};
        best = negative_ll(best_s);
    }
    // A seeded start skips the grid.
    for (double s0 : {-3.0, -1.5, 0.0, 1.5, 3.0}) {
        if (!best_s.empty() && std::isfinite(best)) break;
        for (double s1 : {-3.0, -1.5, 0.0, 1.5, 3.0}) {
            const std::vector<double> s{s0, s1};
            const double v = negative_ll(s);
            if (v < best) {
                best = v;
                best_s = s;
            }
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    const double step = seed_params.empty() ? 0.5 : 0.15;
    const auto r = detail::nelder_mead(negative_ll, best_s, {step, step}, 1e-4, 1000);
    if (!(r.value < 1e299)) return std::nullopt;
    const auto p = to_params(r.x);
    const bool boundary = near_edge(p[0], box.lower[0], box.upper[0]) || near_edge(p[1], box.lower[1], box.upper[1]);
    return finish(make_pair_copula(id, p), -r.value, boundary);
}

}  // namespace

std::string catalog_name(Catalog c) {
    switch (c) {
        case Catalog::Itau: return "itau";
        case Catalog::Parametric: return "parametric";
        case Catalog::Gaussian: return "gaussian";
    }
    return "itau";
}

Catalog parse_catalog(const std::string& name) {
    if (name == "itau") return Catalog::Itau;
    if (name == "parametric" || name == "par") return Catalog::Parametric;
    if (name == "gaussian" || name == "gaus") return Catalog::Gaussian;
    throw ConfigError("unknown catalog '" + name + "' (expected itau, parametric or gaussian)");
}

std::vector<FamilyId> catalog_candidates(Catalog c, bool negative_tau) {
    if (c == Catalog::Gaussian) return {{Family::Gaussian, 0}};
    std::vector<Family> bases{Family::Independence, Family::Gaussian, Family::StudentT, Family::Frank,
                              Family::Clayton,      Family::Gumbel,   Family::Joe};
    if (c == Catalog::Parametric) {
        bases.insert(bases.end(), {Family::BB1, Family::BB7, Family::BB8});
    }
    std::vector<FamilyId> out;
    for (Family f : bases) {
        if (!is_rotatable(f) || !negative_tau) out.push_back({f, 0});
    }
    for (Family f : bases) {
        if (!is_rotatable(f)) continue;
        if (negative_tau) {
            out.push_back({f, 90});
            out.push_back({f, 270});
        } else {
            out.push_back({f, 180});
        }
    }
    return out;
}

std::optional<PairCopula> fit_family(const std::vector<double>& u1, const std::vector<double>& u2, FamilyId id,
                                     Catalog catalog, double tau_hat) {
    if (id.base == Family::Independence) return independence_copula();
    try {
        if (catalog == Catalog::Itau) {
            if (family_param_count(id.base) == 2 && id.base != Family::StudentT) return std::nullopt;
            return fit_itau(u1, u2, id, tau_hat);
        }
        if (family_param_count(id.base) == 1) return fit_one_param_mle(u1, u2, id, tau_hat);
        if (id.base == Family::StudentT) {
            const auto start = fit_itau(u1, u2, id, tau_hat);
            auto refined = fit_two_param_mle(u1, u2, id, start ? start->params : std::vector<double>{});
            if (start && (!refined || refined->loglik < start->loglik)) return start;
            return refined;
        }
        return fit_two_param_mle(u1, u2, id, {});
    } catch (const ParameterError&) {
        return std::nullopt;
    }
}

PairCopula fit_pair(const std::vector<double>& u1, const std::vector<double>& u2, const PairFitOptions& options) {
    if (u1.size() != u2.size()) throw DataError("fit_pair: series differ in length");
    if (u1.size() < options.min_length) {
        throw DataError("fit_pair: need at least " + std::to_string(options.min_length) + " observations, got " +
                        std::to_string(u1.size()));
    }
    for (std::size_t i = 0; i < u1.size(); ++i) {
        if (!(u1[i] > 0.0 && u1[i] < 1.0 && u2[i] > 0.0 && u2[i] < 1.0)) {
            throw DataError("fit_pair: observation " + std::to_string(i) + " outside (0,1)");
        }
    }
    const double tau_hat = empirical_tau(u1, u2);

    std::optional<PairCopula> best;
    double best_aic = std::numeric_limits<double>::infinity();
    for (const FamilyId id : catalog_candidates(options.catalog, tau_hat < 0.0)) {
        const auto fit = fit_family(u1, u2, id, options.catalog, tau_hat);
        if (!fit) continue;
        const double aic = -2.0 * fit->loglik + 2.0 * static_cast<double>(fit->n_params);
        if (aic < best_aic) {
            best_aic = aic;
            best = fit;
        }
    }
    if (!best) throw NumericalError("fit_pair: no candidate family is feasible (empirical tau " +
                                    std::to_string(tau_hat) + ")");
    return *best;
}

}  // namespace esgvine
