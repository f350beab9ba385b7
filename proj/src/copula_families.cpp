#include "copula_base.hpp"

#include "bivariate_normal.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_debye.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace esgvine::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double x, double y) {
    const double m = std::max(x, y);
    if (m == -kInf) return -kInf;
    return m + std::log(std::exp(x - m) + std::exp(y - m));
}

double t_cdf(double x, double nu) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}
double t_quantile(double p, double nu) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

// Solves base_h(a | b) = w for a by bracketing; base_h is increasing in a.
template <class H>
double invert_increasing(H&& h, double w) {
    constexpr double lo = 1e-15;
    constexpr double hi = 1.0 - 1e-15;
    const double f_lo = h(lo) - w;
    if (f_lo >= 0.0) return lo;
    const double f_hi = h(hi) - w;
    if (f_hi <= 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve([&](double a) { return h(a) - w; }, lo, hi, f_lo,
                                                      f_hi, boost::math::tools::eps_tolerance<double>(50),
                                                      iters);
    return 0.5 * (r.first + r.second);
}

// ---- Gaussian ------------------------------------------------------------

double gauss_log_pdf(double rho, double a, double b) {
    const double x = norm_quantile(a);
    const double y = norm_quantile(b);
    const double s = 1.0 - rho * rho;
    return -0.5 * std::log(s) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s);
}

double gauss_h(double rho, double a, double b) {
    const double x = norm_quantile(a);
    const double y = norm_quantile(b);
    return norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double gauss_hinv(double rho, double w, double b) {
    const double y = norm_quantile(b);
    return norm_cdf(rho * y + std::sqrt(1.0 - rho * rho) * norm_quantile(w));
}

// ---- Student t -----------------------------------------------------------

double student_log_pdf(double rho, double nu, double a, double b) {
    const double x = t_quantile(a, nu);
    const double y = t_quantile(b, nu);
    const double s = 1.0 - rho * rho;
    const double q = (x * x + y * y - 2.0 * rho * x * y) / (nu * s);
    return std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) - 2.0 * std::lgamma((nu + 1.0) / 2.0) -
           0.5 * std::log(s) - (nu + 2.0) / 2.0 * std::log1p(q) +
           (nu + 1.0) / 2.0 * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double student_h(double rho, double nu, double a, double b) {
    const double x = t_quantile(a, nu);
    const double y = t_quantile(b, nu);
    const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
    return t_cdf((x - rho * y) / scale, nu + 1.0);
}

double student_hinv(double rho, double nu, double w, double b) {
    const double y = t_quantile(b, nu);
    const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
    return t_cdf(t_quantile(w, nu + 1.0) * scale + rho * y, nu);
}

// Bivariate t CDF as a normal scale mixture: E[Phi2(x sqrt(W), y sqrt(W))],
// W ~ Gamma(nu/2, rate nu/2), integrated over log W.
double student_cdf(double rho, double nu, double a, double b) {
    const double x = t_quantile(a, nu);
    const double y = t_quantile(b, nu);
    const double k = nu / 2.0;
    const double log_norm = k * std::log(k) - std::lgamma(k);
    auto integrand = [&](double t) {
        const double s = std::exp(t / 2.0);
        const double log_weight = log_norm + k * t - k * std::exp(t);
        if (log_weight < -745.0) return 0.0;
        return bivariate_normal_cdf(x * s, y * s, rho) * std::exp(log_weight);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double split = -2.0 * std::log(std::max({std::abs(x), std::abs(y), 1.0}));
    double err = 0.0;
    const double left = GK::integrate(integrand, -kInf, split, 20, 1e-13, &err);
    const double mid = GK::integrate(integrand, split, 0.0, 20, 1e-13, &err);
    const double right = GK::integrate(integrand, 0.0, kInf, 20, 1e-13, &err);
    return left + mid + right;
}

// ---- Clayton -------------------------------------------------------------

// log(a^-theta + b^-theta - 1)
double clayton_log_s(double theta, double a, double b) {
    const double x = -theta * std::log(a);
    const double y = -theta * std::log(b);
    const double m = std::max(x, y);
    return m + std::log(std::exp(x - m) + std::exp(y - m) - std::exp(-m));
}

double clayton_cdf(double theta, double a, double b) {
    return std::exp(-clayton_log_s(theta, a, b) / theta);
}

double clayton_log_pdf(double theta, double a, double b) {
    return std::log1p(theta) - (1.0 + theta) * (std::log(a) + std::log(b)) -
           (2.0 + 1.0 / theta) * clayton_log_s(theta, a, b);
}

double clayton_h(double theta, double a, double b) {
    return std::exp(-(theta + 1.0) * std::log(b) - (1.0 + 1.0 / theta) * clayton_log_s(theta, a, b));
}

double clayton_hinv(double theta, double w, double b) {
    // a^-theta = 1 + b^-theta (w^(-theta/(1+theta)) - 1)
    const double lb = -theta * std::log(b);
    const double lw = std::log(std::expm1(-theta / (1.0 + theta) * std::log(w)));
    const double log_rest = lb + lw;
    const double log_total = log_sum_exp(0.0, log_rest);
    return std::exp(-log_total / theta);
}

// ---- Gumbel --------------------------------------------------------------

double gumbel_log_a(double theta, double lx, double ly) {
    return log_sum_exp(theta * lx, theta * ly) / theta;
}

double gumbel_cdf(double theta, double a, double b) {
    const double lx = std::log(-std::log(a));
    const double ly = std::log(-std::log(b));
    return std::exp(-std::exp(gumbel_log_a(theta, lx, ly)));
}

double gumbel_log_pdf(double theta, double a, double b) {
    const double x = -std::log(a);
    const double y = -std::log(b);
    const double lx = std::log(x);
    const double ly = std::log(y);
    const double log_big_a = gumbel_log_a(theta, lx, ly);
    const double big_a = std::exp(log_big_a);
    return -big_a + x + y + (theta - 1.0) * (lx + ly) + (1.0 - 2.0 * theta) * log_big_a +
           std::log(big_a + theta - 1.0);
}

double gumbel_h(double theta, double a, double b) {
    const double y = -std::log(b);
    const double lx = std::log(-std::log(a));
    const double ly = std::log(y);
    const double log_big_a = gumbel_log_a(theta, lx, ly);
    return std::exp(-std::exp(log_big_a) + (1.0 - theta) * log_big_a + (theta - 1.0) * ly + y);
}

// ---- Frank ---------------------------------------------------------------

double frank_cdf(double theta, double a, double b) {
    const double e1 = std::expm1(-theta);
    const double ea = std::expm1(-theta * a);
    const double eb = std::expm1(-theta * b);
    return -std::log1p(ea * eb / e1) / theta;
}

double frank_log_pdf(double theta, double a, double b) {
    const double e1 = std::expm1(-theta);
    const double ea = std::expm1(-theta * a);
    const double eb = std::expm1(-theta * b);
    const double den = e1 + ea * eb;
    return std::log(-theta * e1) - theta * (a + b) - 2.0 * std::log(std::abs(den));
}

double frank_h(double theta, double a, double b) {
    const double e1 = std::expm1(-theta);
    const double ea = std::expm1(-theta * a);
    const double eb = std::expm1(-theta * b);
    return ea * std::exp(-theta * b) / (e1 + ea * eb);
}

double frank_hinv(double theta, double w, double b) {
    const double e1 = std::expm1(-theta);
    const double ea = w * e1 / ((1.0 - w) * std::exp(-theta * b) + w);
    return -std::log1p(ea) / theta;
}

double frank_tau(double theta) {
    [[maybe_unused]] static const auto previous_handler = gsl_set_error_handler_off();
    if (theta == 0.0) return 0.0;
    const double t = std::abs(theta);
    double tau = 0.0;
    if (t < 1e-4) {
        tau = t / 9.0 - t * t * t / 900.0;
    } else {
        tau = 1.0 - 4.0 / t + 4.0 * gsl_sf_debye_1(t) / t;
    }
    return theta < 0.0 ? -tau : tau;
}

// ---- Joe -----------------------------------------------------------------

// 1 - (1-u)^theta
double joe_one_minus_p(double theta, double u) { return -std::expm1(theta * std::log1p(-u)); }

// log s, s = x + y - x y with x = (1-a)^theta; summed as x + y (1 - x) so
// nothing cancels near (1,1).
double joe_log_s(double theta, double a, double b) {
    const double lx = theta * std::log1p(-a);
    const double ly = theta * std::log1p(-b);
    return log_sum_exp(lx, ly + std::log(-std::expm1(lx)));
}

double joe_cdf(double theta, double a, double b) {
    return -std::expm1(joe_log_s(theta, a, b) / theta);
}

double joe_log_pdf(double theta, double a, double b) {
    const double log_s = joe_log_s(theta, a, b);
    return (1.0 / theta - 2.0) * log_s + (theta - 1.0) * (std::log1p(-a) + std::log1p(-b)) +
           std::log(theta - 1.0 + std::exp(log_s));
}

double joe_h(double theta, double a, double b) {
    const double log_s = joe_log_s(theta, a, b);
    return std::exp((1.0 / theta - 1.0) * log_s + (theta - 1.0) * std::log1p(-b)) *
           joe_one_minus_p(theta, a);
}

double joe_tau(double theta) {
    if (theta == 1.0) return 0.0;
    // tau = 1 + 2/(2-theta) * (psi(2) - psi(2/theta + 1))
    const double d = 2.0 - theta;
    if (std::abs(d) < 1e-6) {
        // Second-order expansion around theta = 2 avoids 0/0.
        const double x = d / theta;
        const double slope = boost::math::trigamma(2.0) + 0.5 * boost::math::polygamma(2, 2.0) * x;
        return 1.0 - 2.0 * slope / theta;
    }
    return 1.0 + 2.0 / d * (boost::math::digamma(2.0) - boost::math::digamma(2.0 / theta + 1.0));
}

// ---- BB1 -----------------------------------------------------------------

struct Bb1Terms {
    double lx, ly, log_s, r;
};

Bb1Terms bb1_terms(double theta, double delta, double a, double b) {
    Bb1Terms t{};
    t.lx = std::log(std::expm1(-theta * std::log(a)));
    t.ly = std::log(std::expm1(-theta * std::log(b)));
    t.log_s = log_sum_exp(delta * t.lx, delta * t.ly);
    t.r = std::exp(t.log_s / delta);
    return t;
}

double bb1_cdf(double theta, double delta, double a, double b) {
    const auto t = bb1_terms(theta, delta, a, b);
    return std::exp(-std::log1p(t.r) / theta);
}

double bb1_log_pdf(double theta, double delta, double a, double b) {
    const auto t = bb1_terms(theta, delta, a, b);
    return -(theta + 1.0) * (std::log(a) + std::log(b)) + (delta - 1.0) * (t.lx + t.ly) +
           (2.0 / delta - 2.0) * t.log_s - (1.0 / theta + 2.0) * std::log1p(t.r) +
           std::log((1.0 + theta) + theta * (delta - 1.0) * (1.0 + 1.0 / t.r));
}

double bb1_h(double theta, double delta, double a, double b) {
    const auto t = bb1_terms(theta, delta, a, b);
    return std::exp((-1.0 / theta - 1.0) * std::log1p(t.r) + (1.0 / delta - 1.0) * t.log_s +
                    (delta - 1.0) * t.ly - (theta + 1.0) * std::log(b));
}

// ---- BB7 -----------------------------------------------------------------

struct Bb7Terms {
    double log_wa, log_wb;  // log(1 - (1-u)^theta)
    double s_minus_1;       // x + y - 2 with x = wa^-delta
    double log_s;
    double log_one_minus_g;  // log(1 - S^(-1/delta))
    double g;
};

Bb7Terms bb7_terms(double theta, double delta, double a, double b) {
    Bb7Terms t{};
    auto log_w = [&](double u) {
        const double p = std::exp(theta * std::log1p(-u));  // (1-u)^theta
        return p < 0.5 ? std::log1p(-p) : std::log(-std::expm1(theta * std::log1p(-u)));
    };
    t.log_wa = log_w(a);
    t.log_wb = log_w(b);
    t.s_minus_1 = std::expm1(-delta * t.log_wa) + std::expm1(-delta * t.log_wb);
    t.log_s = std::log1p(t.s_minus_1);
    t.g = std::exp(-t.log_s / delta);
    t.log_one_minus_g = std::log(-std::expm1(-t.log_s / delta));
    return t;
}

double bb7_cdf(double theta, double delta, double a, double b) {
    const auto t = bb7_terms(theta, delta, a, b);
    return -std::expm1(t.log_one_minus_g / theta);
}

double bb7_log_pdf(double theta, double delta, double a, double b) {
    const auto t = bb7_terms(theta, delta, a, b);
    return (theta - 1.0) * (std::log1p(-a) + std::log1p(-b)) - (delta + 1.0) * (t.log_wa + t.log_wb) +
           (1.0 / theta - 2.0) * t.log_one_minus_g - (1.0 / delta + 2.0) * t.log_s +
           std::log(theta * (1.0 + delta) * (1.0 - t.g) + (theta - 1.0) * t.g);
}

double bb7_h(double theta, double delta, double a, double b) {
    const auto t = bb7_terms(theta, delta, a, b);
    return std::exp((1.0 / theta - 1.0) * t.log_one_minus_g - (1.0 / delta + 1.0) * t.log_s +
                    (theta - 1.0) * std::log1p(-b) - (delta + 1.0) * t.log_wb);
}

// ---- BB8 -----------------------------------------------------------------

struct Bb8Terms {
    double log_eta;
    double qa, qb;  // 1 - (1 - delta u)^theta
    double log_w;   // log(1 - qa qb / eta)
};

Bb8Terms bb8_terms(double theta, double delta, double a, double b) {
    Bb8Terms t{};
    const double eta = -std::expm1(theta * std::log1p(-delta));
    t.log_eta = std::log(eta);
    t.qa = -std::expm1(theta * std::log1p(-delta * a));
    t.qb = -std::expm1(theta * std::log1p(-delta * b));
    // eta w = (pa - p1) + pb qa with p = (1 - delta u)^theta; all terms >= 0.
    const double log_gap = delta == 1.0 ? theta * std::log1p(-a)
                                        : theta * std::log1p(-delta) +
                                              std::log(std::expm1(theta * std::log1p(delta * (1.0 - a) / (1.0 - delta))));
    t.log_w = log_sum_exp(log_gap, theta * std::log1p(-delta * b) + std::log(t.qa)) - t.log_eta;
    return t;
}

double bb8_cdf(double theta, double delta, double a, double b) {
    const auto t = bb8_terms(theta, delta, a, b);
    return -std::expm1(t.log_w / theta) / delta;
}

double bb8_log_pdf(double theta, double delta, double a, double b) {
    const auto t = bb8_terms(theta, delta, a, b);
    return std::log(delta) - t.log_eta + (theta - 1.0) * (std::log1p(-delta * a) + std::log1p(-delta * b)) +
           (1.0 / theta - 2.0) * t.log_w + std::log(theta - 1.0 + std::exp(t.log_w));
}

double bb8_h(double theta, double delta, double a, double b) {
    const auto t = bb8_terms(theta, delta, a, b);
    return std::exp((1.0 / theta - 1.0) * t.log_w + (theta - 1.0) * std::log1p(-delta * b) - t.log_eta) *
           t.qa;
}

// Kendall's tau of an Archimedean copula: 1 + 4 * int_0^1 phi(t)/phi'(t) dt.
template <class Ratio>
double archimedean_tau(Ratio&& ratio) {
    double err = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(ratio, 0.0, 1.0, 20, 1e-12, &err);
    return 1.0 + 4.0 * integral;
}

double bb7_tau(double theta, double delta) {
    // phi(t) = (1 - (1-t)^theta)^-delta - 1; phi/phi' = -w (1 - w^delta) / (delta theta (1-t)^(theta-1)),
    // w = 1 - (1-t)^theta.
    return archimedean_tau([&](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 0.0;
        const double log_one_minus = std::log1p(-t);
        const double p = std::exp(theta * log_one_minus);
        const double w = -std::expm1(theta * log_one_minus);
        const double one_minus_w_delta = -std::expm1(delta * std::log1p(-p));
        return -w * one_minus_w_delta / (delta * theta * std::exp((theta - 1.0) * log_one_minus));
    });
}

double bb8_tau(double theta, double delta) {
    if (theta == 1.0) return 0.0;
    // phi(t) = -log((1 - (1 - delta t)^theta) / eta);
    // phi/phi' = log(q/eta) q / (theta delta (1 - delta t)^(theta-1)), q = 1 - (1 - delta t)^theta.
    const double log_eta = std::log(-std::expm1(theta * std::log1p(-delta)));
    return archimedean_tau([&](double t) {
        if (t <= 0.0) return 0.0;
        const double l = std::log1p(-delta * t);
        if (!std::isfinite(l)) return 0.0;
        const double q = -std::expm1(theta * l);
        return (std::log(q) - log_eta) * q / (theta * delta * std::exp((theta - 1.0) * l));
    });
}

}  // namespace

double base_cdf(Family f, const double* p, double a, double b) {
    switch (f) {
        case Family::Independence: return a * b;
        case Family::Gaussian:
            return bivariate_normal_cdf(norm_quantile(a), norm_quantile(b), p[0]);
        case Family::StudentT: return student_cdf(p[0], p[1], a, b);
        case Family::Frank: return frank_cdf(p[0], a, b);
        case Family::Clayton: return clayton_cdf(p[0], a, b);
        case Family::Gumbel: return gumbel_cdf(p[0], a, b);
        case Family::Joe: return joe_cdf(p[0], a, b);
        case Family::BB1: return bb1_cdf(p[0], p[1], a, b);
        case Family::BB7: return bb7_cdf(p[0], p[1], a, b);
        case Family::BB8: return bb8_cdf(p[0], p[1], a, b);
    }
    return 0.0;
}

double base_log_pdf(Family f, const double* p, double a, double b) {
    switch (f) {
        case Family::Independence: return 0.0;
        case Family::Gaussian: return gauss_log_pdf(p[0], a, b);
        case Family::StudentT: return student_log_pdf(p[0], p[1], a, b);
        case Family::Frank: return frank_log_pdf(p[0], a, b);
        case Family::Clayton: return clayton_log_pdf(p[0], a, b);
        case Family::Gumbel: return gumbel_log_pdf(p[0], a, b);
        case Family::Joe: return joe_log_pdf(p[0], a, b);
        case Family::BB1: return bb1_log_pdf(p[0], p[1], a, b);
        case Family::BB7: return bb7_log_pdf(p[0], p[1], a, b);
        case Family::BB8: return bb8_log_pdf(p[0], p[1], a, b);
    }
    return 0.0;
}

double base_h(Family f, const double* p, double a, double b) {
    switch (f) {
        case Family::Independence: return a;
        case Family::Gaussian: return gauss_h(p[0], a, b);
        case Family::StudentT: return student_h(p[0], p[1], a, b);
        case Family::Frank: return frank_h(p[0], a, b);
        case Family::Clayton: return clayton_h(p[0], a, b);
        case Family::Gumbel: return gumbel_h(p[0], a, b);
        case Family::Joe: return joe_h(p[0], a, b);
        case Family::BB1: return bb1_h(p[0], p[1], a, b);
        case Family::BB7: return bb7_h(p[0], p[1], a, b);
        case Family::BB8: return bb8_h(p[0], p[1], a, b);
    }
    return a;
}

double base_hinv(Family f, const double* p, double w, double b) {
    switch (f) {
        case Family::Independence: return w;
        case Family::Gaussian: return gauss_hinv(p[0], w, b);
        case Family::StudentT: return student_hinv(p[0], p[1], w, b);
        case Family::Frank: return frank_hinv(p[0], w, b);
        case Family::Clayton: return clayton_hinv(p[0], w, b);
        default: break;
    }
    return invert_increasing([&](double a) { return base_h(f, p, a, b); }, w);
}

double base_tau(Family f, const double* p) {
    switch (f) {
        case Family::Independence: return 0.0;
        case Family::Gaussian:
        case Family::StudentT: return 2.0 / std::numbers::pi * std::asin(p[0]);
        case Family::Frank: return frank_tau(p[0]);
        case Family::Clayton: return p[0] / (p[0] + 2.0);
        case Family::Gumbel: return 1.0 - 1.0 / p[0];
        case Family::Joe: return joe_tau(p[0]);
        case Family::BB1: return 1.0 - 2.0 / (p[1] * (p[0] + 2.0));
        case Family::BB7: return bb7_tau(p[0], p[1]);
        case Family::BB8: return bb8_tau(p[0], p[1]);
    }
    return 0.0;
}

double base_lambda_lower(Family f, const double* p) {
    switch (f) {
        case Family::StudentT: {
            const double rho = p[0];
            const double nu = p[1];
            return 2.0 * t_cdf(-std::sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho)), nu + 1.0);
        }
        case Family::Clayton: return std::exp2(-1.0 / p[0]);
        case Family::BB1: return std::exp2(-1.0 / (p[0] * p[1]));
        case Family::BB7: return std::exp2(-1.0 / p[1]);
        default: return 0.0;
    }
}

double base_lambda_upper(Family f, const double* p) {
    switch (f) {
        case Family::StudentT: return base_lambda_lower(f, p);
        case Family::Gumbel:
        case Family::Joe: return 2.0 - std::exp2(1.0 / p[0]);
        case Family::BB1: return 2.0 - std::exp2(1.0 / p[1]);
        case Family::BB7: return 2.0 - std::exp2(1.0 / p[0]);
        case Family::BB8: return p[1] == 1.0 ? 2.0 - std::exp2(1.0 / p[0]) : 0.0;
        default: return 0.0;
    }
}

}  // namespace esgvine::detail
