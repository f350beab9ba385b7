#include "bivariate_normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace esgvine::detail {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_quantile(double p) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, p);
}

namespace {

// Upper orthant probability P(X > h, Y > k), after Genz's BVND (Drezner-Wesolowsky
// for moderate correlation, the asymptotic expansion for |r| >= 0.925).
template <int N>
double bvnu(double h, double k, double r) {
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    constexpr double two_pi = 2.0 * std::numbers::pi;

    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (std::size_t i = 0; i < x.size(); ++i) {
            // Genz integrates over [-1,1]; the boost rule stores the positive half.
            for (double node : {-x[i], x[i]}) {
                const double sn = std::sin(asr * (node + 1.0) / 2.0);
                bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return bvn * asr / (2.0 * two_pi) + norm_cdf(-h) * norm_cdf(-k);
    }
    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-(bs / as + hk) / 2.0) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * norm_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double node : {-x[i], x[i]}) {
                double xs = (a * (node + 1.0)) * (a * (node + 1.0));
                double rs = std::sqrt(1.0 - xs);
                bvn += a * w[i] *
                       (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
                        std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / two_pi;
    }
    if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
    return -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
}

}  // namespace

double bivariate_normal_cdf(double x, double y, double rho) {
    if (std::isinf(x) || std::isinf(y)) {
        if (x == -INFINITY || y == -INFINITY) return 0.0;
        if (x == INFINITY) return norm_cdf(y);
        return norm_cdf(x);
    }
    const double p = std::abs(rho) < 0.3 ? bvnu<10>(-x, -y, rho) : bvnu<20>(-x, -y, rho);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace esgvine::detail
