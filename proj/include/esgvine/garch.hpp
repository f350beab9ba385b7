#pragma once

#include <cstdint>
#include <vector>

namespace esgvine {

struct GarchParams {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double beta1 = 0.0;
    double nu = 0.0;
};

/// GARCH(1,1) with standardized Student-t innovations fitted to a demeaned
/// return series. sigma[t]^2 = gamma0 + gamma1 eps[t-1]^2 + beta1 sigma[t-1]^2,
/// sigma[0]^2 = sample variance of eps.
struct MarginalFit {
    double mean = 0.0;
    GarchParams params;
    std::vector<double> sigma;
    std::vector<double> u;
    double loglik = 0.0;
    bool converged = false;
};

struct GarchOptions {
    std::size_t min_length = 100;
    int max_iterations = 4000;
};

/// Throws DataError for short, non-finite or zero-variance input and
/// NumericalError for non-convergence or a non-stationary optimum.
MarginalFit fit_garch_t(const std::vector<double>& series, const GarchOptions& options = {});

/// Conditional volatility path for given parameters (eps already demeaned).
std::vector<double> garch_sigma(const GarchParams& p, const std::vector<double>& eps);

/// Student-t GARCH log-likelihood of a series at fixed parameters, using
/// the same demeaning and initialization as fit_garch_t.
double garch_loglik(const GarchParams& p, const std::vector<double>& series);

/// Unit-variance Student-t CDF / quantile (nu > 2).
double standardized_t_cdf(double z, double nu);
double standardized_t_quantile(double p, double nu);

/// u[t] = F((x[t] - mean) / sigma[t]; nu) clamped to [1e-10, 1 - 1e-10].
std::vector<double> pit(const MarginalFit& fit, const std::vector<double>& series);

/// Zero-mean GARCH(1,1)-t path of length n after a burn-in of 500 steps.
std::vector<double> simulate_garch_t(const GarchParams& p, std::size_t n, std::uint64_t seed);

}  // namespace esgvine
