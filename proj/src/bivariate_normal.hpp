#pragma once

namespace esgvine::detail {

double norm_cdf(double x);
double norm_quantile(double p);

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation rho.
double bivariate_normal_cdf(double x, double y, double rho);

}  // namespace esgvine::detail
