#pragma once

// Unrotated family kernels. All families in the catalog are exchangeable,
// so one conditional distribution covers both h-functions:
//   base_h(f, p, a, b) = P(U1 <= a | U2 = b) = dC(a, b)/db.

#include "esgvine/copula.hpp"

namespace esgvine::detail {

double base_cdf(Family f, const double* p, double a, double b);
double base_log_pdf(Family f, const double* p, double a, double b);
double base_h(Family f, const double* p, double a, double b);
double base_hinv(Family f, const double* p, double w, double b);
double base_tau(Family f, const double* p);
double base_lambda_lower(Family f, const double* p);
double base_lambda_upper(Family f, const double* p);

// Family and validated parameters only; tau and tail coefficients left unset.
// For likelihood work inside optimizers.
PairCopula bare_pair_copula(FamilyId id, std::vector<double> params);

}  // namespace esgvine::detail
