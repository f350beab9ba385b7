#pragma once

#include <functional>
#include <vector>

namespace esgvine::detail {

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Minimizes f with GSL's nmsimplex2. Non-finite objective values are
/// treated as a large penalty so the simplex walks back into the domain.
MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> start, std::vector<double> step, double size_tol,
                           int max_iter);

}  // namespace esgvine::detail
