#include "nelder_mead.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>

namespace esgvine::detail {

namespace {

constexpr double kPenalty = 1e300;

struct Objective {
    const std::function<double(const std::vector<double>&)>* f;
    std::vector<double> scratch;
};

double trampoline(const gsl_vector* v, void* params) {
    auto* obj = static_cast<Objective*>(params);
    for (std::size_t i = 0; i < obj->scratch.size(); ++i) obj->scratch[i] = gsl_vector_get(v, i);
    const double value = (*obj->f)(obj->scratch);
    return std::isfinite(value) ? value : kPenalty;
}

}  // namespace

MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> start, std::vector<double> step, double size_tol,
                           int max_iter) {
    [[maybe_unused]] static const auto previous_handler = gsl_set_error_handler_off();
    const std::size_t n = start.size();
    Objective obj{&f, std::vector<double>(n)};
    gsl_multimin_function fn{&trampoline, n, &obj};

    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(n), &gsl_vector_free);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x.get(), i, start[i]);
        gsl_vector_set(ss.get(), i, step[i]);
    }
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());

    MinimizeResult result;
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && result.iterations < max_iter) {
        ++result.iterations;
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tol);
    }
    result.converged = status == GSL_SUCCESS;
    result.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.x[i] = gsl_vector_get(s->x, i);
    result.value = s->fval;
    return result;
}

}  // namespace esgvine::detail
