#include "esgvine/copula.hpp"

#include "copula_base.hpp"
#include "esgvine/error.hpp"
#include "esgvine/random.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace esgvine {

namespace {

constexpr double kHClamp = 1e-10;

struct NameRow {
    Family family;
    const char* key;
    const char* display;
};

constexpr std::array<NameRow, 10> kNames{{
    {Family::Independence, "indep", "Independence"},
    {Family::Gaussian, "gaussian", "Gaussian"},
    {Family::StudentT, "student", "Studentst"},
    {Family::Frank, "frank", "Frank"},
    {Family::Clayton, "clayton", "Clayton"},
    {Family::Gumbel, "gumbel", "Gumbel"},
    {Family::Joe, "joe", "Joe"},
    {Family::BB1, "bb1", "BB1"},
    {Family::BB7, "bb7", "BB7"},
    {Family::BB8, "bb8", "BB8"},
}};

const NameRow& name_row(Family f) { return kNames[static_cast<std::size_t>(f)]; }

bool flips_first(int rotation) { return rotation == 180 || rotation == 270; }
bool flips_second(int rotation) { return rotation == 90 || rotation == 180; }

double clamp_h(double h) { return std::clamp(h, kHClamp, 1.0 - kHClamp); }

std::string param_text(const std::vector<double>& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

template <class F>
double solve_increasing(F&& f, double target, double lo, double hi) {
    double f_lo = f(lo) - target;
    double f_hi = f(hi) - target;
    if (f_lo > 0.0 || f_hi < 0.0) throw ParameterError("tau outside the attainable range");
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    std::uintmax_t iters = 300;
    const auto r = boost::math::tools::toms748_solve([&](double x) { return f(x) - target; }, lo, hi, f_lo,
                                                      f_hi, boost::math::tools::eps_tolerance<double>(52),
                                                      iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace

bool is_rotatable(Family f) {
    switch (f) {
        case Family::Clayton:
        case Family::Gumbel:
        case Family::Joe:
        case Family::BB1:
        case Family::BB7:
        case Family::BB8: return true;
        default: return false;
    }
}

std::size_t family_param_count(Family f) {
    switch (f) {
        case Family::Independence: return 0;
        case Family::StudentT:
        case Family::BB1:
        case Family::BB7:
        case Family::BB8: return 2;
        default: return 1;
    }
}

std::string family_key(FamilyId id) {
    return std::string(name_row(id.base).key) + "@" + std::to_string(id.rotation);
}

FamilyId parse_family_key(const std::string& key) {
    const auto at = key.find('@');
    const std::string base = key.substr(0, at);
    int rotation = 0;
    if (at != std::string::npos) {
        const std::string rot = key.substr(at + 1);
        if (rot == "0") rotation = 0;
        else if (rot == "90") rotation = 90;
        else if (rot == "180") rotation = 180;
        else if (rot == "270") rotation = 270;
        else throw DataError("unknown rotation in family id '" + key + "'");
    }
    for (const auto& row : kNames) {
        if (base == row.key) {
            FamilyId id{row.family, rotation};
            if (rotation != 0 && !is_rotatable(row.family)) {
                throw DataError("family '" + base + "' admits no rotation: '" + key + "'");
            }
            return id;
        }
    }
    throw DataError("unknown copula family '" + key + "'");
}

std::string family_display(FamilyId id) {
    std::string s = name_row(id.base).display;
    if (id.rotation != 0) s += " " + std::to_string(id.rotation) + "°";
    return s;
}

ParamBox estimation_box(Family f) {
    switch (f) {
        case Family::Independence: return {};
        case Family::Gaussian: return {{-0.9999, 0.0}, {0.9999, 0.0}};
        case Family::StudentT: return {{-0.9999, 2.0001}, {0.9999, 30.0}};
        case Family::Frank: return {{-35.0, 0.0}, {35.0, 0.0}};
        case Family::Clayton: return {{1e-4, 0.0}, {28.0, 0.0}};
        case Family::Gumbel: return {{1.0, 0.0}, {17.0, 0.0}};
        case Family::Joe: return {{1.0, 0.0}, {30.0, 0.0}};
        case Family::BB1: return {{1e-4, 1.0}, {7.0, 7.0}};
        case Family::BB7: return {{1.0, 1e-4}, {7.0, 7.0}};
        case Family::BB8: return {{1.0, 1e-4}, {7.0, 1.0}};
    }
    return {};
}

void check_params(FamilyId id, const std::vector<double>& p) {
    const std::string name = family_key(id);
    if (id.rotation != 0 && id.rotation != 90 && id.rotation != 180 && id.rotation != 270) {
        throw ParameterError("invalid rotation for " + name);
    }
    if (id.rotation != 0 && !is_rotatable(id.base)) throw ParameterError(name + " admits no rotation");
    if (p.size() != family_param_count(id.base)) {
        throw ParameterError(name + " expects " + std::to_string(family_param_count(id.base)) +
                             " parameters, got " + std::to_string(p.size()));
    }
    for (double v : p) {
        if (!std::isfinite(v)) throw ParameterError(name + " has a non-finite parameter");
    }
    bool ok = true;
    switch (id.base) {
        case Family::Independence: break;
        case Family::Gaussian: ok = std::abs(p[0]) < 1.0; break;
        case Family::StudentT: ok = std::abs(p[0]) < 1.0 && p[1] > 0.0; break;
        case Family::Frank: ok = p[0] != 0.0 && std::abs(p[0]) <= 700.0; break;
        case Family::Clayton: ok = p[0] > 0.0; break;
        case Family::Gumbel:
        case Family::Joe: ok = p[0] >= 1.0; break;
        case Family::BB1: ok = p[0] > 0.0 && p[1] >= 1.0; break;
        case Family::BB7: ok = p[0] >= 1.0 && p[1] > 0.0; break;
        case Family::BB8: ok = p[0] >= 1.0 && p[1] > 0.0 && p[1] <= 1.0; break;
    }
    if (!ok) throw ParameterError("parameters " + param_text(p) + " outside the domain of " + name);
}

double tau_of(FamilyId id, const std::vector<double>& params) {
    const double t = detail::base_tau(id.base, params.data());
    return (id.rotation == 90 || id.rotation == 270) ? -t : t;
}

double lambda_lower_of(FamilyId id, const std::vector<double>& params) {
    switch (id.rotation) {
        case 0: return detail::base_lambda_lower(id.base, params.data());
        case 180: return detail::base_lambda_upper(id.base, params.data());
        default: return 0.0;
    }
}

double lambda_upper_of(FamilyId id, const std::vector<double>& params) {
    switch (id.rotation) {
        case 0: return detail::base_lambda_upper(id.base, params.data());
        case 180: return detail::base_lambda_lower(id.base, params.data());
        default: return 0.0;
    }
}

PairCopula make_pair_copula(FamilyId id, std::vector<double> params) {
    check_params(id, params);
    PairCopula pc;
    pc.family = id;
    pc.params = std::move(params);
    pc.n_params = family_param_count(id.base);
    pc.tau = tau_of(pc.family, pc.params);
    pc.lambda_lower = lambda_lower_of(pc.family, pc.params);
    pc.lambda_upper = lambda_upper_of(pc.family, pc.params);
    return pc;
}

PairCopula detail::bare_pair_copula(FamilyId id, std::vector<double> params) {
    check_params(id, params);
    PairCopula pc;
    pc.family = id;
    pc.params = std::move(params);
    pc.n_params = family_param_count(id.base);
    return pc;
}

PairCopula independence_copula() { return make_pair_copula({Family::Independence, 0}, {}); }

double cdf(const PairCopula& pc, double u1, double u2) {
    const double* p = pc.params.data();
    const Family f = pc.family.base;
    const bool f1 = flips_first(pc.family.rotation);
    const bool f2 = flips_second(pc.family.rotation);
    double c = 0.0;
    if (!f1 && !f2) c = detail::base_cdf(f, p, u1, u2);
    else if (!f1 && f2) c = u1 - detail::base_cdf(f, p, u1, 1.0 - u2);
    else if (f1 && !f2) c = u2 - detail::base_cdf(f, p, 1.0 - u1, u2);
    else c = u1 + u2 - 1.0 + detail::base_cdf(f, p, 1.0 - u1, 1.0 - u2);
    return std::clamp(c, 0.0, std::min(u1, u2));
}

double log_density(const PairCopula& pc, double u1, double u2) {
    const double a = flips_first(pc.family.rotation) ? 1.0 - u1 : u1;
    const double b = flips_second(pc.family.rotation) ? 1.0 - u2 : u2;
    return detail::base_log_pdf(pc.family.base, pc.params.data(), a, b);
}

double density(const PairCopula& pc, double u1, double u2) { return std::exp(log_density(pc, u1, u2)); }

double hfunc2(const PairCopula& pc, double u1, double u2) {
    const bool f1 = flips_first(pc.family.rotation);
    const double a = f1 ? 1.0 - u1 : u1;
    const double b = flips_second(pc.family.rotation) ? 1.0 - u2 : u2;
    const double h = detail::base_h(pc.family.base, pc.params.data(), a, b);
    return clamp_h(f1 ? 1.0 - h : h);
}

double hfunc1(const PairCopula& pc, double u1, double u2) {
    const bool f2 = flips_second(pc.family.rotation);
    const double a = flips_first(pc.family.rotation) ? 1.0 - u1 : u1;
    const double b = f2 ? 1.0 - u2 : u2;
    const double h = detail::base_h(pc.family.base, pc.params.data(), b, a);
    return clamp_h(f2 ? 1.0 - h : h);
}

double hinv2(const PairCopula& pc, double w, double u2) {
    const bool f1 = flips_first(pc.family.rotation);
    const double b = flips_second(pc.family.rotation) ? 1.0 - u2 : u2;
    const double a = detail::base_hinv(pc.family.base, pc.params.data(), f1 ? 1.0 - w : w, b);
    return clamp_h(f1 ? 1.0 - a : a);
}

double hinv1(const PairCopula& pc, double w, double u1) {
    const bool f2 = flips_second(pc.family.rotation);
    const double a = flips_first(pc.family.rotation) ? 1.0 - u1 : u1;
    const double b = detail::base_hinv(pc.family.base, pc.params.data(), f2 ? 1.0 - w : w, a);
    return clamp_h(f2 ? 1.0 - b : b);
}

double hfunc(const PairCopula& pc, double u_target, double u_cond, CondOn cond) {
    return cond == CondOn::First ? hfunc1(pc, u_cond, u_target) : hfunc2(pc, u_target, u_cond);
}

std::array<double, 2> tau_range(FamilyId id) {
    const auto box = estimation_box(id.base);
    double lo = 0.0;
    double hi = 0.0;
    switch (id.base) {
        case Family::Independence: break;
        case Family::Gaussian:
        case Family::StudentT:
        case Family::Frank:
        case Family::Clayton:
        case Family::Gumbel:
        case Family::Joe: {
            std::vector<double> p_lo(family_param_count(id.base), box.lower[1]);
            std::vector<double> p_hi(family_param_count(id.base), box.upper[1]);
            p_lo[0] = box.lower[0];
            p_hi[0] = box.upper[0];
            lo = detail::base_tau(id.base, p_lo.data());
            hi = detail::base_tau(id.base, p_hi.data());
            break;
        }
        case Family::BB1:
        case Family::BB7:
        case Family::BB8: {
            const double p_lo[2] = {box.lower[0], box.lower[1]};
            const double p_hi[2] = {box.upper[0], box.upper[1]};
            lo = detail::base_tau(id.base, p_lo);
            hi = detail::base_tau(id.base, p_hi);
            break;
        }
    }
    if (id.rotation == 90 || id.rotation == 270) return {-hi, -lo};
    return {lo, hi};
}

std::vector<double> params_from_tau(FamilyId id, double tau) {
    if (!std::isfinite(tau) || std::abs(tau) > 1.0) throw ParameterError("tau must lie in [-1,1]");
    if (id.rotation != 0 && !is_rotatable(id.base)) {
        throw ParameterError(family_key(id) + " admits no rotation");
    }
    const double t = (id.rotation == 90 || id.rotation == 270) ? -tau : tau;
    const auto range = tau_range({id.base, 0});
    const auto out_of_range = [&]() {
        return ParameterError("range: tau " + std::to_string(tau) + " is not attainable by " + family_key(id));
    };
    switch (id.base) {
        case Family::Independence:
            if (tau != 0.0) throw out_of_range();
            return {};
        case Family::Gaussian:
        case Family::StudentT: {
            const double rho = std::sin(std::numbers::pi / 2.0 * t);
            if (std::abs(rho) > estimation_box(id.base).upper[0]) throw out_of_range();
            return {rho};
        }
        case Family::Frank: {
            if (t == 0.0 || t < range[0] || t > range[1]) throw out_of_range();
            const double mag = solve_increasing([](double th) { return detail::base_tau(Family::Frank, &th); },
                                                std::abs(t), 1e-12, 35.0);
            return {t < 0.0 ? -mag : mag};
        }
        case Family::Clayton: {
            if (t <= 0.0 || t < range[0] || t > range[1]) throw out_of_range();
            return {2.0 * t / (1.0 - t)};
        }
        case Family::Gumbel: {
            if (t < 0.0 || t > range[1]) throw out_of_range();
            return {1.0 / (1.0 - t)};
        }
        case Family::Joe: {
            if (t < 0.0 || t > range[1]) throw out_of_range();
            if (t == 0.0) return {1.0};
            return {solve_increasing([](double th) { return detail::base_tau(Family::Joe, &th); }, t, 1.0, 30.0)};
        }
        default: break;
    }
    throw ParameterError(family_key(id) + " has two parameters; tau inversion is not available");
}

double loglik(const PairCopula& pc, const std::vector<double>& u1, const std::vector<double>& u2) {
    if (pc.family.base == Family::Independence) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < u1.size(); ++i) sum += log_density(pc, u1[i], u2[i]);
    return std::isfinite(sum) ? sum : -std::numeric_limits<double>::infinity();
}

std::vector<std::array<double, 2>> sample_pair(const PairCopula& pc, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::array<double, 2>> out(n);
    for (auto& row : out) {
        row[0] = rng.uniform();
        const double w = rng.uniform();
        row[1] = hinv1(pc, w, row[0]);
    }
    return out;
}

}  // namespace esgvine
