#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace esgvine {

/// Base copula families, listed in selection tie-break order.
enum class Family : int {
    Independence = 0,
    Gaussian,
    StudentT,
    Frank,
    Clayton,
    Gumbel,
    Joe,
    BB1,
    BB7,
    BB8,
};

inline constexpr std::array<Family, 10> kAllFamilies{
    Family::Independence, Family::Gaussian, Family::StudentT, Family::Frank, Family::Clayton,
    Family::Gumbel,       Family::Joe,      Family::BB1,      Family::BB7,   Family::BB8};

struct FamilyId {
    Family base = Family::Independence;
    int rotation = 0;  // degrees: 0, 90, 180 or 270

    friend bool operator==(const FamilyId&, const FamilyId&) = default;
};

/// True for the tail-asymmetric families that admit 90/180/270 rotations.
bool is_rotatable(Family f);
std::size_t family_param_count(Family f);

/// Serialized id, e.g. "clayton@180", "student@0".
std::string family_key(FamilyId id);
FamilyId parse_family_key(const std::string& key);  // throws DataError
/// Census label, e.g. "Studentst", "Gumbel 180°", "BB1 90°".
std::string family_display(FamilyId id);

/// Admissible parameter box for estimation. Evaluation also accepts
/// Student-t with 0 < nu <= 2 (tail formulas hold for any nu > 0).
struct ParamBox {
    std::array<double, 2> lower{};
    std::array<double, 2> upper{};
};
ParamBox estimation_box(Family f);

/// Throws ParameterError when params are outside the family's domain.
void check_params(FamilyId id, const std::vector<double>& params);

struct PairCopula {
    FamilyId family;
    std::vector<double> params;
    double tau = 0.0;
    double lambda_lower = 0.0;
    double lambda_upper = 0.0;
    double loglik = 0.0;
    std::size_t n_params = 0;
    bool boundary = false;  // an estimate sits on the edge of its search box
};

/// Validates params and fills tau, lambda_lower, lambda_upper and n_params.
PairCopula make_pair_copula(FamilyId id, std::vector<double> params);
PairCopula independence_copula();

double cdf(const PairCopula& pc, double u1, double u2);
double density(const PairCopula& pc, double u1, double u2);
double log_density(const PairCopula& pc, double u1, double u2);

/// h-functions: hfunc1 = dC/du1 = P(U2 <= u2 | U1 = u1),
/// hfunc2 = dC/du2 = P(U1 <= u1 | U2 = u2). Outputs lie in [1e-10, 1 - 1e-10].
double hfunc1(const PairCopula& pc, double u1, double u2);
double hfunc2(const PairCopula& pc, double u1, double u2);
/// Inverses in the conditioned argument: hinv1(w, u1) returns u2 with
/// hfunc1(u1, u2) = w; hinv2(w, u2) returns u1 with hfunc2(u1, u2) = w.
double hinv1(const PairCopula& pc, double w, double u1);
double hinv2(const PairCopula& pc, double w, double u2);

/// Which argument of the copula the conditioning value occupies.
enum class CondOn { First, Second };
/// h(u_target | u_cond) with the conditioning variable in position `cond`.
double hfunc(const PairCopula& pc, double u_target, double u_cond, CondOn cond);

double tau_of(FamilyId id, const std::vector<double>& params);
double lambda_lower_of(FamilyId id, const std::vector<double>& params);
double lambda_upper_of(FamilyId id, const std::vector<double>& params);
inline double tau_of(const PairCopula& pc) { return tau_of(pc.family, pc.params); }
inline double lambda_lower_of(const PairCopula& pc) { return lambda_lower_of(pc.family, pc.params); }

/// Inverse of tau_of for the one-parameter families and the correlation of
/// Gaussian / Student-t (for Student-t only rho is returned). Throws
/// ParameterError when tau lies outside the attainable range of the
/// (rotated) family; two-parameter BB families are not invertible.
std::vector<double> params_from_tau(FamilyId id, double tau);

/// Closed interval of Kendall's tau reachable by the family inside its
/// estimation box (rotation applied).
std::array<double, 2> tau_range(FamilyId id);

double loglik(const PairCopula& pc, const std::vector<double>& u1, const std::vector<double>& u2);

/// Inverse-h sampling: u1 ~ U(0,1), u2 = hinv1(w, u1).
std::vector<std::array<double, 2>> sample_pair(const PairCopula& pc, std::size_t n, std::uint64_t seed);

/// Kendall's tau-b, O(n log n). Throws DataError on length mismatch,
/// fewer than 2 points or a constant input.
double empirical_tau(const std::vector<double>& x, const std::vector<double>& y);

enum class Catalog { Itau, Parametric, Gaussian };
std::string catalog_name(Catalog c);
Catalog parse_catalog(const std::string& name);  // throws ConfigError

/// Candidates in tie-break order: unrotated bases first, then rotations.
/// For negative empirical tau, asymmetric families enter only as 90/270.
std::vector<FamilyId> catalog_candidates(Catalog c, bool negative_tau);

struct PairFitOptions {
    Catalog catalog = Catalog::Itau;
    std::size_t min_length = 30;
};

/// Fits one family with the catalog's estimation method (tau inversion
/// plus a profile MLE for Student-t nu in the itau catalog; MLE otherwise).
/// Returns std::nullopt when the family cannot be fitted to this sample.
std::optional<PairCopula> fit_family(const std::vector<double>& u1, const std::vector<double>& u2,
                                     FamilyId id, Catalog catalog, double empirical_tau_value);

/// AIC selection over the catalog. Throws NumericalError when no candidate
/// is feasible and DataError on malformed input.
PairCopula fit_pair(const std::vector<double>& u1, const std::vector<double>& u2,
                    const PairFitOptions& options = {});

}  // namespace esgvine
