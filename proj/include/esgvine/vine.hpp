#pragma once

#include "esgvine/copula.hpp"
#include "esgvine/structure.hpp"

#include <cstdint>
#include <utility>
#include <string>
#include <vector>

namespace esgvine {

inline constexpr double kDefaultPsi0 = 0.9;

struct VineModel {
    VineStructure structure;
    std::vector<std::vector<PairCopula>> copulas;      // [tree][edge]
    std::vector<std::vector<double>> empirical_taus;   // [tree][edge], tau-b of the edge's pseudo-data
    Catalog catalog = Catalog::Itau;
    std::size_t nobs = 0;
    double psi0 = kDefaultPsi0;

    double loglik = 0.0;
    std::size_t npars = 0;
    double aic = 0.0;
    double bic = 0.0;
    double mbic = 0.0;
};

/// Recomputes loglik (sum of edge log-likelihoods), npars, AIC, BIC and mBIC.
void refresh_statistics(VineModel& model);

/// -2 loglik + npars log(nobs) - 2 sum_m [q_m log(psi0^m) + (e_m - q_m) log(1 - psi0^m)],
/// e_m edges and q_m non-independence edges in tree m = 1..5.
double mbic(const VineModel& model, double psi0);

struct VineFitOptions {
    Catalog catalog = Catalog::Itau;
    double psi0 = kDefaultPsi0;
    std::size_t workers = 1;
};

/// Sequential tree-by-tree fit. u[node][obs] is aligned with structure.nodes.
/// Throws NumericalError naming the edge when a fit fails or pseudo-data
/// degenerate.
VineModel fit_vine(const std::vector<std::vector<double>>& u, const VineStructure& structure,
                   const VineFitOptions& options = {});

/// Builds a model from given edge copulas (statistics left at zero until
/// refresh_statistics or vine_loglik is used).
VineModel make_vine_model(const VineStructure& structure, std::vector<std::vector<PairCopula>> copulas,
                          Catalog catalog, std::size_t nobs);

/// Log-likelihood of u under the model with its copulas held fixed.
double vine_loglik(const VineModel& model, const std::vector<std::vector<double>>& u);

/// Inverse-Rosenblatt sampling in node order; result[node][obs].
std::vector<std::vector<double>> sample_vine(const VineModel& model, std::size_t n, std::uint64_t seed);

struct ComparisonEntry {
    std::string model;   // catalog label
    std::string period;  // period label
    const VineModel* fit = nullptr;
};

struct ComparisonRow {
    std::string model;
    std::string period;
    std::size_t nobs = 0;
    double loglik = 0.0;
    std::size_t npars = 0;
    double mbic = 0.0;
    std::size_t rank = 0;  // 1 = best
    bool winner = false;
    bool tied = false;     // mBIC equals the winner's
};

/// Ranks models fitted on the same data ascending by mBIC (stable on ties;
/// the first of tied models is flagged). Throws DataError when nobs differ.
std::vector<ComparisonRow> compare_models(const std::vector<ComparisonEntry>& entries);

/// Selected family counts in tree 1..5, families in catalog order
/// (unrotated first), zero counts omitted.
std::vector<std::pair<FamilyId, std::size_t>> family_census(const VineModel& model, std::size_t tree);

/// Pseudo-observations entering each edge: inputs[tree][edge] = {first | cond, second | cond}.
/// Used for diagnostics and the empirical conditional tau.
struct EdgeData {
    std::vector<double> first;
    std::vector<double> second;
};
std::vector<std::vector<EdgeData>> edge_pseudo_data(const VineModel& model, const std::vector<std::vector<double>>& u);

}  // namespace esgvine
