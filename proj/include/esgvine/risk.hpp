#pragma once

#include "esgvine/panel.hpp"
#include "esgvine/vine.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace esgvine {

/// One of an asset's five template edges: the conditioned partner, the
/// model-implied tau and lower tail coefficient, and the empirical tau of
/// the edge's pseudo-data (NaN when unavailable).
struct DependenceTerm {
    std::string partner;
    std::size_t tree = 0;  // 1-based
    double tau = 0.0;
    double lambda = 0.0;
    double tau_empirical = 0.0;
};

/// The asset's T1-T5 edges in canonical order: own index; market given own
/// index; then the three other indices along the class's conditioning chain.
/// Throws DataError when the asset is not in the model.
std::array<DependenceTerm, 5> edge_dependence(const VineModel& model, const std::string& asset);

struct RiskShares {
    double esg = 0.0;
    double market = 0.0;
    double idio = 0.0;
    bool degenerate = false;  // all five inputs are zero
    bool boundary = false;    // some share is exactly 0 or 1
};

/// Shares from |tau|: esg = |t1|/sum, market = |t2|/sum, idio = 1 - esg - market.
RiskShares risk_shares_tau(const std::array<double, 5>& taus);
/// Same ratios with lower tail coefficients.
RiskShares risk_shares_lambda(const std::array<double, 5>& lambdas);

struct AssetRiskRow {
    std::string asset;
    EsgClass asset_class = EsgClass::A;
    std::string period;
    RiskShares tau;
    RiskShares lambda;
    RiskShares tau_empirical;
};

/// Rows for every asset of the model, in node order.
std::vector<AssetRiskRow> asset_risk_rows(const VineModel& model, const std::string& period);

enum class LambdaPolicy { IncludeAll, DropZerosAndOnes };
std::string policy_name(LambdaPolicy p);

enum class Measure { Esg, Market, Idio };
enum class Variant { Tau, Lambda, TauEmpirical };
std::string measure_name(Measure m);
std::string variant_name(Variant v);

struct AggregateCell {
    std::string period;
    EsgClass asset_class = EsgClass::A;
    Variant variant = Variant::Tau;
    Measure measure = Measure::Esg;
    LambdaPolicy policy = LambdaPolicy::IncludeAll;
    std::size_t count = 0;     // values that entered the statistics
    std::size_t excluded = 0;  // degenerate rows, plus 0/1 shares under DropZerosAndOnes
    std::optional<double> mean;
    std::optional<double> sd;  // sample standard deviation (n - 1), needs count >= 2
};

/// Mean and sample standard deviation per (period, class, variant, measure).
/// Periods appear in first-seen order; the policy applies to the lambda variant.
std::vector<AggregateCell> aggregate(const std::vector<AssetRiskRow>& rows, LambdaPolicy policy);

}  // namespace esgvine
