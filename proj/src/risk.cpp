#include "esgvine/risk.hpp"

#include "esgvine/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace esgvine {

namespace {

RiskShares shares_from(const std::array<double, 5>& values) {
    RiskShares r;
    double total = 0.0;
    for (double v : values) total += std::abs(v);
    if (!(total > 0.0)) {
        r.degenerate = true;
        return r;
    }
    r.esg = std::abs(values[0]) / total;
    r.market = std::abs(values[1]) / total;
    r.idio = std::max(0.0, 1.0 - r.esg - r.market);
    for (double s : {r.esg, r.market, r.idio}) {
        if (s == 0.0 || s == 1.0) r.boundary = true;
    }
    return r;
}

double measure_value(const RiskShares& s, Measure m) {
    switch (m) {
        case Measure::Esg: return s.esg;
        case Measure::Market: return s.market;
        case Measure::Idio: return s.idio;
    }
    return 0.0;
}

const RiskShares& variant_shares(const AssetRiskRow& row, Variant v) {
    switch (v) {
        case Variant::Tau: return row.tau;
        case Variant::Lambda: return row.lambda;
        case Variant::TauEmpirical: return row.tau_empirical;
    }
    return row.tau;
}

}  // namespace

std::array<DependenceTerm, 5> edge_dependence(const VineModel& model, const std::string& asset) {
    const VineStructure& s = model.structure;
    const auto it = std::find(s.nodes.begin() + static_cast<std::ptrdiff_t>(kIndexNodeIds.size()), s.nodes.end(), asset);
    if (it == s.nodes.end()) throw DataError("asset '" + asset + "' is not part of the model");
    const auto node = static_cast<std::size_t>(it - s.nodes.begin());
    if (s.trees.size() < 5) throw DataError("model has fewer than five trees");

    std::array<DependenceTerm, 5> out;
    for (std::size_t m = 0; m < 5; ++m) {
        std::size_t found = s.trees[m].size();
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            const Edge& edge = s.trees[m][e];
            if (edge.first == node || edge.second == node) {
                if (found != s.trees[m].size()) throw DataError("asset '" + asset + "' has two edges in one tree");
                found = e;
            }
        }
        if (found == s.trees[m].size()) {
            throw DataError("asset '" + asset + "' has no edge in tree " + std::to_string(m + 1));
        }
        const Edge& edge = s.trees[m][found];
        const PairCopula& pc = model.copulas[m][found];
        DependenceTerm term;
        term.partner = s.nodes[edge.first == node ? edge.second : edge.first];
        term.tree = m + 1;
        term.tau = pc.tau;
        term.lambda = pc.lambda_lower;
        term.tau_empirical = m < model.empirical_taus.size() && found < model.empirical_taus[m].size()
                                 ? model.empirical_taus[m][found]
                                 : std::nan("");
        out[m] = term;
    }
    return out;
}

RiskShares risk_shares_tau(const std::array<double, 5>& taus) { return shares_from(taus); }

RiskShares risk_shares_lambda(const std::array<double, 5>& lambdas) {
    for (double l : lambdas) {
        if (l < 0.0 || l > 1.0) throw DataError("lower tail coefficient outside [0,1]");
    }
    return shares_from(lambdas);
}

std::vector<AssetRiskRow> asset_risk_rows(const VineModel& model, const std::string& period) {
    const VineStructure& s = model.structure;
    std::vector<AssetRiskRow> rows;
    for (std::size_t j = 0; j < s.asset_classes.size(); ++j) {
        const std::string& asset = s.nodes[kIndexNodeIds.size() + j];
        const auto terms = edge_dependence(model, asset);
        std::array<double, 5> tau{}, lambda{}, tau_emp{};
        bool have_emp = true;
        for (std::size_t k = 0; k < 5; ++k) {
            tau[k] = terms[k].tau;
            lambda[k] = terms[k].lambda;
            tau_emp[k] = terms[k].tau_empirical;
            have_emp = have_emp && std::isfinite(tau_emp[k]);
        }
        AssetRiskRow row;
        row.asset = asset;
        row.asset_class = s.asset_classes[j];
        row.period = period;
        row.tau = risk_shares_tau(tau);
        row.lambda = risk_shares_lambda(lambda);
        if (have_emp) row.tau_empirical = risk_shares_tau(tau_emp);
        else row.tau_empirical.degenerate = true;
        rows.push_back(row);
    }
    return rows;
}

std::string policy_name(LambdaPolicy p) {
    return p == LambdaPolicy::IncludeAll ? "include_all" : "drop_zeros_and_ones";
}

std::string measure_name(Measure m) {
    switch (m) {
        case Measure::Esg: return "esg";
        case Measure::Market: return "market";
        case Measure::Idio: return "idio";
    }
    return "";
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Tau: return "tau";
        case Variant::Lambda: return "lambda";
        case Variant::TauEmpirical: return "tau_emp";
    }
    return "";
}

std::vector<AggregateCell> aggregate(const std::vector<AssetRiskRow>& rows, LambdaPolicy policy) {
    std::vector<std::string> periods;
    for (const auto& r : rows) {
        if (std::find(periods.begin(), periods.end(), r.period) == periods.end()) periods.push_back(r.period);
    }
    std::vector<AggregateCell> cells;
    for (const auto& period : periods) {
        for (Variant v : {Variant::Tau, Variant::Lambda, Variant::TauEmpirical}) {
            for (Measure m : {Measure::Esg, Measure::Market, Measure::Idio}) {
                for (EsgClass k : kEsgClasses) {
                    AggregateCell cell;
                    cell.period = period;
                    cell.asset_class = k;
                    cell.variant = v;
                    cell.measure = m;
                    cell.policy = policy;
                    std::vector<double> values;
                    for (const auto& r : rows) {
                        if (r.period != period || r.asset_class != k) continue;
                        const RiskShares& s = variant_shares(r, v);
                        const double x = measure_value(s, m);
                        const bool drop_extreme = v == Variant::Lambda && policy == LambdaPolicy::DropZerosAndOnes &&
                                                  (x == 0.0 || x == 1.0);
                        if (s.degenerate || drop_extreme) {
                            ++cell.excluded;
                            continue;
                        }
                        values.push_back(x);
                    }
                    cell.count = values.size();
                    if (!values.empty()) {
                        const double n = static_cast<double>(values.size());
                        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
                        cell.mean = mean;
                        if (values.size() >= 2) {
                            double ss = 0.0;
                            for (double x : values) ss += (x - mean) * (x - mean);
                            cell.sd = std::sqrt(ss / (n - 1.0));
                        }
                    }
                    cells.push_back(cell);
                }
            }
        }
    }
    return cells;
}

}  // namespace esgvine
