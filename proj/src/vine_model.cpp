#include "esgvine/vine.hpp"

#include "esgvine/error.hpp"
#include "esgvine/parallel.hpp"
#include "esgvine/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace esgvine {

namespace {

// outputs[edge] = {first | rest, second | rest}
using LevelOutputs = std::vector<std::array<std::vector<double>, 2>>;

void check_data(const std::vector<std::vector<double>>& u, const VineStructure& s) {
    if (u.size() != s.n_nodes()) {
        throw DataError("u-data has " + std::to_string(u.size()) + " columns, structure has " +
                        std::to_string(s.n_nodes()) + " nodes");
    }
    const std::size_t n = u.empty() ? 0 : u.front().size();
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (u[j].size() != n) throw DataError("u-data column '" + s.nodes[j] + "' has a different length");
        for (double v : u[j]) {
            if (!(v > 0.0 && v < 1.0)) throw DataError("u-data column '" + s.nodes[j] + "' has a value outside (0,1)");
        }
    }
}

const std::vector<double>& edge_input(const std::vector<std::vector<double>>& u, const LevelOutputs& previous,
                                      const std::vector<std::vector<EdgeInputs>>& inputs, std::size_t m,
                                      std::size_t e, const Edge& edge, std::size_t side) {
    if (m == 0) return u[side == 0 ? edge.first : edge.second];
    const EdgeInput& in = inputs[m][e].side[side];
    return previous[in.parent][in.is_first_of_parent ? 0 : 1];
}

void compute_outputs(const PairCopula& pc, const std::vector<double>& x, const std::vector<double>& y,
                     std::array<std::vector<double>, 2>& out) {
    const std::size_t n = x.size();
    out[0].resize(n);
    out[1].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[0][i] = hfunc2(pc, x[i], y[i]);
        out[1][i] = hfunc1(pc, x[i], y[i]);
    }
}

// Walks the trees, calling visit(m, e, first_input, second_input) for each
// edge; visit returns the copula used to propagate pseudo-data.
template <class Visit>
void propagate(const VineStructure& s, const std::vector<std::vector<double>>& u, std::size_t workers,
               Visit&& visit) {
    const auto inputs = resolve_inputs(s);
    LevelOutputs previous;
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        const auto& tree = s.trees[m];
        const bool last = m + 1 == s.trees.size();
        LevelOutputs current(tree.size());
        parallel_for(tree.size(), workers, [&](std::size_t e) {
            const auto& x = edge_input(u, previous, inputs, m, e, tree[e], 0);
            const auto& y = edge_input(u, previous, inputs, m, e, tree[e], 1);
            const PairCopula& pc = visit(m, e, x, y);
            if (!last) compute_outputs(pc, x, y, current[e]);
        });
        previous = std::move(current);
    }
}

}  // namespace

void refresh_statistics(VineModel& model) {
    model.loglik = 0.0;
    model.npars = 0;
    for (const auto& tree : model.copulas) {
        for (const auto& pc : tree) {
            model.loglik += pc.loglik;
            model.npars += pc.n_params;
        }
    }
    const double k = static_cast<double>(model.npars);
    model.aic = -2.0 * model.loglik + 2.0 * k;
    model.bic = -2.0 * model.loglik + (model.nobs > 0 ? k * std::log(static_cast<double>(model.nobs)) : 0.0);
    model.mbic = mbic(model, model.psi0);
}

double mbic(const VineModel& model, double psi0) {
    if (!(psi0 > 0.0 && psi0 < 1.0)) throw ConfigError("psi0 must lie in (0,1)");
    double value = -2.0 * model.loglik;
    if (model.nobs > 0) value += static_cast<double>(model.npars) * std::log(static_cast<double>(model.nobs));
    for (std::size_t m = 0; m < model.copulas.size(); ++m) {
        const double prior = std::pow(psi0, static_cast<double>(m + 1));
        std::size_t q = 0;
        for (const auto& pc : model.copulas[m]) q += pc.family.base != Family::Independence ? 1 : 0;
        const double e = static_cast<double>(model.copulas[m].size());
        const double qd = static_cast<double>(q);
        if (q > 0) value -= 2.0 * qd * std::log(prior);
        if (e > qd) value -= 2.0 * (e - qd) * std::log1p(-prior);
    }
    return value;
}

VineModel make_vine_model(const VineStructure& structure, std::vector<std::vector<PairCopula>> copulas,
                          Catalog catalog, std::size_t nobs) {
    if (copulas.size() != structure.trees.size()) throw DataError("copula list does not match the tree count");
    for (std::size_t m = 0; m < copulas.size(); ++m) {
        if (copulas[m].size() != structure.trees[m].size()) {
            throw DataError("tree " + std::to_string(m + 1) + " has a copula count that does not match its edges");
        }
    }
    VineModel model;
    model.structure = structure;
    model.copulas = std::move(copulas);
    model.empirical_taus.resize(model.copulas.size());
    for (std::size_t m = 0; m < model.copulas.size(); ++m) {
        model.empirical_taus[m].assign(model.copulas[m].size(), std::nan(""));
    }
    model.catalog = catalog;
    model.nobs = nobs;
    return model;
}

VineModel fit_vine(const std::vector<std::vector<double>>& u, const VineStructure& structure,
                   const VineFitOptions& options) {
    check_data(u, structure);
    VineModel model;
    model.structure = structure;
    model.catalog = options.catalog;
    model.psi0 = options.psi0;
    model.nobs = u.empty() ? 0 : u.front().size();
    model.copulas.resize(structure.trees.size());
    model.empirical_taus.resize(structure.trees.size());
    for (std::size_t m = 0; m < structure.trees.size(); ++m) {
        model.copulas[m].resize(structure.trees[m].size());
        model.empirical_taus[m].resize(structure.trees[m].size());
    }
    PairFitOptions pair_options;
    pair_options.catalog = options.catalog;

    propagate(structure, u, options.workers,
              [&](std::size_t m, std::size_t e, const std::vector<double>& x,
                  const std::vector<double>& y) -> const PairCopula& {
                  const Edge& edge = structure.trees[m][e];
                  const std::string where = "edge " + edge_label(structure, edge) + " (tree " + std::to_string(m + 1) + ")";
                  try {
                      model.empirical_taus[m][e] = empirical_tau(x, y);
                      model.copulas[m][e] = fit_pair(x, y, pair_options);
                  } catch (const DataError& err) {
                      throw NumericalError(where + ": degenerate pseudo-data: " + err.what());
                  } catch (const NumericalError& err) {
                      throw NumericalError(where + ": " + err.what());
                  }
                  return model.copulas[m][e];
              });
    refresh_statistics(model);
    return model;
}

double vine_loglik(const VineModel& model, const std::vector<std::vector<double>>& u) {
    check_data(u, model.structure);
    std::vector<std::vector<double>> ll(model.copulas.size());
    for (std::size_t m = 0; m < ll.size(); ++m) ll[m].assign(model.copulas[m].size(), 0.0);
    propagate(model.structure, u, 1,
              [&](std::size_t m, std::size_t e, const std::vector<double>& x,
                  const std::vector<double>& y) -> const PairCopula& {
                  ll[m][e] = loglik(model.copulas[m][e], x, y);
                  return model.copulas[m][e];
              });
    double total = 0.0;
    for (const auto& tree : ll) {
        for (double v : tree) total += v;
    }
    return total;
}

std::vector<std::vector<EdgeData>> edge_pseudo_data(const VineModel& model,
                                                    const std::vector<std::vector<double>>& u) {
    check_data(u, model.structure);
    std::vector<std::vector<EdgeData>> out(model.copulas.size());
    for (std::size_t m = 0; m < out.size(); ++m) out[m].resize(model.copulas[m].size());
    propagate(model.structure, u, 1,
              [&](std::size_t m, std::size_t e, const std::vector<double>& x,
                  const std::vector<double>& y) -> const PairCopula& {
                  out[m][e] = {x, y};
                  return model.copulas[m][e];
              });
    return out;
}

std::vector<std::vector<double>> sample_vine(const VineModel& model, std::size_t n, std::uint64_t seed) {
    const VineStructure& s = model.structure;
    const auto inputs = resolve_inputs(s);
    const std::size_t d = s.n_nodes();

    // chain[v][k] = edge index in tree k pairing v with an earlier node; the
    // conditioning of the tree-k link must be the partners of links 0..k-1.
    std::vector<std::vector<std::size_t>> chain(d);
    std::vector<std::vector<std::size_t>> partners(d);
    std::size_t covered = 0;
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            const Edge& edge = s.trees[m][e];
            const std::size_t v = std::max(edge.first, edge.second);
            const std::size_t p = std::min(edge.first, edge.second);
            if (chain[v].size() != m) {
                throw DataError("structure cannot be sampled in node order at " + edge_label(s, edge));
            }
            std::set<std::size_t> expected(partners[v].begin(), partners[v].end());
            std::set<std::size_t> got(edge.conditioning.begin(), edge.conditioning.end());
            if (expected != got) {
                throw DataError("structure cannot be sampled in node order at " + edge_label(s, edge));
            }
            chain[v].push_back(e);
            partners[v].push_back(p);
            ++covered;
        }
    }
    if (covered != s.edge_count()) throw DataError("sampling chains do not cover every edge");

    std::vector<LevelOutputs> out(s.trees.size());
    for (std::size_t m = 0; m < s.trees.size(); ++m) out[m].resize(s.trees[m].size());
    std::vector<std::vector<double>> u(d, std::vector<double>(n));

    Rng rng(seed);
    std::vector<std::vector<double>> w(d, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < d; ++v) w[v][i] = rng.uniform();
    }

    auto input_of = [&](std::size_t m, std::size_t e, std::size_t side) -> const std::vector<double>& {
        const Edge& edge = s.trees[m][e];
        if (m == 0) return u[side == 0 ? edge.first : edge.second];
        const EdgeInput& in = inputs[m][e].side[side];
        return out[m - 1][in.parent][in.is_first_of_parent ? 0 : 1];
    };

    for (std::size_t v = 0; v < d; ++v) {
        const std::size_t depth = chain[v].size();
        std::vector<double> x = w[v];
        for (std::size_t k = depth; k-- > 0;) {
            const std::size_t e = chain[v][k];
            const Edge& edge = s.trees[k][e];
            const PairCopula& pc = model.copulas[k][e];
            const bool v_first = edge.first == v;
            const auto& cond = input_of(k, e, v_first ? 1 : 0);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = v_first ? hinv2(pc, x[i], cond[i]) : hinv1(pc, x[i], cond[i]);
            }
        }
        u[v] = std::move(x);
        for (std::size_t k = 0; k < depth; ++k) {
            if (k + 1 == s.trees.size()) break;
            const std::size_t e = chain[v][k];
            compute_outputs(model.copulas[k][e], input_of(k, e, 0), input_of(k, e, 1), out[k][e]);
        }
    }
    return u;
}

std::vector<ComparisonRow> compare_models(const std::vector<ComparisonEntry>& entries) {
    std::vector<ComparisonRow> rows;
    for (const auto& entry : entries) {
        if (!entry.fit) throw DataError("compare_models: missing model '" + entry.model + "'");
        if (!rows.empty() && entry.fit->nobs != rows.front().nobs) {
            throw DataError("compare_models: mismatched nobs (" + std::to_string(entry.fit->nobs) + " vs " +
                            std::to_string(rows.front().nobs) + ")");
        }
        ComparisonRow row;
        row.model = entry.model;
        row.period = entry.period;
        row.nobs = entry.fit->nobs;
        row.loglik = entry.fit->loglik;
        row.npars = entry.fit->npars;
        row.mbic = entry.fit->mbic;
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.mbic < b.mbic; });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].rank = i + 1;
        rows[i].winner = i == 0;
        rows[i].tied = i > 0 && rows[i].mbic == rows.front().mbic;
    }
    if (rows.size() > 1 && rows[1].tied) rows.front().tied = true;
    return rows;
}

std::vector<std::pair<FamilyId, std::size_t>> family_census(const VineModel& model, std::size_t tree) {
    if (tree < 1 || tree > model.copulas.size()) {
        throw DataError("family_census: tree " + std::to_string(tree) + " is outside 1.." +
                        std::to_string(model.copulas.size()));
    }
    std::vector<std::pair<FamilyId, std::size_t>> counts;
    for (const auto& pc : model.copulas[tree - 1]) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == pc.family; });
        if (it == counts.end()) counts.emplace_back(pc.family, 1);
        else ++it->second;
    }
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        const auto key = [](FamilyId id) {
            return std::make_tuple(id.rotation != 0, static_cast<int>(id.base), id.rotation);
        };
        return key(a.first) < key(b.first);
    });
    return counts;
}

}  // namespace esgvine
