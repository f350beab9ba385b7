#include "esgvine/error.hpp"
#include "esgvine/random.hpp"
#include "esgvine/vine.hpp"

#include "copula_checks.hpp"
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace esgvine;

namespace {

using NodeSet = std::set<std::size_t>;

VineStructure nine_variable() {
    return build_structure({"a", "b", "c", "d"}, {EsgClass::A, EsgClass::B, EsgClass::C, EsgClass::D});
}

VineStructure membership(const std::array<std::size_t, 4>& sizes) {
    std::vector<std::string> ids;
    std::vector<EsgClass> classes;
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < sizes[k]; ++i) {
            ids.push_back(std::string(1, "ABCD"[k]) + std::to_string(i));
            classes.push_back(kEsgClasses[k]);
        }
    }
    return build_structure(ids, classes);
}

NodeSet union_of(const Edge& e) {
    NodeSet s(e.conditioning.begin(), e.conditioning.end());
    s.insert(e.first);
    s.insert(e.second);
    return s;
}

// Checks every tree against the previous one from scratch: each edge of tree
// m+1 must join two tree-m edges whose node unions overlap in exactly the
// conditioning set, and each tree must be connected and acyclic.
bool proximity_and_spanning(const VineStructure& s, std::string& why) {
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        const std::size_t vertices = m == 0 ? s.n_nodes() : s.trees[m - 1].size();
        if (s.trees[m].size() + 1 != vertices) {
            why = "tree " + std::to_string(m + 1) + " is not spanning";
            return false;
        }
        std::vector<std::size_t> parent(vertices);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& e : s.trees[m]) {
            if (e.conditioning.size() != m) {
                why = "wrong conditioning size";
                return false;
            }
            std::size_t va = e.first, vb = e.second;
            if (m > 0) {
                const NodeSet full = union_of(e);
                std::vector<std::size_t> joined;
                for (std::size_t k = 0; k < s.trees[m - 1].size(); ++k) {
                    const NodeSet sub = union_of(s.trees[m - 1][k]);
                    if (std::includes(full.begin(), full.end(), sub.begin(), sub.end())) joined.push_back(k);
                }
                if (joined.size() != 2) {
                    why = "edge " + edge_label(s, e) + " does not join two parents";
                    return false;
                }
                const NodeSet a = union_of(s.trees[m - 1][joined[0]]), b = union_of(s.trees[m - 1][joined[1]]);
                NodeSet common;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(common, common.end()));
                if (common != NodeSet(e.conditioning.begin(), e.conditioning.end())) {
                    why = "parents of " + edge_label(s, e) + " do not share the conditioning set";
                    return false;
                }
                va = joined[0];
                vb = joined[1];
            }
            if (find(va) == find(vb)) {
                why = "cycle";
                return false;
            }
            parent[find(va)] = find(vb);
        }
    }
    return true;
}

const Edge* find_edge(const VineStructure& s, std::size_t tree, const std::string& x, const std::string& y,
                      const std::vector<std::string>& cond) {
    NodeSet want_cond;
    for (const auto& c : cond) want_cond.insert(s.node_index(c));
    const NodeSet pair{s.node_index(x), s.node_index(y)};
    for (const auto& e : s.trees[tree - 1]) {
        if (NodeSet{e.first, e.second} == pair && NodeSet(e.conditioning.begin(), e.conditioning.end()) == want_cond) {
            return &e;
        }
    }
    return nullptr;
}

// Conditional distribution F(a | D) by the recursive h-function identity,
// looking edges up by their node sets rather than by stored parent links.
class RecursiveDensity {
public:
    explicit RecursiveDensity(const VineModel& m) : model_(m) {
        for (std::size_t t = 0; t < m.structure.trees.size(); ++t) {
            for (std::size_t e = 0; e < m.structure.trees[t].size(); ++e) {
                by_union_[union_of(m.structure.trees[t][e])] = {t, e};
            }
        }
    }

    double log_density(const std::vector<double>& u) {
        memo_.clear();
        u_ = &u;
        double s = 0;
        for (std::size_t t = 0; t < model_.structure.trees.size(); ++t) {
            for (std::size_t e = 0; e < model_.structure.trees[t].size(); ++e) {
                const Edge& edge = model_.structure.trees[t][e];
                const NodeSet cond(edge.conditioning.begin(), edge.conditioning.end());
                s += esgvine::log_density(model_.copulas[t][e], conditional(edge.first, cond),
                                          conditional(edge.second, cond));
            }
        }
        return s;
    }

    double conditional(std::size_t a, const NodeSet& d) {
        if (d.empty()) return (*u_)[a];
        const auto key = std::make_pair(a, d);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        NodeSet full = d;
        full.insert(a);
        const auto [t, e] = by_union_.at(full);
        const Edge& edge = model_.structure.trees[t][e];
        const std::size_t other = edge.first == a ? edge.second : edge.first;
        NodeSet rest = d;
        rest.erase(other);
        const double x = conditional(a, rest), y = conditional(other, rest);
        const PairCopula& pc = model_.copulas[t][e];
        const double v = edge.first == a ? hfunc2(pc, x, y) : hfunc1(pc, y, x);
        memo_[key] = v;
        return v;
    }

private:
    const VineModel& model_;
    std::map<NodeSet, std::pair<std::size_t, std::size_t>> by_union_;
    std::map<std::pair<std::size_t, NodeSet>, double> memo_;
    const std::vector<double>* u_ = nullptr;
};

VineModel mixed_model(const VineStructure& s) {
    const auto grid = checks::family_grid();
    std::vector<std::vector<PairCopula>> copulas(s.trees.size());
    std::size_t k = 7;
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            const auto& g = grid[k % grid.size()];
            k += 11;
            copulas[m].push_back(make_pair_copula(g.id, g.params));
        }
    }
    return make_vine_model(s, copulas, Catalog::Parametric, 0);
}

VineModel gaussian_model(const VineStructure& s) {
    std::vector<std::vector<PairCopula>> copulas(s.trees.size());
    const double rhos[] = {0.2, 0.3, 0.4, 0.5, 0.6};
    std::size_t k = 0;
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            copulas[m].push_back(make_pair_copula({Family::Gaussian, 0}, {rhos[k++ % 5]}));
        }
    }
    return make_vine_model(s, copulas, Catalog::Gaussian, 0);
}

}  // namespace

TEST_SUITE("vine") {

TEST_CASE("edge counts per tree") {
    const auto s = nine_variable();
    REQUIRE(s.trees.size() == 5);
    CHECK(s.n_nodes() == 9);
    const std::size_t expected[] = {8, 7, 6, 5, 4};
    for (std::size_t m = 0; m < 5; ++m) CHECK(s.trees[m].size() == expected[m]);
    CHECK(s.edge_count() == 30);
    CHECK(s.truncation_level() == 5);

    const auto large = membership({87, 85, 84, 78});
    CHECK(large.edge_count() == 1680);
    for (std::size_t m = 0; m < 5; ++m) CHECK(large.trees[m].size() == 334 + 4 - m);
}

TEST_CASE("template edges for one asset per class") {
    const auto s = nine_variable();
    CHECK(s.nodes == std::vector<std::string>{"I_M", "I_A", "I_B", "I_C", "I_D", "a", "b", "c", "d"});
    // T1
    for (auto [x, y] : std::vector<std::pair<std::string, std::string>>{
             {"a", "I_A"}, {"b", "I_B"}, {"c", "I_C"}, {"d", "I_D"},
             {"I_A", "I_M"}, {"I_B", "I_M"}, {"I_C", "I_M"}, {"I_D", "I_M"}}) {
        CHECK_MESSAGE(find_edge(s, 1, x, y, {}), std::string(x + "," + y));
    }
    // T2
    CHECK(find_edge(s, 2, "a", "I_M", {"I_A"}));
    CHECK(find_edge(s, 2, "d", "I_M", {"I_D"}));
    CHECK(find_edge(s, 2, "I_A", "I_B", {"I_M"}));
    CHECK(find_edge(s, 2, "I_B", "I_C", {"I_M"}));
    CHECK(find_edge(s, 2, "I_C", "I_D", {"I_M"}));
    // T3: A->B, B->C, C->B, D->C
    CHECK(find_edge(s, 3, "a", "I_B", {"I_A", "I_M"}));
    CHECK(find_edge(s, 3, "b", "I_C", {"I_B", "I_M"}));
    CHECK(find_edge(s, 3, "c", "I_B", {"I_C", "I_M"}));
    CHECK(find_edge(s, 3, "d", "I_C", {"I_D", "I_M"}));
    CHECK(find_edge(s, 3, "I_A", "I_C", {"I_M", "I_B"}));
    CHECK(find_edge(s, 3, "I_B", "I_D", {"I_M", "I_C"}));
    // T4: A->C, B->A, C->D, D->B
    CHECK(find_edge(s, 4, "a", "I_C", {"I_A", "I_M", "I_B"}));
    CHECK(find_edge(s, 4, "b", "I_A", {"I_B", "I_M", "I_C"}));
    CHECK(find_edge(s, 4, "c", "I_D", {"I_C", "I_M", "I_B"}));
    CHECK(find_edge(s, 4, "d", "I_B", {"I_D", "I_M", "I_C"}));
    CHECK(find_edge(s, 4, "I_A", "I_D", {"I_M", "I_B", "I_C"}));
    // T5: the remaining index
    CHECK(find_edge(s, 5, "a", "I_D", {"I_A", "I_M", "I_B", "I_C"}));
    CHECK(find_edge(s, 5, "b", "I_D", {"I_B", "I_M", "I_C", "I_A"}));
    CHECK(find_edge(s, 5, "c", "I_A", {"I_C", "I_M", "I_B", "I_D"}));
    CHECK(find_edge(s, 5, "d", "I_A", {"I_D", "I_M", "I_C", "I_B"}));
}

TEST_CASE("independent proximity checker accepts every membership") {
    Rng rng(31);
    for (int rep = 0; rep < 25; ++rep) {
        std::array<std::size_t, 4> sizes{};
        for (auto& n : sizes) n = 1 + rng.next() % 6;
        const auto s = membership(sizes);
        std::string why;
        CHECK_MESSAGE(proximity_and_spanning(s, why), why);
        CHECK(s.edge_count() == 5 * (sizes[0] + sizes[1] + sizes[2] + sizes[3]) + 10);
        CHECK_NOTHROW(validate_structure(s));
    }
}

TEST_CASE("validator rejects broken structures") {
    auto s = nine_variable();
    std::string why;
    auto swapped = s;
    // (a, I_B | I_A, I_M) rewritten to condition on I_C, which no tree-2 edge supports
    const Edge* target = find_edge(s, 3, "a", "I_B", {"I_A", "I_M"});
    REQUIRE(target);
    Edge& edge = swapped.trees[2][static_cast<std::size_t>(target - s.trees[2].data())];
    std::replace(edge.conditioning.begin(), edge.conditioning.end(), s.node_index("I_A"), s.node_index("I_C"));
    CHECK_FALSE(proximity_and_spanning(swapped, why));
    CHECK_THROWS_AS(validate_structure(swapped), DataError);

    auto cyclic = s;
    cyclic.trees[0][0] = cyclic.trees[0][1];
    CHECK_FALSE(proximity_and_spanning(cyclic, why));
    CHECK_THROWS_AS(validate_structure(cyclic), DataError);

    auto missing = s;
    missing.trees[1].pop_back();
    CHECK_THROWS_AS(validate_structure(missing), DataError);
}

TEST_CASE("build errors") {
    CHECK_THROWS_AS(build_structure({"a", "b", "c"}, {EsgClass::A, EsgClass::B, EsgClass::C}), DataError);
    CHECK_THROWS_AS(build_structure({"a", "a", "c", "d"}, {EsgClass::A, EsgClass::B, EsgClass::C, EsgClass::D}),
                    DataError);
    CHECK_THROWS_AS(build_structure({"I_M", "b", "c", "d"}, {EsgClass::A, EsgClass::B, EsgClass::C, EsgClass::D}),
                    DataError);
    CHECK_THROWS_AS(nine_variable().node_index("zz"), DataError);
}

TEST_CASE("edge labels") {
    const auto s = nine_variable();
    const Edge* e = find_edge(s, 3, "a", "I_B", {"I_A", "I_M"});
    REQUIRE(e);
    const std::string label = edge_label(s, *e);
    CHECK(label.find('|') != std::string::npos);
    CHECK(label.find("a") != std::string::npos);
    CHECK(edge_label(s, s.trees[0][0]).find('|') == std::string::npos);
}

TEST_CASE("mBIC by direct formula") {
    VineStructure one;
    one.nodes = {"x", "y"};
    one.trees = {{Edge{0, 1, {}}}};
    auto pc = make_pair_copula({Family::Clayton, 0}, {1.0});
    pc.loglik = 10.0;
    auto model = make_vine_model(one, {{pc}}, Catalog::Itau, 100);
    refresh_statistics(model);
    const double oracle = -20.0 + std::log(100.0) - 2.0 * std::log(0.9);
    CHECK(model.mbic == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(model.mbic == doctest::Approx(-15.18).epsilon(5e-3 / 15.18));
    CHECK(model.aic == doctest::Approx(-18.0));
    CHECK(model.bic == doctest::Approx(-20.0 + std::log(100.0)));
    // an independence edge pays log(1 - psi0) instead
    model.copulas[0][0] = independence_copula();
    refresh_statistics(model);
    CHECK(model.mbic == doctest::Approx(-2.0 * std::log(0.1)).epsilon(1e-12));
    CHECK(mbic(model, 0.5) == doctest::Approx(-2.0 * std::log(0.5)).epsilon(1e-12));

    VineStructure empty;
    auto none = make_vine_model(empty, {}, Catalog::Itau, 100);
    CHECK(mbic(none, 0.9) == 0.0);

    // deeper trees use psi0^m
    auto s = nine_variable();
    auto g = gaussian_model(s);
    g.nobs = 500;
    for (auto& tree : g.copulas) for (auto& c : tree) c.loglik = 1.0;
    refresh_statistics(g);
    double pen = 0;
    for (int m = 1; m <= 5; ++m) pen += static_cast<double>(s.trees[m - 1].size()) * std::log(std::pow(0.9, m));
    CHECK(g.mbic == doctest::Approx(-60.0 + 30 * std::log(500.0) - 2 * pen).epsilon(1e-12));
    CHECK(g.npars == 30);
    CHECK(g.loglik == doctest::Approx(30.0));
}

TEST_CASE("vine log-likelihood matches the recursive density") {
    const auto s = nine_variable();
    const auto model = mixed_model(s);
    Rng rng(3);
    std::vector<std::vector<double>> u(9, std::vector<double>(60));
    for (auto& col : u) for (auto& v : col) v = rng.uniform();
    RecursiveDensity oracle(model);
    double total = 0;
    for (std::size_t i = 0; i < 60; ++i) {
        std::vector<double> row(9);
        for (std::size_t j = 0; j < 9; ++j) row[j] = u[j][i];
        total += oracle.log_density(row);
    }
    CHECK(vine_loglik(model, u) == doctest::Approx(total).epsilon(1e-10));

    // pseudo-observations agree edge by edge
    const auto data = edge_pseudo_data(model, u);
    std::vector<double> row(9);
    for (std::size_t j = 0; j < 9; ++j) row[j] = u[j][17];
    oracle.log_density(row);
    for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            const Edge& edge = s.trees[m][e];
            const NodeSet cond(edge.conditioning.begin(), edge.conditioning.end());
            CHECK(data[m][e].first[17] == doctest::Approx(oracle.conditional(edge.first, cond)).epsilon(1e-12));
            CHECK(data[m][e].second[17] == doctest::Approx(oracle.conditional(edge.second, cond)).epsilon(1e-12));
        }
    }
}

TEST_CASE("sampling: independence, determinism and conditional taus") {
    const auto s = nine_variable();
    std::vector<std::vector<PairCopula>> indep(5);
    for (std::size_t m = 0; m < 5; ++m) indep[m].assign(s.trees[m].size(), independence_copula());
    const auto null_model = make_vine_model(s, indep, Catalog::Itau, 0);
    const auto u0 = sample_vine(null_model, 10000, 4);
    for (std::size_t i = 0; i < 9; ++i) {
        for (std::size_t j = i + 1; j < 9; ++j) CHECK(std::abs(empirical_tau(u0[i], u0[j])) < 0.03);
    }
    CHECK(vine_loglik(null_model, u0) == 0.0);

    const auto model = mixed_model(s);
    CHECK(sample_vine(model, 100, 8) == sample_vine(model, 100, 8));
    CHECK(sample_vine(model, 100, 8) != sample_vine(model, 100, 9));

    const auto u = sample_vine(model, 5000, 21);
    const auto data = edge_pseudo_data(model, u);
    for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            CAPTURE(edge_label(s, s.trees[m][e]));
            CAPTURE(family_key(model.copulas[m][e].family));
            CHECK(empirical_tau(data[m][e].first, data[m][e].second) ==
                  doctest::Approx(model.copulas[m][e].tau).epsilon(0.05).scale(1.0));
        }
    }
}

TEST_CASE("gaussian catalog refit recovers the edge taus") {
    const auto s = nine_variable();
    const auto truth = gaussian_model(s);
    const auto u = sample_vine(truth, 3000, 5);
    VineFitOptions opt;
    opt.catalog = Catalog::Gaussian;
    const auto fit = fit_vine(u, s, opt);
    CHECK(fit.npars == 30);
    CHECK(fit.nobs == 3000);
    for (std::size_t m = 0; m < 5; ++m) {
        const auto census = family_census(fit, m + 1);
        REQUIRE(census.size() == 1);
        CHECK(census[0].first == FamilyId{Family::Gaussian, 0});
        CHECK(census[0].second == s.trees[m].size());
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
            CHECK(fit.copulas[m][e].tau == doctest::Approx(truth.copulas[m][e].tau).epsilon(0.05).scale(1.0));
        }
    }
    CHECK(fit.loglik == doctest::Approx(vine_loglik(fit, u)).epsilon(1e-10));
    CHECK(fit.loglik >= vine_loglik(truth, u) - 30.0);
    CHECK_THROWS_AS(family_census(fit, 6), DataError);
}

TEST_CASE("null data mostly selects independence") {
    const auto s = nine_variable();
    Rng rng(17);
    std::vector<std::vector<double>> u(9, std::vector<double>(800));
    for (auto& col : u) for (auto& v : col) v = rng.uniform();
    const auto fit = fit_vine(u, s);
    std::size_t indep = 0, total = 0;
    for (std::size_t m = 1; m <= 5; ++m) {
        for (const auto& [id, n] : family_census(fit, m)) {
            total += n;
            if (id.base == Family::Independence) indep += n;
        }
    }
    CHECK(total == 30);
    CHECK(indep * 2 > total);
    // each spurious edge buys at most a few nats
    CHECK(fit.loglik < 3.0 * static_cast<double>(total - indep) + 1e-9);
    CHECK(fit.loglik >= 0.0);
}

TEST_CASE("fit errors name the edge") {
    const auto s = nine_variable();
    auto u = sample_vine(gaussian_model(s), 300, 2);
    CHECK_THROWS_AS(fit_vine(std::vector<std::vector<double>>(u.begin(), u.end() - 1), s), DataError);
    u[5][3] = 1.0;
    CHECK_THROWS_AS(fit_vine(u, s), DataError);
    for (auto& v : u[5]) v = 0.5;
    try {
        fit_vine(u, s);
        FAIL("expected a failure");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("a,I_A") != std::string::npos);
    }
}

TEST_CASE("model comparison ranking") {
    // reference rows: itau, par, gaus for three periods
    const double rows[3][3][4] = {
        {{1260, 133415.85, 2300, -241681.52}, {1260, 133730.31, 2427, -241396.61}, {1260, 123607.92, 1680, -226242.07}},
        {{1257, 132119.36, 1975, -241564.51}, {1257, 132430.2, 2118, -241174.01}, {1257, 123696.65, 1680, -226423.54}},
        {{754, 52671.04, 1843, -84884.99}, {754, 52882.97, 1944, -84646.93}, {754, 48514.13, 1680, -76917.14}}};
    const char* names[] = {"gaus", "itau", "par"};
    for (const auto& period : rows) {
        std::vector<VineModel> models(3);
        for (int k = 0; k < 3; ++k) {
            models[k].nobs = static_cast<std::size_t>(period[k][0]);
            models[k].loglik = period[k][1];
            models[k].npars = static_cast<std::size_t>(period[k][2]);
            models[k].mbic = period[k][3];
        }
        // feed in a scrambled order
        const auto ranked = compare_models({{names[0], "p", &models[2]}, {names[1], "p", &models[0]}, {names[2], "p", &models[1]}});
        REQUIRE(ranked.size() == 3);
        CHECK(ranked[0].model == "itau");
        CHECK(ranked[1].model == "par");
        CHECK(ranked[2].model == "gaus");
        CHECK(ranked[0].winner);
        CHECK_FALSE(ranked[1].winner);
        CHECK(ranked[2].rank == 3);
        CHECK_FALSE(ranked[0].tied);
    }

    VineModel a, b, c;
    a.nobs = b.nobs = 100;
    a.mbic = b.mbic = -5.0;
    const auto tie = compare_models({{"first", "p", &a}, {"second", "p", &b}});
    CHECK(tie[0].model == "first");
    CHECK(tie[0].winner);
    CHECK(tie[0].tied);
    CHECK(tie[1].tied);
    CHECK_FALSE(tie[1].winner);
    c.nobs = 99;
    CHECK_THROWS_AS(compare_models({{"a", "p", &a}, {"c", "p", &c}}), DataError);
}

}  // TEST_SUITE
