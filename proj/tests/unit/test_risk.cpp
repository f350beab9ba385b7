#include "esgvine/error.hpp"
#include "esgvine/random.hpp"
#include "esgvine/risk.hpp"

#include "doctest.h"

#include <cmath>

using namespace esgvine;

namespace {

VineStructure nine_variable() {
    return build_structure({"a", "b", "c", "d"}, {EsgClass::A, EsgClass::B, EsgClass::C, EsgClass::D});
}

std::vector<std::string> partners(const VineModel& m, const std::string& asset) {
    std::vector<std::string> out;
    for (const auto& t : edge_dependence(m, asset)) out.push_back(t.partner);
    return out;
}

VineModel uniform_model(const VineStructure& s, const PairCopula& pc) {
    std::vector<std::vector<PairCopula>> c(s.trees.size());
    for (std::size_t m = 0; m < s.trees.size(); ++m) c[m].assign(s.trees[m].size(), pc);
    return make_vine_model(s, c, Catalog::Parametric, 0);
}

AssetRiskRow row_with(const std::string& period, EsgClass k, RiskShares tau, RiskShares lambda) {
    AssetRiskRow r;
    r.period = period;
    r.asset_class = k;
    r.tau = tau;
    r.lambda = lambda;
    r.tau_empirical.degenerate = true;
    return r;
}

RiskShares shares(double e, double m, double i) {
    RiskShares s;
    s.esg = e;
    s.market = m;
    s.idio = i;
    s.boundary = e == 0 || e == 1 || m == 0 || m == 1 || i == 0 || i == 1;
    return s;
}

const AggregateCell& cell(const std::vector<AggregateCell>& cells, const std::string& period, EsgClass k, Variant v,
                          Measure m) {
    for (const auto& c : cells) {
        if (c.period == period && c.asset_class == k && c.variant == v && c.measure == m) return c;
    }
    FAIL("cell missing");
    return cells.front();
}

}  // namespace

TEST_SUITE("risk") {

TEST_CASE("tau shares by hand") {
    auto r = risk_shares_tau({0.4, 0.1, 0.05, 0.03, 0.02});
    CHECK(r.esg == doctest::Approx(0.4 / 0.6).epsilon(1e-15));
    CHECK(r.market == doctest::Approx(0.1 / 0.6).epsilon(1e-15));
    CHECK(r.idio == doctest::Approx(0.1 / 0.6).epsilon(1e-14));
    CHECK(r.esg == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK_FALSE(r.degenerate);
    CHECK_FALSE(r.boundary);

    r = risk_shares_tau({0.25, 0, 0, 0, 0});
    CHECK(r.esg == 1.0);
    CHECK(r.market == 0.0);
    CHECK(r.idio == 0.0);
    CHECK(r.boundary);

    r = risk_shares_tau({0.3, -0.3, 0, 0, 0});
    CHECK(r.esg == doctest::Approx(0.5));
    CHECK(r.market == doctest::Approx(0.5));
    CHECK(r.idio == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("lambda shares by hand") {
    auto r = risk_shares_lambda({0.5, 0, 0, 0, 0});
    CHECK(r.esg == 1.0);
    CHECK(r.boundary);
    r = risk_shares_lambda({0, 0, 0, 0, 0});
    CHECK(r.degenerate);
    r = risk_shares_lambda({0.4, 0.04, 0.01, 0.01, 0.04});
    CHECK(r.esg == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(r.market == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(r.idio == doctest::Approx(0.12).epsilon(1e-13));
    CHECK_THROWS_AS(risk_shares_lambda({1.2, 0, 0, 0, 0}), DataError);
}

TEST_CASE("simplex, sign, scale and monotonicity properties") {
    Rng rng(99);
    for (int rep = 0; rep < 1000; ++rep) {
        std::array<double, 5> t{}, neg{}, scaled{};
        const double c = 0.01 + 50 * rng.uniform();
        for (std::size_t k = 0; k < 5; ++k) {
            t[k] = rng.uniform() * 2 - 1;
            neg[k] = rng.uniform() < 0.5 ? -t[k] : t[k];
            scaled[k] = t[k] * c;
        }
        const auto r = risk_shares_tau(t);
        CHECK(r.esg + r.market + r.idio == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(r.esg + r.market + r.idio - 1.0) <= 1e-12);
        for (double v : {r.esg, r.market, r.idio}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const auto rn = risk_shares_tau(neg);
        CHECK(rn.esg == doctest::Approx(r.esg).epsilon(1e-14));
        CHECK(rn.market == doctest::Approx(r.market).epsilon(1e-14));
        const auto rs = risk_shares_tau(scaled);
        CHECK(rs.esg == doctest::Approx(r.esg).epsilon(1e-12));
        CHECK(rs.market == doctest::Approx(r.market).epsilon(1e-12));
        CHECK(rs.idio == doctest::Approx(r.idio).epsilon(1e-10).scale(1.0));

        auto bigger = t;
        bigger[0] = (std::abs(t[0]) + 0.05) * (t[0] < 0 ? -1 : 1);
        CHECK(risk_shares_tau(bigger).esg > r.esg);

        std::array<double, 5> lam{};
        for (auto& l : lam) l = rng.uniform();
        const auto rl = risk_shares_lambda(lam);
        CHECK(std::abs(rl.esg + rl.market + rl.idio - 1.0) <= 1e-12);
        std::array<double, 5> lam_half{};
        for (std::size_t k = 0; k < 5; ++k) lam_half[k] = lam[k] / 2;
        CHECK(risk_shares_lambda(lam_half).esg == doctest::Approx(rl.esg).epsilon(1e-12));
    }
}

TEST_CASE("canonical partner order per class") {
    const auto m = uniform_model(nine_variable(), independence_copula());
    CHECK(partners(m, "a") == std::vector<std::string>{"I_A", "I_M", "I_B", "I_C", "I_D"});
    CHECK(partners(m, "b") == std::vector<std::string>{"I_B", "I_M", "I_C", "I_A", "I_D"});
    CHECK(partners(m, "c") == std::vector<std::string>{"I_C", "I_M", "I_B", "I_D", "I_A"});
    CHECK(partners(m, "d") == std::vector<std::string>{"I_D", "I_M", "I_C", "I_B", "I_A"});
    const auto terms = edge_dependence(m, "d");
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(terms[k].tree == k + 1);
        CHECK(terms[k].tau == 0.0);
        CHECK(terms[k].lambda == 0.0);
    }
    CHECK_THROWS_AS(edge_dependence(m, "zz"), DataError);
    CHECK_THROWS_AS(edge_dependence(m, "I_A"), DataError);
}

TEST_CASE("independence and gaussian models degenerate where they should") {
    const auto s = nine_variable();
    for (const auto& row : asset_risk_rows(uniform_model(s, independence_copula()), "p")) {
        CHECK(row.tau.degenerate);
        CHECK(row.lambda.degenerate);
    }
    for (const auto& row : asset_risk_rows(uniform_model(s, make_pair_copula({Family::Gaussian, 0}, {0.5})), "p")) {
        CHECK_FALSE(row.tau.degenerate);
        CHECK(row.tau.esg == doctest::Approx(0.2));
        CHECK(row.lambda.degenerate);
    }
}

TEST_CASE("rows equal direct substitution") {
    const auto s = nine_variable();
    std::vector<std::vector<PairCopula>> c(5);
    const std::vector<PairCopula> pool{
        make_pair_copula({Family::StudentT, 0}, {0.5, 4.0}), make_pair_copula({Family::Clayton, 0}, {1.2}),
        make_pair_copula({Family::Gumbel, 180}, {1.6}),      make_pair_copula({Family::Frank, 0}, {-3.0}),
        make_pair_copula({Family::BB1, 0}, {0.4, 1.3}),      make_pair_copula({Family::Joe, 90}, {1.8}),
        make_pair_copula({Family::Gaussian, 0}, {0.35})};
    std::size_t k = 0;
    for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t e = 0; e < s.trees[m].size(); ++e) c[m].push_back(pool[k++ % pool.size()]);
    }
    const auto model = make_vine_model(s, c, Catalog::Parametric, 0);
    const auto rows = asset_risk_rows(model, "2006-2010");
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        const std::size_t node = s.node_index(row.asset);
        double t[5], l[5];
        for (std::size_t m = 0; m < 5; ++m) {
            for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
                if (s.trees[m][e].first == node || s.trees[m][e].second == node) {
                    t[m] = std::abs(tau_of(c[m][e].family, c[m][e].params));
                    l[m] = lambda_lower_of(c[m][e].family, c[m][e].params);
                }
            }
        }
        const double ts = t[0] + t[1] + t[2] + t[3] + t[4], ls = l[0] + l[1] + l[2] + l[3] + l[4];
        CHECK(row.period == "2006-2010");
        CHECK(row.tau.esg == doctest::Approx(t[0] / ts).epsilon(1e-10));
        CHECK(row.tau.market == doctest::Approx(t[1] / ts).epsilon(1e-10));
        CHECK(row.tau.idio == doctest::Approx((t[2] + t[3] + t[4]) / ts).epsilon(1e-10));
        if (ls > 0) {
            CHECK(row.lambda.esg == doctest::Approx(l[0] / ls).epsilon(1e-10));
            CHECK(row.lambda.idio == doctest::Approx((l[2] + l[3] + l[4]) / ls).epsilon(1e-10));
        } else {
            CHECK(row.lambda.degenerate);
        }
        CHECK(row.tau_empirical.degenerate);  // no pseudo-data attached
    }
}

TEST_CASE("aggregation statistics and policies") {
    std::vector<AssetRiskRow> rows{
        row_with("p1", EsgClass::A, shares(0.2, 0.3, 0.5), shares(1.0, 0.0, 0.0)),
        row_with("p1", EsgClass::A, shares(0.4, 0.3, 0.3), shares(0.5, 0.25, 0.25)),
        row_with("p1", EsgClass::B, shares(0.5, 0.5, 0.0), shares(0.7, 0.3, 0.0)),
        row_with("p0", EsgClass::A, shares(0.1, 0.1, 0.8), RiskShares{0, 0, 0, true, false}),
    };
    const auto all = aggregate(rows, LambdaPolicy::IncludeAll);
    const auto& esg = cell(all, "p1", EsgClass::A, Variant::Tau, Measure::Esg);
    CHECK(esg.count == 2);
    CHECK(*esg.mean == doctest::Approx(0.3));
    CHECK(*esg.sd == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    CHECK(*esg.sd == doctest::Approx(0.1414).epsilon(1e-3));
    const auto& market = cell(all, "p1", EsgClass::A, Variant::Tau, Measure::Market);
    CHECK(*market.sd == 0.0);
    const auto& single = cell(all, "p1", EsgClass::B, Variant::Tau, Measure::Esg);
    CHECK(single.count == 1);
    CHECK_FALSE(single.sd.has_value());
    CHECK(cell(all, "p1", EsgClass::A, Variant::Lambda, Measure::Esg).mean == doctest::Approx(0.75));
    // degenerate lambda row is excluded, counted, and leaves the cell empty
    const auto& empty = cell(all, "p0", EsgClass::A, Variant::Lambda, Measure::Esg);
    CHECK(empty.count == 0);
    CHECK(empty.excluded == 1);
    CHECK_FALSE(empty.mean.has_value());
    // empty class reported as missing, periods in first-seen order
    CHECK_FALSE(cell(all, "p1", EsgClass::D, Variant::Tau, Measure::Esg).mean.has_value());
    CHECK(all.front().period == "p1");

    const auto drop = aggregate(rows, LambdaPolicy::DropZerosAndOnes);
    const auto& lam = cell(drop, "p1", EsgClass::A, Variant::Lambda, Measure::Esg);
    CHECK(lam.count == 1);
    CHECK(lam.excluded == 1);
    CHECK(*lam.mean == doctest::Approx(0.5));
    CHECK(cell(drop, "p1", EsgClass::B, Variant::Lambda, Measure::Idio).count == 0);
    CHECK(cell(drop, "p1", EsgClass::B, Variant::Lambda, Measure::Market).count == 1);
    // tau cells ignore the lambda policy
    CHECK(cell(drop, "p1", EsgClass::B, Variant::Tau, Measure::Idio).count == 1);
    for (const auto& c : all) {
        if (c.mean) {
            CHECK(*c.mean >= 0.0);
            CHECK(*c.mean <= 1.0);
        }
    }
}

}  // TEST_SUITE
