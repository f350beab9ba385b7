#include "doctest.h"
#include "helpers.hpp"

#include "esgvine/error.hpp"
#include "esgvine/panel.hpp"
#include "esgvine/random.hpp"
#include "esgvine/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace esgvine;

namespace {

struct ToyPanel {
    testutil::TempDir dir{"panel"};
    PanelFiles files;
    std::vector<std::string> dates;

    // 3 assets over 2006-2007 weekdays.
    ToyPanel() {
        dates = weekday_calendar("2006-01-02", 520);
        std::string returns = "date,x,y,z\n", market = "date,return\n";
        for (std::size_t t = 0; t < dates.size(); ++t) {
            const double v = 0.001 * static_cast<double>(t % 7) - 0.003;
            returns += dates[t] + "," + std::to_string(v) + "," + std::to_string(-v) + "," + std::to_string(2 * v) + "\n";
            market += dates[t] + "," + std::to_string(v / 2) + "\n";
        }
        files = {dir / "returns.csv", dir / "esg.csv", dir / "meta.csv", dir / "market.csv"};
        testutil::write_text(files.returns, returns);
        testutil::write_text(files.market, market);
        testutil::write_text(files.meta, "asset_id,sector,market_cap\nx,S1,1\ny,S1,3\nz,S2,2\n");
        testutil::write_text(files.esg, "year,x,y,z\n2006,40,10,80\n2007,60,20,90\n");
    }

    PeriodSpec spec() const {
        PeriodSpec s;
        s.periods = {{"2006-2007", 2006, 2007}};
        s.mode = ClassificationMode::Threshold;
        return s;
    }
};

// Block membership straight from the index-set definitions: D = l_1..l_nD,
// C = l_{nD+1}..l_{nC}, B = l_{nC+1}..l_{nB}, A = the rest.
std::array<std::size_t, 4> oracle_sizes(std::size_t n) {
    const std::size_t nd = n / 4;
    const std::size_t nc = (n % 4 == 3) ? 2 * nd + 1 : 2 * nd;
    const std::size_t nb = (n % 4 == 2 || n % 4 == 3) ? 3 * nd + 1 : 3 * nd;
    std::array<std::size_t, 4> sizes{};  // A B C D
    for (std::size_t l = 1; l <= n; ++l) {
        if (l <= nd) ++sizes[3];
        else if (l <= nc) ++sizes[2];
        else if (l <= nb) ++sizes[1];
        else ++sizes[0];
    }
    return sizes;
}

std::array<std::size_t, 4> class_sizes(const std::vector<EsgClass>& classes) {
    std::array<std::size_t, 4> s{};
    for (EsgClass k : classes) ++s[class_slot(k)];
    return s;
}

}  // namespace

TEST_SUITE("panel") {

TEST_CASE("toy panel loads with the expected shape") {
    ToyPanel toy;
    const AssetPanel p = load_panel(toy.files, toy.spec());
    CHECK(p.n_assets() == 3);
    CHECK(p.n_days() == toy.dates.size());
    CHECK(p.market_returns.size() == toy.dates.size());
    CHECK(p.esg_score(1, 2007) == 20.0);
    CHECK(p.sectors[2] == "S2");
}

TEST_CASE("score of 101 names asset and year") {
    ToyPanel toy;
    testutil::write_text(toy.files.esg, "year,x,y,z\n2006,40,10,80\n2007,60,101,90\n");
    try {
        load_panel(toy.files, toy.spec());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("score out of range") != std::string::npos);
        CHECK(msg.find("'y'") != std::string::npos);
        CHECK(msg.find("2007") != std::string::npos);
    }
}

TEST_CASE("ingestion rejects malformed inputs") {
    ToyPanel toy;
    SUBCASE("duplicate id") {
        testutil::write_text(toy.files.meta, "asset_id,sector,market_cap\nx,S1,1\nx,S1,3\nz,S2,2\n");
        CHECK_THROWS_AS(load_panel(toy.files, toy.spec()), DataError);
    }
    SUBCASE("non-numeric cell") {
        auto text = testutil::read_text(toy.files.returns);
        text.replace(text.find('\n', text.find('\n') + 1) - 4, 4, "abcd");
        testutil::write_text(toy.files.returns, text);
        CHECK_THROWS_AS(load_panel(toy.files, toy.spec()), DataError);
    }
    SUBCASE("non-positive cap") {
        testutil::write_text(toy.files.meta, "asset_id,sector,market_cap\nx,S1,0\ny,S1,3\nz,S2,2\n");
        CHECK_THROWS_WITH_AS(load_panel(toy.files, toy.spec()), doctest::Contains("market cap"), DataError);
    }
    SUBCASE("missing ESG year") {
        testutil::write_text(toy.files.esg, "year,x,y,z\n2006,40,10,80\n");
        CHECK_THROWS_WITH_AS(load_panel(toy.files, toy.spec()), doctest::Contains("missing ESG score"), DataError);
    }
    SUBCASE("calendar gap") {
        std::string returns = "date,x,y,z\n", market = "date,return\n";
        for (std::size_t t = 0; t < toy.dates.size(); ++t) {
            if (t >= 100 && t < 110) continue;  // two missing weeks
            returns += toy.dates[t] + ",0.01,0.02,0.03\n";
            market += toy.dates[t] + ",0.01\n";
        }
        testutil::write_text(toy.files.returns, returns);
        testutil::write_text(toy.files.market, market);
        CHECK_THROWS_WITH_AS(load_panel(toy.files, toy.spec()), doctest::Contains("calendar gap"), DataError);
    }
    SUBCASE("reserved id") {
        auto text = testutil::read_text(toy.files.returns);
        text.replace(0, std::string("date,x").size(), "date,I_M");
        testutil::write_text(toy.files.returns, text);
        CHECK_THROWS_AS(load_panel(toy.files, toy.spec()), DataError);
    }
}

TEST_CASE("mean ESG over a period") {
    ToyPanel toy;
    const AssetPanel p = load_panel(toy.files, toy.spec());
    const auto m = mean_esg(p, toy.spec());
    REQUIRE(m.size() == 1);
    CHECK(m[0][0] == doctest::Approx(50.0));  // (40, 60)
    CHECK(m[0][1] == doctest::Approx(15.0));

    testutil::write_text(toy.files.esg, "year,x,y,z\n2006,10,30,30\n2007,20,30,30\n2008,70,30,30\n");
    PeriodSpec three = toy.spec();
    three.periods = {{"p", 2006, 2008}};
    // 2008 has no trading days in the toy calendar, so only the score average is exercised.
    auto panel = load_panel(toy.files, toy.spec());
    panel.esg_years = {2006, 2007, 2008};
    panel.esg_scores = {{10, 20, 70}, {30, 30, 30}, {30, 30, 30}};
    const auto m3 = mean_esg(panel, three);
    CHECK(m3[0][0] == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
    CHECK(m3[0][1] == 30.0);
}

TEST_CASE("quartile block sizes match the index-set definition for n = 4..40") {
    for (std::size_t n = 4; n <= 40; ++n) {
        std::vector<double> scores(n);
        std::vector<std::string> sectors(n, "S"), ids(n);
        Rng rng(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(i);
            ids[i] = "a" + std::to_string(100 + i);
        }
        for (std::size_t i = n - 1; i > 0; --i) std::swap(scores[i], scores[rng.next() % (i + 1)]);
        PeriodSpec spec;
        const auto classes = assign_classes(scores, sectors, ids, spec);
        CHECK_MESSAGE(class_sizes(classes) == oracle_sizes(n), "n = " << n);

        // Lowest scores land in D, highest in A.
        const auto lo = std::min_element(scores.begin(), scores.end()) - scores.begin();
        const auto hi = std::max_element(scores.begin(), scores.end()) - scores.begin();
        CHECK(classes[static_cast<std::size_t>(lo)] == EsgClass::D);
        CHECK(classes[static_cast<std::size_t>(hi)] == EsgClass::A);
    }
}

TEST_CASE("quartile sizes for 8, 10 and 7 assets") {
    CHECK(oracle_sizes(8) == std::array<std::size_t, 4>{2, 2, 2, 2});
    CHECK(oracle_sizes(10) == std::array<std::size_t, 4>{3, 3, 2, 2});
    const auto b7 = quartile_block_ends(7);
    CHECK(b7.d_end == 1);
    CHECK(b7.c_end == 3);
    CHECK(b7.b_end == 4);
}

TEST_CASE("sector smaller than four is rejected in quartile mode") {
    PeriodSpec spec;
    CHECK_THROWS_AS(assign_classes({1, 2, 3}, {"S", "S", "S"}, {"a", "b", "c"}, spec), DataError);
}

TEST_CASE("threshold boundaries") {
    const std::array<double, 3> t{25, 50, 75};
    const std::vector<std::pair<double, EsgClass>> cases{
        {0, EsgClass::D},  {24.999, EsgClass::D}, {25, EsgClass::C},     {49.999, EsgClass::C},
        {50, EsgClass::B}, {74.999, EsgClass::B}, {75, EsgClass::A},     {100, EsgClass::A}};
    for (const auto& [score, expected] : cases) CHECK_MESSAGE(threshold_class(score, t) == expected, score);

    PeriodSpec spec;
    spec.mode = ClassificationMode::Threshold;
    const auto all_d = assign_classes({1, 10, 24}, {"S", "S", "S"}, {"a", "b", "c"}, spec);
    CHECK(std::all_of(all_d.begin(), all_d.end(), [](EsgClass k) { return k == EsgClass::D; }));
}

TEST_CASE("classification ignores input order and breaks ties by id") {
    const std::vector<double> scores{5, 5, 5, 5, 1, 9, 9, 3};
    std::vector<std::string> ids{"h", "b", "f", "d", "a", "g", "c", "e"};
    const std::vector<std::string> sectors(8, "S");
    PeriodSpec spec;
    const auto base = assign_classes(scores, sectors, ids, spec);

    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.next() % (i + 1)]);
        std::vector<double> s2;
        std::vector<std::string> i2;
        for (std::size_t i : perm) {
            s2.push_back(scores[i]);
            i2.push_back(ids[i]);
        }
        const auto shuffled = assign_classes(s2, sectors, i2, spec);
        for (std::size_t k = 0; k < perm.size(); ++k) CHECK(shuffled[k] == base[perm[k]]);
    }
    // Sorted: a(1) e(3) b d f h (5) c g (9); ties at 5 resolve by id.
    const auto cls = [&](const std::string& id) {
        return base[static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin())];
    };
    CHECK(cls("a") == EsgClass::D);
    CHECK(cls("e") == EsgClass::D);
    CHECK(cls("b") == EsgClass::C);
    CHECK(cls("d") == EsgClass::C);
    CHECK(cls("f") == EsgClass::B);
    CHECK(cls("h") == EsgClass::B);
    CHECK(cls("c") == EsgClass::A);
}

TEST_CASE("class weights") {
    const std::vector<EsgClass> two{EsgClass::A, EsgClass::A};
    const auto w = class_weights(two, {1, 3});
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[1] == doctest::Approx(0.75));
    CHECK(class_weights({EsgClass::B}, {42})[0] == 1.0);
    const auto w3 = class_weights({EsgClass::C, EsgClass::C, EsgClass::C}, {2, 3, 5});
    CHECK(w3[0] == doctest::Approx(0.2));
    CHECK(w3[1] == doctest::Approx(0.3));
    CHECK(w3[2] == doctest::Approx(0.5));

    Rng rng(3);
    std::vector<EsgClass> classes;
    std::vector<double> caps;
    for (int i = 0; i < 200; ++i) {
        classes.push_back(kEsgClasses[rng.next() % 4]);
        caps.push_back(rng.uniform() * 1e4);
    }
    const auto ws = class_weights(classes, caps);
    for (EsgClass k : kEsgClasses) {
        double sum = 0.0;
        for (std::size_t j = 0; j < ws.size(); ++j) sum += classes[j] == k ? ws[j] : 0.0;
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("class index is the weighted member sum") {
    AssetPanel p;
    p.asset_ids = {"a", "b", "c", "d"};
    p.returns = {{0.01, 0.02}, {0.00, -0.01}, {-0.02, 0.03}, {0.05, 0.05}};
    p.dates = {"2006-01-02", "2006-01-03"};
    const std::vector<EsgClass> classes{EsgClass::A, EsgClass::A, EsgClass::A, EsgClass::B};
    const std::vector<double> w{0.2, 0.3, 0.5, 1.0};
    const auto idx = class_indices(p, classes, w, DayRange{0, 2});
    REQUIRE(idx[0]);
    CHECK((*idx[0])[0] == doctest::Approx(-0.008).epsilon(1e-12));
    CHECK((*idx[1])[0] == 0.05);  // single member
    CHECK_FALSE(idx[2]);
    CHECK_FALSE(idx[3]);

    // Linearity: scaling members scales the index.
    AssetPanel scaled = p;
    for (auto& r : scaled.returns) {
        for (double& v : r) v *= 3.5;
    }
    const auto idx2 = class_indices(scaled, classes, w, DayRange{0, 2});
    for (std::size_t t = 0; t < 2; ++t) CHECK(std::abs((*idx2[0])[t] - 3.5 * (*idx[0])[t]) < 1e-12);

    // Cancellation with equal caps.
    AssetPanel c;
    c.asset_ids = {"u", "v"};
    c.returns = {{0.07}, {-0.07}};
    const auto cancel = class_indices(c, {EsgClass::D, EsgClass::D}, {0.5, 0.5}, DayRange{0, 1});
    CHECK((*cancel[3])[0] == 0.0);
}

TEST_CASE("empirical VaR and ES") {
    std::vector<double> s;
    for (int v = -3; v <= 96; ++v) s.push_back(v);
    const VarEs r = empirical_var_es(s, 0.95);
    CHECK(r.var == 1.0);  // 5th smallest
    CHECK(r.es == doctest::Approx((-3.0 - 2.0 - 1.0 + 0.0 + 1.0) / 5.0));

    const VarEs c = empirical_var_es(std::vector<double>(50, 0.25), 0.99);
    CHECK(c.var == 0.25);
    CHECK(c.es == 0.25);

    CHECK_THROWS_AS(empirical_var_es({}, 0.95), DataError);

    // Standard normal draws against the normal quantile.
    Rng rng(2024);
    std::vector<double> z(10000);
    for (auto& x : z) x = std::sqrt(-2.0 * std::log(rng.uniform())) * std::cos(2.0 * M_PI * rng.uniform());
    CHECK(empirical_var_es(z, 0.95).var == doctest::Approx(-1.6448536).epsilon(0.05 / 1.645));
}

TEST_CASE("ESG distribution summary") {
    ToyPanel toy;
    testutil::write_text(toy.files.esg, "year,x,y,z\n2006,30,30,30\n2007,10,20,90\n");
    const AssetPanel p = load_panel(toy.files, toy.spec());
    const auto sum = esg_distribution_summary(p, toy.spec());
    REQUIRE(sum.size() == 2);
    CHECK(sum[0].min == 30.0);
    CHECK(sum[0].q25 == 30.0);
    CHECK(sum[0].median == 30.0);
    CHECK(sum[0].max == 30.0);
    CHECK(sum[1].mean == doctest::Approx(40.0));
    CHECK(sum[1].median == 20.0);
    CHECK(sum[1].q25 == doctest::Approx(15.0));  // linear between 10 and 20

    // Upward drift gives increasing yearly means.
    AssetPanel drift = p;
    drift.esg_years = {2006, 2007};
    drift.esg_scores = {{10, 12}, {50, 55}, {70, 71}};
    const auto d = esg_distribution_summary(drift, toy.spec());
    CHECK(d[1].mean > d[0].mean);
}

TEST_CASE("period parsing and validation") {
    const auto ps = parse_periods("2006-2010,late=2011-2015");
    REQUIRE(ps.size() == 2);
    CHECK(ps[0].label == "2006-2010");
    CHECK(ps[1].label == "late");
    CHECK(ps[1].last_year == 2015);
    CHECK_THROWS_AS(parse_periods("2006-20x0"), ConfigError);

    PeriodSpec spec;
    spec.periods = {{"a", 2006, 2008}, {"b", 2010, 2012}};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.periods = {{"a", 2006, 2008}};
    spec.thresholds = {50, 25, 75};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    CHECK_NOTHROW(PeriodSpec::shipped_default().validate());
}

}  // TEST_SUITE
