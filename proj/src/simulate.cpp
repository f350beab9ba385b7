#include "esgvine/simulate.hpp"

#include "esgvine/csv.hpp"
#include "esgvine/error.hpp"
#include "esgvine/random.hpp"
#include "esgvine/risk.hpp"
#include "esgvine/store.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace esgvine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Score written for every year of a class; sits inside the default threshold band.
double class_score(EsgClass k) {
    switch (k) {
        case EsgClass::A: return 87.5;
        case EsgClass::B: return 62.5;
        case EsgClass::C: return 37.5;
        case EsgClass::D: return 12.5;
    }
    return 0.0;
}

struct TruthReader {
    std::string source;

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError("invalid truth file " + source + ": " + what);
    }
    double number(const json& j, const std::string& key, double fallback) const {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) fail("'" + key + "' must be a number");
        return j[key].get<double>();
    }
    std::string string(const json& j, const std::string& key, const std::string& fallback) const {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_string()) fail("'" + key + "' must be a string");
        return j[key].get<std::string>();
    }
    GarchParams garch(const json& j, GarchParams base) const {
        if (!j.is_object()) fail("marginal entries must be objects");
        base.gamma0 = number(j, "gamma0", base.gamma0);
        base.gamma1 = number(j, "gamma1", base.gamma1);
        base.beta1 = number(j, "beta1", base.beta1);
        base.nu = number(j, "nu", base.nu);
        if (!(base.gamma0 > 0.0 && base.gamma1 >= 0.0 && base.beta1 >= 0.0 && base.gamma1 + base.beta1 < 1.0 &&
              base.nu > 2.0)) {
            fail("GARCH parameters need gamma0 > 0, gamma1, beta1 >= 0, gamma1 + beta1 < 1 and nu > 2");
        }
        return base;
    }
    PairCopula copula(const json& j, const std::string& where) const {
        if (!j.is_object()) fail(where + ": copula entries must be objects");
        FamilyId id;
        try {
            id = parse_family_key(string(j, "family", "indep"));
        } catch (const DataError& e) {
            fail(where + ": " + e.what());
        }
        std::vector<double> params;
        if (j.contains("params")) {
            if (!j["params"].is_array()) fail(where + ": 'params' must be an array");
            for (const auto& p : j["params"]) {
                if (!p.is_number()) fail(where + ": 'params' must hold numbers");
                params.push_back(p.get<double>());
            }
        }
        try {
            return make_pair_copula(id, params);
        } catch (const NumericalError& e) {
            fail(where + ": " + e.what());
        }
    }
};

std::vector<std::string> sorted_ids(const VineStructure& s, const std::vector<std::size_t>& nodes) {
    std::vector<std::string> out;
    for (std::size_t n : nodes) out.push_back(s.nodes[n]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<std::string> weekday_calendar(const std::string& start, std::size_t n) {
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(start.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw DataError("start date '" + start + "' is not yyyy-mm-dd");
    }
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw DataError("start date '" + start + "' is not a calendar date");
    sys_days day_point{ymd};
    std::vector<std::string> out;
    out.reserve(n);
    while (out.size() < n) {
        const weekday wd{day_point};
        if (wd != Saturday && wd != Sunday) {
            const year_month_day cur{day_point};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(cur.year()),
                          static_cast<unsigned>(cur.month()), static_cast<unsigned>(cur.day()));
            out.emplace_back(buf);
        }
        day_point += days{1};
    }
    return out;
}

SimulationTruth parse_truth(const std::string& text, const std::string& source) {
    const TruthReader r{source};
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        r.fail(std::string("not valid JSON (") + e.what() + ")");
    }
    if (!j.is_object()) r.fail("top level must be an object");

    SimulationTruth t;
    t.start_date = r.string(j, "start_date", t.start_date);
    if (!j.contains("days") || !j["days"].is_number_unsigned()) r.fail("'days' must be a positive integer");
    t.days = j["days"].get<std::size_t>();
    if (t.days < 2) r.fail("'days' must be at least 2");
    t.period_label = r.string(j, "period", "");

    if (!j.contains("assets") || !j["assets"].is_array()) r.fail("'assets' must be an array");
    for (const auto& a : j["assets"]) {
        if (!a.is_object() || !a.contains("id") || !a["id"].is_string()) r.fail("each asset needs a string 'id'");
        t.asset_ids.push_back(a["id"].get<std::string>());
        try {
            t.asset_classes.push_back(parse_class(r.string(a, "class", "")));
        } catch (const DataError&) {
            r.fail("asset '" + t.asset_ids.back() + "' needs a class A-D");
        }
        t.sectors.push_back(r.string(a, "sector", "S1"));
        t.market_caps.push_back(r.number(a, "market_cap", 1.0));
        if (!(t.market_caps.back() > 0.0)) r.fail("asset '" + t.asset_ids.back() + "' has a non-positive market_cap");
    }
    VineStructure s;
    try {
        s = build_structure(t.asset_ids, t.asset_classes);
    } catch (const DataError& e) {
        r.fail(e.what());
    }

    GarchParams base{0.05, 0.05, 0.90, 6.0};
    if (j.contains("marginal")) base = r.garch(j["marginal"], base);
    t.marginals.assign(s.n_nodes(), base);
    if (j.contains("marginals")) {
        if (!j["marginals"].is_object()) r.fail("'marginals' must map node ids to parameters");
        for (const auto& [id, params] : j["marginals"].items()) {
            const auto it = std::find(s.nodes.begin(), s.nodes.end(), id);
            if (it == s.nodes.end()) r.fail("marginal for unknown node '" + id + "'");
            t.marginals[static_cast<std::size_t>(it - s.nodes.begin())] = r.garch(params, base);
        }
    }

    const PairCopula fallback = j.contains("default_edge") ? r.copula(j["default_edge"], "default_edge")
                                                           : independence_copula();
    std::vector<std::vector<PairCopula>> copulas(s.trees.size());
    for (std::size_t m = 0; m < s.trees.size(); ++m) {
        PairCopula tree_default = fallback;
        if (j.contains("tree_defaults")) {
            const auto& td = j["tree_defaults"];
            if (!td.is_array()) r.fail("'tree_defaults' must be an array");
            if (m < td.size() && !td[m].is_null()) tree_default = r.copula(td[m], "tree_defaults[" + std::to_string(m) + "]");
        }
        copulas[m].assign(s.trees[m].size(), tree_default);
    }
    if (j.contains("edges")) {
        if (!j["edges"].is_array()) r.fail("'edges' must be an array");
        for (std::size_t k = 0; k < j["edges"].size(); ++k) {
            const auto& ej = j["edges"][k];
            const std::string where = "edges[" + std::to_string(k) + "]";
            if (!ej.is_object()) r.fail(where + " must be an object");
            std::vector<std::string> pair{r.string(ej, "first", ""), r.string(ej, "second", "")};
            std::sort(pair.begin(), pair.end());
            std::vector<std::string> cond;
            if (ej.contains("conditioning")) {
                if (!ej["conditioning"].is_array()) r.fail(where + ": 'conditioning' must be an array");
                for (const auto& c : ej["conditioning"]) {
                    if (!c.is_string()) r.fail(where + ": 'conditioning' must hold node ids");
                    cond.push_back(c.get<std::string>());
                }
            }
            std::sort(cond.begin(), cond.end());
            bool matched = false;
            for (std::size_t m = 0; m < s.trees.size() && !matched; ++m) {
                for (std::size_t e = 0; e < s.trees[m].size(); ++e) {
                    const Edge& edge = s.trees[m][e];
                    if (sorted_ids(s, {edge.first, edge.second}) == pair && sorted_ids(s, edge.conditioning) == cond) {
                        copulas[m][e] = r.copula(ej, where);
                        matched = true;
                        break;
                    }
                }
            }
            if (!matched) r.fail(where + " (" + pair[0] + "," + pair[1] + ") is not an edge of the template");
        }
    }
    t.model = make_vine_model(s, std::move(copulas), Catalog::Parametric, t.days);
    return t;
}

StageResult run_simulate(const RunConfig& config) {
    config.validate();
    if (config.truth.empty()) throw ConfigError("simulate needs a truth file (truth=...)");
    std::string text;
    try {
        text = read_file(config.truth);
    } catch (const DataError& e) {
        throw DataError(std::string("invalid truth file: ") + e.what());
    }
    SimulationTruth truth = parse_truth(text, config.truth.string());
    VineModel& model = truth.model;
    const VineStructure& s = model.structure;
    const std::size_t n_assets = truth.asset_ids.size();

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + config.output_dir.string() + "': " + ec.message());

    const auto dates = weekday_calendar(truth.start_date, truth.days);
    const int first_year = std::stoi(dates.front().substr(0, 4));
    const int last_year = std::stoi(dates.back().substr(0, 4));
    const std::string label =
        truth.period_label.empty() ? std::to_string(first_year) + "-" + std::to_string(last_year) : truth.period_label;

    // Copula sample, then GARCH-t paths started at the stationary variance.
    const auto u = sample_vine(model, truth.days, stream_seed(config.seed, 0));
    std::vector<std::vector<double>> returns(s.n_nodes(), std::vector<double>(truth.days));
    for (std::size_t node = 0; node < s.n_nodes(); ++node) {
        const GarchParams& p = truth.marginals[node];
        double var = p.gamma0 / (1.0 - p.gamma1 - p.beta1);
        for (std::size_t t = 0; t < truth.days; ++t) {
            if (t > 0) var = p.gamma0 + p.gamma1 * returns[node][t - 1] * returns[node][t - 1] + p.beta1 * var;
            returns[node][t] = std::sqrt(var) * standardized_t_quantile(u[node][t], p.nu);
        }
    }

    StageResult result;
    const auto save = [&](const std::string& name, const std::string& body) {
        const fs::path path = config.output_dir / name;
        write_file_atomic(path, body);
        result.written.push_back(path);
    };
    std::string body = "date";
    for (const auto& id : truth.asset_ids) body += "," + csv::escape(id);
    body += "\n";
    for (std::size_t t = 0; t < truth.days; ++t) {
        body += dates[t];
        for (std::size_t j = 0; j < n_assets; ++j) body += "," + csv::format_double(returns[kIndexNodeIds.size() + j][t]);
        body += "\n";
    }
    save("returns.csv", body);
    body = "date,return\n";
    for (std::size_t t = 0; t < truth.days; ++t) {
        body += dates[t] + "," + csv::format_double(returns[kMarketNode][t]) + "\n";
    }
    save("market.csv", body);
    body = "asset_id,sector,market_cap\n";
    for (std::size_t j = 0; j < n_assets; ++j) {
        body += csv::escape(truth.asset_ids[j]) + "," + csv::escape(truth.sectors[j]) + "," +
                csv::format_double(truth.market_caps[j]) + "\n";
    }
    save("meta.csv", body);
    body = "year";
    for (const auto& id : truth.asset_ids) body += "," + csv::escape(id);
    body += "\n";
    for (int y = first_year; y <= last_year; ++y) {
        body += std::to_string(y);
        for (std::size_t j = 0; j < n_assets; ++j) body += "," + csv::format_double(class_score(truth.asset_classes[j]));
        body += "\n";
    }
    save("esg.csv", body);

    std::string ini = "# synthetic panel; classes come from the truth file\n";
    ini += "data_dir = .\n";
    ini += "periods = " + label + "=" + std::to_string(first_year) + "-" + std::to_string(last_year) + "\n";
    ini += "classification_mode = threshold\n";
    ini += "catalog = " + config.catalog + "\n";
    ini += "psi0 = " + csv::format_double(config.psi0) + "\n";
    ini += "lambda_policy = " + config.lambda_policy + "\n";
    ini += "seed = " + std::to_string(config.seed) + "\n";
    ini += "min_length = " + std::to_string(config.min_length) + "\n";
    ini += "output_dir = .\n";
    save("sim_config.ini", ini);

    RunConfig sim = parse_config(ini, config.output_dir);
    sim.validate();
    const std::string digest = panel_digest(sim);
    const std::string header = provenance_header(sim, digest);

    const auto weights = class_weights(truth.asset_classes, truth.market_caps);
    std::string classes = header + "period,asset_id,sector,mean_esg,class\n";
    std::string wts = header + "period,asset_id,class,weight\n";
    std::vector<ClassifiedAsset> classified;
    for (std::size_t j = 0; j < n_assets; ++j) {
        const std::string k(1, class_letter(truth.asset_classes[j]));
        const double score = class_score(truth.asset_classes[j]);
        classes += label + "," + csv::escape(truth.asset_ids[j]) + "," + csv::escape(truth.sectors[j]) + "," +
                   csv::format_double(score) + "," + k + "\n";
        wts += label + "," + csv::escape(truth.asset_ids[j]) + "," + k + "," + csv::format_double(weights[j]) + "\n";
        classified.push_back(ClassifiedAsset{truth.asset_ids[j], truth.sectors[j], score, truth.asset_classes[j], weights[j]});
    }
    std::string indices = header + "period,date,I_A,I_B,I_C,I_D\n";
    for (std::size_t t = 0; t < truth.days; ++t) {
        indices += label + "," + dates[t];
        for (EsgClass k : kEsgClasses) indices += "," + csv::format_double(returns[class_index_node(k)][t]);
        indices += "\n";
    }
    save("classes.csv", classes);
    save("weights.csv", wts);
    save("indices.csv", indices);

    // Truth archive: edge log-likelihoods and empirical taus on the drawn sample.
    const auto data = edge_pseudo_data(model, u);
    for (std::size_t m = 0; m < data.size(); ++m) {
        for (std::size_t e = 0; e < data[m].size(); ++e) {
            model.copulas[m][e].loglik = loglik(model.copulas[m][e], data[m][e].first, data[m][e].second);
            model.empirical_taus[m][e] = empirical_tau(data[m][e].first, data[m][e].second);
        }
    }
    model.psi0 = config.psi0;
    refresh_statistics(model);

    ModelArchive archive;
    archive.panel_digest = digest;
    archive.config_digest = sim.digest();
    archive.period = Period{label, first_year, last_year};
    archive.classification = classified;
    for (std::size_t node = 0; node < s.n_nodes(); ++node) {
        archive.marginals.push_back(MarginalRecord{s.nodes[node], truth.days, 0.0, truth.marginals[node],
                                                   garch_loglik(truth.marginals[node], returns[node]), true});
    }
    archive.vine = model;
    archive.risk = asset_risk_rows(model, label);
    save_archive(archive, config.output_dir / "truth.json");
    result.written.push_back(config.output_dir / "truth.json");
    return result;
}

}  // namespace esgvine
