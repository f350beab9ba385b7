#include "esgvine/store.hpp"

#include "esgvine/error.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <unistd.h>

namespace esgvine {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json shares_json(const RiskShares& s) {
    return json{{"esg", number(s.esg)},
                {"market", number(s.market)},
                {"idio", number(s.idio)},
                {"degenerate", s.degenerate},
                {"boundary", s.boundary}};
}

json edge_json(const VineStructure& s, const Edge& e, const PairCopula& pc, double empirical_tau) {
    json cond = json::array();
    for (std::size_t c : e.conditioning) cond.push_back(s.nodes[c]);
    json params = json::array();
    for (double p : pc.params) params.push_back(p);
    return json{{"first", s.nodes[e.first]},
                {"second", s.nodes[e.second]},
                {"conditioning", cond},
                {"family", family_key(pc.family)},
                {"params", params},
                {"tau", number(pc.tau)},
                {"lambda_lower", number(pc.lambda_lower)},
                {"lambda_upper", number(pc.lambda_upper)},
                {"loglik", number(pc.loglik)},
                {"n_params", pc.n_params},
                {"boundary", pc.boundary},
                {"empirical_tau", number(empirical_tau)}};
}

json vine_json(const VineModel& m) {
    json trees = json::array();
    for (std::size_t t = 0; t < m.structure.trees.size(); ++t) {
        json edges = json::array();
        for (std::size_t e = 0; e < m.structure.trees[t].size(); ++e) {
            const double emp = t < m.empirical_taus.size() && e < m.empirical_taus[t].size() ? m.empirical_taus[t][e]
                                                                                               : std::nan("");
            edges.push_back(edge_json(m.structure, m.structure.trees[t][e], m.copulas[t][e], emp));
        }
        trees.push_back(json{{"tree", t + 1}, {"edges", edges}});
    }
    json classes = json::array();
    for (EsgClass k : m.structure.asset_classes) classes.push_back(std::string(1, class_letter(k)));
    return json{{"catalog", catalog_name(m.catalog)},
                {"nobs", m.nobs},
                {"psi0", m.psi0},
                {"loglik", number(m.loglik)},
                {"npars", m.npars},
                {"aic", number(m.aic)},
                {"bic", number(m.bic)},
                {"mbic", number(m.mbic)},
                {"nodes", m.structure.nodes},
                {"asset_classes", classes},
                {"trees", trees}};
}

// ---- reading ---------------------------------------------------------------

[[noreturn]] void schema_error(const std::string& source, const std::string& where, const std::string& what) {
    throw ArchiveError("schema violation in " + source + " at " + where + ": " + what);
}

struct Reader {
    std::string source;

    const json& field(const json& obj, const std::string& key, const std::string& where) const {
        if (!obj.is_object()) schema_error(source, where, "expected an object");
        const auto it = obj.find(key);
        if (it == obj.end()) schema_error(source, where, "missing key '" + key + "'");
        return *it;
    }
    double num(const json& obj, const std::string& key, const std::string& where, bool nullable = false) const {
        const json& v = field(obj, key, where);
        if (nullable && v.is_null()) return std::nan("");
        if (!v.is_number()) schema_error(source, where + "." + key, "expected a number");
        return v.get<double>();
    }
    std::size_t count(const json& obj, const std::string& key, const std::string& where) const {
        const json& v = field(obj, key, where);
        if (!v.is_number_unsigned()) schema_error(source, where + "." + key, "expected a non-negative integer");
        return v.get<std::size_t>();
    }
    int integer(const json& obj, const std::string& key, const std::string& where) const {
        const json& v = field(obj, key, where);
        if (!v.is_number_integer()) schema_error(source, where + "." + key, "expected an integer");
        return v.get<int>();
    }
    std::string str(const json& obj, const std::string& key, const std::string& where) const {
        const json& v = field(obj, key, where);
        if (!v.is_string()) schema_error(source, where + "." + key, "expected a string");
        return v.get<std::string>();
    }
    bool boolean(const json& obj, const std::string& key, const std::string& where) const {
        const json& v = field(obj, key, where);
        if (!v.is_boolean()) schema_error(source, where + "." + key, "expected a boolean");
        return v.get<bool>();
    }
    const json& array(const json& obj, const std::string& key, const std::string& where) const {
        const json& v = field(obj, key, where);
        if (!v.is_array()) schema_error(source, where + "." + key, "expected an array");
        return v;
    }
    EsgClass esg_class(const std::string& text, const std::string& where) const {
        if (text.size() != 1 || text[0] < 'A' || text[0] > 'D') schema_error(source, where, "bad class '" + text + "'");
        return static_cast<EsgClass>(text[0]);
    }

    RiskShares shares(const json& obj, const std::string& where) const {
        RiskShares s;
        s.esg = num(obj, "esg", where);
        s.market = num(obj, "market", where);
        s.idio = num(obj, "idio", where);
        s.degenerate = boolean(obj, "degenerate", where);
        s.boundary = boolean(obj, "boundary", where);
        return s;
    }

    VineModel vine(const json& v) const {
        const std::string w = "vine";
        VineModel m;
        try {
            m.catalog = parse_catalog(str(v, "catalog", w));
        } catch (const ConfigError& e) {
            schema_error(source, w + ".catalog", e.what());
        }
        m.nobs = count(v, "nobs", w);
        m.psi0 = num(v, "psi0", w);
        m.loglik = num(v, "loglik", w);
        m.npars = count(v, "npars", w);
        m.aic = num(v, "aic", w);
        m.bic = num(v, "bic", w);
        m.mbic = num(v, "mbic", w);
        for (const auto& n : array(v, "nodes", w)) {
            if (!n.is_string()) schema_error(source, w + ".nodes", "expected strings");
            m.structure.nodes.push_back(n.get<std::string>());
        }
        for (const auto& c : array(v, "asset_classes", w)) {
            if (!c.is_string()) schema_error(source, w + ".asset_classes", "expected strings");
            m.structure.asset_classes.push_back(esg_class(c.get<std::string>(), w + ".asset_classes"));
        }
        if (m.structure.nodes.size() != m.structure.asset_classes.size() + kIndexNodeIds.size()) {
            schema_error(source, w, "node list and asset classes disagree");
        }
        const auto node_of = [&](const std::string& id, const std::string& where) {
            const auto it = std::find(m.structure.nodes.begin(), m.structure.nodes.end(), id);
            if (it == m.structure.nodes.end()) schema_error(source, where, "unknown node '" + id + "'");
            return static_cast<std::size_t>(it - m.structure.nodes.begin());
        };
        const json& trees = array(v, "trees", w);
        for (std::size_t t = 0; t < trees.size(); ++t) {
            const std::string tw = w + ".trees[" + std::to_string(t) + "]";
            if (count(trees[t], "tree", tw) != t + 1) schema_error(source, tw + ".tree", "trees out of order");
            std::vector<Edge> edges;
            std::vector<PairCopula> copulas;
            std::vector<double> emp;
            const json& list = array(trees[t], "edges", tw);
            for (std::size_t e = 0; e < list.size(); ++e) {
                const std::string ew = tw + ".edges[" + std::to_string(e) + "]";
                const json& ej = list[e];
                Edge edge;
                edge.first = node_of(str(ej, "first", ew), ew + ".first");
                edge.second = node_of(str(ej, "second", ew), ew + ".second");
                for (const auto& c : array(ej, "conditioning", ew)) {
                    if (!c.is_string()) schema_error(source, ew + ".conditioning", "expected strings");
                    edge.conditioning.push_back(node_of(c.get<std::string>(), ew + ".conditioning"));
                }
                PairCopula pc;
                try {
                    pc.family = parse_family_key(str(ej, "family", ew));
                } catch (const DataError& err) {
                    schema_error(source, ew + ".family", err.what());
                }
                for (const auto& p : array(ej, "params", ew)) {
                    if (!p.is_number()) schema_error(source, ew + ".params", "expected numbers");
                    pc.params.push_back(p.get<double>());
                }
                try {
                    check_params(pc.family, pc.params);
                } catch (const ParameterError& err) {
                    throw ArchiveError("domain violation in " + source + " at edge " +
                                       edge_label(m.structure, edge) + " (tree " + std::to_string(t + 1) +
                                       "): " + err.what());
                }
                pc.tau = num(ej, "tau", ew);
                pc.lambda_lower = num(ej, "lambda_lower", ew);
                pc.lambda_upper = num(ej, "lambda_upper", ew);
                pc.loglik = num(ej, "loglik", ew);
                pc.n_params = count(ej, "n_params", ew);
                pc.boundary = boolean(ej, "boundary", ew);
                emp.push_back(num(ej, "empirical_tau", ew, true));
                edges.push_back(std::move(edge));
                copulas.push_back(std::move(pc));
            }
            m.structure.trees.push_back(std::move(edges));
            m.copulas.push_back(std::move(copulas));
            m.empirical_taus.push_back(std::move(emp));
        }
        try {
            validate_structure(m.structure);
        } catch (const DataError& err) {
            schema_error(source, w + ".trees", err.what());
        }
        return m;
    }
};

std::string to_hex(const unsigned char* data, unsigned int n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (unsigned int i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

}  // namespace

std::string archive_to_json(const ModelArchive& a) {
    json j;
    j["format_version"] = a.format_version;
    j["panel_digest"] = a.panel_digest;
    j["config_digest"] = a.config_digest;
    j["period"] = json{{"label", a.period.label}, {"first_year", a.period.first_year}, {"last_year", a.period.last_year}};
    json cls = json::array();
    for (const auto& c : a.classification) {
        cls.push_back(json{{"id", c.id},
                           {"sector", c.sector},
                           {"mean_score", number(c.mean_score)},
                           {"class", std::string(1, class_letter(c.asset_class))},
                           {"weight", number(c.weight)}});
    }
    j["classification"] = cls;
    json marg = json::array();
    for (const auto& m : a.marginals) {
        marg.push_back(json{{"series", m.series},
                            {"nobs", m.nobs},
                            {"mean", number(m.mean)},
                            {"gamma0", number(m.params.gamma0)},
                            {"gamma1", number(m.params.gamma1)},
                            {"beta1", number(m.params.beta1)},
                            {"nu", number(m.params.nu)},
                            {"loglik", number(m.loglik)},
                            {"converged", m.converged}});
    }
    j["marginals"] = marg;
    j["vine"] = a.vine ? vine_json(*a.vine) : json(nullptr);
    json risk = json::array();
    for (const auto& r : a.risk) {
        risk.push_back(json{{"asset", r.asset},
                            {"class", std::string(1, class_letter(r.asset_class))},
                            {"period", r.period},
                            {"tau", shares_json(r.tau)},
                            {"lambda", shares_json(r.lambda)},
                            {"tau_emp", shares_json(r.tau_empirical)}});
    }
    j["risk"] = risk;
    return j.dump(1) + "\n";
}

ModelArchive archive_from_json(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ArchiveError("schema violation in " + source + ": not a complete JSON document (" + e.what() + ")");
    }
    const Reader r{source};
    ModelArchive a;
    a.format_version = r.integer(j, "format_version", "$");
    if (a.format_version > kArchiveFormatVersion || a.format_version < 1) {
        throw ArchiveError("unsupported format_version " + std::to_string(a.format_version) + " in " + source +
                           " (this build reads version " + std::to_string(kArchiveFormatVersion) + ")");
    }
    a.panel_digest = r.str(j, "panel_digest", "$");
    a.config_digest = r.str(j, "config_digest", "$");
    const json& p = r.field(j, "period", "$");
    a.period.label = r.str(p, "label", "$.period");
    a.period.first_year = r.integer(p, "first_year", "$.period");
    a.period.last_year = r.integer(p, "last_year", "$.period");

    const json& cls = r.array(j, "classification", "$");
    for (std::size_t i = 0; i < cls.size(); ++i) {
        const std::string w = "$.classification[" + std::to_string(i) + "]";
        ClassifiedAsset c;
        c.id = r.str(cls[i], "id", w);
        c.sector = r.str(cls[i], "sector", w);
        c.mean_score = r.num(cls[i], "mean_score", w);
        c.asset_class = r.esg_class(r.str(cls[i], "class", w), w + ".class");
        c.weight = r.num(cls[i], "weight", w);
        a.classification.push_back(c);
    }
    const json& marg = r.array(j, "marginals", "$");
    for (std::size_t i = 0; i < marg.size(); ++i) {
        const std::string w = "$.marginals[" + std::to_string(i) + "]";
        MarginalRecord m;
        m.series = r.str(marg[i], "series", w);
        m.nobs = r.count(marg[i], "nobs", w);
        m.mean = r.num(marg[i], "mean", w);
        m.params.gamma0 = r.num(marg[i], "gamma0", w);
        m.params.gamma1 = r.num(marg[i], "gamma1", w);
        m.params.beta1 = r.num(marg[i], "beta1", w);
        m.params.nu = r.num(marg[i], "nu", w);
        m.loglik = r.num(marg[i], "loglik", w);
        m.converged = r.boolean(marg[i], "converged", w);
        a.marginals.push_back(m);
    }
    const json& vine = r.field(j, "vine", "$");
    if (!vine.is_null()) a.vine = r.vine(vine);
    const json& risk = r.array(j, "risk", "$");
    for (std::size_t i = 0; i < risk.size(); ++i) {
        const std::string w = "$.risk[" + std::to_string(i) + "]";
        AssetRiskRow row;
        row.asset = r.str(risk[i], "asset", w);
        row.asset_class = r.esg_class(r.str(risk[i], "class", w), w + ".class");
        row.period = r.str(risk[i], "period", w);
        row.tau = r.shares(r.field(risk[i], "tau", w), w + ".tau");
        row.lambda = r.shares(r.field(risk[i], "lambda", w), w + ".lambda");
        row.tau_empirical = r.shares(r.field(risk[i], "tau_emp", w), w + ".tau_emp");
        a.risk.push_back(row);
    }
    return a;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + path.string() + "': unable to create temporary file");
        out << text;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw DataError("cannot write '" + path.string() + "': write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot write '" + path.string() + "': " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_archive(const ModelArchive& archive, const std::filesystem::path& path) {
    write_file_atomic(path, archive_to_json(archive));
}

ModelArchive load_archive(const std::filesystem::path& path, const std::optional<std::string>& expected_panel_digest) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError& e) {
        throw ArchiveError(e.what());
    }
    ModelArchive a = archive_from_json(text, path.string());
    if (expected_panel_digest && a.panel_digest != *expected_panel_digest) {
        throw ArchiveError("panel digest mismatch in " + path.string() + ": archive " + a.panel_digest +
                           ", inputs " + *expected_panel_digest);
    }
    return a;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw DataError("SHA-256 digest failed");
    }
    return to_hex(digest, len);
}

std::string files_digest(const std::vector<std::filesystem::path>& files) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw DataError("SHA-256 init failed");
    for (const auto& f : files) {
        const std::string bytes = read_file(f);
        const std::string size = std::to_string(bytes.size()) + ":";
        EVP_DigestUpdate(ctx.get(), size.data(), size.size());
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    return to_hex(digest, len);
}

}  // namespace esgvine
