#include "esgvine/config.hpp"

#include "esgvine/csv.hpp"
#include "esgvine/error.hpp"
#include "esgvine/store.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esgvine {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double config_double(const std::string& key, const std::string& value) {
    try {
        return csv::parse_double(value, key);
    } catch (const DataError&) {
        throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
    }
}

std::uint64_t config_unsigned(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != value.size() || value.empty()) {
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
    }
    return v;
}

std::vector<double> config_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& cell : csv::split_line(value)) out.push_back(config_double(key, trim(cell)));
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    const std::filesystem::path p(value);
    if (p.is_absolute() || base.empty()) return p.lexically_normal();
    return (base / p).lexically_normal();
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + csv::format_double(v[i]);
    return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "data_dir", "returns",     "esg",         "meta",          "market", "periods", "classification_mode",
        "thresholds",  "catalog",     "psi0",          "var_levels", "lambda_policy", "seed",
        "min_length",  "truth",       "output_dir",    "workers"};
    return keys;
}

void RunConfig::set(const std::string& key, const std::string& raw, const std::filesystem::path& base_dir) {
    const std::string value = trim(raw);
    if (key == "returns") returns = resolve(base_dir, value);
    else if (key == "esg") esg = resolve(base_dir, value);
    else if (key == "meta") meta = resolve(base_dir, value);
    else if (key == "market") market = resolve(base_dir, value);
    else if (key == "data_dir") {
        const auto dir = resolve(base_dir, value);
        returns = dir / "returns.csv";
        esg = dir / "esg.csv";
        meta = dir / "meta.csv";
        market = dir / "market.csv";
    } else if (key == "periods") periods.periods = parse_periods(value);
    else if (key == "classification_mode") {
        if (value == "quartile") periods.mode = ClassificationMode::Quartile;
        else if (value == "threshold") periods.mode = ClassificationMode::Threshold;
        else throw ConfigError("classification_mode must be quartile or threshold, got '" + value + "'");
    } else if (key == "thresholds") {
        const auto t = config_list(key, value);
        if (t.size() != 3) throw ConfigError("thresholds expects three values, got '" + value + "'");
        periods.thresholds = {t[0], t[1], t[2]};
    } else if (key == "catalog") catalog = value;
    else if (key == "psi0") psi0 = config_double(key, value);
    else if (key == "var_levels") var_levels = config_list(key, value);
    else if (key == "lambda_policy") lambda_policy = value;
    else if (key == "seed") seed = config_unsigned(key, value);
    else if (key == "min_length") min_length = config_unsigned(key, value);
    else if (key == "truth") truth = value.empty() ? std::filesystem::path{} : resolve(base_dir, value);
    else if (key == "output_dir") output_dir = resolve(base_dir, value);
    else if (key == "workers") workers = config_unsigned(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    periods.validate();
    if (catalog != "all") parse_catalog(catalog);
    if (!(psi0 > 0.0 && psi0 < 1.0)) throw ConfigError("psi0 must lie in (0,1)");
    if (var_levels.empty()) throw ConfigError("var_levels must not be empty");
    for (double l : var_levels) {
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("VaR level " + csv::format_double(l) + " outside (0,1)");
    }
    if (lambda_policy != "both" && lambda_policy != "include_all" && lambda_policy != "drop_zeros_and_ones") {
        throw ConfigError("lambda_policy must be include_all, drop_zeros_and_ones or both");
    }
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (min_length < 10) throw ConfigError("min_length must be at least 10");
}

std::vector<Catalog> RunConfig::catalogs() const {
    if (catalog == "all") return {Catalog::Itau, Catalog::Parametric, Catalog::Gaussian};
    return {parse_catalog(catalog)};
}

std::vector<LambdaPolicy> RunConfig::policies() const {
    if (lambda_policy == "include_all") return {LambdaPolicy::IncludeAll};
    if (lambda_policy == "drop_zeros_and_ones") return {LambdaPolicy::DropZerosAndOnes};
    return {LambdaPolicy::IncludeAll, LambdaPolicy::DropZerosAndOnes};
}

PanelFiles RunConfig::panel_files() const { return PanelFiles{returns, esg, meta, market}; }

// output_dir and workers do not change any result, so they stay out of the
// echo and the digest.
std::string RunConfig::echo() const {
    std::ostringstream out;
    out << "returns=" << returns.string() << "\n";
    out << "esg=" << esg.string() << "\n";
    out << "meta=" << meta.string() << "\n";
    out << "market=" << market.string() << "\n";
    out << "periods=";
    for (std::size_t i = 0; i < periods.periods.size(); ++i) {
        const auto& p = periods.periods[i];
        out << (i ? "," : "") << p.label << "=" << p.first_year << "-" << p.last_year;
    }
    out << "\n";
    out << "classification_mode=" << (periods.mode == ClassificationMode::Quartile ? "quartile" : "threshold") << "\n";
    out << "thresholds="
        << join({periods.thresholds[0], periods.thresholds[1], periods.thresholds[2]}) << "\n";
    out << "catalog=" << catalog << "\n";
    out << "psi0=" << csv::format_double(psi0) << "\n";
    out << "var_levels=" << join(var_levels) << "\n";
    out << "lambda_policy=" << lambda_policy << "\n";
    out << "seed=" << seed << "\n";
    out << "min_length=" << min_length << "\n";
    out << "truth=" << truth.string() << "\n";
    return out.str();
}

std::string RunConfig::digest() const { return sha256_hex(echo()); }

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        try {
            cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.parent_path());
}

}  // namespace esgvine
