#include "esgvine/pipeline.hpp"

#include "esgvine/csv.hpp"
#include "esgvine/error.hpp"
#include "esgvine/garch.hpp"
#include "esgvine/panel.hpp"
#include "esgvine/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace esgvine {

namespace fs = std::filesystem;

namespace {

std::string join_cells(const std::vector<std::string>& cells, const std::string& sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += sep;
        out += sep == "," ? csv::escape(cells[i]) : cells[i];
    }
    return out;
}

// Accumulates a CSV body under the provenance header.
class CsvOut {
public:
    CsvOut(const RunConfig& config, const std::string& panel) : text_(provenance_header(config, panel)) {}
    void row(const std::vector<std::string>& cells) { text_ += join_cells(cells) + "\n"; }
    void save(const fs::path& path, StageResult& result) const {
        write_file_atomic(path, text_);
        result.written.push_back(path);
    }

private:
    std::string text_;
};

std::string num(double v) { return csv::format_double(v); }
std::string opt_num(const std::optional<double>& v) { return v ? csv::format_double(*v) : "NA"; }
std::string letter(EsgClass k) { return std::string(1, class_letter(k)); }

std::string safe_label(const std::string& label) {
    std::string out = label;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    }
    return out;
}

// Value of a "# key: value" provenance line, or empty when absent.
std::string provenance_value(const fs::path& path, const std::string& key) {
    std::ifstream in(path);
    std::string line;
    const std::string prefix = "# " + key + ": ";
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return "";
}

fs::path require_file(const fs::path& path, const std::string& stage) {
    if (!fs::exists(path)) {
        throw DataError(stage + ": missing '" + path.string() + "'; run the earlier stage first");
    }
    return path;
}

void ensure_output_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + config.output_dir.string() + "': " + ec.message());
}

// ---- classification outputs, read back by fit -------------------------------

struct PeriodInputs {
    std::vector<ClassifiedAsset> assets;
    std::vector<std::string> dates;
    std::array<std::optional<std::vector<double>>, 4> indices;
};

std::map<std::string, PeriodInputs> read_classification(const RunConfig& config, const std::string& digest) {
    const fs::path classes_path = require_file(config.output_dir / "classes.csv", "fit");
    const fs::path weights_path = require_file(config.output_dir / "weights.csv", "fit");
    const fs::path indices_path = require_file(config.output_dir / "indices.csv", "fit");
    for (const auto& p : {classes_path, weights_path, indices_path}) {
        const std::string found = provenance_value(p, "panel_digest");
        if (found != digest) {
            throw DataError("fit: '" + p.string() + "' was built from different inputs (panel digest " +
                            (found.empty() ? std::string("missing") : found) + ", current " + digest +
                            "); rerun classify");
        }
    }
    std::map<std::string, PeriodInputs> out;
    const auto classes = csv::read(classes_path);
    const std::size_t c_period = classes.column("period"), c_id = classes.column("asset_id"),
                      c_sector = classes.column("sector"), c_score = classes.column("mean_esg"),
                      c_class = classes.column("class");
    for (std::size_t r = 0; r < classes.rows.size(); ++r) {
        const auto& row = classes.rows[r];
        const std::string ctx = classes_path.string() + " line " + std::to_string(classes.line_numbers[r]);
        ClassifiedAsset a;
        a.id = row.at(c_id);
        a.sector = row.at(c_sector);
        a.mean_score = csv::parse_double(row.at(c_score), ctx);
        a.asset_class = parse_class(row.at(c_class));
        out[row.at(c_period)].assets.push_back(a);
    }
    const auto weights = csv::read(weights_path);
    const std::size_t w_period = weights.column("period"), w_id = weights.column("asset_id"),
                      w_weight = weights.column("weight");
    for (std::size_t r = 0; r < weights.rows.size(); ++r) {
        const auto& row = weights.rows[r];
        auto& assets = out[row.at(w_period)].assets;
        const auto it = std::find_if(assets.begin(), assets.end(), [&](const auto& a) { return a.id == row.at(w_id); });
        if (it == assets.end()) throw DataError(weights_path.string() + ": unknown asset '" + row.at(w_id) + "'");
        it->weight = csv::parse_double(row.at(w_weight), weights_path.string());
    }
    const auto indices = csv::read(indices_path);
    const std::size_t i_period = indices.column("period"), i_date = indices.column("date");
    std::array<std::size_t, 4> i_cols{};
    for (EsgClass k : kEsgClasses) i_cols[class_slot(k)] = indices.column(kIndexNodeIds[class_index_node(k)]);
    for (std::size_t r = 0; r < indices.rows.size(); ++r) {
        const auto& row = indices.rows[r];
        auto& p = out[row.at(i_period)];
        p.dates.push_back(row.at(i_date));
        for (std::size_t k = 0; k < 4; ++k) {
            const std::string& cell = row.at(i_cols[k]);
            if (cell.empty()) continue;
            if (!p.indices[k]) p.indices[k].emplace();
            p.indices[k]->push_back(csv::parse_double(cell, indices_path.string() + " line " +
                                                                std::to_string(indices.line_numbers[r])));
        }
    }
    return out;
}

// ---- archives ------------------------------------------------------------------

struct Run {
    Period period;
    Catalog catalog;
    ModelArchive archive;
};

std::vector<Run> load_runs(const RunConfig& config, const std::string& digest, const std::string& stage) {
    std::vector<Run> runs;
    for (const auto& period : config.periods.periods) {
        for (Catalog c : config.catalogs()) {
            const fs::path path = require_file(config.output_dir / archive_name(period.label, c), stage);
            ModelArchive a = load_archive(path, digest);
            if (!a.vine) throw ArchiveError(path.string() + ": archive has no vine model");
            runs.push_back(Run{period, c, std::move(a)});
        }
    }
    return runs;
}

std::vector<ComparisonRow> comparison_rows(const RunConfig& config, const std::vector<Run>& runs) {
    std::vector<ComparisonRow> rows;
    for (const auto& period : config.periods.periods) {
        std::vector<ComparisonEntry> entries;
        for (const auto& run : runs) {
            if (run.period.label == period.label) {
                entries.push_back(ComparisonEntry{catalog_name(run.catalog), period.label, &*run.archive.vine});
            }
        }
        const auto ranked = compare_models(entries);
        rows.insert(rows.end(), ranked.begin(), ranked.end());
    }
    return rows;
}

std::string short_catalog(Catalog c) {
    switch (c) {
        case Catalog::Itau: return "itau";
        case Catalog::Parametric: return "par";
        case Catalog::Gaussian: return "gaus";
    }
    return "itau";
}

const char* kRiskTypes[3] = {"ESG Risk", "Market Risk", "Idiosyncratic Risk"};

void write_aggregate(const RunConfig& config, const std::string& digest, const AggregateTable& table,
                     const fs::path& path, StageResult& result) {
    CsvOut out(config, digest);
    std::vector<std::string> top{"Type of Risk"}, second{"Year"};
    for (const char* type : kRiskTypes) {
        for (EsgClass k : kEsgClasses) {
            top.push_back(k == EsgClass::A ? type : "");
            second.push_back(letter(k));
        }
    }
    out.row(top);
    out.row(second);
    for (std::size_t p = 0; p < table.periods.size(); ++p) {
        std::vector<std::string> cells{table.periods[p]};
        for (const auto& v : table.values[p]) cells.push_back(opt_num(v));
        out.row(cells);
    }
    out.save(path, result);
}

std::string policy_suffix(LambdaPolicy p) {
    return p == LambdaPolicy::IncludeAll ? "include_all" : "drop_zeros_and_ones";
}

}  // namespace

// ---- shared helpers ----------------------------------------------------------------

std::string panel_digest(const RunConfig& config) {
    return files_digest({config.returns, config.esg, config.meta, config.market});
}

std::string archive_name(const std::string& period_label, Catalog catalog) {
    return "model_" + safe_label(period_label) + "_" + catalog_name(catalog) + ".json";
}

std::string provenance_header(const RunConfig& config, const std::string& panel) {
    std::string out = "# config_digest: " + config.digest() + "\n";
    if (!panel.empty()) out += "# panel_digest: " + panel + "\n";
    std::istringstream echo(config.echo());
    std::string line;
    while (std::getline(echo, line)) out += "# config: " + line + "\n";
    return out;
}

std::string comparison_csv_row(const ComparisonRow& row) {
    return join_cells({row.model, row.period, std::to_string(row.nobs), csv::format_fixed(row.loglik, 2),
                       std::to_string(row.npars), csv::format_fixed(row.mbic, 2)});
}

std::string comparison_tex_row(const ComparisonRow& row) {
    return join_cells({row.model, row.period, std::to_string(row.nobs), csv::format_fixed(row.loglik, 2),
                       std::to_string(row.npars), csv::format_fixed(row.mbic, 2)},
                      " & ");
}

std::string tex_row(const std::string& label, const std::vector<std::optional<double>>& values, int decimals) {
    std::vector<std::string> cells{label};
    for (const auto& v : values) cells.push_back(v ? csv::format_fixed(*v, decimals) : "--");
    return join_cells(cells, " & ");
}

CensusTable census_table(const std::vector<std::pair<std::string, const VineModel*>>& models, std::size_t tree) {
    CensusTable t;
    for (std::size_t p = 0; p < models.size(); ++p) {
        t.periods.push_back(models[p].first);
        for (const auto& [id, n] : family_census(*models[p].second, tree)) {
            auto it = std::find(t.families.begin(), t.families.end(), id);
            if (it == t.families.end()) {
                t.families.push_back(id);
                t.counts.emplace_back(models.size(), 0);
                it = t.families.end() - 1;
            }
            t.counts[static_cast<std::size_t>(it - t.families.begin())][p] = n;
        }
    }
    // Same ordering as family_census: unrotated bases first.
    std::vector<std::size_t> order(t.families.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto key = [](FamilyId id) { return std::make_tuple(id.rotation != 0, static_cast<int>(id.base), id.rotation); };
        return key(t.families[a]) < key(t.families[b]);
    });
    CensusTable sorted{t.periods, {}, {}};
    for (std::size_t i : order) {
        sorted.families.push_back(t.families[i]);
        sorted.counts.push_back(t.counts[i]);
    }
    return sorted;
}

AggregateTable aggregate_table(const std::vector<AggregateCell>& cells, Variant variant, bool standard_deviation) {
    AggregateTable t;
    for (const auto& c : cells) {
        if (c.variant != variant) continue;
        auto it = std::find(t.periods.begin(), t.periods.end(), c.period);
        if (it == t.periods.end()) {
            t.periods.push_back(c.period);
            t.values.emplace_back();
            it = t.periods.end() - 1;
        }
        const std::size_t p = static_cast<std::size_t>(it - t.periods.begin());
        const std::size_t m = static_cast<std::size_t>(c.measure);
        t.values[p][4 * m + class_slot(c.asset_class)] = standard_deviation ? c.sd : c.mean;
    }
    return t;
}

// ---- classify ------------------------------------------------------------------

StageResult run_classify(const RunConfig& config) {
    config.validate();
    ensure_output_dir(config);
    StageResult result;
    const AssetPanel panel = load_panel(config.panel_files(), config.periods);
    const std::string digest = panel_digest(config);
    const EsgClassification cls = classify(panel, config.periods);

    CsvOut classes(config, digest), sizes(config, digest), weights(config, digest), indices(config, digest),
        var(config, digest), dist(config, digest);
    classes.row({"period", "asset_id", "sector", "mean_esg", "class"});
    sizes.row({"period", "class", "size", "empty"});
    weights.row({"period", "asset_id", "class", "weight"});
    indices.row({"period", "date", "I_A", "I_B", "I_C", "I_D"});
    var.row({"period", "series", "class", "level", "var", "es"});

    for (const auto& pc : cls.periods) {
        const std::string& label = pc.period.label;
        std::array<std::size_t, 4> counts{};
        for (std::size_t j = 0; j < panel.n_assets(); ++j) {
            classes.row({label, panel.asset_ids[j], panel.sectors[j], num(pc.mean_scores[j]), letter(pc.classes[j])});
            weights.row({label, panel.asset_ids[j], letter(pc.classes[j]), num(pc.weights[j])});
            ++counts[class_slot(pc.classes[j])];
        }
        for (EsgClass k : kEsgClasses) {
            const std::size_t n = counts[class_slot(k)];
            sizes.row({label, letter(k), std::to_string(n), n == 0 ? "1" : "0"});
            if (n == 0) result.warnings.push_back("period " + label + ": class " + letter(k) + " is empty");
        }
        for (std::size_t t = 0; t < pc.days.size(); ++t) {
            std::vector<std::string> cells{label, panel.dates[pc.days.first + t]};
            for (const auto& idx : pc.indices) cells.push_back(idx ? num((*idx)[t]) : "");
            indices.row(cells);
        }
        const auto slice = [&](const std::vector<double>& full) {
            return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(pc.days.first),
                                       full.begin() + static_cast<std::ptrdiff_t>(pc.days.last));
        };
        for (double level : config.var_levels) {
            const auto emit = [&](const std::string& series, const std::string& k, const std::vector<double>& x) {
                const VarEs v = empirical_var_es(x, level);
                var.row({label, series, k, num(level), num(v.var), num(v.es)});
            };
            emit(kIndexNodeIds[kMarketNode], "", slice(panel.market_returns));
            for (EsgClass k : kEsgClasses) {
                if (const auto& idx = pc.indices[class_slot(k)]) emit(kIndexNodeIds[class_index_node(k)], letter(k), *idx);
            }
            for (std::size_t j = 0; j < panel.n_assets(); ++j) {
                emit(panel.asset_ids[j], letter(pc.classes[j]), slice(panel.returns[j]));
            }
        }
    }
    dist.row({"year", "count", "mean", "min", "q25", "median", "q75", "max"});
    for (const auto& y : esg_distribution_summary(panel, config.periods)) {
        dist.row({std::to_string(y.year), std::to_string(y.count), num(y.mean), num(y.min), num(y.q25),
                  num(y.median), num(y.q75), num(y.max)});
    }
    classes.save(config.output_dir / "classes.csv", result);
    sizes.save(config.output_dir / "class_sizes.csv", result);
    weights.save(config.output_dir / "weights.csv", result);
    indices.save(config.output_dir / "indices.csv", result);
    var.save(config.output_dir / "var_table.csv", result);
    dist.save(config.output_dir / "esg_dist.csv", result);
    return result;
}

// ---- fit -------------------------------------------------------------------------

StageResult run_fit(const RunConfig& config) {
    config.validate();
    ensure_output_dir(config);
    StageResult result;
    const AssetPanel panel = load_panel(config.panel_files(), config.periods);
    const std::string digest = panel_digest(config);
    const auto ranges = period_day_ranges(panel, config.periods);
    const auto inputs = read_classification(config, digest);

    std::vector<std::unique_ptr<VineModel>> kept;  // stable addresses for comparison and census
    std::vector<ComparisonRow> comparison;
    std::map<Catalog, std::vector<std::pair<std::string, const VineModel*>>> by_catalog;

    for (std::size_t q = 0; q < config.periods.periods.size(); ++q) {
        const Period& period = config.periods.periods[q];
        const DayRange days = ranges[q];
        const auto found = inputs.find(period.label);
        if (found == inputs.end()) throw DataError("fit: no classification for period " + period.label);
        const PeriodInputs& in = found->second;

        std::vector<std::string> ids;
        std::vector<EsgClass> classes;
        for (const auto& a : in.assets) {
            ids.push_back(a.id);
            classes.push_back(a.asset_class);
        }
        VineStructure structure;
        try {
            structure = build_structure(ids, classes);
        } catch (const DataError& e) {
            throw DataError("fit, period " + period.label + ": " + e.what());
        }
        if (in.dates.size() != days.size() ||
            !std::equal(in.dates.begin(), in.dates.end(), panel.dates.begin() + static_cast<std::ptrdiff_t>(days.first))) {
            throw DataError("fit, period " + period.label + ": indices.csv dates do not match the returns calendar");
        }

        // Series in node order.
        std::vector<std::vector<double>> series(structure.n_nodes());
        const auto slice = [&](const std::vector<double>& full) {
            return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(days.first),
                                       full.begin() + static_cast<std::ptrdiff_t>(days.last));
        };
        series[kMarketNode] = slice(panel.market_returns);
        for (EsgClass k : kEsgClasses) series[class_index_node(k)] = *in.indices[class_slot(k)];
        for (std::size_t j = 0; j < ids.size(); ++j) {
            series[kIndexNodeIds.size() + j] = slice(panel.returns[panel.asset_index(ids[j])]);
        }

        std::vector<MarginalFit> fits(series.size());
        GarchOptions gopts;
        gopts.min_length = config.min_length;
        parallel_for(series.size(), config.workers, [&](std::size_t i) {
            try {
                fits[i] = fit_garch_t(series[i], gopts);
            } catch (const NumericalError& e) {
                throw NumericalError("fit, period " + period.label + ", series " + structure.nodes[i] + ": " + e.what());
            } catch (const DataError& e) {
                throw DataError("fit, period " + period.label + ", series " + structure.nodes[i] + ": " + e.what());
            }
        });
        std::vector<std::vector<double>> u(series.size());
        std::vector<MarginalRecord> marginals;
        for (std::size_t i = 0; i < series.size(); ++i) {
            u[i] = fits[i].u;
            marginals.push_back(MarginalRecord{structure.nodes[i], series[i].size(), fits[i].mean, fits[i].params,
                                               fits[i].loglik, fits[i].converged});
            if (!fits[i].converged) {
                result.warnings.push_back("period " + period.label + ": marginal fit of " + structure.nodes[i] +
                                          " hit the iteration limit");
            }
        }

        std::vector<ComparisonEntry> entries;
        for (Catalog c : config.catalogs()) {
            VineFitOptions vopts;
            vopts.catalog = c;
            vopts.psi0 = config.psi0;
            vopts.workers = config.workers;
            auto model = std::make_unique<VineModel>();
            try {
                *model = fit_vine(u, structure, vopts);
            } catch (const NumericalError& e) {
                throw NumericalError("fit, period " + period.label + ", catalog " + catalog_name(c) + ": " + e.what());
            }
            ModelArchive archive;
            archive.panel_digest = digest;
            archive.config_digest = config.digest();
            archive.period = period;
            archive.classification = in.assets;
            archive.marginals = marginals;
            archive.vine = *model;
            archive.risk = asset_risk_rows(*model, period.label);
            const fs::path path = config.output_dir / archive_name(period.label, c);
            save_archive(archive, path);
            result.written.push_back(path);
            entries.push_back(ComparisonEntry{catalog_name(c), period.label, model.get()});
            by_catalog[c].emplace_back(period.label, model.get());
            kept.push_back(std::move(model));
        }
        const auto ranked = compare_models(entries);
        comparison.insert(comparison.end(), ranked.begin(), ranked.end());
    }

    std::string text = provenance_header(config, digest) + "model,year,nobs,logLik,npars,mBIC,rank,winner\n";
    for (const auto& row : comparison) {
        text += comparison_csv_row(row) + "," + std::to_string(row.rank) + "," + (row.winner ? "1" : "0") + "\n";
    }
    write_file_atomic(config.output_dir / "comparison.csv", text);
    result.written.push_back(config.output_dir / "comparison.csv");

    for (const auto& [catalog, models] : by_catalog) {
        for (std::size_t tree = 1; tree <= kTemplateTrees; ++tree) {
            const CensusTable t = census_table(models, tree);
            CsvOut out(config, digest);
            std::vector<std::string> header{"Copula Family & Rotation / Year"};
            header.insert(header.end(), t.periods.begin(), t.periods.end());
            out.row(header);
            for (std::size_t f = 0; f < t.families.size(); ++f) {
                std::vector<std::string> cells{family_display(t.families[f])};
                for (std::size_t n : t.counts[f]) cells.push_back(std::to_string(n));
                out.row(cells);
            }
            out.save(config.output_dir / ("census_" + catalog_name(catalog) + "_T" + std::to_string(tree) + ".csv"),
                     result);
        }
    }
    return result;
}

// ---- risk -----------------------------------------------------------------------

StageResult run_risk(const RunConfig& config) {
    config.validate();
    ensure_output_dir(config);
    StageResult result;
    const std::string digest = panel_digest(config);
    const auto runs = load_runs(config, digest, "risk");

    CsvOut report(config, digest), long_out(config, digest), box(config, digest);
    report.row({"catalog", "period", "asset", "class", "esg_tau", "market_tau", "idio_tau", "esg_lambda",
                "market_lambda", "idio_lambda", "esg_tau_emp", "market_tau_emp", "idio_tau_emp", "degenerate_tau",
                "degenerate_lambda", "degenerate_tau_emp", "boundary_lambda"});
    long_out.row({"catalog", "period", "class", "variant", "policy", "measure", "count", "excluded", "mean", "sd"});
    box.row({"catalog", "period", "class", "asset", "variant", "measure", "value", "boundary"});

    std::map<Catalog, std::vector<AssetRiskRow>> rows_by_catalog;
    for (const auto& run : runs) {
        const auto rows = asset_risk_rows(*run.archive.vine, run.period.label);
        auto& all = rows_by_catalog[run.catalog];
        all.insert(all.end(), rows.begin(), rows.end());
    }
    const auto shares_cells = [](const RiskShares& s) {
        if (s.degenerate) return std::vector<std::string>{"NA", "NA", "NA"};
        return std::vector<std::string>{num(s.esg), num(s.market), num(s.idio)};
    };
    for (Catalog c : config.catalogs()) {
        const std::string cname = catalog_name(c);
        for (const auto& r : rows_by_catalog[c]) {
            std::vector<std::string> cells{cname, r.period, r.asset, letter(r.asset_class)};
            for (const auto* s : {&r.tau, &r.lambda, &r.tau_empirical}) {
                const auto v = shares_cells(*s);
                cells.insert(cells.end(), v.begin(), v.end());
            }
            cells.push_back(r.tau.degenerate ? "1" : "0");
            cells.push_back(r.lambda.degenerate ? "1" : "0");
            cells.push_back(r.tau_empirical.degenerate ? "1" : "0");
            cells.push_back(r.lambda.boundary ? "1" : "0");
            report.row(cells);
            for (Variant v : {Variant::Tau, Variant::Lambda, Variant::TauEmpirical}) {
                const RiskShares& s = v == Variant::Tau ? r.tau : v == Variant::Lambda ? r.lambda : r.tau_empirical;
                if (s.degenerate) continue;
                const double vals[3] = {s.esg, s.market, s.idio};
                for (Measure m : {Measure::Esg, Measure::Market, Measure::Idio}) {
                    box.row({cname, r.period, letter(r.asset_class), r.asset, variant_name(v), measure_name(m),
                             num(vals[static_cast<int>(m)]), s.boundary ? "1" : "0"});
                }
            }
        }
        const auto policies = config.policies();
        for (std::size_t p = 0; p < policies.size(); ++p) {
            const auto cells = aggregate(rows_by_catalog[c], policies[p]);
            for (const auto& cell : cells) {
                const bool policy_applies = cell.variant == Variant::Lambda;
                if (!policy_applies && p > 0) continue;
                long_out.row({cname, cell.period, letter(cell.asset_class), variant_name(cell.variant),
                              policy_applies ? policy_name(cell.policy) : "na", measure_name(cell.measure),
                              std::to_string(cell.count), std::to_string(cell.excluded), opt_num(cell.mean),
                              opt_num(cell.sd)});
            }
        }
    }

    // Headline tables use the first catalog of the run.
    const Catalog primary = config.catalogs().front();
    const auto& primary_rows = rows_by_catalog[primary];
    const auto base_cells = aggregate(primary_rows, config.policies().front());
    write_aggregate(config, digest, aggregate_table(base_cells, Variant::Tau, false), config.output_dir / "aggregate.csv",
                    result);
    write_aggregate(config, digest, aggregate_table(base_cells, Variant::Tau, true),
                    config.output_dir / "aggregate_std.csv", result);
    write_aggregate(config, digest, aggregate_table(base_cells, Variant::TauEmpirical, false),
                    config.output_dir / "aggregate_tau_emp.csv", result);
    write_aggregate(config, digest, aggregate_table(base_cells, Variant::TauEmpirical, true),
                    config.output_dir / "aggregate_tau_emp_std.csv", result);
    for (LambdaPolicy policy : config.policies()) {
        const auto cells = aggregate(primary_rows, policy);
        const std::string stem = "aggregate_lambda_" + policy_suffix(policy);
        write_aggregate(config, digest, aggregate_table(cells, Variant::Lambda, false),
                        config.output_dir / (stem + ".csv"), result);
        write_aggregate(config, digest, aggregate_table(cells, Variant::Lambda, true),
                        config.output_dir / (stem + "_std.csv"), result);
    }
    report.save(config.output_dir / "riskreport.csv", result);
    long_out.save(config.output_dir / "aggregate_long.csv", result);
    box.save(config.output_dir / "boxplot.csv", result);
    return result;
}

// ---- report ---------------------------------------------------------------------

StageResult run_report(const RunConfig& config) {
    config.validate();
    ensure_output_dir(config);
    StageResult result;
    const std::string digest = panel_digest(config);
    const auto runs = load_runs(config, digest, "report");

    std::ostringstream out;
    std::istringstream header(provenance_header(config, digest));
    for (std::string line; std::getline(header, line);) out << "%" << line.substr(1) << "\n";

    out << "\n% Model comparison: model & year & nobs & logLik & npars & mBIC\n";
    for (const auto& row : comparison_rows(config, runs)) {
        ComparisonRow shown = row;
        shown.model = short_catalog(parse_catalog(row.model));
        out << comparison_tex_row(shown) << "\n";
    }

    for (Catalog c : config.catalogs()) {
        std::vector<std::pair<std::string, const VineModel*>> models;
        for (const auto& run : runs) {
            if (run.catalog == c) models.emplace_back(run.period.label, &*run.archive.vine);
        }
        for (std::size_t tree = 1; tree <= kTemplateTrees; ++tree) {
            const CensusTable t = census_table(models, tree);
            out << "\n% " << catalog_name(c) << " tree " << tree << ": Copula Family & Rotation / Year";
            for (const auto& p : t.periods) out << " & " << p;
            out << "\n";
            for (std::size_t f = 0; f < t.families.size(); ++f) {
                std::vector<std::string> cells{family_display(t.families[f])};
                for (std::size_t n : t.counts[f]) cells.push_back(std::to_string(n));
                out << join_cells(cells, " & ") << "\n";
            }
        }

        std::vector<AssetRiskRow> rows;
        for (const auto& run : runs) {
            if (run.catalog != c) continue;
            const auto r = asset_risk_rows(*run.archive.vine, run.period.label);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        const auto section = [&](const std::string& title, const std::vector<AggregateCell>& cells, Variant v, bool sd) {
            const AggregateTable t = aggregate_table(cells, v, sd);
            out << "\n% " << catalog_name(c) << " " << title
                << ": Year & ESG Risk A B C D & Market Risk A B C D & Idiosyncratic Risk A B C D\n";
            for (std::size_t p = 0; p < t.periods.size(); ++p) {
                out << tex_row(t.periods[p], {t.values[p].begin(), t.values[p].end()}, 3) << "\n";
            }
        };
        const auto base = aggregate(rows, config.policies().front());
        section("mean tau shares", base, Variant::Tau, false);
        section("sd tau shares", base, Variant::Tau, true);
        for (LambdaPolicy policy : config.policies()) {
            const auto cells = aggregate(rows, policy);
            section("mean lambda shares (" + policy_name(policy) + ")", cells, Variant::Lambda, false);
            section("sd lambda shares (" + policy_name(policy) + ")", cells, Variant::Lambda, true);
        }
    }
    const fs::path path = config.output_dir / "report.txt";
    write_file_atomic(path, out.str());
    result.written.push_back(path);
    return result;
}

}  // namespace esgvine
