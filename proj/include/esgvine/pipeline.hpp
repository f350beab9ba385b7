#pragma once

#include "esgvine/config.hpp"
#include "esgvine/risk.hpp"
#include "esgvine/store.hpp"
#include "esgvine/vine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace esgvine {

struct StageResult {
    std::vector<std::filesystem::path> written;
    std::vector<std::string> warnings;
};

/// classes.csv, class_sizes.csv, weights.csv, indices.csv, var_table.csv, esg_dist.csv.
StageResult run_classify(const RunConfig& config);
/// model_<period>_<catalog>.json per period and catalog, comparison.csv and
/// census_<catalog>_T<m>.csv. Needs the classification outputs.
StageResult run_fit(const RunConfig& config);
/// riskreport.csv, aggregate*.csv, aggregate_long.csv and boxplot.csv.
/// Refuses archives whose panel digest differs from the current inputs.
StageResult run_risk(const RunConfig& config);
/// report.txt with the comparison, census and aggregate tables as
/// '&'-separated rows.
StageResult run_report(const RunConfig& config);

/// SHA-256 over the four input files.
std::string panel_digest(const RunConfig& config);

/// Archive file name for a run, e.g. "model_2006-2010_itau.json".
std::string archive_name(const std::string& period_label, Catalog catalog);

/// Header lines starting every CSV: config digest, panel digest (when
/// non-empty), then the config echo, all prefixed with '#'.
std::string provenance_header(const RunConfig& config, const std::string& panel_digest);

// ---- row rendering -------------------------------------------------------

/// "model,year,nobs,logLik,npars,mBIC" with two decimals for the real columns.
std::string comparison_csv_row(const ComparisonRow& row);
/// Same content '&'-separated: "itau & 2006-2010 & 1260 & 133415.85 & 2300 & -241681.52".
std::string comparison_tex_row(const ComparisonRow& row);

/// "label & v1 & v2 ..." with `decimals` places; missing values print as "--".
std::string tex_row(const std::string& label, const std::vector<std::optional<double>>& values, int decimals);

/// Census of one tree across periods: rows "Display name & count per period".
struct CensusTable {
    std::vector<std::string> periods;
    std::vector<FamilyId> families;                 // first-seen catalog order
    std::vector<std::vector<std::size_t>> counts;   // [family][period]
};
CensusTable census_table(const std::vector<std::pair<std::string, const VineModel*>>& models, std::size_t tree);

/// One row per period with the ESG, market and idiosyncratic cells for
/// classes A-D (12 values), in the two-row "Type of Risk" / "Year" layout.
struct AggregateTable {
    std::vector<std::string> periods;
    std::vector<std::array<std::optional<double>, 12>> values;
};
AggregateTable aggregate_table(const std::vector<AggregateCell>& cells, Variant variant, bool standard_deviation);

}  // namespace esgvine
