#pragma once

#include "esgvine/config.hpp"
#include "esgvine/garch.hpp"
#include "esgvine/pipeline.hpp"
#include "esgvine/vine.hpp"

#include <map>
#include <string>
#include <vector>

namespace esgvine {

/// Ground truth for a synthetic panel: template vine over the given assets,
/// GARCH(1,1)-t marginals for every node, and a weekday calendar.
struct SimulationTruth {
    std::string start_date = "2006-01-02";
    std::size_t days = 0;
    std::string period_label;  // empty: "<first year>-<last year>"
    std::vector<std::string> asset_ids;
    std::vector<EsgClass> asset_classes;
    std::vector<std::string> sectors;
    std::vector<double> market_caps;
    std::vector<GarchParams> marginals;  // node order
    VineModel model;
};

/// Parses the truth JSON. Edges not listed take the tree default, else the
/// file default, else independence. Throws DataError on any invalid entry.
SimulationTruth parse_truth(const std::string& text, const std::string& source = "<truth>");

/// `n` weekdays starting at `start` (yyyy-mm-dd; a weekend start moves to Monday).
std::vector<std::string> weekday_calendar(const std::string& start, std::size_t n);

/// Writes returns/esg/meta/market CSVs, the classification outputs (classes
/// fixed by the truth, class indices taken from the simulated index nodes),
/// truth.json and sim_config.ini under the output directory.
StageResult run_simulate(const RunConfig& config);

}  // namespace esgvine
