#pragma once

#include "esgvine/copula.hpp"
#include "esgvine/panel.hpp"
#include "esgvine/risk.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace esgvine {

/// Settings shared by all subcommands. Built from a key=value file and
/// command-line overrides through the same `set` entry point.
struct RunConfig {
    std::filesystem::path returns = "returns.csv";
    std::filesystem::path esg = "esg.csv";
    std::filesystem::path meta = "meta.csv";
    std::filesystem::path market = "market.csv";
    PeriodSpec periods = PeriodSpec::shipped_default();
    std::string catalog = "all";  // itau | parametric | gaussian | all
    double psi0 = 0.9;
    std::vector<double> var_levels{0.95, 0.99};
    std::string lambda_policy = "both";  // include_all | drop_zeros_and_ones | both
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    std::size_t workers = 1;
    std::size_t min_length = 100;
    std::filesystem::path truth;  // simulate only

    /// Applies one setting; throws ConfigError for unknown keys or bad values.
    /// Relative paths are resolved against `base_dir`.
    void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {});
    void validate() const;  // throws ConfigError

    std::vector<Catalog> catalogs() const;
    std::vector<LambdaPolicy> policies() const;
    PanelFiles panel_files() const;

    /// Canonical "key=value" lines in fixed key order.
    std::string echo() const;
    /// SHA-256 of echo().
    std::string digest() const;
};

/// Every settable key (data_dir sets the four input paths at once).
const std::vector<std::string>& config_keys();

/// Parses "key = value" lines; '#' starts a comment. Later keys win.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace esgvine
