#pragma once

#include "esgvine/garch.hpp"
#include "esgvine/panel.hpp"
#include "esgvine/risk.hpp"
#include "esgvine/vine.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esgvine {

inline constexpr int kArchiveFormatVersion = 1;

struct ClassifiedAsset {
    std::string id;
    std::string sector;
    double mean_score = 0.0;
    EsgClass asset_class = EsgClass::A;
    double weight = 0.0;
};

struct MarginalRecord {
    std::string series;
    std::size_t nobs = 0;
    double mean = 0.0;
    GarchParams params;
    double loglik = 0.0;
    bool converged = false;
};

/// Everything produced for one (period, catalog) run.
struct ModelArchive {
    int format_version = kArchiveFormatVersion;
    std::string panel_digest;
    std::string config_digest;
    Period period;
    std::vector<ClassifiedAsset> classification;
    std::vector<MarginalRecord> marginals;
    std::optional<VineModel> vine;
    std::vector<AssetRiskRow> risk;
};

/// Canonical JSON text (sorted keys, shortest round-trip doubles, NaN as null).
std::string archive_to_json(const ModelArchive& archive);
/// Parses and validates; `source` names the file in diagnostics.
ModelArchive archive_from_json(const std::string& text, const std::string& source = "<memory>");

/// Writes to a temporary sibling and renames it into place. Throws DataError
/// naming the path on I/O failure.
void save_archive(const ModelArchive& archive, const std::filesystem::path& path);

/// Throws ArchiveError on schema, version, digest or parameter-domain
/// violations. When `expected_panel_digest` is given it must match.
ModelArchive load_archive(const std::filesystem::path& path,
                          const std::optional<std::string>& expected_panel_digest = std::nullopt);

std::string sha256_hex(const std::string& bytes);
/// Digest over the bytes of the given files, in order.
std::string files_digest(const std::vector<std::filesystem::path>& files);

/// Writes text to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace esgvine
