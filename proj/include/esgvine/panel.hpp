#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esgvine {

enum class EsgClass : char { A = 'A', B = 'B', C = 'C', D = 'D' };

inline constexpr std::array<EsgClass, 4> kEsgClasses{EsgClass::A, EsgClass::B, EsgClass::C,
                                                     EsgClass::D};

inline std::size_t class_slot(EsgClass k) {
    return static_cast<std::size_t>(static_cast<char>(k) - 'A');
}
inline char class_letter(EsgClass k) { return static_cast<char>(k); }
EsgClass parse_class(const std::string& s);  // throws DataError

enum class ClassificationMode { Quartile, Threshold };

struct Period {
    std::string label;  // e.g. "2006-2010"
    int first_year = 0;
    int last_year = 0;
};

/// Study periods plus the classification rule.
struct PeriodSpec {
    std::vector<Period> periods;
    ClassificationMode mode = ClassificationMode::Quartile;
    std::array<double, 3> thresholds{25.0, 50.0, 75.0};

    /// The shipped default: 2006-2010, 2011-2015, 2016-2018, quartile mode.
    static PeriodSpec shipped_default();
    void validate() const;  // throws ConfigError
};

/// Parses "2006-2010,2011-2015" (optionally "label=2006-2010").
std::vector<Period> parse_periods(const std::string& text);

/// Validated raw inputs for one study window. Per-asset vectors are aligned
/// with `asset_ids`; `returns[j]` is the daily log-return series of asset j.
struct AssetPanel {
    std::vector<std::string> asset_ids;
    std::vector<std::string> sectors;
    std::vector<double> market_caps;

    std::vector<std::string> dates;  // ISO yyyy-mm-dd, strictly increasing
    std::vector<int> day_year;
    std::vector<std::vector<double>> returns;  // [asset][day]
    std::vector<double> market_returns;        // [day]

    std::vector<int> esg_years;                    // ascending
    std::vector<std::vector<double>> esg_scores;   // [asset][year slot]

    std::size_t n_assets() const { return asset_ids.size(); }
    std::size_t n_days() const { return dates.size(); }
    std::size_t asset_index(const std::string& id) const;  // throws DataError
    double esg_score(std::size_t asset, int year) const;    // throws DataError
};

struct DayRange {
    std::size_t first = 0;  // inclusive
    std::size_t last = 0;   // exclusive
    std::size_t size() const { return last - first; }
};

/// Trading-day range of each period; throws DataError when a period has a
/// year without trading days.
std::vector<DayRange> period_day_ranges(const AssetPanel& panel, const PeriodSpec& spec);

struct PanelFiles {
    std::filesystem::path returns;
    std::filesystem::path esg;
    std::filesystem::path meta;
    std::filesystem::path market;
};

/// Reads and validates the four CSV inputs. Rejects schema violations,
/// non-numeric cells, duplicate ids, scores outside [0,100], non-positive
/// caps, missing ESG years and calendar gaps.
AssetPanel load_panel(const PanelFiles& files, const PeriodSpec& spec);

/// Longest allowed distance in calendar days between consecutive trading days.
inline constexpr int kMaxCalendarGapDays = 10;

/// Mean ESG score over each period's years: result[period][asset].
std::vector<std::vector<double>> mean_esg(const AssetPanel& panel, const PeriodSpec& spec);

/// Classes for one period. In quartile mode, assets are ranked inside their
/// sector by mean score (ties by ascending id) and split into D, C, B, A
/// blocks by the piecewise counts of `quartile_block_ends`.
std::vector<EsgClass> assign_classes(const std::vector<double>& mean_scores,
                                     const std::vector<std::string>& sectors,
                                     const std::vector<std::string>& asset_ids,
                                     const PeriodSpec& spec);

/// Last (1-based) rank of the D, C and B blocks for a sector of n assets.
struct QuartileBlocks {
    std::size_t d_end = 0;
    std::size_t c_end = 0;
    std::size_t b_end = 0;
};
QuartileBlocks quartile_block_ends(std::size_t n);

EsgClass threshold_class(double score, const std::array<double, 3>& thresholds);

/// Market-cap weight of each asset inside its class; weights of a class sum to 1.
std::vector<double> class_weights(const std::vector<EsgClass>& classes,
                                  const std::vector<double>& market_caps);

/// Cap-weighted class index returns over `days`. A class without members
/// yields std::nullopt.
std::array<std::optional<std::vector<double>>, 4> class_indices(
    const AssetPanel& panel, const std::vector<EsgClass>& classes,
    const std::vector<double>& weights, DayRange days);

struct PeriodClassification {
    Period period;
    DayRange days;
    std::vector<double> mean_scores;
    std::vector<EsgClass> classes;
    std::vector<double> weights;
    std::array<std::optional<std::vector<double>>, 4> indices;
};

struct EsgClassification {
    std::vector<PeriodClassification> periods;
};

EsgClassification classify(const AssetPanel& panel, const PeriodSpec& spec);

struct VarEs {
    double var = 0.0;
    double es = 0.0;
};

/// Empirical VaR at `level` is the k-th smallest observation with
/// k = ceil((1 - level) * n) (at least 1); ES is the mean of observations <= VaR.
VarEs empirical_var_es(const std::vector<double>& series, double level);

struct EsgYearSummary {
    int year = 0;
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

/// Per-year distribution of ESG scores across assets (quantiles by linear
/// interpolation between order statistics).
std::vector<EsgYearSummary> esg_distribution_summary(const AssetPanel& panel,
                                                     const PeriodSpec& spec);

}  // namespace esgvine
