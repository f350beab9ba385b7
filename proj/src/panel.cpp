#include "esgvine/panel.hpp"

#include "esgvine/csv.hpp"
#include "esgvine/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace esgvine {

namespace {

constexpr std::array<const char*, 5> kReservedIds{"I_M", "I_A", "I_B", "I_C", "I_D"};

std::chrono::sys_days parse_date(const std::string& s, const std::string& context) {
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw DataError("bad date '" + s + "' (" + context + "), expected yyyy-mm-dd");
    }
    y = csv::parse_int(s.substr(0, 4), context);
    m = csv::parse_int(s.substr(5, 2), context);
    d = csv::parse_int(s.substr(8, 2), context);
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid date '" + s + "' (" + context + ")");
    return std::chrono::sys_days{ymd};
}

double quantile_linear(const std::vector<double>& sorted, double p) {
    if (sorted.size() == 1) return sorted.front();
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EsgClass parse_class(const std::string& s) {
    if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'D') return static_cast<EsgClass>(s[0]);
    throw DataError("unknown ESG class '" + s + "'");
}

PeriodSpec PeriodSpec::shipped_default() {
    PeriodSpec spec;
    spec.periods = {{"2006-2010", 2006, 2010}, {"2011-2015", 2011, 2015}, {"2016-2018", 2016, 2018}};
    return spec;
}

void PeriodSpec::validate() const {
    if (periods.empty()) throw ConfigError("at least one period is required");
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto& p = periods[i];
        if (p.first_year > p.last_year) throw ConfigError("period '" + p.label + "' is reversed");
        if (i > 0 && p.first_year != periods[i - 1].last_year + 1) {
            throw ConfigError("periods must be contiguous and ordered: '" + periods[i - 1].label +
                              "' then '" + p.label + "'");
        }
    }
    if (!(thresholds[0] > 0.0 && thresholds[0] < thresholds[1] && thresholds[1] < thresholds[2] &&
          thresholds[2] < 100.0)) {
        throw ConfigError("thresholds must be strictly increasing inside (0,100)");
    }
}

std::vector<Period> parse_periods(const std::string& text) {
    std::vector<Period> out;
    for (const auto& raw : csv::split_line(text)) {
        if (raw.empty()) continue;
        std::string label;
        std::string range = raw;
        if (const auto eq = raw.find('='); eq != std::string::npos) {
            label = raw.substr(0, eq);
            range = raw.substr(eq + 1);
        }
        const auto dash = range.find('-');
        Period p;
        try {
            if (dash == std::string::npos) {
                p.first_year = p.last_year = csv::parse_int(range, "period");
            } else {
                p.first_year = csv::parse_int(range.substr(0, dash), "period");
                p.last_year = csv::parse_int(range.substr(dash + 1), "period");
            }
        } catch (const DataError&) {
            throw ConfigError("bad period '" + raw + "', expected yyyy-yyyy");
        }
        p.label = label.empty() ? range : label;
        out.push_back(p);
    }
    return out;
}

std::size_t AssetPanel::asset_index(const std::string& id) const {
    const auto it = std::find(asset_ids.begin(), asset_ids.end(), id);
    if (it == asset_ids.end()) throw DataError("unknown asset '" + id + "'");
    return static_cast<std::size_t>(it - asset_ids.begin());
}

double AssetPanel::esg_score(std::size_t asset, int year) const {
    const auto it = std::lower_bound(esg_years.begin(), esg_years.end(), year);
    if (it == esg_years.end() || *it != year) {
        throw DataError("missing ESG score for asset '" + asset_ids.at(asset) + "' year " +
                        std::to_string(year));
    }
    return esg_scores.at(asset)[static_cast<std::size_t>(it - esg_years.begin())];
}

std::vector<DayRange> period_day_ranges(const AssetPanel& panel, const PeriodSpec& spec) {
    std::vector<DayRange> out;
    for (const auto& p : spec.periods) {
        DayRange r;
        r.first = static_cast<std::size_t>(
            std::lower_bound(panel.day_year.begin(), panel.day_year.end(), p.first_year) -
            panel.day_year.begin());
        r.last = static_cast<std::size_t>(
            std::upper_bound(panel.day_year.begin(), panel.day_year.end(), p.last_year) -
            panel.day_year.begin());
        for (int y = p.first_year; y <= p.last_year; ++y) {
            if (!std::binary_search(panel.day_year.begin() + static_cast<std::ptrdiff_t>(r.first),
                                    panel.day_year.begin() + static_cast<std::ptrdiff_t>(r.last), y)) {
                throw DataError("calendar gap: no trading days in year " + std::to_string(y) +
                                " of period '" + p.label + "'");
            }
        }
        out.push_back(r);
    }
    return out;
}

AssetPanel load_panel(const PanelFiles& files, const PeriodSpec& spec) {
    spec.validate();
    AssetPanel panel;

    // returns.csv: date, one column per asset
    const auto ret = csv::read(files.returns);
    if (ret.header.size() < 2 || ret.header[0] != "date") {
        throw DataError("returns: header must be 'date,<asset ids...>'");
    }
    panel.asset_ids.assign(ret.header.begin() + 1, ret.header.end());
    {
        std::set<std::string> seen;
        for (const auto& id : panel.asset_ids) {
            if (id.empty()) throw DataError("returns: empty asset id in header");
            if (!seen.insert(id).second) throw DataError("duplicate asset id '" + id + "'");
            for (const char* reserved : kReservedIds) {
                if (id == reserved) throw DataError("asset id '" + id + "' is reserved for index variables");
            }
        }
    }
    const std::size_t n = panel.asset_ids.size();
    panel.returns.assign(n, {});
    std::chrono::sys_days previous{};
    for (std::size_t r = 0; r < ret.rows.size(); ++r) {
        const auto& row = ret.rows[r];
        const std::string ctx = "returns line " + std::to_string(ret.line_numbers[r]);
        const auto day = parse_date(row[0], ctx);
        if (r > 0) {
            if (day <= previous) throw DataError("dates not strictly increasing at " + ctx);
            if ((day - previous).count() > kMaxCalendarGapDays) {
                throw DataError("calendar gap between " + panel.dates.back() + " and " + row[0]);
            }
        }
        previous = day;
        panel.dates.push_back(row[0]);
        panel.day_year.push_back(static_cast<int>(std::chrono::year_month_day{day}.year()));
        for (std::size_t j = 0; j < n; ++j) {
            if (row[j + 1].empty()) {
                throw DataError("missing return for asset '" + panel.asset_ids[j] + "' at " + ctx);
            }
            panel.returns[j].push_back(csv::parse_double(row[j + 1], ctx + ", asset " + panel.asset_ids[j]));
        }
    }
    if (panel.dates.empty()) throw DataError("returns: no data rows");

    // market.csv: date, return on identical dates
    const auto mkt = csv::read(files.market);
    if (mkt.header.size() != 2 || mkt.header[0] != "date") {
        throw DataError("market: header must be 'date,return'");
    }
    if (mkt.rows.size() != panel.dates.size()) {
        throw DataError("calendar gap: market has " + std::to_string(mkt.rows.size()) +
                        " days, returns has " + std::to_string(panel.dates.size()));
    }
    for (std::size_t r = 0; r < mkt.rows.size(); ++r) {
        const std::string ctx = "market line " + std::to_string(mkt.line_numbers[r]);
        if (mkt.rows[r][0] != panel.dates[r]) {
            throw DataError("calendar gap: market date " + mkt.rows[r][0] + " does not match returns date " +
                            panel.dates[r]);
        }
        panel.market_returns.push_back(csv::parse_double(mkt.rows[r][1], ctx));
    }

    // meta.csv: asset_id, sector, market_cap
    const auto meta = csv::read(files.meta);
    const auto c_id = meta.column("asset_id");
    const auto c_sector = meta.column("sector");
    const auto c_cap = meta.column("market_cap");
    panel.sectors.assign(n, {});
    panel.market_caps.assign(n, 0.0);
    std::vector<bool> have_meta(n, false);
    for (std::size_t r = 0; r < meta.rows.size(); ++r) {
        const auto& row = meta.rows[r];
        const std::string ctx = "meta line " + std::to_string(meta.line_numbers[r]);
        const auto it = std::find(panel.asset_ids.begin(), panel.asset_ids.end(), row[c_id]);
        if (it == panel.asset_ids.end()) continue;  // extra assets are ignored
        const auto j = static_cast<std::size_t>(it - panel.asset_ids.begin());
        if (have_meta[j]) throw DataError("duplicate asset id '" + row[c_id] + "' in meta");
        if (row[c_sector].empty()) throw DataError("asset '" + row[c_id] + "' has no sector label");
        const double cap = csv::parse_double(row[c_cap], ctx);
        if (!(cap > 0.0)) throw DataError("market cap must be positive for asset '" + row[c_id] + "'");
        panel.sectors[j] = row[c_sector];
        panel.market_caps[j] = cap;
        have_meta[j] = true;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!have_meta[j]) throw DataError("asset '" + panel.asset_ids[j] + "' missing from meta");
    }

    // esg.csv: year, one column per asset (any column order)
    const auto esg = csv::read(files.esg);
    if (esg.header.empty() || esg.header[0] != "year") {
        throw DataError("esg: header must be 'year,<asset ids...>'");
    }
    std::vector<std::size_t> esg_col(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto it = std::find(esg.header.begin() + 1, esg.header.end(), panel.asset_ids[j]);
        if (it == esg.header.end()) throw DataError("asset '" + panel.asset_ids[j] + "' missing from esg");
        esg_col[j] = static_cast<std::size_t>(it - esg.header.begin());
    }
    std::map<int, std::size_t> year_rows;
    for (std::size_t r = 0; r < esg.rows.size(); ++r) {
        const int year = csv::parse_int(esg.rows[r][0], "esg line " + std::to_string(esg.line_numbers[r]));
        if (!year_rows.emplace(year, r).second) throw DataError("duplicate esg year " + std::to_string(year));
    }
    panel.esg_scores.assign(n, {});
    for (const auto& [year, r] : year_rows) {
        panel.esg_years.push_back(year);
        const std::string ctx = "esg line " + std::to_string(esg.line_numbers[r]);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& cell = esg.rows[r][esg_col[j]];
            double score = std::nan("");
            if (!cell.empty() && cell != "NA") {
                score = csv::parse_double(cell, ctx);
                if (score < 0.0 || score > 100.0) {
                    throw DataError("score out of range: asset '" + panel.asset_ids[j] + "' year " +
                                    std::to_string(year) + " value " + cell);
                }
            }
            panel.esg_scores[j].push_back(score);
        }
    }

    // Every (year in study window, asset) needs a score; every period year needs trading days.
    for (const auto& p : spec.periods) {
        for (int y = p.first_year; y <= p.last_year; ++y) {
            for (std::size_t j = 0; j < n; ++j) {
                if (std::isnan(panel.esg_score(j, y))) {
                    throw DataError("missing ESG score for asset '" + panel.asset_ids[j] + "' year " +
                                    std::to_string(y));
                }
            }
        }
    }
    period_day_ranges(panel, spec);
    return panel;
}

std::vector<std::vector<double>> mean_esg(const AssetPanel& panel, const PeriodSpec& spec) {
    std::vector<std::vector<double>> out;
    for (const auto& p : spec.periods) {
        std::vector<double> means(panel.n_assets(), 0.0);
        const double years = static_cast<double>(p.last_year - p.first_year + 1);
        for (std::size_t j = 0; j < panel.n_assets(); ++j) {
            double sum = 0.0;
            for (int y = p.first_year; y <= p.last_year; ++y) {
                const double s = panel.esg_score(j, y);
                if (std::isnan(s)) {
                    throw DataError("missing ESG score for asset '" + panel.asset_ids[j] + "' year " +
                                    std::to_string(y));
                }
                sum += s;
            }
            means[j] = sum / years;
        }
        out.push_back(std::move(means));
    }
    return out;
}

QuartileBlocks quartile_block_ends(std::size_t n) {
    QuartileBlocks b;
    const std::size_t r = n % 4;
    b.d_end = n / 4;
    b.c_end = 2 * b.d_end + (r == 3 ? 1 : 0);
    b.b_end = 3 * b.d_end + (r == 2 || r == 3 ? 1 : 0);
    return b;
}

EsgClass threshold_class(double score, const std::array<double, 3>& thresholds) {
    if (score < thresholds[0]) return EsgClass::D;
    if (score < thresholds[1]) return EsgClass::C;
    if (score < thresholds[2]) return EsgClass::B;
    return EsgClass::A;
}

std::vector<EsgClass> assign_classes(const std::vector<double>& mean_scores,
                                     const std::vector<std::string>& sectors,
                                     const std::vector<std::string>& asset_ids,
                                     const PeriodSpec& spec) {
    const std::size_t n = mean_scores.size();
    if (sectors.size() != n || asset_ids.size() != n) {
        throw DataError("assign_classes: scores, sectors and ids differ in length");
    }
    std::vector<EsgClass> out(n, EsgClass::D);
    if (spec.mode == ClassificationMode::Threshold) {
        for (std::size_t j = 0; j < n; ++j) out[j] = threshold_class(mean_scores[j], spec.thresholds);
        return out;
    }
    std::map<std::string, std::vector<std::size_t>> by_sector;
    for (std::size_t j = 0; j < n; ++j) by_sector[sectors[j]].push_back(j);
    for (auto& [sector, members] : by_sector) {
        if (members.size() < 4) {
            throw DataError("sector '" + sector + "' has " + std::to_string(members.size()) +
                            " assets; quartile classes need at least 4");
        }
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            if (mean_scores[a] != mean_scores[b]) return mean_scores[a] < mean_scores[b];
            return asset_ids[a] < asset_ids[b];
        });
        const auto blocks = quartile_block_ends(members.size());
        for (std::size_t rank = 1; rank <= members.size(); ++rank) {
            EsgClass k = EsgClass::A;
            if (rank <= blocks.d_end) k = EsgClass::D;
            else if (rank <= blocks.c_end) k = EsgClass::C;
            else if (rank <= blocks.b_end) k = EsgClass::B;
            out[members[rank - 1]] = k;
        }
    }
    return out;
}

std::vector<double> class_weights(const std::vector<EsgClass>& classes,
                                  const std::vector<double>& market_caps) {
    if (classes.size() != market_caps.size()) throw DataError("class_weights: size mismatch");
    std::array<double, 4> totals{};
    for (std::size_t j = 0; j < classes.size(); ++j) {
        if (!(market_caps[j] > 0.0)) throw DataError("class_weights: market caps must be positive");
        totals[class_slot(classes[j])] += market_caps[j];
    }
    std::vector<double> w(classes.size());
    for (std::size_t j = 0; j < classes.size(); ++j) w[j] = market_caps[j] / totals[class_slot(classes[j])];
    return w;
}

std::array<std::optional<std::vector<double>>, 4> class_indices(const AssetPanel& panel,
                                                                const std::vector<EsgClass>& classes,
                                                                const std::vector<double>& weights,
                                                                DayRange days) {
    std::array<std::optional<std::vector<double>>, 4> out;
    for (std::size_t j = 0; j < panel.n_assets(); ++j) {
        auto& idx = out[class_slot(classes[j])];
        if (!idx) idx.emplace(days.size(), 0.0);
        const auto& series = panel.returns[j];
        for (std::size_t t = 0; t < days.size(); ++t) (*idx)[t] += weights[j] * series[days.first + t];
    }
    return out;
}

EsgClassification classify(const AssetPanel& panel, const PeriodSpec& spec) {
    EsgClassification result;
    const auto means = mean_esg(panel, spec);
    const auto ranges = period_day_ranges(panel, spec);
    for (std::size_t q = 0; q < spec.periods.size(); ++q) {
        PeriodClassification pc;
        pc.period = spec.periods[q];
        pc.days = ranges[q];
        pc.mean_scores = means[q];
        pc.classes = assign_classes(pc.mean_scores, panel.sectors, panel.asset_ids, spec);
        pc.weights = class_weights(pc.classes, panel.market_caps);
        pc.indices = class_indices(panel, pc.classes, pc.weights, pc.days);
        result.periods.push_back(std::move(pc));
    }
    return result;
}

VarEs empirical_var_es(const std::vector<double>& series, double level) {
    if (series.empty()) throw DataError("empirical_var_es: empty series");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("VaR level must lie in (0,1)");
    std::vector<double> sorted = series;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    // 1e-9 guards against (1 - level) * n landing a hair above an integer.
    auto k = static_cast<std::size_t>(std::ceil((1.0 - level) * n - 1e-9));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    VarEs out;
    out.var = sorted[k - 1];
    double sum = 0.0;
    std::size_t count = 0;
    for (double x : sorted) {
        if (x > out.var) break;
        sum += x;
        ++count;
    }
    out.es = sum / static_cast<double>(count);
    return out;
}

std::vector<EsgYearSummary> esg_distribution_summary(const AssetPanel& panel, const PeriodSpec& spec) {
    std::vector<EsgYearSummary> out;
    const int first = spec.periods.front().first_year;
    const int last = spec.periods.back().last_year;
    for (int y = first; y <= last; ++y) {
        std::vector<double> scores;
        for (std::size_t j = 0; j < panel.n_assets(); ++j) {
            const double s = panel.esg_score(j, y);
            if (!std::isnan(s)) scores.push_back(s);
        }
        if (scores.empty()) continue;
        std::sort(scores.begin(), scores.end());
        EsgYearSummary row;
        row.year = y;
        row.count = scores.size();
        row.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        row.min = scores.front();
        row.q25 = quantile_linear(scores, 0.25);
        row.median = quantile_linear(scores, 0.5);
        row.q75 = quantile_linear(scores, 0.75);
        row.max = scores.back();
        out.push_back(row);
    }
    return out;
}

}  // namespace esgvine
