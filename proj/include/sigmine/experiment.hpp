// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigmine/cloud.hpp"
#include "sigmine/csv.hpp"
#include "sigmine/corpus.hpp"
#include "sigmine/error.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/rng.hpp"
#include "sigmine/wccnn.hpp"

namespace sigmine {

// ---------------------------------------------------------------------------
// Abnormal periods and bucket labeling
// ---------------------------------------------------------------------------

/// A contiguous span of calendar months flagged as abnormal. Both endpoints
/// are inclusive.
struct AbnormalPeriod {
    std::string name;
    int start_year = 0;
    int start_month = 0;
    int end_year = 0;
    int end_month = 0;

    Date first_day() const { return Date{start_year, start_month, 1}; }
    Date last_day() const {
        return Date{end_year, end_month, days_in_month(end_year, end_month)};
    }

    void validate() const {
        if (name.empty()) throw domain_error("abnormal period: empty name");
        if (start_month < 1 || start_month > 12 || end_month < 1 || end_month > 12)
            throw domain_error("abnormal period '" + name + "': month outside 1..12");
        if (std::pair{start_year, start_month} > std::pair{end_year, end_month})
            throw domain_error("abnormal period '" + name + "': start after end");
    }
};

/// Parse "YYYY-MM" into (year, month).
inline std::pair<int, int> parse_year_month(const std::string& s) {
    if (s.size() != 7 || s[4] != '-')
        throw format_error("bad month '" + s + "', expected YYYY-MM");
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != 4 && (s[i] < '0' || s[i] > '9'))
            throw format_error("bad month '" + s + "', expected YYYY-MM");
    const int y = std::stoi(s.substr(0, 4));
    const int m = std::stoi(s.substr(5, 2));
    if (m < 1 || m > 12) throw format_error("bad month '" + s + "', month outside 1..12");
    return {y, m};
}

enum class BucketLabel { normal, abnormal };

/// A bucket is abnormal iff its calendar span intersects the period.
inline std::map<std::string, BucketLabel> label_buckets(const std::vector<std::string>& keys,
                                                        const AbnormalPeriod& period) {
    period.validate();
    std::map<std::string, BucketLabel> labels;
    const Date p1 = period.first_day();
    const Date p2 = period.last_day();
    for (const auto& key : keys) {
        const auto [b1, b2] = bucket_span(key);
        labels[key] = spans_intersect(b1, b2, p1, p2) ? BucketLabel::abnormal
                                                      : BucketLabel::normal;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Dataset balancing
// ---------------------------------------------------------------------------

struct LabeledBucket {
    std::string key;
    Date first;
    Date last;
    BucketLabel label = BucketLabel::normal;
};

struct BalanceResult {
    std::vector<std::size_t> kept; // indices into the input, ascending
    std::string warning;           // empty when fully balanced from both sides
};

/// Keep every abnormal bucket and select the same number of normal buckets,
/// split as evenly as possible between the window's two sides (the odd one
/// goes before) and taken nearest to the window first. A side that runs out
/// is compensated from the other; an overall shortfall keeps what exists and
/// warns. Selection is deterministic.
inline BalanceResult balance(const std::vector<LabeledBucket>& buckets,
                             const AbnormalPeriod& period) {
    period.validate();
    const Date p1 = period.first_day();
    const Date p2 = period.last_day();

    std::vector<std::size_t> abnormal;
    std::vector<std::size_t> before;
    std::vector<std::size_t> after;
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        const LabeledBucket& b = buckets[i];
        if (b.label == BucketLabel::abnormal) {
            abnormal.push_back(i);
        } else if (b.last < p1) {
            before.push_back(i);
        } else if (b.first > p2) {
            after.push_back(i);
        } else {
            throw domain_error("balance: normal bucket overlaps the abnormal window: " + b.key);
        }
    }
    if (before.empty() && after.empty()) throw domain_error("balance: zero normal buckets");

    // nearest to the window first
    std::sort(before.begin(), before.end(), [&](std::size_t a, std::size_t b) {
        if (buckets[a].last != buckets[b].last) return buckets[b].last < buckets[a].last;
        if (buckets[a].first != buckets[b].first) return buckets[b].first < buckets[a].first;
        return buckets[a].key < buckets[b].key;
    });
    std::sort(after.begin(), after.end(), [&](std::size_t a, std::size_t b) {
        if (buckets[a].first != buckets[b].first) return buckets[a].first < buckets[b].first;
        if (buckets[a].last != buckets[b].last) return buckets[a].last < buckets[b].last;
        return buckets[a].key < buckets[b].key;
    });

    BalanceResult out;
    const std::size_t want = abnormal.size();
    const std::size_t want_after = want / 2;
    const std::size_t want_before = want - want_after;
    std::size_t n_before = std::min(want_before, before.size());
    std::size_t n_after = std::min(want_after, after.size());
    // borrow the shortfall from the side that still has buckets
    n_after = std::min(after.size(), n_after + (want_before - n_before));
    n_before = std::min(before.size(), n_before + (want - n_after - n_before));

    if (want > 0 && (before.empty() || after.empty()))
        out.warning = "normal buckets exist on one side of the window only";
    if (n_before + n_after < want) {
        if (!out.warning.empty()) out.warning += "; ";
        out.warning += "only " + std::to_string(n_before + n_after) + " normal buckets for " +
                       std::to_string(want) + " abnormal ones";
    }
    if (want == 0) out.warning = "no abnormal buckets in the window";

    out.kept = abnormal;
    out.kept.insert(out.kept.end(), before.begin(), before.begin() + n_before);
    out.kept.insert(out.kept.end(), after.begin(), after.begin() + n_after);
    std::sort(out.kept.begin(), out.kept.end());
    return out;
}

// ---------------------------------------------------------------------------
// Experiment grid
// ---------------------------------------------------------------------------

enum class GridResolution { day, week, month, all };

inline const char* grid_resolution_name(GridResolution r) {
    switch (r) {
        case GridResolution::day: return "day";
        case GridResolution::week: return "week";
        case GridResolution::month: return "month";
        case GridResolution::all: return "all";
    }
    return "?";
}

inline std::optional<GridResolution> grid_resolution_from_name(const std::string& s) {
    if (s == "day") return GridResolution::day;
    if (s == "week") return GridResolution::week;
    if (s == "month") return GridResolution::month;
    if (s == "all") return GridResolution::all;
    return std::nullopt;
}

/// The standard four preprocessing variants reported side by side:
/// all steps, without the irrelevant-word list, without spelling, and
/// without both lemmas and spelling.
inline std::vector<PipelineConfig> standard_variants(int min_tokens = 3) {
    return {PipelineConfig::from_steps({1, 2, 3, 4, 5}, min_tokens),
            PipelineConfig::from_steps({1, 2, 3, 4}, min_tokens),
            PipelineConfig::from_steps({1, 2, 3, 5}, min_tokens),
            PipelineConfig::from_steps({1, 2, 5}, min_tokens)};
}

struct ExperimentGrid {
    std::vector<AbnormalPeriod> periods;
    std::vector<GridResolution> resolutions = {GridResolution::day, GridResolution::week,
                                               GridResolution::month, GridResolution::all};
    std::vector<PipelineConfig> variants = standard_variants();
    std::uint64_t seed = 0;
    int repeats = 1;

    void validate() const {
        if (periods.empty()) throw domain_error("experiment grid: no periods");
        if (resolutions.empty()) throw domain_error("experiment grid: no resolutions");
        if (variants.empty()) throw domain_error("experiment grid: no preprocessing variants");
        if (repeats < 1) throw domain_error("experiment grid: repeats < 1");
        for (const auto& p : periods) p.validate();
    }
};

struct GridResult {
    std::string period_name;
    GridResolution resolution = GridResolution::day;
    std::string variant_label; // PipelineConfig::steps_label()
    std::optional<double> accuracy; // mean held-out accuracy; empty on error
    int n_abnormal = 0;
    int n_normal = 0;
    int repeats = 1;
    std::string warning;
    std::string error; // cell failure; the grid keeps going
};

/// Run the full period x resolution x preprocessing grid. Clouds are built
/// once per (variant, base resolution) and shared across periods; every cell
/// trains from a seed derived from the grid seed and the cell key, so cells
/// are independent and the whole grid is reproducible. Cell failures land in
/// GridResult::error instead of aborting the grid.
inline std::vector<GridResult> run_grid(
    const Corpus& corpus, const ExperimentGrid& grid, const Lexicons& lexicons,
    const CloudParams& cloud_params, const WcCnnConfig& cnn_config,
    const std::function<void(const GridResult&)>& on_cell = {}) {
    grid.validate();
    cloud_params.validate();
    cnn_config.validate();

    std::vector<std::vector<TokenizedComment>> processed;
    processed.reserve(grid.variants.size());
    for (const auto& variant : grid.variants)
        processed.push_back(run_pipeline(corpus, lexicons, variant));

    std::map<std::pair<std::size_t, int>, std::vector<CloudImage>> cache;
    auto clouds_for = [&](std::size_t vi, Resolution res) -> const std::vector<CloudImage>& {
        const auto key = std::make_pair(vi, static_cast<int>(res));
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, generate_bucket_clouds(processed[vi], res, cloud_params))
                     .first;
        return it->second;
    };

    std::vector<GridResult> results;
    for (const auto& period : grid.periods) {
        for (const auto res : grid.resolutions) {
            for (std::size_t vi = 0; vi < grid.variants.size(); ++vi) {
                GridResult cell;
                cell.period_name = period.name;
                cell.resolution = res;
                cell.variant_label = grid.variants[vi].steps_label();
                cell.repeats = grid.repeats;
                try {
                    std::vector<const CloudImage*> clouds;
                    if (res == GridResolution::all) {
                        for (const Resolution base :
                             {Resolution::day, Resolution::week, Resolution::month})
                            for (const auto& c : clouds_for(vi, base)) clouds.push_back(&c);
                    } else {
                        const Resolution base = res == GridResolution::day    ? Resolution::day
                                                : res == GridResolution::week ? Resolution::week
                                                                              : Resolution::month;
                        for (const auto& c : clouds_for(vi, base)) clouds.push_back(&c);
                    }

                    std::vector<LabeledBucket> labeled;
                    labeled.reserve(clouds.size());
                    const Date p1 = period.first_day();
                    const Date p2 = period.last_day();
                    for (const CloudImage* c : clouds) {
                        const auto [b1, b2] = bucket_span(c->bucket_key);
                        labeled.push_back({c->bucket_key, b1, b2,
                                           spans_intersect(b1, b2, p1, p2)
                                               ? BucketLabel::abnormal
                                               : BucketLabel::normal});
                    }
                    const BalanceResult bal = balance(labeled, period);
                    cell.warning = bal.warning;

                    std::vector<LabeledImage> data;
                    data.reserve(bal.kept.size());
                    for (const std::size_t idx : bal.kept) {
                        const bool abnormal = labeled[idx].label == BucketLabel::abnormal;
                        data.push_back({clouds[idx]->image,
                                        abnormal ? kLabelAbnormal : kLabelNormal});
                        if (abnormal)
                            ++cell.n_abnormal;
                        else
                            ++cell.n_normal;
                    }

                    const std::uint64_t cell_seed =
                        mix_seed(grid.seed, hash_str(period.name + "|" +
                                                     grid_resolution_name(res) + "|" +
                                                     cell.variant_label));
                    double acc_sum = 0.0;
                    for (int rep = 0; rep < grid.repeats; ++rep) {
                        WcCnnConfig cfg = cnn_config;
                        cfg.seed = mix_seed(cell_seed, static_cast<std::uint64_t>(rep));
                        const WcCnnModel model = train(cfg, data);
                        acc_sum += best_val_accuracy(model);
                    }
                    cell.accuracy = acc_sum / grid.repeats;
                } catch (const std::exception& e) {
                    cell.error = e.what();
                    cell.accuracy.reset();
                }
                if (on_cell) on_cell(cell);
                results.push_back(std::move(cell));
            }
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat { csv, markdown };

namespace detail {

inline std::string accuracy_cell(const std::optional<double>& a) {
    if (!a) return "—";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *a);
    return buf;
}

inline const GridResult* find_cell(const std::vector<GridResult>& results,
                                   const std::string& period, GridResolution res,
                                   const std::string& variant) {
    for (const auto& r : results)
        if (r.period_name == period && r.resolution == res && r.variant_label == variant)
            return &r;
    return nullptr;
}

/// Periods and variants in first-appearance order; resolutions in the fixed
/// day/week/month/all column order, restricted to those present.
struct ReportAxes {
    std::vector<std::string> periods;
    std::vector<GridResolution> resolutions;
    std::vector<std::string> variants;
};

inline ReportAxes report_axes(const std::vector<GridResult>& results) {
    ReportAxes axes;
    std::set<int> seen_res;
    for (const auto& r : results) {
        if (std::find(axes.periods.begin(), axes.periods.end(), r.period_name) ==
            axes.periods.end())
            axes.periods.push_back(r.period_name);
        if (std::find(axes.variants.begin(), axes.variants.end(), r.variant_label) ==
            axes.variants.end())
            axes.variants.push_back(r.variant_label);
        seen_res.insert(static_cast<int>(r.resolution));
    }
    for (const GridResolution res : {GridResolution::day, GridResolution::week,
                                     GridResolution::month, GridResolution::all})
        if (seen_res.count(static_cast<int>(res))) axes.resolutions.push_back(res);
    return axes;
}

inline std::string resolution_column_title(GridResolution r) {
    switch (r) {
        case GridResolution::day: return "Day";
        case GridResolution::week: return "Week";
        case GridResolution::month: return "Month";
        case GridResolution::all: return "All periods";
    }
    return "?";
}

} // namespace detail

/// One table per abnormal period: rows are preprocessing variants, columns
/// are resolutions, cells are 3-decimal accuracies ("—" when absent).
inline std::string report(const std::vector<GridResult>& results, ReportFormat format) {
    const detail::ReportAxes axes = detail::report_axes(results);
    std::string out;
    if (format == ReportFormat::csv) {
        out = "period,preprocessing,day,week,month,all_periods\n";
        for (const auto& period : axes.periods) {
            for (const auto& variant : axes.variants) {
                out += csv_escape(period) + "," + csv_escape(variant);
                for (const GridResolution res : {GridResolution::day, GridResolution::week,
                                                 GridResolution::month, GridResolution::all}) {
                    const GridResult* cell = detail::find_cell(results, period, res, variant);
                    out += ",";
                    if (cell && cell->accuracy) {
                        char buf[32];
                        std::snprintf(buf, sizeof buf, "%.3f", *cell->accuracy);
                        out += buf;
                    }
                }
                out += "\n";
            }
        }
        return out;
    }
    bool first = true;
    for (const auto& period : axes.periods) {
        if (!first) out += "\n";
        first = false;
        out += "## " + period + "\n\n";
        out += "| Preprocessing |";
        for (const GridResolution res : axes.resolutions)
            out += " " + detail::resolution_column_title(res) + " |";
        out += "\n| --- |";
        for (std::size_t i = 0; i < axes.resolutions.size(); ++i) out += " --- |";
        out += "\n";
        for (const auto& variant : axes.variants) {
            out += "| " + variant + " |";
            for (const GridResolution res : axes.resolutions) {
                const GridResult* cell = detail::find_cell(results, period, res, variant);
                out += " " + detail::accuracy_cell(cell ? cell->accuracy : std::nullopt) + " |";
            }
            out += "\n";
        }
    }
    return out;
}

/// Lowercased period name with anything outside [a-z0-9] collapsed to '-'.
inline std::string period_slug(const std::string& name) {
    std::string slug;
    for (const char ch : name) {
        const char lc = (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
        if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9'))
            slug += lc;
        else if (!slug.empty() && slug.back() != '-')
            slug += '-';
    }
    while (!slug.empty() && slug.back() == '-') slug.pop_back();
    if (slug.empty()) throw domain_error("period name yields an empty file slug: " + name);
    return slug;
}

/// Write report_<period>.md and report_<period>.csv per period; returns the
/// paths written.
inline std::vector<std::string> write_reports(const std::vector<GridResult>& results,
                                              const std::string& out_dir) {
    const detail::ReportAxes axes = detail::report_axes(results);
    std::vector<std::string> paths;
    for (const auto& period : axes.periods) {
        std::vector<GridResult> subset;
        for (const auto& r : results)
            if (r.period_name == period) subset.push_back(r);
        const std::string stem = out_dir + "/report_" + period_slug(period);
        write_file(stem + ".md", report(subset, ReportFormat::markdown));
        write_file(stem + ".csv", report(subset, ReportFormat::csv));
        paths.push_back(stem + ".md");
        paths.push_back(stem + ".csv");
    }
    return paths;
}

// ---------------------------------------------------------------------------
// Grid results as JSON (so reports can be re-rendered without re-running)
// ---------------------------------------------------------------------------

inline nlohmann::json grid_results_to_json(const std::vector<GridResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json cell;
        cell["period"] = r.period_name;
        cell["resolution"] = grid_resolution_name(r.resolution);
        cell["preprocessing"] = r.variant_label;
        if (r.accuracy)
            cell["accuracy"] = *r.accuracy;
        else
            cell["accuracy"] = nullptr;
        cell["n_abnormal"] = r.n_abnormal;
        cell["n_normal"] = r.n_normal;
        cell["repeats"] = r.repeats;
        cell["warning"] = r.warning;
        cell["error"] = r.error;
        arr.push_back(std::move(cell));
    }
    return arr;
}

inline std::vector<GridResult> grid_results_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw format_error("grid results: expected a JSON array");
    std::vector<GridResult> results;
    for (const auto& cell : arr) {
        if (!cell.is_object()) throw format_error("grid results: expected cell objects");
        GridResult r;
        if (!cell.contains("period") || !cell["period"].is_string())
            throw format_error("grid results: missing 'period'");
        r.period_name = cell["period"].get<std::string>();
        if (!cell.contains("resolution") || !cell["resolution"].is_string())
            throw format_error("grid results: missing 'resolution'");
        const auto res = grid_resolution_from_name(cell["resolution"].get<std::string>());
        if (!res)
            throw format_error("grid results: unknown resolution '" +
                               cell["resolution"].get<std::string>() + "'");
        r.resolution = *res;
        if (!cell.contains("preprocessing") || !cell["preprocessing"].is_string())
            throw format_error("grid results: missing 'preprocessing'");
        r.variant_label = cell["preprocessing"].get<std::string>();
        if (cell.contains("accuracy") && cell["accuracy"].is_number())
            r.accuracy = cell["accuracy"].get<double>();
        r.n_abnormal = cell.value("n_abnormal", 0);
        r.n_normal = cell.value("n_normal", 0);
        r.repeats = cell.value("repeats", 1);
        r.warning = cell.value("warning", std::string());
        r.error = cell.value("error", std::string());
        results.push_back(std::move(r));
    }
    return results;
}

// ---------------------------------------------------------------------------
// Grid configuration file
// ---------------------------------------------------------------------------

/// Everything the `grid` command needs, parsed from one JSON document. See
/// the README for the schema; unknown fields are rejected to catch typos.
struct GridConfig {
    std::string corpus_path;
    CorpusFormat corpus_format = CorpusFormat::csv;
    std::string lexicons_dir; // empty: run with empty lexicons
    std::string out_dir = ".";
    ExperimentGrid grid;
    CloudParams cloud;
    WcCnnConfig cnn;
};

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& j, const char* where,
                                  std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw format_error(std::string(where) + ": unknown field '" + key + "'");
    }
}

} // namespace detail

inline GridConfig grid_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw format_error("grid config: expected a JSON object");
    detail::reject_unknown_fields(j, "grid config",
                                  {"corpus", "format", "lexicons_dir", "out_dir", "seed",
                                   "repeats", "resolutions", "variants", "min_tokens",
                                   "periods", "cloud", "cnn"});
    GridConfig cfg;
    if (!j.contains("corpus") || !j["corpus"].is_string())
        throw format_error("grid config: missing string field 'corpus'");
    cfg.corpus_path = j["corpus"].get<std::string>();
    const std::string fmt = j.value("format", std::string("csv"));
    if (fmt == "csv")
        cfg.corpus_format = CorpusFormat::csv;
    else if (fmt == "jsonl")
        cfg.corpus_format = CorpusFormat::jsonl;
    else
        throw format_error("grid config: unknown corpus format '" + fmt + "'");
    cfg.lexicons_dir = j.value("lexicons_dir", std::string());
    cfg.out_dir = j.value("out_dir", std::string("."));
    cfg.grid.seed = j.value("seed", 0ULL);
    cfg.grid.repeats = j.value("repeats", 1);

    if (j.contains("resolutions")) {
        if (!j["resolutions"].is_array())
            throw format_error("grid config: 'resolutions' must be an array");
        cfg.grid.resolutions.clear();
        for (const auto& e : j["resolutions"]) {
            if (!e.is_string())
                throw format_error("grid config: resolutions must be strings");
            const auto res = grid_resolution_from_name(e.get<std::string>());
            if (!res)
                throw format_error("grid config: unknown resolution '" +
                                   e.get<std::string>() + "'");
            cfg.grid.resolutions.push_back(*res);
        }
    }

    const int min_tokens = j.value("min_tokens", 3);
    if (j.contains("variants")) {
        if (!j["variants"].is_array())
            throw format_error("grid config: 'variants' must be an array of step arrays");
        cfg.grid.variants.clear();
        for (const auto& v : j["variants"]) {
            if (!v.is_array())
                throw format_error("grid config: each variant must be an array of steps");
            std::set<int> steps;
            for (const auto& s : v) {
                if (!s.is_number_integer())
                    throw format_error("grid config: steps must be integers");
                const int step = s.get<int>();
                if (step < 1 || step > 5)
                    throw format_error("grid config: step " + std::to_string(step) +
                                       " outside 1..5");
                steps.insert(step);
            }
            cfg.grid.variants.push_back(PipelineConfig::from_steps(steps, min_tokens));
        }
    } else {
        cfg.grid.variants = standard_variants(min_tokens);
    }

    if (!j.contains("periods") || !j["periods"].is_array() || j["periods"].empty())
        throw format_error("grid config: missing non-empty array 'periods'");
    for (const auto& p : j["periods"]) {
        if (!p.is_object())
            throw format_error("grid config: each period must be an object");
        detail::reject_unknown_fields(p, "grid config period", {"name", "start", "end"});
        AbnormalPeriod period;
        if (!p.contains("name") || !p["name"].is_string())
            throw format_error("grid config: period missing string field 'name'");
        period.name = p["name"].get<std::string>();
        if (!p.contains("start") || !p["start"].is_string() || !p.contains("end") ||
            !p["end"].is_string())
            throw format_error("grid config: period '" + period.name +
                               "' needs string fields 'start' and 'end' (YYYY-MM)");
        std::tie(period.start_year, period.start_month) =
            parse_year_month(p["start"].get<std::string>());
        std::tie(period.end_year, period.end_month) =
            parse_year_month(p["end"].get<std::string>());
        period.validate();
        cfg.grid.periods.push_back(std::move(period));
    }

    if (j.contains("cloud")) {
        const auto& c = j["cloud"];
        if (!c.is_object()) throw format_error("grid config: 'cloud' must be an object");
        detail::reject_unknown_fields(c, "grid config cloud",
                                      {"width", "height", "max_words", "max_font", "min_font",
                                       "relative_scaling", "vertical_fraction", "render_mode",
                                       "seed"});
        cfg.cloud.width = c.value("width", cfg.cloud.width);
        cfg.cloud.height = c.value("height", cfg.cloud.height);
        cfg.cloud.max_words = c.value("max_words", cfg.cloud.max_words);
        cfg.cloud.max_font = c.value("max_font", cfg.cloud.max_font);
        cfg.cloud.min_font = c.value("min_font", cfg.cloud.min_font);
        cfg.cloud.relative_scaling = c.value("relative_scaling", cfg.cloud.relative_scaling);
        cfg.cloud.vertical_fraction = c.value("vertical_fraction", cfg.cloud.vertical_fraction);
        cfg.cloud.seed = c.value("seed", cfg.cloud.seed);
        const std::string mode = c.value("render_mode", std::string("glyph"));
        if (mode == "glyph")
            cfg.cloud.render_mode = RenderMode::glyph;
        else if (mode == "box")
            cfg.cloud.render_mode = RenderMode::box;
        else
            throw format_error("grid config: unknown render_mode '" + mode + "'");
    }
    cfg.cloud.validate();

    if (j.contains("cnn")) {
        const auto& c = j["cnn"];
        if (!c.is_object()) throw format_error("grid config: 'cnn' must be an object");
        detail::reject_unknown_fields(c, "grid config cnn",
                                      {"input_w", "input_h", "kernels", "filters", "pools_after",
                                       "dropout", "batch_size", "max_epochs", "patience",
                                       "learning_rate"});
        cfg.cnn.input_w = c.value("input_w", cfg.cnn.input_w);
        cfg.cnn.input_h = c.value("input_h", cfg.cnn.input_h);
        if (c.contains("kernels")) {
            if (!c["kernels"].is_array())
                throw format_error("grid config: cnn kernels must be an array");
            cfg.cnn.conv_kernels.clear();
            for (const auto& k : c["kernels"]) {
                if (!k.is_number_integer())
                    throw format_error("grid config: cnn kernels must be integers");
                cfg.cnn.conv_kernels.push_back(k.get<int>());
            }
        }
        cfg.cnn.conv_filters = c.value("filters", cfg.cnn.conv_filters);
        cfg.cnn.pools_after = c.value("pools_after", cfg.cnn.pools_after);
        cfg.cnn.dropout_rate = c.value("dropout", cfg.cnn.dropout_rate);
        cfg.cnn.batch_size = c.value("batch_size", cfg.cnn.batch_size);
        cfg.cnn.max_epochs = c.value("max_epochs", cfg.cnn.max_epochs);
        cfg.cnn.early_stop_patience = c.value("patience", cfg.cnn.early_stop_patience);
        cfg.cnn.adam.lr = c.value("learning_rate", cfg.cnn.adam.lr);
    }
    cfg.cnn.validate();
    cfg.grid.validate();
    return cfg;
}

} // namespace sigmine
