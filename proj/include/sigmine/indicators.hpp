// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigmine/csv.hpp"
#include "sigmine/error.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/series.hpp"

namespace sigmine {

struct NgramSpec {
    int n = 2;
};

/// Contiguous n-grams as space-joined strings; never crosses the token
/// sequence boundary. Output length = max(0, len - n + 1).
inline std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens,
                                               const NgramSpec& spec = {}) {
    if (spec.n < 1) throw domain_error("extract_ngrams: n < 1");
    std::vector<std::string> ngrams;
    if (tokens.size() < static_cast<std::size_t>(spec.n)) return ngrams;
    ngrams.reserve(tokens.size() - static_cast<std::size_t>(spec.n) + 1);
    for (std::size_t i = 0; i + static_cast<std::size_t>(spec.n) <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (int k = 1; k < spec.n; ++k) {
            g.push_back(' ');
            g += tokens[i + static_cast<std::size_t>(k)];
        }
        ngrams.push_back(std::move(g));
    }
    return ngrams;
}

namespace detail {

/// Densifies raw (key, bucket) counts over the corpus span so every series
/// shares the same bucket axis.
inline std::map<std::string, FrequencySeries> densify(
    std::unordered_map<std::string, std::map<std::string, std::int64_t>>&& raw, Resolution res,
    const Date& first, const Date& last, bool any) {
    std::map<std::string, FrequencySeries> out;
    if (!any) return out;
    std::vector<std::string> axis = bucket_range(first, last, res);
    for (auto& [key, counts] : raw) {
        FrequencySeries s;
        s.key = key;
        s.resolution = res;
        for (const auto& b : axis) s.buckets[b] = 0;
        for (const auto& [b, c] : counts) s.buckets[b] = c;
        out[key] = std::move(s);
    }
    return out;
}

} // namespace detail

/// Occurrence counts (token multiplicity, not document frequency) of every
/// word per bucket, dense over the span of `comments`.
inline std::map<std::string, FrequencySeries> word_frequency(
    const std::vector<TokenizedComment>& comments, Resolution res) {
    std::unordered_map<std::string, std::map<std::string, std::int64_t>> raw;
    bool any = false;
    Date first{}, last{};
    for (const auto& c : comments) {
        if (!any || c.timestamp < first) first = c.timestamp;
        if (!any || last < c.timestamp) last = c.timestamp;
        any = true;
        std::string b = bucket_key(c.timestamp, res);
        for (const auto& t : c.tokens) ++raw[t][b];
    }
    return detail::densify(std::move(raw), res, first, last, any);
}

/// Same counting for n-grams (default bigrams).
inline std::map<std::string, FrequencySeries> ngram_frequency(
    const std::vector<TokenizedComment>& comments, Resolution res, const NgramSpec& spec = {}) {
    std::unordered_map<std::string, std::map<std::string, std::int64_t>> raw;
    bool any = false;
    Date first{}, last{};
    for (const auto& c : comments) {
        if (!any || c.timestamp < first) first = c.timestamp;
        if (!any || last < c.timestamp) last = c.timestamp;
        any = true;
        std::string b = bucket_key(c.timestamp, res);
        for (const auto& g : extract_ngrams(c.tokens, spec)) ++raw[g][b];
    }
    return detail::densify(std::move(raw), res, first, last, any);
}

/// Total count of a series inside [start, end] (bucket span intersection).
inline std::int64_t total_in_period(const FrequencySeries& s, const Date& start, const Date& end) {
    std::int64_t t = 0;
    for (const auto& [b, c] : s.buckets) {
        auto [bs, be] = bucket_span(b);
        if (spans_intersect(bs, be, start, end)) t += c;
    }
    return t;
}

/// Keys ranked by descending total count within the period; ties broken by
/// ascending key so the ranking is independent of map iteration order.
inline std::vector<std::pair<std::string, std::int64_t>> top_k(
    const std::map<std::string, FrequencySeries>& series_map, std::size_t k, const Date& start,
    const Date& end) {
    if (k < 1) throw domain_error("top_k: k < 1");
    std::vector<std::pair<std::string, std::int64_t>> ranked;
    ranked.reserve(series_map.size());
    for (const auto& [key, s] : series_map) ranked.emplace_back(key, total_in_period(s, start, end));
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

/// Pearson product-moment coefficient. Constant input is a caller error:
/// the coefficient is undefined there and silence would hide it.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw domain_error("pearson: length mismatch");
    if (x.size() < 2) throw domain_error("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw domain_error("pearson: constant series, undefined correlation");
    return sxy / std::sqrt(sxx * syy);
}

struct CorrelationPair {
    std::string key1;
    std::string key2;
    double r = 0.0;
};

struct CorrelationReport {
    std::vector<CorrelationPair> pairs;              // sorted descending by r
    std::vector<std::pair<std::string, std::string>> skipped; // undefined pairs
};

/// Scores every unordered key pair with pearson over their shared bucket
/// axis. Pairs whose correlation is undefined (a constant series) are
/// skipped and reported, never silently dropped.
inline CorrelationReport correlation_pairs(const std::map<std::string, FrequencySeries>& series_map,
                                           const std::vector<std::string>& keys) {
    if (keys.size() < 2) throw domain_error("correlation_pairs: need at least 2 keys");
    for (const auto& k : keys)
        if (series_map.find(k) == series_map.end())
            throw domain_error("correlation_pairs: unknown key: " + k);
    CorrelationReport report;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto& si = series_map.at(keys[i]);
        for (std::size_t j = i + 1; j < keys.size(); ++j) {
            const auto& sj = series_map.at(keys[j]);
            try {
                report.pairs.push_back({keys[i], keys[j], pearson(si.values(), sj.values())});
            } catch (const domain_error&) {
                report.skipped.emplace_back(keys[i], keys[j]);
            }
        }
    }
    std::sort(report.pairs.begin(), report.pairs.end(), [](const auto& a, const auto& b) {
        if (a.r != b.r) return a.r > b.r;
        if (a.key1 != b.key1) return a.key1 < b.key1;
        return a.key2 < b.key2;
    });
    return report;
}

/// Rolling z-score with a trailing window that includes the current point.
/// Early points use whatever prefix exists; a zero-variance window scores 0,
/// so a first departure from a long flat stretch scores sqrt(window - 1).
inline std::vector<double> normalize_series(const std::vector<double>& values, int window) {
    if (window < 2) throw domain_error("normalize_series: window < 2");
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t t = 0; t < values.size(); ++t) {
        std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), t + 1);
        double mean = 0.0;
        for (std::size_t i = t + 1 - w; i <= t; ++i) mean += values[i];
        mean /= static_cast<double>(w);
        double var = 0.0;
        for (std::size_t i = t + 1 - w; i <= t; ++i) {
            const double d = values[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(w);
        out[t] = var == 0.0 ? 0.0 : (values[t] - mean) / std::sqrt(var);
    }
    return out;
}

inline std::vector<double> normalize_series(const FrequencySeries& s, int window) {
    return normalize_series(s.values(), window);
}

/// `key1,key2,r` CSV emitter for correlation rankings.
inline std::string correlation_to_csv(const CorrelationReport& report) {
    std::string out = "key1,key2,r\n";
    char buf[64];
    for (const auto& p : report.pairs) {
        std::snprintf(buf, sizeof(buf), "%.10f", p.r);
        out += csv_row({p.key1, p.key2, buf});
    }
    return out;
}

} // namespace sigmine
