// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sigmine/date.hpp"

namespace sigmine {

/// Counts of one token / n-gram / event per time bucket. The bucket map is
/// dense: every bucket between the first and last key of the analysis range
/// is present, zeros included, so correlations and plots are well-defined.
struct FrequencySeries {
    std::string key;
    Resolution resolution = Resolution::day;
    std::map<std::string, std::int64_t> buckets;

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& [_, c] : buckets) t += c;
        return t;
    }

    /// Counts in bucket order (the map is ordered and keys sort chronologically).
    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(buckets.size());
        for (const auto& [_, c] : buckets) v.push_back(static_cast<double>(c));
        return v;
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> k;
        k.reserve(buckets.size());
        for (const auto& [b, _] : buckets) k.push_back(b);
        return k;
    }
};

/// Empty dense series over [first, last].
inline FrequencySeries make_dense_series(const std::string& key, Resolution res,
                                         const Date& first, const Date& last) {
    FrequencySeries s;
    s.key = key;
    s.resolution = res;
    for (const auto& b : bucket_range(first, last, res)) s.buckets[b] = 0;
    return s;
}

/// `bucket,count` CSV emitter used by the CLI report commands.
inline std::string series_to_csv(const FrequencySeries& s) {
    std::string out = "bucket,count\n";
    for (const auto& [b, c] : s.buckets) {
        out += b;
        out += ',';
        out += std::to_string(c);
        out += '\n';
    }
    return out;
}

} // namespace sigmine
