// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <regex>
#include <string>
#include <unordered_set>
#include <vector>

#include "sigmine/error.hpp"
#include "sigmine/indicators.hpp"
#include "sigmine/io.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/series.hpp"

namespace sigmine {

struct ADREntry {
    std::string canonical_name;
    std::string pattern_text;
    std::regex pattern; // compiled at load, ECMAScript grammar
};

struct ADRLexicon {
    std::vector<ADREntry> entries;
};

struct ADRMention {
    std::size_t comment_index = 0;
    std::string canonical_name;
    std::size_t begin = 0; // byte offsets into the joined comment text
    std::size_t end = 0;
};

/// Loads a `canonical_name \t regex` TSV. Patterns are compiled eagerly so a
/// bad line fails here, with its line number, not mid-corpus.
inline ADRLexicon load_adr_lexicon(const std::string& path) {
    ADRLexicon lex;
    std::unordered_set<std::string> names;
    std::size_t lineno = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw format_error(path + ":" + std::to_string(lineno) + ": expected TAB separator");
        ADREntry entry;
        entry.canonical_name = trim(line.substr(0, tab));
        entry.pattern_text = trim(line.substr(tab + 1));
        if (entry.canonical_name.empty() || entry.pattern_text.empty())
            throw format_error(path + ":" + std::to_string(lineno) + ": empty field");
        if (!names.insert(entry.canonical_name).second)
            throw format_error(path + ":" + std::to_string(lineno) + ": duplicate name: " +
                               entry.canonical_name);
        try {
            entry.pattern.assign(entry.pattern_text, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw format_error(path + ":" + std::to_string(lineno) + ": bad pattern: " + e.what());
        }
        lex.entries.push_back(std::move(entry));
    }
    if (lex.entries.empty()) throw format_error(path + ": no lexicon entries");
    return lex;
}

/// All non-overlapping leftmost matches of every pattern over one comment's
/// normal-form text, with multiplicity. `comment_index` is filled by the
/// caller's loop index (0 for a one-off text).
inline std::vector<ADRMention> detect(const std::string& comment_text, const ADRLexicon& lexicon,
                                      std::size_t comment_index = 0) {
    std::vector<ADRMention> mentions;
    for (const auto& entry : lexicon.entries) {
        auto it = std::sregex_iterator(comment_text.begin(), comment_text.end(), entry.pattern);
        for (auto end = std::sregex_iterator(); it != end; ++it) {
            ADRMention m;
            m.comment_index = comment_index;
            m.canonical_name = entry.canonical_name;
            m.begin = static_cast<std::size_t>(it->position(0));
            m.end = m.begin + static_cast<std::size_t>(it->length(0));
            mentions.push_back(std::move(m));
        }
    }
    return mentions;
}

enum class ADRCountMode { occurrences, comments };

/// Mention counts per bucket, dense over the corpus span. `occurrences`
/// counts every match; `comments` counts each commenting post at most once.
inline FrequencySeries adr_series(const std::vector<TokenizedComment>& comments,
                                  const ADRLexicon& lexicon, Resolution res,
                                  ADRCountMode mode = ADRCountMode::occurrences) {
    bool any = false;
    Date first{}, last{};
    std::map<std::string, std::int64_t> raw;
    for (std::size_t i = 0; i < comments.size(); ++i) {
        const auto& c = comments[i];
        if (!any || c.timestamp < first) first = c.timestamp;
        if (!any || last < c.timestamp) last = c.timestamp;
        any = true;
        auto mentions = detect(c.joined(), lexicon, i);
        std::int64_t add = mode == ADRCountMode::occurrences
                               ? static_cast<std::int64_t>(mentions.size())
                               : (mentions.empty() ? 0 : 1);
        if (add) raw[bucket_key(c.timestamp, res)] += add;
    }
    FrequencySeries s;
    s.key = "adr";
    s.resolution = res;
    if (!any) return s;
    for (const auto& b : bucket_range(first, last, res)) s.buckets[b] = 0;
    for (const auto& [b, c] : raw) s.buckets[b] = c;
    return s;
}

/// Reactions ranked by total mention count, descending, ties by name.
inline std::vector<std::pair<std::string, std::int64_t>> most_common(
    const std::vector<TokenizedComment>& comments, const ADRLexicon& lexicon, std::size_t k) {
    if (k < 1) throw domain_error("most_common: k < 1");
    std::map<std::string, std::int64_t> counts;
    for (const auto& entry : lexicon.entries) counts[entry.canonical_name] = 0;
    for (std::size_t i = 0; i < comments.size(); ++i)
        for (const auto& m : detect(comments[i].joined(), lexicon, i)) ++counts[m.canonical_name];
    std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

/// Top bigrams of the sub-corpus of comments containing at least one
/// mention; the ranking contract is exactly indicators.top_k on that slice.
inline std::vector<std::pair<std::string, std::int64_t>> adr_ngrams(
    const std::vector<TokenizedComment>& comments, const ADRLexicon& lexicon, std::size_t k) {
    if (k < 1) throw domain_error("adr_ngrams: k < 1");
    std::vector<TokenizedComment> with_mentions;
    for (std::size_t i = 0; i < comments.size(); ++i)
        if (!detect(comments[i].joined(), lexicon, i).empty()) with_mentions.push_back(comments[i]);
    if (with_mentions.empty()) return {};
    auto series = ngram_frequency(with_mentions, Resolution::year);
    Date first = with_mentions.front().timestamp;
    Date last = first;
    for (const auto& c : with_mentions) {
        if (c.timestamp < first) first = c.timestamp;
        if (last < c.timestamp) last = c.timestamp;
    }
    return top_k(series, k, first, last);
}

} // namespace sigmine
