// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigmine/csv.hpp"
#include "sigmine/date.hpp"
#include "sigmine/error.hpp"
#include "sigmine/io.hpp"
#include "sigmine/rng.hpp"
#include "sigmine/series.hpp"

namespace sigmine {

/// One forum post.
struct Comment {
    Date timestamp;
    std::string author;
    std::string text;
    std::string url; // may be empty
};

struct Corpus {
    std::vector<Comment> comments; // sorted ascending by timestamp, stable
    std::string provenance;

    std::size_t size() const { return comments.size(); }
    bool empty() const { return comments.empty(); }
};

enum class CorpusFormat { csv, jsonl };

struct LoadResult {
    Corpus corpus;
    std::size_t dropped = 0; // rows with unparseable dates or empty text
};

namespace detail {

inline void sort_by_timestamp(std::vector<Comment>& comments) {
    std::stable_sort(comments.begin(), comments.end(),
                     [](const Comment& a, const Comment& b) { return a.timestamp < b.timestamp; });
}

} // namespace detail

/// Parses CSV corpus content. Header must provide the columns
/// `date,author,text,url` (any order, extras ignored). Rows with an
/// unparseable date or empty text are dropped and counted.
inline LoadResult load_corpus_csv(const std::string& content, const std::string& provenance) {
    auto rows = parse_csv(content);
    if (rows.empty()) throw format_error("csv corpus: empty file");
    const auto& header = rows.front();
    auto col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw format_error("csv corpus: missing column '" + name + "'");
    };
    std::size_t c_date = col("date"), c_author = col("author"), c_text = col("text"),
                c_url = col("url");

    LoadResult result;
    result.corpus.provenance = provenance;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t need = std::max({c_date, c_author, c_text, c_url});
        if (row.size() <= need) {
            ++result.dropped;
            continue;
        }
        auto date = parse_date(row[c_date]);
        if (!date || row[c_text].empty()) {
            ++result.dropped;
            continue;
        }
        result.corpus.comments.push_back(Comment{*date, row[c_author], row[c_text], row[c_url]});
    }
    if (result.corpus.comments.empty()) throw format_error("csv corpus: zero valid rows");
    detail::sort_by_timestamp(result.corpus.comments);
    return result;
}

/// Parses JSONL corpus content: one object per line with keys
/// date/author/text/url. Same drop rules as the CSV loader.
inline LoadResult load_corpus_jsonl(const std::string& content, const std::string& provenance) {
    LoadResult result;
    result.corpus.provenance = provenance;
    std::size_t lines_seen = 0;
    for (const auto& line : split_lines(content)) {
        if (line.empty()) continue;
        ++lines_seen;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            ++result.dropped;
            continue;
        }
        if (!obj.is_object() || !obj.contains("date") || !obj.contains("author") ||
            !obj.contains("text") || !obj.contains("url")) {
            ++result.dropped;
            continue;
        }
        if (!obj["date"].is_string() || !obj["text"].is_string()) {
            ++result.dropped;
            continue;
        }
        auto date = parse_date(obj["date"].get<std::string>());
        std::string text = obj["text"].get<std::string>();
        if (!date || text.empty()) {
            ++result.dropped;
            continue;
        }
        result.corpus.comments.push_back(
            Comment{*date, obj["author"].is_string() ? obj["author"].get<std::string>() : "",
                    text, obj["url"].is_string() ? obj["url"].get<std::string>() : ""});
    }
    if (lines_seen == 0) throw format_error("jsonl corpus: empty file");
    if (result.corpus.comments.empty()) throw format_error("jsonl corpus: zero valid rows");
    detail::sort_by_timestamp(result.corpus.comments);
    return result;
}

inline LoadResult load_corpus(const std::string& path, CorpusFormat format) {
    std::string content = read_file(path);
    return format == CorpusFormat::csv ? load_corpus_csv(content, path)
                                       : load_corpus_jsonl(content, path);
}

inline std::string corpus_to_csv(const Corpus& corpus) {
    std::string out = "date,author,text,url\n";
    for (const auto& c : corpus.comments)
        out += csv_row({format_date(c.timestamp), c.author, c.text, c.url});
    return out;
}

inline void write_corpus_csv(const Corpus& corpus, const std::string& path) {
    write_file(path, corpus_to_csv(corpus));
}

// ---------------------------------------------------------------------------
// Forum HTML fixtures
// ---------------------------------------------------------------------------

struct HtmlParseResult {
    std::vector<Comment> comments;
    std::size_t skipped_posts = 0; // post blocks missing a parseable date
    bool no_posts_found = false;   // warning signal: page had no post blocks
};

namespace detail {

inline std::optional<std::string> find_tag_content(const std::string& html, std::size_t from,
                                                   std::size_t until, const std::string& open_prefix,
                                                   const std::string& close_tag) {
    std::size_t open = html.find(open_prefix, from);
    if (open == std::string::npos || open >= until) return std::nullopt;
    std::size_t start = html.find('>', open);
    if (start == std::string::npos || start >= until) return std::nullopt;
    ++start;
    std::size_t end = html.find(close_tag, start);
    if (end == std::string::npos || end > until) return std::nullopt;
    return html.substr(start, end - start);
}

inline std::optional<std::string> find_attr(const std::string& block, const std::string& attr) {
    std::size_t pos = block.find(attr + "=\"");
    if (pos == std::string::npos) return std::nullopt;
    std::size_t start = pos + attr.size() + 2;
    std::size_t end = block.find('"', start);
    if (end == std::string::npos) return std::nullopt;
    return block.substr(start, end - start);
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace detail

/// Parses a saved forum thread page in the documented fixture format
/// (`docs/forum-fixture.md`): `<div class="post" ...>` blocks with
/// `post-date` / `post-author` spans and a `post-text` div. Inline markup
/// inside the text is kept as-is; cleaning happens later in the pipeline.
/// Posts without a parseable date are skipped and counted.
inline HtmlParseResult parse_forum_html(const std::string& html) {
    HtmlParseResult result;
    const std::string post_marker = "class=\"post\"";
    std::vector<std::size_t> starts;
    for (std::size_t pos = html.find(post_marker); pos != std::string::npos;
         pos = html.find(post_marker, pos + post_marker.size())) {
        std::size_t tag_open = html.rfind('<', pos);
        if (tag_open != std::string::npos) starts.push_back(tag_open);
    }
    if (starts.empty()) {
        result.no_posts_found = true;
        return result;
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::size_t from = starts[i];
        std::size_t until = (i + 1 < starts.size()) ? starts[i + 1] : html.size();

        std::size_t open_end = html.find('>', from);
        std::string open_tag =
            open_end == std::string::npos ? "" : html.substr(from, open_end - from + 1);
        auto url = detail::find_attr(open_tag, "data-url");

        auto date_str = detail::find_tag_content(html, from, until,
                                                 "<span class=\"post-date\"", "</span>");
        auto author = detail::find_tag_content(html, from, until,
                                               "<span class=\"post-author\"", "</span>");
        auto text = detail::find_tag_content(html, from, until,
                                             "<div class=\"post-text\"", "</div>");
        std::optional<Date> date;
        if (date_str) date = parse_date(detail::trim(*date_str));
        if (!date || !text || detail::trim(*text).empty()) {
            ++result.skipped_posts;
            continue;
        }
        result.comments.push_back(Comment{*date, author ? detail::trim(*author) : "",
                                          detail::trim(*text), url ? *url : ""});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Filtering and counting
// ---------------------------------------------------------------------------

/// Keeps comments with start <= timestamp <= end, both ends inclusive.
inline Corpus filter_by_period(const Corpus& corpus, const Date& start, const Date& end) {
    if (end < start) throw domain_error("filter_by_period: start > end");
    Corpus out;
    out.provenance = corpus.provenance;
    for (const auto& c : corpus.comments)
        if (start <= c.timestamp && c.timestamp <= end) out.comments.push_back(c);
    return out;
}

/// Posting-volume series: dense bucket counts over the corpus's min-max range.
inline FrequencySeries comment_counts(const Corpus& corpus, Resolution res) {
    FrequencySeries series;
    series.key = "comments";
    series.resolution = res;
    if (corpus.empty()) return series;
    Date lo = corpus.comments.front().timestamp;
    Date hi = corpus.comments.back().timestamp;
    series = make_dense_series("comments", res, lo, hi);
    for (const auto& c : corpus.comments) series.buckets[bucket_key(c.timestamp, res)] += 1;
    return series;
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

/// A vocabulary entry for the generator. `phrase` may hold several
/// space-separated tokens; they are emitted adjacently, which is how bigrams
/// of interest are injected into synthetic corpora.
struct WeightedPhrase {
    std::string phrase;
    double weight = 1.0;
};

struct SyntheticSpec {
    Date start;
    Date end;
    double daily_rate_normal = 5.0;
    Date burst_start;
    Date burst_end;
    double burst_multiplier = 1.0;
    std::vector<WeightedPhrase> vocab_normal;
    std::vector<WeightedPhrase> vocab_burst;
    std::uint64_t seed = 0;

    // Generation knobs beyond the core contract, all deterministic.
    double burst_vocab_share = 0.7; // probability a burst-day draw uses vocab_burst
    int min_tokens_per_comment = 5;
    int max_tokens_per_comment = 12;
    int author_pool = 40;

    void validate() const {
        if (end < start) throw domain_error("synthetic spec: date_range end before start");
        if (burst_end < burst_start) throw domain_error("synthetic spec: burst window inverted");
        if (burst_start < start || end < burst_end)
            throw domain_error("synthetic spec: burst window outside date_range");
        if (burst_multiplier < 1.0) throw domain_error("synthetic spec: multiplier < 1");
        if (daily_rate_normal <= 0.0) throw domain_error("synthetic spec: non-positive rate");
        if (vocab_normal.empty()) throw domain_error("synthetic spec: empty vocab_normal");
        if (vocab_burst.empty()) throw domain_error("synthetic spec: empty vocab_burst");
        for (const auto& e : vocab_normal)
            if (e.weight <= 0.0) throw domain_error("synthetic spec: non-positive weight");
        for (const auto& e : vocab_burst)
            if (e.weight <= 0.0) throw domain_error("synthetic spec: non-positive weight");
        if (min_tokens_per_comment < 1 || max_tokens_per_comment < min_tokens_per_comment)
            throw domain_error("synthetic spec: bad token count range");
        if (burst_vocab_share < 0.0 || burst_vocab_share > 1.0)
            throw domain_error("synthetic spec: burst_vocab_share outside [0,1]");
    }
};

/// Deterministic synthetic corpus: Poisson daily volumes at
/// `daily_rate_normal` (times `burst_multiplier` inside the burst window),
/// tokens drawn from the weighted vocabularies. Same spec + seed gives a
/// byte-identical corpus.
inline Corpus generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(mix_seed(spec.seed));
    std::vector<double> cum_normal, cum_burst;
    {
        std::vector<double> w;
        for (const auto& e : spec.vocab_normal) w.push_back(e.weight);
        cum_normal = cumulative_weights(w);
        w.clear();
        for (const auto& e : spec.vocab_burst) w.push_back(e.weight);
        cum_burst = cumulative_weights(w);
    }

    Corpus corpus;
    corpus.provenance = "synthetic";
    for (std::int64_t s = serial_day(spec.start); s <= serial_day(spec.end); ++s) {
        Date day = date_from_serial(s);
        bool in_burst = spec.burst_start <= day && day <= spec.burst_end;
        double rate = spec.daily_rate_normal * (in_burst ? spec.burst_multiplier : 1.0);
        int n = rng.poisson(rate);
        for (int i = 0; i < n; ++i) {
            int author_id = static_cast<int>(rng.uniform_int(1, spec.author_pool));
            int want = static_cast<int>(
                rng.uniform_int(spec.min_tokens_per_comment, spec.max_tokens_per_comment));
            std::string text;
            int tokens = 0;
            while (tokens < want) {
                bool from_burst = in_burst && rng.uniform() < spec.burst_vocab_share;
                const auto& vocab = from_burst ? spec.vocab_burst : spec.vocab_normal;
                const auto& cum = from_burst ? cum_burst : cum_normal;
                const std::string& phrase = vocab[rng.weighted_index(cum)].phrase;
                if (!text.empty()) text += ' ';
                text += phrase;
                tokens += 1 + static_cast<int>(std::count(phrase.begin(), phrase.end(), ' '));
            }
            corpus.comments.push_back(
                Comment{day, "user" + std::to_string(author_id), text, ""});
        }
    }
    return corpus; // generated in date order already
}

/// JSON schema for SyntheticSpec files consumed by the CLI `synth` command.
inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec spec;
    auto req_date = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_string())
            throw format_error(std::string("synthetic spec: missing date field '") + key + "'");
        auto d = parse_date(j[key].get<std::string>());
        if (!d) throw format_error(std::string("synthetic spec: bad date in '") + key + "'");
        return *d;
    };
    spec.start = req_date("start");
    spec.end = req_date("end");
    spec.burst_start = req_date("burst_start");
    spec.burst_end = req_date("burst_end");
    spec.daily_rate_normal = j.value("daily_rate_normal", 5.0);
    spec.burst_multiplier = j.value("burst_multiplier", 1.0);
    spec.seed = j.value("seed", 0ULL);
    spec.burst_vocab_share = j.value("burst_vocab_share", 0.7);
    spec.min_tokens_per_comment = j.value("min_tokens_per_comment", 5);
    spec.max_tokens_per_comment = j.value("max_tokens_per_comment", 12);
    spec.author_pool = j.value("author_pool", 40);
    auto read_vocab = [&](const char* key) {
        std::vector<WeightedPhrase> v;
        if (!j.contains(key) || !j[key].is_array())
            throw format_error(std::string("synthetic spec: missing vocab '") + key + "'");
        for (const auto& e : j[key]) {
            if (e.is_string())
                v.push_back({e.get<std::string>(), 1.0});
            else if (e.is_array() && e.size() == 2)
                v.push_back({e[0].get<std::string>(), e[1].get<double>()});
            else
                throw format_error(std::string("synthetic spec: bad vocab entry in '") + key + "'");
        }
        return v;
    };
    spec.vocab_normal = read_vocab("vocab_normal");
    spec.vocab_burst = read_vocab("vocab_burst");
    spec.validate();
    return spec;
}

} // namespace sigmine
