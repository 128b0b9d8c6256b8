// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sigmine/corpus.hpp"
#include "sigmine/error.hpp"
#include "sigmine/io.hpp"

namespace sigmine {

/// A comment reduced to the unit every analysis consumes: a timestamp,
/// an author and an ordered token sequence in normal form ([a-z]+ only).
struct TokenizedComment {
    Date timestamp;
    std::string author;
    std::vector<std::string> tokens;

    std::string joined() const {
        std::string out;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) out.push_back(' ');
            out += tokens[i];
        }
        return out;
    }
};

struct Lexicons {
    std::unordered_set<std::string> stopwords;
    std::unordered_set<std::string> irrelevant_words; // the "words to delete" list
    std::unordered_map<std::string, std::string> spelling_map;
    std::unordered_map<std::string, std::string> lemma_table;
};

/// Evaluation-time switches. Step numbering follows the report layout:
/// 1 = minimum comment length, 2 = stopwords, 3 = lemmas, 4 = spelling,
/// 5 = irrelevant-word list.
struct PipelineConfig {
    bool toggle_min_len = true;
    bool toggle_stopwords = true;
    bool toggle_lemma = true;
    bool toggle_spelling = true;
    bool toggle_wordstodelete = true;
    int min_tokens = 3;

    static PipelineConfig from_steps(const std::set<int>& steps, int min_tokens = 3) {
        PipelineConfig c;
        c.toggle_min_len = steps.count(1) > 0;
        c.toggle_stopwords = steps.count(2) > 0;
        c.toggle_lemma = steps.count(3) > 0;
        c.toggle_spelling = steps.count(4) > 0;
        c.toggle_wordstodelete = steps.count(5) > 0;
        c.min_tokens = min_tokens;
        if (min_tokens < 1) throw domain_error("pipeline config: min_tokens < 1");
        return c;
    }

    static PipelineConfig all_off() { return from_steps({}); }

    std::string steps_label() const {
        std::string label = "Steps";
        if (toggle_min_len) label += " 1";
        if (toggle_stopwords) label += " 2";
        if (toggle_lemma) label += " 3";
        if (toggle_spelling) label += " 4";
        if (toggle_wordstodelete) label += " 5";
        if (label == "Steps") label += " none";
        return label;
    }
};

namespace detail {

/// ASCII replacement for one non-ASCII code point: French diacritics fold to
/// their base letter, ligatures expand, the typographic apostrophe behaves
/// like the ASCII one. Everything else becomes a space.
inline const char* fold_codepoint(std::uint32_t cp) {
    switch (cp) {
        case 0x00C0: case 0x00C1: case 0x00C2: case 0x00C3: case 0x00C4: case 0x00C5:
        case 0x00E0: case 0x00E1: case 0x00E2: case 0x00E3: case 0x00E4: case 0x00E5:
            return "a";
        case 0x00C7: case 0x00E7:
            return "c";
        case 0x00C8: case 0x00C9: case 0x00CA: case 0x00CB:
        case 0x00E8: case 0x00E9: case 0x00EA: case 0x00EB:
            return "e";
        case 0x00CC: case 0x00CD: case 0x00CE: case 0x00CF:
        case 0x00EC: case 0x00ED: case 0x00EE: case 0x00EF:
            return "i";
        case 0x00D1: case 0x00F1:
            return "n";
        case 0x00D2: case 0x00D3: case 0x00D4: case 0x00D5: case 0x00D6:
        case 0x00F2: case 0x00F3: case 0x00F4: case 0x00F5: case 0x00F6:
            return "o";
        case 0x00D9: case 0x00DA: case 0x00DB: case 0x00DC:
        case 0x00F9: case 0x00FA: case 0x00FB: case 0x00FC:
            return "u";
        case 0x00DD: case 0x00FD: case 0x00FF:
            return "y";
        case 0x0152: case 0x0153:
            return "oe";
        case 0x00C6: case 0x00E6:
            return "ae";
        case 0x2019: // typographic apostrophe splits like the ASCII one
            return " ";
        default:
            return " ";
    }
}

/// Decodes one UTF-8 code point at `i`, advancing it. Malformed bytes decode
/// as U+FFFD (which folds to a space).
inline std::uint32_t next_codepoint(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        cp = c & 0x1F;
        extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
        cp = c & 0x0F;
        extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
        cp = c & 0x07;
        extra = 3;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + extra >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += static_cast<std::size_t>(extra) + 1;
    return cp;
}

inline void erase_all(std::string& s, const std::string& pattern) {
    for (std::size_t pos = s.find(pattern); pos != std::string::npos; pos = s.find(pattern, pos))
        s.erase(pos, pattern.size());
}

} // namespace detail

/// Full text standardization. The output contains only lowercase a-z words
/// separated by single spaces: HTML tags, the `#034`/`#039` patterns,
/// apostrophes, accents, digits (also inside words), links (`http`/`https`
/// and `.gif` runs), every other special character and isolated single
/// letters are gone. Idempotent.
inline std::string clean_text(const std::string& text) {
    // tags
    std::string s;
    s.reserve(text.size());
    bool in_tag = false;
    for (char c : text) {
        if (in_tag) {
            if (c == '>') in_tag = false;
        } else if (c == '<') {
            in_tag = true;
        } else {
            s.push_back(c);
        }
    }

    detail::erase_all(s, "#034");
    detail::erase_all(s, "#039");

    // lowercase + accent folding + apostrophe splitting, UTF-8 aware
    std::string folded;
    folded.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        std::uint32_t cp = detail::next_codepoint(s, i);
        if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (c == '\'') c = ' ';
            folded.push_back(c);
        } else {
            folded += detail::fold_codepoint(cp);
        }
    }

    // digits, also when embedded in words
    std::string nodigit;
    nodigit.reserve(folded.size());
    for (char c : folded)
        if (c < '0' || c > '9') nodigit.push_back(c);

    // links: an `http` occurrence kills the rest of its whitespace-run
    std::string nolinks;
    nolinks.reserve(nodigit.size());
    for (std::size_t i = 0; i < nodigit.size();) {
        if (nodigit.compare(i, 4, "http") == 0) {
            while (i < nodigit.size() && nodigit[i] != ' ' && nodigit[i] != '\t' &&
                   nodigit[i] != '\n' && nodigit[i] != '\r')
                ++i;
        } else {
            nolinks.push_back(nodigit[i]);
            ++i;
        }
    }

    // animated-image links: whitespace-runs containing `.gif`
    std::string nogif;
    nogif.reserve(nolinks.size());
    for (std::size_t i = 0; i < nolinks.size();) {
        std::size_t j = i;
        while (j < nolinks.size() && nolinks[j] != ' ' && nolinks[j] != '\t' &&
               nolinks[j] != '\n' && nolinks[j] != '\r')
            ++j;
        std::string run = nolinks.substr(i, j - i);
        if (run.find(".gif") == std::string::npos) nogif += run;
        if (j < nolinks.size()) nogif.push_back(' ');
        i = j + 1;
    }

    // everything but a-z separates words; isolated single letters are dropped
    std::string out;
    std::string token;
    auto flush = [&] {
        if (token.size() >= 2) {
            if (!out.empty()) out.push_back(' ');
            out += token;
        }
        token.clear();
    };
    for (char c : nogif) {
        if (c >= 'a' && c <= 'z')
            token.push_back(c);
        else
            flush();
    }
    flush();
    return out;
}

/// Whitespace tokenizer for normal-form text.
inline std::vector<std::string> tokenize(const std::string& normal_form) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : normal_form) {
        if (c == ' ') {
            if (!cur.empty()) tokens.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

/// Table-driven spelling normalization; unknown tokens pass through.
inline std::vector<std::string> correct_spelling(
    const std::vector<std::string>& tokens,
    const std::unordered_map<std::string, std::string>& spelling_map) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto it = spelling_map.find(t);
        out.push_back(it == spelling_map.end() ? t : it->second);
    }
    return out;
}

/// Drops every token found in the stoplist, order preserved.
inline std::vector<std::string> remove_words(const std::vector<std::string>& tokens,
                                             const std::unordered_set<std::string>& stoplist) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (stoplist.find(t) == stoplist.end()) out.push_back(t);
    return out;
}

/// Table-driven lemma reduction; tokens absent from the table are unchanged.
inline std::vector<std::string> lemmatize(
    const std::vector<std::string>& tokens,
    const std::unordered_map<std::string, std::string>& lemma_table) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto it = lemma_table.find(t);
        out.push_back(it == lemma_table.end() ? t : it->second);
    }
    return out;
}

/// Removes comments shorter than `min_tokens`, then exact duplicates
/// (joined-text equality, corpus-wide) keeping the earliest occurrence.
inline std::vector<TokenizedComment> drop_short_and_duplicates(
    const std::vector<TokenizedComment>& comments, int min_tokens) {
    if (min_tokens < 1) throw domain_error("drop_short_and_duplicates: min_tokens < 1");
    std::vector<TokenizedComment> out;
    std::unordered_set<std::string> seen;
    for (const auto& c : comments) {
        if (static_cast<int>(c.tokens.size()) < min_tokens) continue;
        std::string key = c.joined();
        if (seen.insert(key).second) out.push_back(c);
    }
    return out;
}

namespace detail {

inline std::vector<TokenizedComment> dedup_keep_first(const std::vector<TokenizedComment>& comments) {
    std::vector<TokenizedComment> out;
    std::unordered_set<std::string> seen;
    for (const auto& c : comments)
        if (seen.insert(c.joined()).second) out.push_back(c);
    return out;
}

} // namespace detail

/// The whole standardization pipeline. Cleaning, tokenization and
/// deduplication always run; the toggled steps apply in the order
/// spelling -> stopwords -> irrelevant words -> lemmas -> minimum length,
/// so corrected forms can be stop-listed and the irrelevant list matches
/// surface forms. Deterministic.
inline std::vector<TokenizedComment> run_pipeline(const Corpus& corpus, const Lexicons& lexicons,
                                                  const PipelineConfig& config) {
    if (config.min_tokens < 1) throw domain_error("pipeline config: min_tokens < 1");
    std::vector<TokenizedComment> result;
    result.reserve(corpus.comments.size());
    for (const auto& c : corpus.comments) {
        std::vector<std::string> tokens = tokenize(clean_text(c.text));
        if (config.toggle_spelling) tokens = correct_spelling(tokens, lexicons.spelling_map);
        if (config.toggle_stopwords) tokens = remove_words(tokens, lexicons.stopwords);
        if (config.toggle_wordstodelete) tokens = remove_words(tokens, lexicons.irrelevant_words);
        if (config.toggle_lemma) tokens = lemmatize(tokens, lexicons.lemma_table);
        if (config.toggle_min_len && static_cast<int>(tokens.size()) < config.min_tokens) continue;
        result.push_back(TokenizedComment{c.timestamp, c.author, std::move(tokens)});
    }
    return detail::dedup_keep_first(result);
}

// ---------------------------------------------------------------------------
// Lexicon files
// ---------------------------------------------------------------------------
// One entry per line for word lists; `surface<TAB>canonical` for the maps.
// Lines starting with `#` are comments. Entries are normalized to the same
// lowercase accent-free form the cleaner emits, so files may be written in
// plain French.

namespace detail {

inline std::string normalize_entry(const std::string& raw) {
    std::string folded;
    for (std::size_t i = 0; i < raw.size();) {
        std::uint32_t cp = next_codepoint(raw, i);
        if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            folded.push_back(c);
        } else {
            folded += fold_codepoint(cp);
        }
    }
    return trim(folded);
}

} // namespace detail

inline std::unordered_set<std::string> load_wordlist(const std::string& path) {
    std::unordered_set<std::string> words;
    for (const auto& line : split_lines(read_file(path))) {
        if (line.empty() || line[0] == '#') continue;
        std::string entry = detail::normalize_entry(line);
        if (!entry.empty()) words.insert(entry);
    }
    return words;
}

inline std::unordered_map<std::string, std::string> load_tsv_map(const std::string& path) {
    std::unordered_map<std::string, std::string> map;
    std::size_t lineno = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw format_error(path + ":" + std::to_string(lineno) + ": expected TAB separator");
        std::string from = detail::normalize_entry(line.substr(0, tab));
        std::string to = detail::normalize_entry(line.substr(tab + 1));
        if (from.empty() || to.empty())
            throw format_error(path + ":" + std::to_string(lineno) + ": empty entry");
        map[from] = to;
    }
    return map;
}

inline Lexicons load_lexicons(const std::string& stopwords_path,
                              const std::string& wordstodelete_path,
                              const std::string& spelling_path, const std::string& lemma_path) {
    Lexicons lex;
    lex.stopwords = load_wordlist(stopwords_path);
    lex.irrelevant_words = load_wordlist(wordstodelete_path);
    lex.spelling_map = load_tsv_map(spelling_path);
    lex.lemma_table = load_tsv_map(lemma_path);
    return lex;
}

/// Loads the bundled lexicons from a directory using the shipped file names.
inline Lexicons load_lexicons_dir(const std::string& dir) {
    return load_lexicons(dir + "/stopwords_fr.txt", dir + "/wordstodelete_fr.txt",
                         dir + "/spelling_map_fr.tsv", dir + "/lemma_table_fr.tsv");
}

// ---------------------------------------------------------------------------
// Tokenized corpus files (TSV: date, author, space-joined tokens)
// ---------------------------------------------------------------------------

inline std::string tokenized_to_tsv(const std::vector<TokenizedComment>& comments) {
    std::string out;
    for (const auto& c : comments) {
        out += format_date(c.timestamp);
        out.push_back('\t');
        out += c.author;
        out.push_back('\t');
        out += c.joined();
        out.push_back('\n');
    }
    return out;
}

inline std::vector<TokenizedComment> tokenized_from_tsv(const std::string& content) {
    std::vector<TokenizedComment> comments;
    std::size_t lineno = 0;
    for (const auto& line : split_lines(content)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw format_error("tokenized corpus line " + std::to_string(lineno) +
                               ": expected 3 TAB-separated fields");
        auto date = parse_date(line.substr(0, t1));
        if (!date)
            throw format_error("tokenized corpus line " + std::to_string(lineno) + ": bad date");
        TokenizedComment c;
        c.timestamp = *date;
        c.author = line.substr(t1 + 1, t2 - t1 - 1);
        c.tokens = tokenize(line.substr(t2 + 1));
        comments.push_back(std::move(c));
    }
    return comments;
}

} // namespace sigmine
