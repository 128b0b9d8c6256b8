// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigmine/date.hpp"
#include "sigmine/error.hpp"
#include "sigmine/io.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/rng.hpp"

namespace sigmine {

struct SkipGramParams {
    int dim = 60;
    int window = 20;
    int min_count = 3;
    double subsample_t = 1e-2;
    int epochs = 5;
    int negatives = 5;
    double initial_lr = 0.05;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 1) throw domain_error("skip-gram params: dim < 1");
        if (window < 1) throw domain_error("skip-gram params: window < 1");
        if (min_count < 1) throw domain_error("skip-gram params: min_count < 1");
        if (!(subsample_t > 0.0 && subsample_t <= 1.0))
            throw domain_error("skip-gram params: subsample_t outside (0, 1]");
        if (epochs < 1) throw domain_error("skip-gram params: epochs < 1");
        if (negatives < 1) throw domain_error("skip-gram params: negatives < 1");
        if (!(initial_lr > 0.0)) throw domain_error("skip-gram params: initial_lr <= 0");
    }
};

/// Word vectors for one period. Rows of the flat matrices are words in
/// vocab-index order; similarity always reads input_vectors.
struct EmbeddingModel {
    std::vector<std::string> words;                  // index -> word
    std::unordered_map<std::string, int> vocab;      // word -> index
    std::vector<double> input_vectors;               // |V| * dim, row-major
    std::vector<double> output_vectors;              // |V| * dim, row-major
    SkipGramParams params;
    Date period_start{};
    Date period_end{};
    std::vector<double> epoch_losses;                // mean example loss per epoch

    const double* input_row(int i) const { return input_vectors.data() + static_cast<std::size_t>(i) * params.dim; }
    double* input_row(int i) { return input_vectors.data() + static_cast<std::size_t>(i) * params.dim; }
    const double* output_row(int i) const { return output_vectors.data() + static_cast<std::size_t>(i) * params.dim; }
    double* output_row(int i) { return output_vectors.data() + static_cast<std::size_t>(i) * params.dim; }
};

namespace detail {

inline double log_sigmoid(double x) {
    // log(1/(1+e^-x)) without overflow on either tail
    return x > 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

/// Negative-sampling loss of one (center, context, negatives) example:
/// -log sigma(u_o . v_c) - sum_n log sigma(-u_n . v_c). Smooth, so finite
/// differences can check the analytic gradients below.
inline double sgns_example_loss(const std::vector<double>& center,
                                const std::vector<double>& context,
                                const std::vector<std::vector<double>>& negatives) {
    const int dim = static_cast<int>(center.size());
    double loss = -detail::log_sigmoid(detail::dot(center.data(), context.data(), dim));
    for (const auto& n : negatives)
        loss -= detail::log_sigmoid(-detail::dot(center.data(), n.data(), dim));
    return loss;
}

struct SgnsGradients {
    std::vector<double> center;
    std::vector<double> context;
    std::vector<std::vector<double>> negatives;
};

inline SgnsGradients sgns_example_gradients(const std::vector<double>& center,
                                            const std::vector<double>& context,
                                            const std::vector<std::vector<double>>& negatives) {
    const int dim = static_cast<int>(center.size());
    SgnsGradients g;
    g.center.assign(center.size(), 0.0);
    g.context.assign(center.size(), 0.0);
    const double gpos = detail::sigmoid(detail::dot(center.data(), context.data(), dim)) - 1.0;
    for (int i = 0; i < dim; ++i) {
        g.center[i] += gpos * context[i];
        g.context[i] = gpos * center[i];
    }
    for (const auto& n : negatives) {
        const double gneg = detail::sigmoid(detail::dot(center.data(), n.data(), dim));
        std::vector<double> gn(center.size());
        for (int i = 0; i < dim; ++i) {
            g.center[i] += gneg * n[i];
            gn[i] = gneg * center[i];
        }
        g.negatives.push_back(std::move(gn));
    }
    return g;
}

/// Skip-gram with negative sampling, trained by sequential seeded SGD.
/// Dynamic window uniform in [1, window]; frequent words are discarded with
/// probability 1 - sqrt(t / f(w)); the learning rate decays linearly to 0
/// over the planned token stream. Deterministic for a given seed.
inline EmbeddingModel train_skipgram(const std::vector<TokenizedComment>& comments,
                                     const SkipGramParams& params) {
    params.validate();

    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& c : comments)
        for (const auto& t : c.tokens) ++counts[t];

    EmbeddingModel model;
    model.params = params;
    for (const auto& [w, n] : counts)
        if (n >= params.min_count) model.words.push_back(w);
    if (model.words.empty()) throw domain_error("skip-gram: empty effective vocabulary");
    std::sort(model.words.begin(), model.words.end(), [&](const std::string& a, const std::string& b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return a < b;
    });
    const int vsize = static_cast<int>(model.words.size());
    const int dim = params.dim;
    for (int i = 0; i < vsize; ++i) model.vocab[model.words[i]] = i;

    bool any = false;
    for (const auto& c : comments) {
        if (!any || c.timestamp < model.period_start) model.period_start = c.timestamp;
        if (!any || model.period_end < c.timestamp) model.period_end = c.timestamp;
        any = true;
    }

    std::vector<std::int64_t> vocab_counts(vsize);
    std::int64_t train_words = 0;
    for (int i = 0; i < vsize; ++i) {
        vocab_counts[i] = counts[model.words[i]];
        train_words += vocab_counts[i];
    }

    // negative-sampling distribution: unigram count ^ 0.75
    std::vector<double> neg_weights(vsize);
    for (int i = 0; i < vsize; ++i)
        neg_weights[i] = std::pow(static_cast<double>(vocab_counts[i]), 0.75);
    std::vector<double> neg_cum = cumulative_weights(neg_weights);

    Rng rng(params.seed);
    model.input_vectors.resize(static_cast<std::size_t>(vsize) * dim);
    model.output_vectors.assign(static_cast<std::size_t>(vsize) * dim, 0.0);
    for (auto& v : model.input_vectors) v = (rng.uniform() - 0.5) / dim;

    const double total_tokens = static_cast<double>(train_words) * params.epochs;
    std::int64_t processed = 0;
    std::vector<int> sentence;
    std::vector<double> neu1e(static_cast<std::size_t>(dim));

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::int64_t epoch_examples = 0;
        for (const auto& c : comments) {
            sentence.clear();
            for (const auto& t : c.tokens) {
                auto it = model.vocab.find(t);
                if (it == model.vocab.end()) continue;
                ++processed;
                const double f =
                    static_cast<double>(vocab_counts[it->second]) / static_cast<double>(train_words);
                if (f > params.subsample_t) {
                    const double keep = std::sqrt(params.subsample_t / f);
                    if (rng.uniform() >= keep) continue;
                }
                sentence.push_back(it->second);
            }
            for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
                const double lr =
                    params.initial_lr *
                    std::max(0.0, 1.0 - static_cast<double>(processed) / total_tokens);
                if (lr <= 0.0) continue;
                const int center = sentence[pos];
                const int b = rng.uniform_int(1, params.window);
                const std::size_t lo = pos >= static_cast<std::size_t>(b) ? pos - b : 0;
                const std::size_t hi = std::min(sentence.size() - 1, pos + static_cast<std::size_t>(b));
                for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
                    if (cpos == pos) continue;
                    const int context = sentence[cpos];
                    double* vc = model.input_row(center);
                    std::fill(neu1e.begin(), neu1e.end(), 0.0);
                    double example_loss = 0.0;
                    for (int k = 0; k <= params.negatives; ++k) {
                        int target;
                        double label;
                        if (k == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            target = static_cast<int>(rng.weighted_index(neg_cum));
                            if (target == context) continue; // drawing the true word is no negative
                            label = 0.0;
                        }
                        double* u = model.output_row(target);
                        const double x = detail::dot(vc, u, dim);
                        example_loss -= label == 1.0 ? detail::log_sigmoid(x) : detail::log_sigmoid(-x);
                        const double g = (detail::sigmoid(x) - label) * lr;
                        for (int i = 0; i < dim; ++i) neu1e[i] += g * u[i];
                        for (int i = 0; i < dim; ++i) u[i] -= g * vc[i];
                    }
                    for (int i = 0; i < dim; ++i) vc[i] -= neu1e[i];
                    epoch_loss += example_loss;
                    ++epoch_examples;
                }
            }
        }
        model.epoch_losses.push_back(epoch_examples ? epoch_loss / static_cast<double>(epoch_examples)
                                                    : 0.0);
    }
    return model;
}

inline double cosine(const EmbeddingModel& model, const std::string& w1, const std::string& w2) {
    auto i1 = model.vocab.find(w1);
    if (i1 == model.vocab.end()) throw domain_error("cosine: word not in vocabulary: " + w1);
    auto i2 = model.vocab.find(w2);
    if (i2 == model.vocab.end()) throw domain_error("cosine: word not in vocabulary: " + w2);
    const int dim = model.params.dim;
    const double* a = model.input_row(i1->second);
    const double* b = model.input_row(i2->second);
    const double na = std::sqrt(detail::dot(a, a, dim));
    const double nb = std::sqrt(detail::dot(b, b, dim));
    if (na == 0.0 || nb == 0.0) throw domain_error("cosine: zero vector");
    return detail::dot(a, b, dim) / (na * nb);
}

struct SimilarityTable {
    std::vector<std::string> period_labels;
    std::vector<std::pair<std::string, std::string>> pairs;
    // values[period][pair]; empty optional = at least one word OOV there
    std::vector<std::vector<std::optional<double>>> values;
};

/// Trains one model per period slice and scores every pair in each. A pair
/// with an out-of-vocabulary member is reported missing, never as 0.
inline SimilarityTable similarity_by_period(
    const std::vector<TokenizedComment>& comments,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::pair<Date, Date>>& periods, const SkipGramParams& params) {
    if (pairs.empty()) throw domain_error("similarity_by_period: no word pairs");
    if (periods.empty()) throw domain_error("similarity_by_period: no periods");
    SimilarityTable table;
    table.pairs = pairs;
    for (const auto& [start, end] : periods) {
        if (end < start) throw domain_error("similarity_by_period: period end before start");
        std::vector<TokenizedComment> slice;
        for (const auto& c : comments)
            if (!(c.timestamp < start) && !(end < c.timestamp)) slice.push_back(c);
        if (slice.empty())
            throw domain_error("similarity_by_period: empty period " + format_date(start) + ".." +
                               format_date(end));
        EmbeddingModel model = train_skipgram(slice, params);
        std::vector<std::optional<double>> row;
        row.reserve(pairs.size());
        for (const auto& [w1, w2] : pairs) {
            if (model.vocab.count(w1) && model.vocab.count(w2))
                row.emplace_back(cosine(model, w1, w2));
            else
                row.emplace_back(std::nullopt);
        }
        table.period_labels.push_back(format_date(start) + ".." + format_date(end));
        table.values.push_back(std::move(row));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Textual vector serialization: header `|V| dim`, then `word v1 ... vdim`
// per line at 9 significant digits. save -> load -> save is byte-identical.
// ---------------------------------------------------------------------------

inline std::string embeddings_to_text(const EmbeddingModel& model) {
    std::string out = std::to_string(model.words.size()) + " " + std::to_string(model.params.dim) + "\n";
    char buf[40];
    for (std::size_t i = 0; i < model.words.size(); ++i) {
        out += model.words[i];
        const double* row = model.input_row(static_cast<int>(i));
        for (int d = 0; d < model.params.dim; ++d) {
            std::snprintf(buf, sizeof(buf), " %.9g", row[d]);
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

/// Parses the textual format. Only vocab and input vectors survive a round
/// trip; training-only state (output vectors, losses) does not.
inline EmbeddingModel embeddings_from_text(const std::string& content) {
    auto lines = split_lines(content);
    if (lines.empty()) throw format_error("embedding text: empty");
    std::size_t vsize = 0;
    int dim = 0;
    if (std::sscanf(lines[0].c_str(), "%zu %d", &vsize, &dim) != 2 || dim < 1)
        throw format_error("embedding text: bad header");
    if (lines.size() != vsize + 1) throw format_error("embedding text: row count mismatch");
    EmbeddingModel model;
    model.params.dim = dim;
    model.input_vectors.resize(vsize * static_cast<std::size_t>(dim));
    model.output_vectors.assign(vsize * static_cast<std::size_t>(dim), 0.0);
    for (std::size_t i = 0; i < vsize; ++i) {
        const std::string& line = lines[i + 1];
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0)
            throw format_error("embedding text: bad row " + std::to_string(i + 2));
        std::string word = line.substr(0, sp);
        if (model.vocab.count(word))
            throw format_error("embedding text: duplicate word: " + word);
        model.vocab[word] = static_cast<int>(i);
        model.words.push_back(word);
        const char* p = line.c_str() + sp;
        char* endp = nullptr;
        for (int d = 0; d < dim; ++d) {
            double v = std::strtod(p, &endp);
            if (endp == p) throw format_error("embedding text: bad vector in row " + std::to_string(i + 2));
            model.input_vectors[i * static_cast<std::size_t>(dim) + d] = v;
            p = endp;
        }
        while (*p == ' ') ++p;
        if (*p != '\0') throw format_error("embedding text: trailing data in row " + std::to_string(i + 2));
    }
    return model;
}

inline void save_embeddings(const EmbeddingModel& model, const std::string& path) {
    write_file(path, embeddings_to_text(model));
}

inline EmbeddingModel load_embeddings(const std::string& path) {
    return embeddings_from_text(read_file(path));
}

} // namespace sigmine
