// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigmine/bytes.hpp"
#include "sigmine/csv.hpp"
#include "sigmine/error.hpp"
#include "sigmine/io.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/rng.hpp"
#include "sigmine/series.hpp"

namespace sigmine {

enum class Polarity { negative = 0, positive = 1 };

inline const char* polarity_name(Polarity p) {
    return p == Polarity::negative ? "negative" : "positive";
}

struct LabeledText {
    std::string text;
    Polarity label = Polarity::negative;
};

struct SentimentParams {
    int dim = 50;
    double initial_lr = 0.1;
    int epochs = 5;
    std::uint32_t buckets = 1u << 18;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 1) throw domain_error("sentiment params: dim < 1");
        if (!(initial_lr > 0.0)) throw domain_error("sentiment params: initial_lr <= 0");
        if (epochs < 1) throw domain_error("sentiment params: epochs < 1");
        if (buckets < 2) throw domain_error("sentiment params: buckets < 2");
    }
};

/// Averaged hashed-n-gram classifier: word unigrams and bigrams hash into a
/// shared bucket table; a text embeds as the mean of its bucket vectors,
/// followed by a linear layer and softmax over {negative, positive}.
///
/// Bucket vectors materialize lazily: an untouched bucket's vector is a pure
/// function of (seed, bucket), so only trained buckets need storing and an
/// unseen word still embeds deterministically.
struct SentimentModel {
    SentimentParams params;
    std::unordered_map<std::uint32_t, std::vector<double>> embedding; // touched buckets
    std::vector<double> weights; // 2 x dim, row-major by class

    bool bucket_seen(std::uint32_t b) const { return embedding.find(b) != embedding.end(); }
};

namespace detail {

constexpr std::uint64_t kSentimentInitSalt = 0x53454e54494e4954ULL;

inline std::vector<double> bucket_vector_init(const SentimentParams& params, std::uint32_t b) {
    Rng rng(mix_seed(params.seed ^ kSentimentInitSalt, b));
    std::vector<double> v(static_cast<std::size_t>(params.dim));
    for (auto& x : v) x = (rng.uniform() * 2.0 - 1.0) / params.dim;
    return v;
}

} // namespace detail

/// Unigram + bigram feature buckets of a token sequence, multiplicity kept.
inline std::vector<std::uint32_t> features_of_tokens(const std::vector<std::string>& tokens,
                                                     std::uint32_t buckets) {
    std::vector<std::uint32_t> features;
    features.reserve(tokens.size() * 2);
    for (const auto& t : tokens)
        features.push_back(static_cast<std::uint32_t>(hash_str(t) % buckets));
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        features.push_back(static_cast<std::uint32_t>(hash_str(tokens[i] + " " + tokens[i + 1]) % buckets));
    return features;
}

/// The bucket's trained vector if it was touched, else its deterministic
/// initial value.
inline std::vector<double> effective_bucket(const SentimentModel& model, std::uint32_t b) {
    auto it = model.embedding.find(b);
    if (it != model.embedding.end()) return it->second;
    return detail::bucket_vector_init(model.params, b);
}

inline std::vector<double>& touch_bucket(SentimentModel& model, std::uint32_t b) {
    auto it = model.embedding.find(b);
    if (it == model.embedding.end())
        it = model.embedding.emplace(b, detail::bucket_vector_init(model.params, b)).first;
    return it->second;
}

/// Softmax class probabilities of a feature multiset. Empty input yields the
/// uniform prior.
inline std::array<double, 2> example_probabilities(const SentimentModel& model,
                                                   const std::vector<std::uint32_t>& features) {
    const int dim = model.params.dim;
    if (features.empty()) return {0.5, 0.5};
    std::vector<double> h(static_cast<std::size_t>(dim), 0.0);
    for (auto b : features) {
        auto v = effective_bucket(model, b);
        for (int i = 0; i < dim; ++i) h[i] += v[i];
    }
    for (auto& x : h) x /= static_cast<double>(features.size());
    std::array<double, 2> z{0.0, 0.0};
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < dim; ++i) z[c] += model.weights[static_cast<std::size_t>(c) * dim + i] * h[i];
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m);
    const double e1 = std::exp(z[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

inline double example_loss(const SentimentModel& model, const std::vector<std::uint32_t>& features,
                           Polarity label) {
    auto p = example_probabilities(model, features);
    return -std::log(std::max(p[static_cast<int>(label)], 1e-300));
}

struct SentimentGradients {
    std::map<std::uint32_t, std::vector<double>> embedding; // per distinct bucket
    std::vector<double> weights;                            // 2 x dim
};

/// Analytic cross-entropy gradients for one example; finite differences on
/// example_loss validate these.
inline SentimentGradients example_gradients(const SentimentModel& model,
                                            const std::vector<std::uint32_t>& features,
                                            Polarity label) {
    const int dim = model.params.dim;
    SentimentGradients g;
    g.weights.assign(2 * static_cast<std::size_t>(dim), 0.0);
    if (features.empty()) return g;
    std::vector<double> h(static_cast<std::size_t>(dim), 0.0);
    for (auto b : features) {
        auto v = effective_bucket(model, b);
        for (int i = 0; i < dim; ++i) h[i] += v[i];
    }
    for (auto& x : h) x /= static_cast<double>(features.size());
    auto p = example_probabilities(model, features);
    std::array<double, 2> dz{p[0], p[1]};
    dz[static_cast<int>(label)] -= 1.0;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < dim; ++i)
            g.weights[static_cast<std::size_t>(c) * dim + i] = dz[c] * h[i];
    std::vector<double> dh(static_cast<std::size_t>(dim), 0.0);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < dim; ++i)
            dh[i] += model.weights[static_cast<std::size_t>(c) * dim + i] * dz[c];
    for (auto b : features) {
        auto it = g.embedding.try_emplace(b, std::vector<double>(static_cast<std::size_t>(dim), 0.0)).first;
        for (int i = 0; i < dim; ++i)
            it->second[i] += dh[i] / static_cast<double>(features.size());
    }
    return g;
}

/// Trains by seeded SGD over the shuffled example stream; an integer weight
/// replicates its example in the stream before shuffling, so a duplicated
/// example and a weight of 2 produce the same model by construction.
/// Learning rate decays linearly to 0. Deterministic given seed.
inline SentimentModel train_classifier(const std::vector<LabeledText>& data,
                                       const SentimentParams& params,
                                       const std::vector<int>& replication = {}) {
    params.validate();
    if (!replication.empty() && replication.size() != data.size())
        throw domain_error("train_classifier: replication size mismatch");
    bool has_neg = false, has_pos = false;
    for (const auto& d : data) {
        if (d.text.empty()) throw domain_error("train_classifier: empty text");
        (d.label == Polarity::negative ? has_neg : has_pos) = true;
    }
    if (!has_neg || !has_pos) throw domain_error("train_classifier: both classes required");

    struct Example {
        std::vector<std::uint32_t> features;
        Polarity label;
    };
    std::vector<Example> stream;
    for (std::size_t i = 0; i < data.size(); ++i) {
        int copies = replication.empty() ? 1 : replication[i];
        if (copies < 1) throw domain_error("train_classifier: replication < 1");
        Example ex{features_of_tokens(tokenize(clean_text(data[i].text)), params.buckets),
                   data[i].label};
        for (int c = 0; c < copies; ++c) stream.push_back(ex);
    }

    SentimentModel model;
    model.params = params;
    model.weights.assign(2 * static_cast<std::size_t>(params.dim), 0.0);

    Rng rng(params.seed);
    const int dim = params.dim;
    const double total = static_cast<double>(stream.size()) * params.epochs;
    double processed = 0.0;
    std::vector<std::size_t> order(stream.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t oi : order) {
            const double lr = params.initial_lr * std::max(0.0, 1.0 - processed / total);
            processed += 1.0;
            const auto& ex = stream[oi];
            if (ex.features.empty()) continue;
            auto g = example_gradients(model, ex.features, ex.label);
            for (std::size_t i = 0; i < model.weights.size(); ++i)
                model.weights[i] -= lr * g.weights[i];
            for (const auto& [b, gb] : g.embedding) {
                auto& v = touch_bucket(model, b);
                for (int i = 0; i < dim; ++i) v[i] -= lr * gb[i];
            }
        }
    }
    return model;
}

struct Prediction {
    Polarity label = Polarity::negative;
    double p_negative = 0.5;
    double p_positive = 0.5;
};

/// Prediction over already-tokenized text. Falls back to the uniform prior,
/// labeled negative, when no feature bucket was seen in training (or there
/// are no features at all); a never-trained bucket holds no evidence.
inline Prediction predict_tokens(const SentimentModel& model, const std::vector<std::string>& tokens) {
    auto features = features_of_tokens(tokens, model.params.buckets);
    bool any_seen = false;
    for (auto b : features)
        if (model.bucket_seen(b)) {
            any_seen = true;
            break;
        }
    Prediction out;
    if (features.empty() || !any_seen) return out; // uniform prior, negative by tie rule
    auto p = example_probabilities(model, features);
    out.p_negative = p[0];
    out.p_positive = p[1];
    out.label = p[1] > p[0] ? Polarity::positive : Polarity::negative;
    return out;
}

inline Prediction predict(const SentimentModel& model, const std::string& text) {
    return predict_tokens(model, tokenize(clean_text(text)));
}

/// Per-bucket polarity counts; every comment lands in exactly one series, so
/// negative + positive = comment count, bucket by bucket.
inline std::pair<FrequencySeries, FrequencySeries> sentiment_series(
    const std::vector<TokenizedComment>& comments, const SentimentModel& model, Resolution res) {
    FrequencySeries neg, pos;
    neg.key = "negative";
    pos.key = "positive";
    neg.resolution = pos.resolution = res;
    if (comments.empty()) return {neg, pos};
    Date first = comments.front().timestamp, last = first;
    for (const auto& c : comments) {
        if (c.timestamp < first) first = c.timestamp;
        if (last < c.timestamp) last = c.timestamp;
    }
    for (const auto& b : bucket_range(first, last, res)) neg.buckets[b] = pos.buckets[b] = 0;
    for (const auto& c : comments) {
        const std::string b = bucket_key(c.timestamp, res);
        if (predict_tokens(model, c.tokens).label == Polarity::negative)
            ++neg.buckets[b];
        else
            ++pos.buckets[b];
    }
    return {neg, pos};
}

// ---------------------------------------------------------------------------
// Labeled CSV: header `text,label`, label in {negative, positive, 0, 1}.
// ---------------------------------------------------------------------------

inline std::vector<LabeledText> load_labeled_csv(const std::string& path) {
    auto rows = parse_csv(read_file(path));
    if (rows.empty()) throw format_error(path + ": empty labeled data");
    std::size_t text_col = SIZE_MAX, label_col = SIZE_MAX;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        if (rows[0][i] == "text") text_col = i;
        if (rows[0][i] == "label") label_col = i;
    }
    if (text_col == SIZE_MAX || label_col == SIZE_MAX)
        throw format_error(path + ": header must name `text` and `label` columns");
    std::vector<LabeledText> data;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() <= std::max(text_col, label_col))
            throw format_error(path + ": row " + std::to_string(r + 1) + ": too few fields");
        LabeledText d;
        d.text = rows[r][text_col];
        const std::string& l = rows[r][label_col];
        if (l == "negative" || l == "0")
            d.label = Polarity::negative;
        else if (l == "positive" || l == "1")
            d.label = Polarity::positive;
        else
            throw format_error(path + ": row " + std::to_string(r + 1) + ": bad label: " + l);
        if (d.text.empty())
            throw format_error(path + ": row " + std::to_string(r + 1) + ": empty text");
        data.push_back(std::move(d));
    }
    if (data.empty()) throw format_error(path + ": no labeled rows");
    return data;
}

// ---------------------------------------------------------------------------
// Versioned binary serialization, bit-exact round trip. Only touched buckets
// are stored; untouched ones regenerate from (seed, bucket) on demand.
// ---------------------------------------------------------------------------

inline std::string sentiment_model_to_bytes(const SentimentModel& model) {
    std::string out = "SGMSNT01";
    detail::put_u32(out, static_cast<std::uint32_t>(model.params.dim));
    detail::put_u32(out, model.params.buckets);
    detail::put_u32(out, static_cast<std::uint32_t>(model.params.epochs));
    detail::put_f64(out, model.params.initial_lr);
    detail::put_u64(out, model.params.seed);
    for (double w : model.weights) detail::put_f64(out, w);
    std::vector<std::uint32_t> touched;
    touched.reserve(model.embedding.size());
    for (const auto& [b, _] : model.embedding) touched.push_back(b);
    std::sort(touched.begin(), touched.end());
    detail::put_u64(out, touched.size());
    for (auto b : touched) {
        detail::put_u32(out, b);
        for (double v : model.embedding.at(b)) detail::put_f64(out, v);
    }
    return out;
}

inline SentimentModel sentiment_model_from_bytes(const std::string& bytes) {
    if (bytes.size() < 8 || bytes.compare(0, 8, "SGMSNT01") != 0)
        throw format_error("sentiment model: bad magic (expected SGMSNT01)");
    detail::ByteReader r{bytes, 8};
    SentimentModel model;
    model.params.dim = static_cast<int>(r.u32());
    model.params.buckets = r.u32();
    model.params.epochs = static_cast<int>(r.u32());
    model.params.initial_lr = r.f64();
    model.params.seed = r.u64();
    model.params.validate();
    model.weights.resize(2 * static_cast<std::size_t>(model.params.dim));
    for (auto& w : model.weights) w = r.f64();
    std::uint64_t touched = r.u64();
    for (std::uint64_t i = 0; i < touched; ++i) {
        std::uint32_t b = r.u32();
        std::vector<double> v(static_cast<std::size_t>(model.params.dim));
        for (auto& x : v) x = r.f64();
        model.embedding.emplace(b, std::move(v));
    }
    if (r.pos != bytes.size()) throw format_error("sentiment model: trailing bytes");
    return model;
}

inline void save_sentiment_model(const SentimentModel& model, const std::string& path) {
    write_file(path, sentiment_model_to_bytes(model));
}

inline SentimentModel load_sentiment_model(const std::string& path) {
    return sentiment_model_from_bytes(read_file(path));
}

} // namespace sigmine
