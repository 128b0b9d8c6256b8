// SPDX-License-Identifier: Apache-2.0
// End-to-end gate: seven independent checks over the whole pipeline, one
// PASS/FAIL line each, nonzero exit when any check fails. Each check owns
// its runtime budget; exceeding it is a failure, not a warning.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigmine/adr.hpp"
#include "sigmine/cloud.hpp"
#include "sigmine/corpus.hpp"
#include "sigmine/embed.hpp"
#include "sigmine/experiment.hpp"
#include "sigmine/indicators.hpp"
#include "sigmine/png.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/sentiment.hpp"
#include "sigmine/tensor.hpp"
#include "sigmine/wccnn.hpp"

using namespace sigmine;

namespace {

using Fails = std::vector<std::string>;

void expect(Fails& f, bool ok, const std::string& msg) {
    if (!ok) f.push_back(msg);
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Runs one criterion, prints exactly one line, returns 0 on pass.
int run_criterion(int index, const char* label, double budget_seconds,
                  const std::function<void(Fails&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Fails fails;
    try {
        body(fails);
    } catch (const std::exception& e) {
        fails.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0.0 && secs >= budget_seconds) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "runtime %.2f s over the %.0f s budget", secs,
                      budget_seconds);
        fails.push_back(buf);
    }
    std::string detail;
    for (std::size_t i = 0; i < fails.size() && i < 3; ++i) detail += "; " + fails[i];
    if (fails.size() > 3) detail += "; +" + std::to_string(fails.size() - 3) + " more";
    std::printf("[%s] criterion %d: %s (%.2f s)%s\n", fails.empty() ? "PASS" : "FAIL", index,
                label, secs, detail.c_str());
    std::fflush(stdout);
    return fails.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// 1. Font-size recurrence
// ---------------------------------------------------------------------------

void check_font_sizing(Fails& f) {
    const std::vector<std::pair<std::string, std::int64_t>> freqs{{"a", 10}, {"b", 10}, {"c", 5}};
    CloudParams defaults;
    const auto sized = font_sizes(freqs, defaults);
    expect(f, sized.size() == 3, "default sizing: expected 3 sized words");
    if (sized.size() == 3) {
        expect(f, sized[0].second == 110 && sized[1].second == 110 && sized[2].second == 82,
               "default sizing of [10,10,5]: expected [110,110,82], got [" +
                   std::to_string(sized[0].second) + "," + std::to_string(sized[1].second) + "," +
                   std::to_string(sized[2].second) + "]");
    }

    CloudParams flat = defaults;
    flat.relative_scaling = 0.0;
    for (const auto& [word, size] : font_sizes(freqs, flat))
        expect(f, size == flat.max_font, "zero relative scaling: size varies at " + word);

    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 1000; ++rep) {
        const int len = 1 + static_cast<int>(gen() % 60);
        std::vector<std::pair<std::string, std::int64_t>> list;
        std::int64_t v = 1 + static_cast<std::int64_t>(gen() % 1000000);
        for (int i = 0; i < len; ++i) {
            list.emplace_back("w" + std::to_string(i), v);
            v = std::max<std::int64_t>(1, v - static_cast<std::int64_t>(gen() % (v / 4 + 1)));
        }
        CloudParams p;
        p.max_font = 20 + static_cast<int>(gen() % 91);
        p.min_font = 1 + static_cast<int>(gen() % 10);
        p.relative_scaling = static_cast<double>(gen() % 1001) / 1000.0;
        if (rep % 7 == 0) p.relative_scaling = 0.0;
        const auto s = font_sizes(list, p);
        expect(f, !s.empty() && s[0].second == p.max_font,
               "rep " + std::to_string(rep) + ": top word must get max_font");
        for (std::size_t i = 0; i < s.size(); ++i) {
            expect(f, s[i].second >= p.min_font && s[i].second <= p.max_font,
                   "rep " + std::to_string(rep) + ": size outside [min_font, max_font]");
            if (i > 0)
                expect(f, s[i].second <= s[i - 1].second,
                       "rep " + std::to_string(rep) + ": sizes increase at rank " +
                           std::to_string(i));
            if (p.relative_scaling == 0.0)
                expect(f, s[i].second == p.max_font,
                       "rep " + std::to_string(rep) + ": zero scaling must keep sizes constant");
        }
    }
}

// ---------------------------------------------------------------------------
// 2. Cloud layout invariants
// ---------------------------------------------------------------------------

void check_cloud_layout(Fails& f) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 gen(seed * 7919 + 1);
        const int nwords = 15 + static_cast<int>(gen() % 26);
        std::vector<std::pair<std::string, std::int64_t>> ranked;
        std::int64_t v = 200 + static_cast<std::int64_t>(gen() % 800);
        for (int i = 0; i < nwords; ++i) {
            ranked.emplace_back("mot" + std::to_string(i), v);
            v = std::max<std::int64_t>(1, v - static_cast<std::int64_t>(gen() % (v / 3 + 1)));
        }

        CloudParams p;
        p.width = 320;
        p.height = 200;
        p.max_words = 40;
        p.max_font = 48;
        p.min_font = 6;
        p.vertical_fraction = 0.3;
        p.seed = seed;
        p.render_mode = RenderMode::box;

        const CloudImage cloud = make_cloud(ranked, "2017-08", Resolution::month, p);
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        expect(f, !cloud.placements.empty(), tag + "no words placed");
        for (const auto& a : cloud.placements)
            expect(f,
                   a.x >= 0 && a.y >= 0 && a.x + a.box_w <= p.width && a.y + a.box_h <= p.height,
                   tag + "box outside canvas: " + a.word);
        for (std::size_t i = 0; i < cloud.placements.size(); ++i)
            for (std::size_t j = i + 1; j < cloud.placements.size(); ++j) {
                const Placement& a = cloud.placements[i];
                const Placement& b = cloud.placements[j];
                const bool overlap = a.x < b.x + b.box_w && b.x < a.x + a.box_w &&
                                     a.y < b.y + b.box_h && b.y < a.y + a.box_h;
                expect(f, !overlap, tag + "boxes overlap: " + a.word + " vs " + b.word);
            }

        const auto png_once = encode_png(cloud.image);
        const CloudImage again = make_cloud(ranked, "2017-08", Resolution::month, p);
        expect(f, encode_png(again.image) == png_once, tag + "re-run changed the PNG bytes");
    }
}

// ---------------------------------------------------------------------------
// 3. CNN numerics
// ---------------------------------------------------------------------------

void check_cnn_numerics(Fails& f) {
    // shape trace of the full-size configuration against the arithmetic oracle
    const WcCnnConfig full;
    const ShapeTrace trace = shape_trace(full);
    const std::vector<std::pair<int, int>> want = {{200, 125}, {195, 120}, {97, 60}, {92, 55},
                                                   {46, 27},   {41, 22},   {20, 11}, {18, 9},
                                                   {9, 4},     {8, 3}};
    expect(f, trace.stages == want, "shape trace stages differ from the arithmetic oracle");
    expect(f, trace.flatten == 3072,
           "flatten width: expected 3072, got " + std::to_string(trace.flatten));
    expect(f, trace.classes == 2, "expected 2 output classes");

    // single Adam step on a scalar: 1.0 - lr * g / (sqrt(g^2) + eps)
    std::vector<double> prm{1.0};
    const std::vector<double> grd{1.0};
    AdamState state;
    adam_step(prm, grd, state, 1, AdamConfig{});
    expect(f, std::abs(prm[0] - 0.999) <= 1e-6,
           "adam scalar step: expected 0.999, got " + std::to_string(prm[0]));

    // miniature network: 8x10 input, two conv layers, 2 filters
    WcCnnConfig cfg;
    cfg.input_w = 10;
    cfg.input_h = 8;
    cfg.conv_kernels = {3, 2};
    cfg.conv_filters = 2;
    cfg.pools_after = 1;
    cfg.dropout_rate = 0.0;
    cfg.batch_size = 2;
    cfg.seed = 1;

    Tensor4 batch(2, cfg.input_h, cfg.input_w, 1);
    Rng pix(3);
    for (auto& x : batch.v) x = pix.uniform();
    const std::vector<int> labels{0, 1};

    // an untrained head with zeroed dense parameters predicts 0.5/0.5
    WcCnnModel zeroed = init_model(cfg);
    std::fill(zeroed.dense_weight.begin(), zeroed.dense_weight.end(), 0.0);
    std::fill(zeroed.dense_bias.begin(), zeroed.dense_bias.end(), 0.0);
    const double ln2 = std::log(2.0);
    const double uniform_loss = compute_loss(zeroed, batch, labels);
    expect(f, std::abs(uniform_loss - ln2) <= 1e-9,
           "uniform-probability loss: expected ln2, got " + std::to_string(uniform_loss));

    // finite differences over every parameter tensor
    WcCnnModel model = init_model(cfg);
    const LossAndGradients lg = loss_and_gradients(model, batch, labels, false);
    const double h = 1e-5;
    auto fd_check = [&](double& param, double analytic, const std::string& what) {
        const double keep = param;
        param = keep + h;
        const double up = compute_loss(model, batch, labels);
        param = keep - h;
        const double down = compute_loss(model, batch, labels);
        param = keep;
        const double numeric = (up - down) / (2.0 * h);
        if (rel_err(numeric, analytic) > 1e-3)
            f.push_back(what + ": numeric " + std::to_string(numeric) + " vs analytic " +
                        std::to_string(analytic));
    };
    for (std::size_t layer = 0; layer < model.kernels.size(); ++layer) {
        for (std::size_t i = 0; i < model.kernels[layer].v.size(); ++i)
            fd_check(model.kernels[layer].v[i], lg.grads.kernels[layer].v[i],
                     "kernel " + std::to_string(layer) + "[" + std::to_string(i) + "]");
        for (std::size_t i = 0; i < model.conv_biases[layer].size(); ++i)
            fd_check(model.conv_biases[layer][i], lg.grads.conv_biases[layer][i],
                     "conv bias " + std::to_string(layer) + "[" + std::to_string(i) + "]");
    }
    for (std::size_t i = 0; i < model.dense_weight.size(); ++i)
        fd_check(model.dense_weight[i], lg.grads.dense_weight[i],
                 "dense weight[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < model.dense_bias.size(); ++i)
        fd_check(model.dense_bias[i], lg.grads.dense_bias[i],
                 "dense bias[" + std::to_string(i) + "]");
}

// ---------------------------------------------------------------------------
// 4. Skip-gram numerics
// ---------------------------------------------------------------------------

void check_skipgram_numerics(Fails& f) {
    // five-word example: center, context, three negatives
    const int dim = 8;
    std::mt19937_64 gen(13);
    std::normal_distribution<double> noise(0.0, 0.7);
    const double h = 1e-6;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> center(dim), context(dim);
        std::vector<std::vector<double>> negatives(3, std::vector<double>(dim));
        for (auto& x : center) x = noise(gen);
        for (auto& x : context) x = noise(gen);
        for (auto& n : negatives)
            for (auto& x : n) x = noise(gen);

        const SgnsGradients g = sgns_example_gradients(center, context, negatives);
        auto fd_check = [&](std::vector<double>& param, const std::vector<double>& grad,
                            const std::string& what) {
            for (int i = 0; i < dim; ++i) {
                const double keep = param[i];
                param[i] = keep + h;
                const double up = sgns_example_loss(center, context, negatives);
                param[i] = keep - h;
                const double down = sgns_example_loss(center, context, negatives);
                param[i] = keep;
                const double numeric = (up - down) / (2.0 * h);
                if (rel_err(numeric, grad[i]) > 1e-4)
                    f.push_back("rep " + std::to_string(rep) + " " + what + "[" +
                                std::to_string(i) + "]: numeric " + std::to_string(numeric) +
                                " vs analytic " + std::to_string(grad[i]));
            }
        };
        fd_check(center, g.center, "center");
        fd_check(context, g.context, "context");
        for (std::size_t n = 0; n < negatives.size(); ++n)
            fd_check(negatives[n], g.negatives[n], "negative " + std::to_string(n));
    }

    // co-occurring words end up closer than disjoint ones
    std::vector<TokenizedComment> comments;
    const Date d{2017, 1, 1};
    for (int i = 0; i < 120; ++i) {
        comments.push_back({add_days(d, i), "a", {"alpha", "beta", "rouge", "vert"}});
        comments.push_back({add_days(d, i), "b", {"gamma", "bleu", "jaune", "noir"}});
    }
    SkipGramParams params;
    params.dim = 24;
    params.window = 4;
    params.min_count = 2;
    params.epochs = 8;
    params.seed = 1;
    const EmbeddingModel model = train_skipgram(comments, params);
    const double ab = cosine(model, "alpha", "beta");
    const double ac = cosine(model, "alpha", "gamma");
    expect(f, ab > ac,
           "expected cos(alpha,beta) > cos(alpha,gamma), got " + std::to_string(ab) + " vs " +
               std::to_string(ac));
    expect(f, std::abs(cosine(model, "alpha", "alpha") - 1.0) <= 1e-9,
           "cos(w,w) must be 1 within 1e-9");
}

// ---------------------------------------------------------------------------
// 5. Indicator count oracles
// ---------------------------------------------------------------------------

void check_indicator_oracles(Fails& f) {
    std::mt19937_64 gen(17);
    const std::int64_t lo = serial_day(Date{2016, 1, 1});
    const std::int64_t hi = serial_day(Date{2018, 12, 31});
    std::vector<TokenizedComment> comments;
    comments.reserve(1000);
    std::int64_t total_tokens = 0;
    std::int64_t total_bigrams = 0;
    for (int i = 0; i < 1000; ++i) {
        TokenizedComment c;
        c.timestamp = date_from_serial(lo + static_cast<std::int64_t>(gen() % (hi - lo + 1)));
        c.author = "u" + std::to_string(i % 25);
        const int len = 3 + static_cast<int>(gen() % 10);
        for (int t = 0; t < len; ++t) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "w%02d", static_cast<int>(gen() % 60));
            c.tokens.push_back(buf);
        }
        total_tokens += len;
        total_bigrams += len - 1;
        comments.push_back(std::move(c));
    }

    for (const Resolution res :
         {Resolution::day, Resolution::week, Resolution::month, Resolution::year}) {
        const std::string rname = resolution_name(res);
        std::map<std::string, std::map<std::string, std::int64_t>> brute;
        for (const auto& c : comments) {
            const std::string b = bucket_key(c.timestamp, res);
            for (const auto& t : c.tokens) ++brute[t][b];
        }
        const auto freq = word_frequency(comments, res);
        expect(f, freq.size() == brute.size(), rname + ": vocabulary size mismatch");
        std::int64_t conserved = 0;
        for (const auto& [word, series] : freq) {
            const auto it = brute.find(word);
            if (it == brute.end()) {
                f.push_back(rname + ": unexpected word " + word);
                continue;
            }
            for (const auto& [b, count] : series.buckets) {
                const auto bit = it->second.find(b);
                const std::int64_t expected = bit == it->second.end() ? 0 : bit->second;
                if (count != expected)
                    f.push_back(rname + ": " + word + "@" + b + " = " +
                                std::to_string(count) + ", recount " + std::to_string(expected));
                conserved += count;
            }
            for (const auto& [b, count] : it->second)
                if (!series.buckets.count(b))
                    f.push_back(rname + ": bucket " + b + " missing for " + word);
        }
        expect(f, conserved == total_tokens,
               rname + ": bucket totals " + std::to_string(conserved) + " != token count " +
                   std::to_string(total_tokens));
    }

    for (const Resolution res : {Resolution::week, Resolution::month}) {
        const std::string rname = std::string("bigram/") + resolution_name(res);
        std::map<std::string, std::map<std::string, std::int64_t>> brute;
        for (const auto& c : comments) {
            const std::string b = bucket_key(c.timestamp, res);
            for (std::size_t i = 0; i + 1 < c.tokens.size(); ++i)
                ++brute[c.tokens[i] + " " + c.tokens[i + 1]][b];
        }
        const auto freq = ngram_frequency(comments, res);
        expect(f, freq.size() == brute.size(), rname + ": bigram vocabulary size mismatch");
        std::int64_t conserved = 0;
        for (const auto& [g, series] : freq) {
            const auto it = brute.find(g);
            if (it == brute.end()) {
                f.push_back(rname + ": unexpected bigram " + g);
                continue;
            }
            for (const auto& [b, count] : series.buckets) {
                const auto bit = it->second.find(b);
                const std::int64_t expected = bit == it->second.end() ? 0 : bit->second;
                if (count != expected)
                    f.push_back(rname + ": " + g + "@" + b + " miscounted");
                conserved += count;
            }
        }
        expect(f, conserved == total_bigrams,
               rname + ": bucket totals != adjacent-pair count");
    }

    expect(f, std::abs(pearson({1, 2, 3, 4}, {2, 4, 6, 8}) - 1.0) <= 1e-12,
           "pearson of a perfect positive line must be 1");
    expect(f, std::abs(pearson({1, 2, 3, 4}, {-2, -4, -6, -8}) + 1.0) <= 1e-12,
           "pearson of a perfect negative line must be -1");
    expect(f, std::abs(pearson({1, 2, 3, 4, 5}, {2, 1, 3, 5, 4}) - 0.8) <= 1e-12,
           "pearson hand case must be exactly 0.8");
}

// ---------------------------------------------------------------------------
// 6. Synthetic burst end to end
// ---------------------------------------------------------------------------

const char* const kToyNegative[] = {
    "fatigue depuis la nouvelle formule", "vertiges depuis la nouvelle formule",
    "crampes depuis la nouvelle formule", "insomnie depuis la nouvelle formule",
    "palpitations depuis la nouvelle formule", "migraine depuis la nouvelle formule",
    "nouvelle formule du levothyrox", "effets secondaires tres penibles",
    "changement de formule mal tolere", "retour vers ancienne formule reclame",
    "je ne supporte pas la nouvelle formule", "perte de cheveux importante",
    "prise de poids rapide", "douleurs articulaires insupportables",
    "malaise general ce matin", "signalement aupres de mon medecin"};
const char* const kToyPositive[] = {
    "je prends levothyrox depuis des annees", "dosage stable depuis longtemps",
    "prise de sang ce matin", "mon traitement pour la thyroide",
    "resultats tsh corrects", "tout va bien pour moi",
    "question sur le dosage du matin", "consultation chez mon endocrinologue",
    "comprime avant le petit dejeuner", "suivi regulier sans souci",
    "bonjour a tous", "merci pour vos reponses",
    "formule classique depuis toujours", "rien de nouveau chez moi",
    "rendez vous chez le medecin jeudi", "analyse prevue le mois prochain",
    "bonne journee a toutes", "pharmacie du quartier tres aimable",
    "regime equilibre et marche quotidienne", "sommeil correct ces derniers temps",
    "controle annuel chez le generaliste", "un peu de fatigue apres le sport",
    "des vertiges quand je me leve trop vite", "quelques crampes la nuit parfois",
    "lecture interessante sur la glande", "vitamines prescrites par mon medecin",
    "humeur stable ce trimestre", "mes cheveux se portent tres bien"};

void check_end_to_end(Fails& f) {
    const std::string demo_dir = SIGMINE_DEMO_DIR;
    const std::string data_dir = SIGMINE_DATA_DIR;
    const SyntheticSpec spec = synthetic_spec_from_json(
        nlohmann::json::parse(read_file(demo_dir + "/synthetic_spec.json")));
    // round-trip through CSV so this matches what the command line produces
    const LoadResult lr = load_corpus_csv(corpus_to_csv(generate_synthetic(spec)), "synthetic");
    const Corpus& corpus = lr.corpus;
    const Lexicons lex = load_lexicons_dir(data_dir);
    const auto pre = run_pipeline(corpus, lex, PipelineConfig::from_steps({1, 2, 3, 4, 5}));
    const auto raw = run_pipeline(corpus, lex, PipelineConfig::all_off());
    const auto in_burst = [](const std::string& bucket) {
        return bucket >= "2017-07" && bucket <= "2017-12";
    };

    // (a) the injected pair tracks itself across monthly frequencies
    {
        auto freq = word_frequency(pre, Resolution::month);
        if (!freq.count("nouveau") || !freq.count("formule")) {
            f.push_back("(a) injected words missing after preprocessing");
        } else {
            std::map<std::string, FrequencySeries> series{{"nouveau", freq["nouveau"]},
                                                          {"formule", freq["formule"]}};
            const CorrelationReport rep = correlation_pairs(series, {"nouveau", "formule"});
            if (rep.pairs.size() != 1)
                f.push_back("(a) expected exactly one correlation pair");
            else
                expect(f, rep.pairs[0].r >= 0.95,
                       "(a) injected pair correlation " + std::to_string(rep.pairs[0].r) +
                           " below 0.95");
        }
    }

    // (b) the burst half-year is where the injected pair is most similar
    {
        SkipGramParams sp;
        sp.seed = 7;
        sp.dim = 40;
        sp.window = 20;
        sp.epochs = 30;
        const std::vector<std::pair<Date, Date>> periods = {{{2016, 7, 1}, {2016, 12, 31}},
                                                            {{2017, 1, 1}, {2017, 6, 30}},
                                                            {{2017, 7, 1}, {2017, 12, 31}},
                                                            {{2018, 1, 1}, {2018, 6, 30}}};
        const SimilarityTable table =
            similarity_by_period(pre, {{"fatigue", "vertige"}}, periods, sp);
        bool all_present = true;
        for (std::size_t i = 0; i < table.values.size(); ++i)
            if (!table.values[i][0]) all_present = false;
        if (!all_present) {
            f.push_back("(b) pair missing from some period vocabulary");
        } else {
            const double burst = *table.values[2][0];
            for (const std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{3}})
                expect(f, burst > *table.values[i][0],
                       "(b) burst similarity " + std::to_string(burst) +
                           " not above period " + table.period_labels[i] + " (" +
                           std::to_string(*table.values[i][0]) + ")");
        }
    }

    // (c) negative-sentiment share at least doubles inside the burst
    {
        std::vector<LabeledText> labeled;
        for (const char* t : kToyNegative) labeled.push_back({t, Polarity::negative});
        for (const char* t : kToyPositive) labeled.push_back({t, Polarity::positive});
        SentimentParams cp;
        cp.seed = 11;
        cp.epochs = 30;
        cp.initial_lr = 0.5;
        const SentimentModel model = train_classifier(labeled, cp);
        const auto series = sentiment_series(raw, model, Resolution::month);
        double in_neg = 0, in_tot = 0, out_neg = 0, out_tot = 0;
        for (const auto& [bucket, neg] : series.first.buckets) {
            const double pos = static_cast<double>(series.second.buckets.at(bucket));
            (in_burst(bucket) ? in_neg : out_neg) += static_cast<double>(neg);
            (in_burst(bucket) ? in_tot : out_tot) += static_cast<double>(neg) + pos;
        }
        if (in_tot <= 0 || out_tot <= 0) {
            f.push_back("(c) empty sentiment buckets");
        } else {
            const double in_share = in_neg / in_tot;
            const double out_share = out_neg / out_tot;
            expect(f, in_share > 0.0 && in_share >= 2.0 * out_share,
                   "(c) negative share in-burst " + std::to_string(in_share) +
                       " not at least twice out-of-burst " + std::to_string(out_share));
        }
    }

    // (d) the normalized reaction series flags the burst above z = 3
    {
        const ADRLexicon adr_lex = load_adr_lexicon(data_dir + "/adr_lexicon_fr.tsv");
        const FrequencySeries series =
            adr_series(raw, adr_lex, Resolution::month, ADRCountMode::comments);
        const std::vector<double> z = normalize_series(series, 12);
        const auto keys = series.keys();
        double zmax = -1e9;
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (in_burst(keys[i])) zmax = std::max(zmax, z[i]);
        expect(f, zmax > 3.0,
               "(d) max in-burst z " + std::to_string(zmax) + " does not exceed 3");
    }

    // (e) monthly grid cells separate burst months from quiet ones
    {
        ExperimentGrid grid;
        grid.periods = {{"exact", 2017, 7, 2017, 12},
                        {"pad-before", 2017, 6, 2017, 12},
                        {"pad-after", 2017, 7, 2018, 1}};
        grid.resolutions = {GridResolution::month};
        grid.seed = 21;
        grid.repeats = 3;

        CloudParams cloud;
        cloud.width = 96;
        cloud.height = 60;
        cloud.max_words = 12;
        cloud.max_font = 36;
        cloud.min_font = 7;
        cloud.vertical_fraction = 0.0;
        cloud.seed = 7;

        WcCnnConfig cnn;
        cnn.input_w = 96;
        cnn.input_h = 60;
        cnn.conv_kernels = {2, 2, 2, 2, 2};
        cnn.conv_filters = 12;
        cnn.pools_after = 4;
        cnn.dropout_rate = 0.5;
        cnn.batch_size = 4;
        cnn.max_epochs = 40;
        cnn.early_stop_patience = 12;
        cnn.adam.lr = 0.01;

        const auto results = run_grid(corpus, grid, lex, cloud, cnn);
        expect(f, results.size() == 12, "(e) expected 12 grid cells");
        double sum = 0.0;
        int n = 0;
        for (const auto& r : results) {
            if (!r.error.empty() || !r.accuracy) {
                f.push_back("(e) cell " + r.period_name + "/" + r.variant_label +
                            " failed: " + r.error);
                continue;
            }
            sum += *r.accuracy;
            ++n;
        }
        if (n > 0)
            expect(f, sum / n >= 0.8,
                   "(e) mean held-out accuracy " + std::to_string(sum / n) + " below 0.8");
    }
}

// ---------------------------------------------------------------------------
// 7. Grid report reproducibility
// ---------------------------------------------------------------------------

void check_grid_reproducibility(Fails& f) {
    SyntheticSpec spec;
    spec.start = Date{2017, 1, 1};
    spec.end = Date{2017, 12, 31};
    spec.burst_start = Date{2017, 6, 1};
    spec.burst_end = Date{2017, 8, 31};
    spec.daily_rate_normal = 3.0;
    spec.burst_multiplier = 4.0;
    spec.seed = 42;
    spec.author_pool = 30;
    spec.vocab_normal = {{"je prends levothyrox depuis des annees", 2.0},
                         {"dosage stable depuis longtemps", 1.5},
                         {"prise de sang ce matin", 1.5},
                         {"mon traitement pour la thyroide", 1.0},
                         {"tout va bien pour moi", 1.0},
                         {"bonjour a tous", 1.0},
                         {"merci pour vos reponses", 1.0},
                         {"rendez vous chez le medecin jeudi", 1.0}};
    spec.vocab_burst = {{"fatigue depuis la nouvelle formule", 2.0},
                        {"vertiges depuis la nouvelle formule", 1.5},
                        {"nouvelle formule du levothyrox", 1.5},
                        {"effets secondaires tres penibles", 1.0},
                        {"crampes depuis la nouvelle formule", 1.0}};
    const Corpus corpus = generate_synthetic(spec);
    const Lexicons lex = load_lexicons_dir(SIGMINE_DATA_DIR);

    ExperimentGrid grid; // default resolutions (day/week/month/all) and variants
    grid.periods = {{"exact", 2017, 6, 2017, 8},
                    {"pad-before", 2017, 5, 2017, 8},
                    {"pad-after", 2017, 6, 2017, 9}};
    grid.seed = 11;
    grid.repeats = 1;

    CloudParams cloud;
    cloud.width = 48;
    cloud.height = 30;
    cloud.max_words = 10;
    cloud.max_font = 20;
    cloud.min_font = 5;
    cloud.vertical_fraction = 0.0;
    cloud.seed = 3;
    cloud.render_mode = RenderMode::box;

    WcCnnConfig cnn;
    cnn.input_w = 48;
    cnn.input_h = 30;
    cnn.conv_kernels = {3, 2};
    cnn.conv_filters = 4;
    cnn.pools_after = 1;
    cnn.dropout_rate = 0.25;
    cnn.batch_size = 8;
    cnn.max_epochs = 3;
    cnn.early_stop_patience = 3;
    cnn.adam.lr = 0.01;

    const auto first = run_grid(corpus, grid, lex, cloud, cnn);
    const auto second = run_grid(corpus, grid, lex, cloud, cnn);
    expect(f, first.size() == 48,
           "expected 48 cells, got " + std::to_string(first.size()));
    expect(f, second.size() == first.size(), "re-run produced a different cell count");

    int trained = 0;
    for (const auto& r : first)
        if (r.accuracy) ++trained;
    expect(f, trained > 0, "no cell trained successfully; reproducibility would be vacuous");

    const std::string md1 = report(first, ReportFormat::markdown);
    const std::string md2 = report(second, ReportFormat::markdown);
    expect(f, !md1.empty(), "empty markdown report");
    expect(f, md1 == md2, "markdown reports differ between equal-seed runs");
    expect(f, report(first, ReportFormat::csv) == report(second, ReportFormat::csv),
           "csv reports differ between equal-seed runs");
}

} // namespace

int main() {
    int failures = 0;
    failures += run_criterion(1, "font sizing recurrence", 1.0, check_font_sizing);
    failures += run_criterion(2, "cloud layout invariants", 30.0, check_cloud_layout);
    failures += run_criterion(3, "cnn numerics", 60.0, check_cnn_numerics);
    failures += run_criterion(4, "skip-gram numerics", 60.0, check_skipgram_numerics);
    failures += run_criterion(5, "indicator count oracles", 30.0, check_indicator_oracles);
    failures += run_criterion(6, "synthetic burst end to end", 600.0, check_end_to_end);
    failures += run_criterion(7, "grid report reproducibility", 0.0, check_grid_reproducibility);
    std::printf("acceptance: %d/7 criteria passed\n", 7 - failures);
    return failures == 0 ? 0 : 1;
}
