// SPDX-License-Identifier: Apache-2.0
// Command-line driver for the sigmine library. One subcommand per pipeline
// stage; every stage reads and writes plain files so runs are resumable and
// each intermediate artifact can be inspected. All randomized stages take an
// explicit --seed. Exit codes: 0 ok, 2 usage, 3 io, 4 format, 5 domain,
// 1 anything else.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sigmine/adr.hpp"
#include "sigmine/cloud.hpp"
#include "sigmine/corpus.hpp"
#include "sigmine/embed.hpp"
#include "sigmine/error.hpp"
#include "sigmine/experiment.hpp"
#include "sigmine/indicators.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/sentiment.hpp"
#include "sigmine/wccnn.hpp"

namespace {

using namespace sigmine;

// SIGMINE_LOG: quiet | info (default) | debug. Verbosity only; never changes
// outputs.
int g_verbosity = 1;

void init_verbosity() {
    const char* v = std::getenv("SIGMINE_LOG");
    if (!v) return;
    const std::string s(v);
    if (s == "quiet")
        g_verbosity = 0;
    else if (s == "debug")
        g_verbosity = 2;
    else if (s == "info")
        g_verbosity = 1;
}

void log_info(const std::string& msg) {
    if (g_verbosity >= 1) std::fprintf(stderr, "[sigmine] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (g_verbosity >= 2) std::fprintf(stderr, "[sigmine] %s\n", msg.c_str());
}

nlohmann::json parse_json_file(const std::string& path) {
    const std::string content = read_file(path);
    try {
        return nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(path + ": " + e.what());
    }
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
    std::vector<int> out;
    if (s.empty() || s == "none") return out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            const int v = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw format_error(std::string(what) + ": bad integer '" + tok + "' in '" + s + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

PipelineConfig config_from_steps_string(const std::string& steps, int min_tokens) {
    std::set<int> set;
    for (const int v : parse_int_list(steps, "--steps")) {
        if (v < 1 || v > 5)
            throw format_error("--steps: step " + std::to_string(v) + " outside 1..5");
        set.insert(v);
    }
    return PipelineConfig::from_steps(set, min_tokens);
}

Resolution resolution_arg(const std::string& name) {
    const auto res = resolution_from_name(name);
    if (!res) throw format_error("unknown resolution '" + name + "'");
    return *res;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t next = s.find(sep, pos);
        parts.push_back(s.substr(pos, next == std::string::npos ? next : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return parts;
}

Date date_arg(const std::string& s, const char* what) {
    const auto d = parse_date(s);
    if (!d) throw format_error(std::string(what) + ": bad date '" + s + "', expected YYYY-MM-DD");
    return *d;
}

void ensure_dir(const std::string& dir) {
    if (dir.empty() || dir == ".") return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory: " + dir + ": " + ec.message());
}

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
}

int usage_error(const std::string& msg) {
    std::fprintf(stderr, "sigmine: %s\n", msg.c_str());
    return 2;
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestOpts {
    std::string format;
    std::string in;
    std::string out;
};

int cmd_ingest(const IngestOpts& o) {
    Corpus corpus;
    std::size_t dropped = 0;
    if (o.format == "html") {
        const HtmlParseResult parsed = parse_forum_html(read_file(o.in));
        if (parsed.no_posts_found) log_info("warning: no post blocks found in " + o.in);
        corpus.comments = parsed.comments;
        corpus.provenance = o.in;
        detail::sort_by_timestamp(corpus.comments);
        dropped = parsed.skipped_posts;
    } else {
        const CorpusFormat fmt = o.format == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
        LoadResult loaded = load_corpus(o.in, fmt);
        corpus = std::move(loaded.corpus);
        dropped = loaded.dropped;
    }
    ensure_parent(o.out);
    write_corpus_csv(corpus, o.out);
    log_info("ingested " + std::to_string(corpus.size()) + " comments (" +
             std::to_string(dropped) + " dropped) -> " + o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
    std::string spec;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int cmd_synth(const SynthOpts& o) {
    SyntheticSpec spec = synthetic_spec_from_json(parse_json_file(o.spec));
    if (o.seed_given) spec.seed = o.seed;
    const Corpus corpus = generate_synthetic(spec);
    ensure_parent(o.out);
    write_corpus_csv(corpus, o.out);
    log_info("generated " + std::to_string(corpus.size()) + " comments (seed " +
             std::to_string(spec.seed) + ") -> " + o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

struct PreprocessOpts {
    std::string in;
    std::string format = "csv";
    std::string lexicons_dir;
    std::string steps = "1,2,3,4,5";
    int min_tokens = 3;
    std::string out;
};

int cmd_preprocess(const PreprocessOpts& o) {
    const CorpusFormat fmt = o.format == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
    const LoadResult loaded = load_corpus(o.in, fmt);
    const Lexicons lexicons =
        o.lexicons_dir.empty() ? Lexicons{} : load_lexicons_dir(o.lexicons_dir);
    const PipelineConfig config = config_from_steps_string(o.steps, o.min_tokens);
    const auto tokenized = run_pipeline(loaded.corpus, lexicons, config);
    ensure_parent(o.out);
    write_file(o.out, tokenized_to_tsv(tokenized));
    log_info(config.steps_label() + ": kept " + std::to_string(tokenized.size()) + " of " +
             std::to_string(loaded.corpus.size()) + " comments -> " + o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// indicators
// ---------------------------------------------------------------------------

struct IndicatorsOpts {
    std::string in;
    std::string resolution = "month";
    std::string words;
    int top_bigrams = 0;
    int normalize_window = 0;
    std::string out_dir = ".";
};

int cmd_indicators(const IndicatorsOpts& o) {
    if (o.words.empty() && o.top_bigrams == 0)
        return usage_error("indicators: nothing to do, pass --words and/or --top-bigrams");
    const auto comments = tokenized_from_tsv(read_file(o.in));
    const Resolution res = resolution_arg(o.resolution);
    const std::string res_name = resolution_name(res);
    ensure_dir(o.out_dir);

    if (!o.words.empty()) {
        std::vector<std::string> words;
        for (const auto& w : split_on(o.words, ','))
            if (!w.empty()) words.push_back(w);
        const auto all_series = word_frequency(comments, res);
        std::map<std::string, FrequencySeries> series_map;
        for (const auto& word : words) {
            const auto it = all_series.find(word);
            if (it == all_series.end())
                throw domain_error("word not in the corpus: " + word);
            series_map[word] = it->second;
        }
        for (const auto& [word, series] : series_map) {
            const std::string path = o.out_dir + "/series_" + word + "_" + res_name + ".csv";
            write_file(path, series_to_csv(series));
            log_debug("wrote " + path);
            if (o.normalize_window > 0) {
                const auto z = normalize_series(series, o.normalize_window);
                const auto keys = series.keys();
                std::string csv = "bucket,count,z\n";
                for (std::size_t i = 0; i < keys.size(); ++i) {
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.6f", z[i]);
                    csv += keys[i] + "," + std::to_string(series.buckets.at(keys[i])) + "," +
                           buf + "\n";
                }
                const std::string zpath =
                    o.out_dir + "/normalized_" + word + "_" + res_name + ".csv";
                write_file(zpath, csv);
                log_debug("wrote " + zpath);
            }
        }
        if (words.size() >= 2) {
            const CorrelationReport corr = correlation_pairs(series_map, words);
            const std::string path = o.out_dir + "/correlations_" + res_name + ".csv";
            write_file(path, correlation_to_csv(corr));
            for (const auto& [k1, k2] : corr.skipped)
                log_info("correlation undefined (constant series): " + k1 + ", " + k2);
            log_info("wrote " + path);
        }
        log_info("wrote " + std::to_string(series_map.size()) + " word series to " + o.out_dir);
    }

    if (o.top_bigrams > 0) {
        std::printf("ngram,count\n");
        if (!comments.empty()) {
            Date first = comments.front().timestamp, last = first;
            for (const auto& c : comments) {
                if (c.timestamp < first) first = c.timestamp;
                if (last < c.timestamp) last = c.timestamp;
            }
            const auto bigrams = ngram_frequency(comments, res, NgramSpec{2});
            const auto ranked =
                top_k(bigrams, static_cast<std::size_t>(o.top_bigrams), first, last);
            for (const auto& [ngram, count] : ranked)
                std::printf("%s,%lld\n", csv_escape(ngram).c_str(),
                            static_cast<long long>(count));
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

struct EmbedOpts {
    std::string in;
    std::string out;
    std::uint64_t seed = 0;
    int dim = 60;
    int window = 20;
    int min_count = 3;
    int epochs = 5;
    int negatives = 5;
    double lr = 0.05;
    double subsample = 1e-2;
    std::vector<std::string> pairs;
    std::string periods;
};

int cmd_embed(const EmbedOpts& o) {
    if (o.out.empty() && o.pairs.empty())
        return usage_error("embed: nothing to do, pass --out and/or --pair");
    const auto comments = tokenized_from_tsv(read_file(o.in));
    SkipGramParams params;
    params.dim = o.dim;
    params.window = o.window;
    params.min_count = o.min_count;
    params.epochs = o.epochs;
    params.negatives = o.negatives;
    params.initial_lr = o.lr;
    params.subsample_t = o.subsample;
    params.seed = o.seed;

    if (!o.out.empty()) {
        ensure_parent(o.out);
        const EmbeddingModel model = train_skipgram(comments, params);
        for (std::size_t e = 0; e < model.epoch_losses.size(); ++e) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "epoch %zu mean loss %.6f", e + 1,
                          model.epoch_losses[e]);
            log_debug(buf);
        }
        save_embeddings(model, o.out);
        log_info("trained " + std::to_string(model.words.size()) + "-word model -> " + o.out);
    }

    if (!o.pairs.empty()) {
        if (o.periods.empty())
            return usage_error("embed: --pair needs --periods START:END[,START:END...]");
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& p : o.pairs) {
            const auto parts = split_on(p, ',');
            if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
                return usage_error("embed: bad --pair '" + p + "', expected word1,word2");
            pairs.emplace_back(parts[0], parts[1]);
        }
        std::vector<std::pair<Date, Date>> periods;
        for (const auto& span : split_on(o.periods, ',')) {
            const auto ends = split_on(span, ':');
            if (ends.size() != 2)
                return usage_error("embed: bad period '" + span + "', expected START:END");
            periods.emplace_back(date_arg(ends[0], "--periods"), date_arg(ends[1], "--periods"));
        }
        const SimilarityTable table = similarity_by_period(comments, pairs, periods, params);
        std::printf("period,pair,cosine\n");
        for (std::size_t r = 0; r < table.period_labels.size(); ++r)
            for (std::size_t c = 0; c < table.pairs.size(); ++c) {
                const auto& [w1, w2] = table.pairs[c];
                std::printf("%s,%s %s,", table.period_labels[r].c_str(), w1.c_str(), w2.c_str());
                if (table.values[r][c])
                    std::printf("%.6f\n", *table.values[r][c]);
                else
                    std::printf("\n");
            }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sentiment
// ---------------------------------------------------------------------------

struct SentimentOpts {
    std::string train_csv;
    std::string model_path;
    std::string out;
    std::uint64_t seed = 0;
    int dim = 50;
    int epochs = 5;
    double lr = 0.1;
    std::uint32_t buckets = 1u << 18;
    std::string text;
    bool text_given = false;
    std::string in;
    std::string resolution = "month";
    std::string out_dir = ".";
};

int cmd_sentiment(const SentimentOpts& o) {
    if (!o.train_csv.empty()) {
        SentimentParams params;
        params.dim = o.dim;
        params.epochs = o.epochs;
        params.initial_lr = o.lr;
        params.buckets = o.buckets;
        params.seed = o.seed;
        const auto data = load_labeled_csv(o.train_csv);
        const SentimentModel model = train_classifier(data, params);
        if (o.out.empty()) return usage_error("sentiment: --train needs --out for the model");
        ensure_parent(o.out);
        save_sentiment_model(model, o.out);
        log_info("trained on " + std::to_string(data.size()) + " examples -> " + o.out);
        return 0;
    }
    if (o.model_path.empty())
        return usage_error("sentiment: pass --train (fit a model) or --model (use one)");
    const SentimentModel model = load_sentiment_model(o.model_path);
    if (o.text_given) {
        const Prediction p = predict(model, o.text);
        std::printf("%s,%.6f,%.6f\n", polarity_name(p.label), p.p_negative, p.p_positive);
        return 0;
    }
    if (o.in.empty())
        return usage_error("sentiment: --model needs --text or --in tokens.tsv");
    const auto comments = tokenized_from_tsv(read_file(o.in));
    const Resolution res = resolution_arg(o.resolution);
    const auto [neg, pos] = sentiment_series(comments, model, res);
    std::string csv = "bucket,negative,positive,negative_share\n";
    for (const auto& key : neg.keys()) {
        const std::int64_t n = neg.buckets.at(key);
        const std::int64_t p = pos.buckets.at(key);
        csv += key + "," + std::to_string(n) + "," + std::to_string(p) + ",";
        if (n + p > 0) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(n) / (n + p));
            csv += buf;
        }
        csv += "\n";
    }
    ensure_dir(o.out_dir);
    const std::string path =
        o.out_dir + "/sentiment_" + std::string(resolution_name(res)) + ".csv";
    write_file(path, csv);
    log_info("wrote " + path);
    return 0;
}

// ---------------------------------------------------------------------------
// adr
// ---------------------------------------------------------------------------

struct AdrOpts {
    std::string lexicon;
    std::string in;
    std::string resolution = "month";
    std::string mode = "occurrences";
    int top = 0;
    int ngrams = 0;
    int normalize_window = 0;
    std::string out_dir = ".";
};

int cmd_adr(const AdrOpts& o) {
    const ADRLexicon lexicon = load_adr_lexicon(o.lexicon);
    const auto comments = tokenized_from_tsv(read_file(o.in));
    const Resolution res = resolution_arg(o.resolution);
    const std::string res_name = resolution_name(res);
    const ADRCountMode mode =
        o.mode == "comments" ? ADRCountMode::comments : ADRCountMode::occurrences;

    const FrequencySeries series = adr_series(comments, lexicon, res, mode);
    ensure_dir(o.out_dir);
    const std::string path = o.out_dir + "/adr_" + res_name + ".csv";
    write_file(path, series_to_csv(series));
    log_info("wrote " + path);

    if (o.normalize_window > 0) {
        const auto z = normalize_series(series, o.normalize_window);
        const auto keys = series.keys();
        std::string csv = "bucket,count,z\n";
        for (std::size_t i = 0; i < keys.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6f", z[i]);
            csv += keys[i] + "," + std::to_string(series.buckets.at(keys[i])) + "," + buf + "\n";
        }
        const std::string zpath = o.out_dir + "/adr_normalized_" + res_name + ".csv";
        write_file(zpath, csv);
        log_info("wrote " + zpath);
    }

    if (o.top > 0) {
        std::printf("reaction,count\n");
        for (const auto& [name, count] : most_common(comments, lexicon, o.top))
            std::printf("%s,%lld\n", csv_escape(name).c_str(), static_cast<long long>(count));
    }
    if (o.ngrams > 0) {
        std::printf("ngram,count\n");
        for (const auto& [ngram, count] : adr_ngrams(comments, lexicon, o.ngrams))
            std::printf("%s,%lld\n", csv_escape(ngram).c_str(), static_cast<long long>(count));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// clouds
// ---------------------------------------------------------------------------

struct CloudsOpts {
    std::string in;
    std::string resolution = "month";
    std::string out_dir;
    std::uint64_t seed = 0;
    int width = 800;
    int height = 500;
    int max_words = 200;
    int max_font = 110;
    int min_font = 4;
    double rs = 0.5;
    double vertical = 0.1;
    std::string render = "glyph";
};

int cmd_clouds(const CloudsOpts& o) {
    const auto comments = tokenized_from_tsv(read_file(o.in));
    const Resolution res = resolution_arg(o.resolution);
    CloudParams params;
    params.width = o.width;
    params.height = o.height;
    params.max_words = o.max_words;
    params.max_font = o.max_font;
    params.min_font = o.min_font;
    params.relative_scaling = o.rs;
    params.vertical_fraction = o.vertical;
    params.seed = o.seed;
    if (o.render == "box")
        params.render_mode = RenderMode::box;
    else if (o.render == "glyph")
        params.render_mode = RenderMode::glyph;
    else
        return usage_error("clouds: unknown --render '" + o.render + "', use glyph or box");

    const auto clouds = generate_bucket_clouds(comments, res, params);
    ensure_dir(o.out_dir);
    const auto paths = write_cloud_files(clouds, o.out_dir);
    for (const auto& p : paths) log_debug("wrote " + p);
    log_info("wrote " + std::to_string(paths.size()) + " clouds to " + o.out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string clouds_dir;
    std::string period_start;
    std::string period_end;
    std::string out;
    std::uint64_t seed = 0;
    int input_w = 200;
    int input_h = 125;
    std::string kernels = "6,6,6,3,2";
    int filters = 128;
    int pools = 4;
    double dropout = 0.5;
    int batch = 50;
    int epochs = 100;
    int patience = 10;
    double lr = 0.001;
};

int cmd_train(const TrainOpts& o) {
    AbnormalPeriod period;
    period.name = "train-window";
    std::tie(period.start_year, period.start_month) = parse_year_month(o.period_start);
    std::tie(period.end_year, period.end_month) = parse_year_month(o.period_end);
    period.validate();

    std::vector<std::string> png_paths;
    for (const auto& entry : std::filesystem::directory_iterator(o.clouds_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("cloud_", 0) == 0 && entry.path().extension() == ".png")
            png_paths.push_back(entry.path().string());
    }
    std::sort(png_paths.begin(), png_paths.end());
    if (png_paths.empty())
        throw io_error("no cloud_*.png files under " + o.clouds_dir);

    std::vector<LabeledBucket> buckets;
    std::vector<GrayImage> images;
    const Date p1 = period.first_day();
    const Date p2 = period.last_day();
    for (const auto& path : png_paths) {
        // stem layout: cloud_<resolution>_<bucket>
        const std::string stem = std::filesystem::path(path).stem().string();
        const std::size_t sep = stem.find('_', 6);
        if (sep == std::string::npos)
            throw format_error("cannot parse bucket from filename: " + path);
        const std::string bucket = stem.substr(sep + 1);
        const auto [b1, b2] = bucket_span(bucket);
        const std::string bytes = read_file(path);
        images.push_back(decode_png(std::vector<unsigned char>(bytes.begin(), bytes.end())));
        buckets.push_back({bucket, b1, b2,
                           spans_intersect(b1, b2, p1, p2) ? BucketLabel::abnormal
                                                           : BucketLabel::normal});
    }

    const BalanceResult bal = balance(buckets, period);
    if (!bal.warning.empty()) log_info("warning: " + bal.warning);
    std::vector<LabeledImage> data;
    for (const std::size_t idx : bal.kept)
        data.push_back({images[idx], buckets[idx].label == BucketLabel::abnormal
                                         ? kLabelAbnormal
                                         : kLabelNormal});

    WcCnnConfig cfg;
    cfg.input_w = o.input_w;
    cfg.input_h = o.input_h;
    cfg.conv_kernels = parse_int_list(o.kernels, "--kernels");
    cfg.conv_filters = o.filters;
    cfg.pools_after = o.pools;
    cfg.dropout_rate = o.dropout;
    cfg.batch_size = o.batch;
    cfg.max_epochs = o.epochs;
    cfg.early_stop_patience = o.patience;
    cfg.adam.lr = o.lr;
    cfg.seed = o.seed;

    const WcCnnModel model = train(cfg, data);
    ensure_parent(o.out);
    save_wccnn(model, o.out);
    char buf[128];
    std::snprintf(buf, sizeof buf, "trained on %zu clouds, best val accuracy %.3f -> %s",
                  data.size(), best_val_accuracy(model), o.out.c_str());
    log_info(buf);
    return 0;
}

// ---------------------------------------------------------------------------
// grid + report
// ---------------------------------------------------------------------------

struct GridOpts {
    std::string config;
    std::string out_dir;
    int repeats = 0;
};

int cmd_grid(const GridOpts& o) {
    GridConfig cfg = grid_config_from_json(parse_json_file(o.config));
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.repeats > 0) cfg.grid.repeats = o.repeats;

    const LoadResult loaded = load_corpus(cfg.corpus_path, cfg.corpus_format);
    const Lexicons lexicons =
        cfg.lexicons_dir.empty() ? Lexicons{} : load_lexicons_dir(cfg.lexicons_dir);
    log_info("grid: " + std::to_string(cfg.grid.periods.size()) + " periods x " +
             std::to_string(cfg.grid.resolutions.size()) + " resolutions x " +
             std::to_string(cfg.grid.variants.size()) + " variants on " +
             std::to_string(loaded.corpus.size()) + " comments");

    const auto results = run_grid(loaded.corpus, cfg.grid, lexicons, cfg.cloud, cfg.cnn,
                                  [](const GridResult& cell) {
                                      std::string line = "cell " + cell.period_name + " / " +
                                                         grid_resolution_name(cell.resolution) +
                                                         " / " + cell.variant_label + ": ";
                                      if (cell.accuracy) {
                                          char buf[32];
                                          std::snprintf(buf, sizeof buf, "%.3f", *cell.accuracy);
                                          line += buf;
                                      } else {
                                          line += "error: " + cell.error;
                                      }
                                      log_info(line);
                                  });

    ensure_dir(cfg.out_dir);
    const std::string results_path = cfg.out_dir + "/grid_results.json";
    write_file(results_path, grid_results_to_json(results).dump(2) + "\n");
    log_info("wrote " + results_path);
    for (const auto& path : write_reports(results, cfg.out_dir)) log_info("wrote " + path);
    return 0;
}

struct ReportOpts {
    std::string results;
    std::string format = "markdown";
    std::string out;
    std::string out_dir;
};

int cmd_report(const ReportOpts& o) {
    if (o.out.empty() && o.out_dir.empty())
        return usage_error("report: pass --out FILE or --out-dir DIR");
    const auto results = grid_results_from_json(parse_json_file(o.results));
    if (!o.out.empty()) {
        ensure_parent(o.out);
        const ReportFormat fmt =
            (o.format == "csv") ? ReportFormat::csv : ReportFormat::markdown;
        write_file(o.out, report(results, fmt));
        log_info("wrote " + o.out);
    }
    if (!o.out_dir.empty()) {
        ensure_dir(o.out_dir);
        for (const auto& path : write_reports(results, o.out_dir)) log_info("wrote " + path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    init_verbosity();
    CLI::App app{"word-cloud based safety-signal mining over forum corpora"};
    app.require_subcommand(1);

    IngestOpts ingest;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "normalize a raw corpus file to CSV");
    ingest_cmd->add_option("--format", ingest.format, "input format")
        ->required()
        ->check(CLI::IsMember({"csv", "jsonl", "html"}));
    ingest_cmd->add_option("--in", ingest.in, "input path")->required();
    ingest_cmd->add_option("--out", ingest.out, "output corpus CSV")->required();

    SynthOpts synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--spec", synth.spec, "synthetic spec JSON")->required();
    synth_cmd->add_option("--out", synth.out, "output corpus CSV")->required();
    CLI::Option* synth_seed = synth_cmd->add_option("--seed", synth.seed, "override spec seed");

    PreprocessOpts preprocess;
    CLI::App* preprocess_cmd =
        app.add_subcommand("preprocess", "clean and tokenize a corpus to TSV");
    preprocess_cmd->add_option("--in", preprocess.in, "corpus path")->required();
    preprocess_cmd->add_option("--format", preprocess.format, "corpus format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    preprocess_cmd->add_option("--lexicons", preprocess.lexicons_dir,
                               "directory with stopword/spelling/lemma lists");
    preprocess_cmd->add_option("--steps", preprocess.steps,
                               "comma list of steps 1..5 to enable, or 'none'");
    preprocess_cmd->add_option("--min-tokens", preprocess.min_tokens,
                               "minimum token count when step 1 is on");
    preprocess_cmd->add_option("--out", preprocess.out, "output tokens TSV")->required();

    IndicatorsOpts indicators;
    CLI::App* indicators_cmd =
        app.add_subcommand("indicators", "frequency series, correlations, top n-grams");
    indicators_cmd->add_option("--in", indicators.in, "tokens TSV")->required();
    indicators_cmd->add_option("--resolution", indicators.resolution, "bucket resolution")
        ->check(CLI::IsMember({"day", "week", "month", "year"}));
    indicators_cmd->add_option("--words", indicators.words, "comma list of words to track");
    indicators_cmd->add_option("--top-bigrams", indicators.top_bigrams,
                               "print the K most frequent bigrams");
    indicators_cmd->add_option("--normalize-window", indicators.normalize_window,
                               "rolling z-score window (buckets)");
    indicators_cmd->add_option("--out-dir", indicators.out_dir, "output directory");

    EmbedOpts embed;
    CLI::App* embed_cmd =
        app.add_subcommand("embed", "train word vectors; track pair similarity over periods");
    embed_cmd->add_option("--in", embed.in, "tokens TSV")->required();
    embed_cmd->add_option("--out", embed.out, "output vector text file");
    embed_cmd->add_option("--seed", embed.seed, "rng seed")->required();
    embed_cmd->add_option("--dim", embed.dim, "vector dimension");
    embed_cmd->add_option("--window", embed.window, "max context window");
    embed_cmd->add_option("--min-count", embed.min_count, "vocabulary threshold");
    embed_cmd->add_option("--epochs", embed.epochs, "training epochs");
    embed_cmd->add_option("--negatives", embed.negatives, "negative samples per example");
    embed_cmd->add_option("--lr", embed.lr, "initial learning rate");
    embed_cmd->add_option("--subsample", embed.subsample, "frequent-word subsampling threshold");
    embed_cmd->add_option("--pair", embed.pairs, "word pair 'a,b' to score (repeatable)");
    embed_cmd->add_option("--periods", embed.periods,
                          "comma list of START:END date spans (YYYY-MM-DD)");

    SentimentOpts sentiment;
    CLI::App* sentiment_cmd =
        app.add_subcommand("sentiment", "train polarity classifier; score texts or series");
    sentiment_cmd->add_option("--train", sentiment.train_csv, "labeled CSV (text,label)");
    sentiment_cmd->add_option("--model", sentiment.model_path, "saved model to use");
    sentiment_cmd->add_option("--out", sentiment.out, "model output path (with --train)");
    sentiment_cmd->add_option("--seed", sentiment.seed, "rng seed (with --train)");
    sentiment_cmd->add_option("--dim", sentiment.dim, "embedding dimension");
    sentiment_cmd->add_option("--epochs", sentiment.epochs, "training epochs");
    sentiment_cmd->add_option("--lr", sentiment.lr, "initial learning rate");
    sentiment_cmd->add_option("--buckets", sentiment.buckets, "hash bucket count");
    CLI::Option* text_opt =
        sentiment_cmd->add_option("--text", sentiment.text, "classify one text");
    sentiment_cmd->add_option("--in", sentiment.in, "tokens TSV for a bucketed series");
    sentiment_cmd->add_option("--resolution", sentiment.resolution, "bucket resolution")
        ->check(CLI::IsMember({"day", "week", "month", "year"}));
    sentiment_cmd->add_option("--out-dir", sentiment.out_dir, "output directory");

    AdrOpts adr;
    CLI::App* adr_cmd =
        app.add_subcommand("adr", "detect adverse-reaction mentions against a lexicon");
    adr_cmd->add_option("--lexicon", adr.lexicon, "TSV of name<TAB>regex")->required();
    adr_cmd->add_option("--in", adr.in, "tokens TSV")->required();
    adr_cmd->add_option("--resolution", adr.resolution, "bucket resolution")
        ->check(CLI::IsMember({"day", "week", "month", "year"}));
    adr_cmd->add_option("--mode", adr.mode, "count occurrences or commenting posts")
        ->check(CLI::IsMember({"occurrences", "comments"}));
    adr_cmd->add_option("--top", adr.top, "print the K most mentioned reactions");
    adr_cmd->add_option("--ngrams", adr.ngrams, "print top K bigrams near mentions");
    adr_cmd->add_option("--normalize-window", adr.normalize_window,
                        "rolling z-score window (buckets)");
    adr_cmd->add_option("--out-dir", adr.out_dir, "output directory");

    CloudsOpts clouds;
    CLI::App* clouds_cmd = app.add_subcommand("clouds", "render per-bucket word clouds to PNG");
    clouds_cmd->add_option("--in", clouds.in, "tokens TSV")->required();
    clouds_cmd->add_option("--resolution", clouds.resolution, "bucket resolution")
        ->check(CLI::IsMember({"day", "week", "month", "year"}));
    clouds_cmd->add_option("--out-dir", clouds.out_dir, "output directory")->required();
    clouds_cmd->add_option("--seed", clouds.seed, "layout seed")->required();
    clouds_cmd->add_option("--width", clouds.width, "canvas width");
    clouds_cmd->add_option("--height", clouds.height, "canvas height");
    clouds_cmd->add_option("--max-words", clouds.max_words, "word cap per cloud");
    clouds_cmd->add_option("--max-font", clouds.max_font, "font size of the top word");
    clouds_cmd->add_option("--min-font", clouds.min_font, "smallest font kept");
    clouds_cmd->add_option("--rs", clouds.rs, "relative scaling in [0,1]");
    clouds_cmd->add_option("--vertical", clouds.vertical, "vertical orientation fraction");
    clouds_cmd->add_option("--render", clouds.render, "glyph or box rendering")
        ->check(CLI::IsMember({"glyph", "box"}));

    TrainOpts train;
    CLI::App* train_cmd =
        app.add_subcommand("train", "train the cloud classifier on a directory of clouds");
    train_cmd->add_option("--clouds", train.clouds_dir, "directory of cloud_*.png")->required();
    train_cmd->add_option("--period-start", train.period_start, "abnormal window start YYYY-MM")
        ->required();
    train_cmd->add_option("--period-end", train.period_end, "abnormal window end YYYY-MM")
        ->required();
    train_cmd->add_option("--out", train.out, "model output path")->required();
    train_cmd->add_option("--seed", train.seed, "rng seed")->required();
    train_cmd->add_option("--input-w", train.input_w, "network input width");
    train_cmd->add_option("--input-h", train.input_h, "network input height");
    train_cmd->add_option("--kernels", train.kernels, "comma list of square kernel sizes");
    train_cmd->add_option("--filters", train.filters, "filters per convolution");
    train_cmd->add_option("--pools", train.pools, "pool after the first K convolutions");
    train_cmd->add_option("--dropout", train.dropout, "dropout rate before the dense layer");
    train_cmd->add_option("--batch", train.batch, "batch size");
    train_cmd->add_option("--epochs", train.epochs, "epoch cap");
    train_cmd->add_option("--patience", train.patience, "early stopping patience");
    train_cmd->add_option("--lr", train.lr, "Adam learning rate");

    GridOpts grid;
    CLI::App* grid_cmd =
        app.add_subcommand("grid", "run the period x resolution x preprocessing grid");
    grid_cmd->add_option("--config", grid.config, "grid config JSON")->required();
    grid_cmd->add_option("--out-dir", grid.out_dir, "override the config out_dir");
    grid_cmd->add_option("--repeats", grid.repeats, "override runs per cell");

    ReportOpts report;
    CLI::App* report_cmd = app.add_subcommand("report", "render reports from saved grid results");
    report_cmd->add_option("--results", report.results, "grid_results.json")->required();
    report_cmd->add_option("--format", report.format, "markdown or csv (with --out)")
        ->check(CLI::IsMember({"markdown", "md", "csv"}));
    report_cmd->add_option("--out", report.out, "combined report path");
    report_cmd->add_option("--out-dir", report.out_dir, "write per-period report files");

    try {
        app.parse(argc, argv);
        synth.seed_given = synth_seed->count() > 0;
        sentiment.text_given = text_opt->count() > 0;
        if (ingest_cmd->parsed()) return cmd_ingest(ingest);
        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (preprocess_cmd->parsed()) return cmd_preprocess(preprocess);
        if (indicators_cmd->parsed()) return cmd_indicators(indicators);
        if (embed_cmd->parsed()) return cmd_embed(embed);
        if (sentiment_cmd->parsed()) return cmd_sentiment(sentiment);
        if (adr_cmd->parsed()) return cmd_adr(adr);
        if (clouds_cmd->parsed()) return cmd_clouds(clouds);
        if (train_cmd->parsed()) return cmd_train(train);
        if (grid_cmd->parsed()) return cmd_grid(grid);
        if (report_cmd->parsed()) return cmd_report(report);
        return usage_error("no subcommand");
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const io_error& e) {
        std::fprintf(stderr, "sigmine: io error: %s\n", e.what());
        return 3;
    } catch (const format_error& e) {
        std::fprintf(stderr, "sigmine: format error: %s\n", e.what());
        return 4;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "sigmine: domain error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "sigmine: error: %s\n", e.what());
        return 1;
    }
}
