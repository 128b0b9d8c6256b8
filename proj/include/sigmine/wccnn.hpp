// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sigmine/bytes.hpp"
#include "sigmine/error.hpp"
#include "sigmine/io.hpp"
#include "sigmine/png.hpp"
#include "sigmine/rng.hpp"
#include "sigmine/tensor.hpp"

namespace sigmine {

// Binary label convention used everywhere, serialization included:
// 0 = abnormal period, 1 = normal period.
constexpr int kLabelAbnormal = 0;
constexpr int kLabelNormal = 1;

struct WcCnnConfig {
    int input_w = 200; // word clouds are wider than tall; 800x500 scaled by 1/4
    int input_h = 125;
    std::vector<int> conv_kernels = {6, 6, 6, 3, 2};
    int conv_filters = 128;
    int pools_after = 4; // a 2x2 max pool follows each of the first N convs
    double dropout_rate = 0.5;
    int output_classes = 2;
    int batch_size = 50;
    int max_epochs = 100;
    int early_stop_patience = 10;
    AdamConfig adam;
    std::uint64_t seed = 0;

    void validate() const; // defined below, needs shape_trace
};

/// Spatial dims after the input stage and after every conv/pool, plus the
/// flatten width. The arithmetic is the whole contract: valid convolution
/// subtracts k-1, pooling halves with floor.
struct ShapeTrace {
    std::vector<std::pair<int, int>> stages; // (w, h) per stage, input first
    int flatten = 0;
    int classes = 0;
};

inline ShapeTrace shape_trace(const WcCnnConfig& cfg) {
    if (cfg.conv_kernels.empty()) throw domain_error("wccnn config: no conv layers");
    if (cfg.pools_after < 0 || cfg.pools_after > static_cast<int>(cfg.conv_kernels.size()))
        throw domain_error("wccnn config: pools_after out of range");
    ShapeTrace t;
    int w = cfg.input_w;
    int h = cfg.input_h;
    t.stages.emplace_back(w, h);
    for (std::size_t i = 0; i < cfg.conv_kernels.size(); ++i) {
        const int k = cfg.conv_kernels[i];
        if (k < 1) throw domain_error("wccnn config: kernel size < 1");
        w -= k - 1;
        h -= k - 1;
        if (w < 1 || h < 1)
            throw domain_error("wccnn config: feature map vanishes at conv " + std::to_string(i + 1));
        t.stages.emplace_back(w, h);
        if (static_cast<int>(i) < cfg.pools_after) {
            w /= 2;
            h /= 2;
            if (w < 1 || h < 1)
                throw domain_error("wccnn config: feature map vanishes at pool " + std::to_string(i + 1));
            t.stages.emplace_back(w, h);
        }
    }
    t.flatten = w * h * cfg.conv_filters;
    t.classes = cfg.output_classes;
    return t;
}

inline void WcCnnConfig::validate() const {
    if (input_w < 1 || input_h < 1) throw domain_error("wccnn config: input size must be positive");
    if (conv_filters < 1) throw domain_error("wccnn config: conv_filters < 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw domain_error("wccnn config: dropout_rate outside [0, 1)");
    if (output_classes != 2) throw domain_error("wccnn config: binary classifier expects 2 classes");
    if (batch_size < 1) throw domain_error("wccnn config: batch_size < 1");
    if (max_epochs < 1) throw domain_error("wccnn config: max_epochs < 1");
    if (early_stop_patience < 1) throw domain_error("wccnn config: early_stop_patience < 1");
    shape_trace(*this); // throws when any feature map vanishes
}

struct WcCnnModel {
    WcCnnConfig config;
    std::vector<ConvKernel> kernels;
    std::vector<std::vector<double>> conv_biases;
    std::vector<double> dense_weight; // flatten x classes, row-major by feature
    std::vector<double> dense_bias;

    struct EpochStats {
        double train_loss = 0.0;
        double train_acc = 0.0;
        double val_loss = 0.0;
        double val_acc = 0.0;
    };
    std::vector<EpochStats> history;
};

/// He-uniform kernels, zero biases; each layer draws from its own seeded
/// stream so layer changes do not cascade into later layers' values.
inline WcCnnModel init_model(const WcCnnConfig& cfg) {
    cfg.validate();
    WcCnnModel model;
    model.config = cfg;
    const ShapeTrace trace = shape_trace(cfg);
    int cin = 1;
    for (std::size_t i = 0; i < cfg.conv_kernels.size(); ++i) {
        const int k = cfg.conv_kernels[i];
        ConvKernel kernel(k, k, cin, cfg.conv_filters);
        Rng rng(mix_seed(cfg.seed, i));
        he_uniform_fill(kernel.v, k * k * cin, rng);
        model.kernels.push_back(std::move(kernel));
        model.conv_biases.emplace_back(static_cast<std::size_t>(cfg.conv_filters), 0.0);
        cin = cfg.conv_filters;
    }
    model.dense_weight.resize(static_cast<std::size_t>(trace.flatten) * cfg.output_classes);
    Rng rng(mix_seed(cfg.seed, 0xDE45E));
    he_uniform_fill(model.dense_weight, trace.flatten, rng);
    model.dense_bias.assign(static_cast<std::size_t>(cfg.output_classes), 0.0);
    return model;
}

struct ForwardCache {
    std::vector<Tensor4> conv_in;  // input of each conv layer
    std::vector<Tensor4> conv_out; // pre-activation
    std::vector<PoolResult> pools; // one per pooled layer
    std::vector<double> flat;      // batch x flatten, after dropout
    std::vector<double> drop_mask; // empty when dropout was not applied
    std::vector<double> logits;
    std::vector<double> probs;
};

/// Full forward pass. ReLU follows every convolution; dropout applies to the
/// flattened features only when `training` and the rate is nonzero (then
/// `drop_rng` must be supplied).
inline std::vector<double> forward(const WcCnnModel& model, const Tensor4& batch, bool training,
                                   Rng* drop_rng = nullptr, ForwardCache* cache = nullptr) {
    const WcCnnConfig& cfg = model.config;
    if (batch.h != cfg.input_h || batch.w != cfg.input_w || batch.c != 1)
        throw domain_error("wccnn forward: batch shape mismatch");
    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};

    Tensor4 x = batch;
    for (std::size_t i = 0; i < model.kernels.size(); ++i) {
        cc.conv_in.push_back(x);
        Tensor4 z = conv2d_forward(x, model.kernels[i], model.conv_biases[i]);
        cc.conv_out.push_back(z);
        x = relu_forward(z);
        if (static_cast<int>(i) < cfg.pools_after) {
            cc.pools.push_back(maxpool2x2(x));
            x = cc.pools.back().out;
        }
    }

    const int flatten = x.h * x.w * x.c;
    cc.flat = x.v; // NHWC rows are already contiguous per sample
    if (training && cfg.dropout_rate > 0.0) {
        if (!drop_rng) throw domain_error("wccnn forward: dropout needs an rng while training");
        cc.drop_mask = dropout_mask(cc.flat.size(), cfg.dropout_rate, *drop_rng);
        for (std::size_t i = 0; i < cc.flat.size(); ++i) cc.flat[i] *= cc.drop_mask[i];
    }
    cc.logits = dense_forward(cc.flat, batch.n, flatten, model.dense_weight, model.dense_bias,
                              cfg.output_classes);
    cc.probs = softmax_rows(cc.logits, batch.n, cfg.output_classes);
    return cc.probs;
}

struct WcCnnGradients {
    std::vector<ConvKernel> kernels;
    std::vector<std::vector<double>> conv_biases;
    std::vector<double> dense_weight;
    std::vector<double> dense_bias;
};

struct LossAndGradients {
    double loss = 0.0;
    WcCnnGradients grads;
};

/// Mean cross-entropy over the batch plus backprop gradients for every
/// parameter tensor. Dropout (when active) is part of the differentiated
/// graph via its mask.
inline LossAndGradients loss_and_gradients(const WcCnnModel& model, const Tensor4& batch,
                                           const std::vector<int>& labels, bool training = true,
                                           Rng* drop_rng = nullptr,
                                           ForwardCache* cache_out = nullptr) {
    const WcCnnConfig& cfg = model.config;
    ForwardCache local;
    ForwardCache& cc = cache_out ? *cache_out : local;
    forward(model, batch, training, drop_rng, &cc);

    LossAndGradients out;
    out.loss = cross_entropy(cc.probs, batch.n, cfg.output_classes, labels);

    const int flatten = static_cast<int>(cc.flat.size()) / batch.n;
    std::vector<double> dlogits =
        cross_entropy_logit_grad(cc.probs, batch.n, cfg.output_classes, labels);
    DenseGradients dg = dense_backward(cc.flat, batch.n, flatten, model.dense_weight,
                                       cfg.output_classes, dlogits);
    out.grads.dense_weight = std::move(dg.weight);
    out.grads.dense_bias = std::move(dg.bias);

    std::vector<double> dflat = std::move(dg.input);
    if (!cc.drop_mask.empty())
        for (std::size_t i = 0; i < dflat.size(); ++i) dflat[i] *= cc.drop_mask[i];

    // reshape the flat gradient back onto the last feature map (NHWC rows
    // are contiguous, so only the shape changes)
    const auto [last_w, last_h] = shape_trace(cfg).stages.back();
    Tensor4 dx(batch.n, last_h, last_w, cfg.conv_filters);
    dx.v = std::move(dflat);

    out.grads.kernels.resize(model.kernels.size());
    out.grads.conv_biases.resize(model.kernels.size());
    for (int i = static_cast<int>(model.kernels.size()) - 1; i >= 0; --i) {
        if (i < cfg.pools_after) {
            const Tensor4 relu_out_i = relu_forward(cc.conv_out[static_cast<std::size_t>(i)]);
            dx = maxpool2x2_backward(relu_out_i, cc.pools[static_cast<std::size_t>(i)], dx);
        }
        dx = relu_backward(cc.conv_out[static_cast<std::size_t>(i)], dx);
        ConvGradients cg = conv2d_backward(cc.conv_in[static_cast<std::size_t>(i)],
                                           model.kernels[static_cast<std::size_t>(i)], dx);
        out.grads.kernels[static_cast<std::size_t>(i)] = std::move(cg.kernel);
        out.grads.conv_biases[static_cast<std::size_t>(i)] = std::move(cg.bias);
        dx = std::move(cg.input);
    }
    return out;
}

/// Inference-mode loss, the finite-difference reference for the analytic
/// gradients (dropout off on both sides).
inline double compute_loss(const WcCnnModel& model, const Tensor4& batch,
                           const std::vector<int>& labels) {
    ForwardCache cc;
    forward(model, batch, false, nullptr, &cc);
    return cross_entropy(cc.probs, batch.n, model.config.output_classes, labels);
}

// ---------------------------------------------------------------------------
// Image input
// ---------------------------------------------------------------------------

/// Writes one grayscale image into batch slot `slot`, bilinearly resampled
/// to the tensor's spatial size and scaled so ink = 1, background = 0.
inline void image_into_batch(Tensor4& batch, int slot, const GrayImage& img) {
    if (img.width < 1 || img.height < 1) throw domain_error("image_into_batch: empty image");
    const int dw = batch.w;
    const int dh = batch.h;
    for (int y = 0; y < dh; ++y) {
        double sy = (y + 0.5) * img.height / static_cast<double>(dh) - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < dw; ++x) {
            double sx = (x + 0.5) * img.width / static_cast<double>(dw) - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;
            const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
            const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
            batch.at(slot, y, x, 0) = 1.0 - (top * (1.0 - fy) + bot * fy) / 255.0;
        }
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct LabeledImage {
    GrayImage image;
    int label = kLabelNormal; // 0 abnormal, 1 normal
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

inline EvalResult evaluate(const WcCnnModel& model, const std::vector<const LabeledImage*>& samples) {
    if (samples.empty()) throw domain_error("evaluate: no samples");
    const WcCnnConfig& cfg = model.config;
    EvalResult r;
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < samples.size();) {
        const int bn = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), samples.size() - start));
        Tensor4 batch(bn, cfg.input_h, cfg.input_w, 1);
        std::vector<int> labels(static_cast<std::size_t>(bn));
        for (int i = 0; i < bn; ++i) {
            image_into_batch(batch, i, samples[start + static_cast<std::size_t>(i)]->image);
            labels[static_cast<std::size_t>(i)] = samples[start + static_cast<std::size_t>(i)]->label;
        }
        ForwardCache cc;
        forward(model, batch, false, nullptr, &cc);
        loss_sum += cross_entropy(cc.probs, bn, cfg.output_classes, labels) * bn;
        for (int i = 0; i < bn; ++i) {
            const double* p = cc.probs.data() + static_cast<std::size_t>(i) * cfg.output_classes;
            const int pred = p[1] > p[0] ? 1 : 0;
            if (pred == labels[static_cast<std::size_t>(i)]) ++correct;
        }
        start += static_cast<std::size_t>(bn);
    }
    r.loss = loss_sum / static_cast<double>(samples.size());
    r.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    return r;
}

struct TrainSplit {
    std::vector<const LabeledImage*> train;
    std::vector<const LabeledImage*> validation;
};

/// Seeded stratified 80/20 split; every class keeps at least one sample on
/// each side.
inline TrainSplit stratified_split(const std::vector<LabeledImage>& data, std::uint64_t seed) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].label != kLabelAbnormal && data[i].label != kLabelNormal)
            throw domain_error("train: label must be 0 (abnormal) or 1 (normal)");
        by_class[data[i].label].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty())
        throw domain_error("train: both classes must be present");
    TrainSplit split;
    for (int cls = 0; cls < 2; ++cls) {
        auto& idx = by_class[cls];
        if (idx.size() < 2)
            throw domain_error(std::string("train: need at least 2 samples of class ") +
                               (cls == kLabelAbnormal ? "abnormal" : "normal"));
        Rng rng(mix_seed(seed, 0x5917u + static_cast<std::uint64_t>(cls)));
        rng.shuffle(idx);
        const std::size_t n_val = std::max<std::size_t>(1, idx.size() / 5);
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_val ? split.validation : split.train).push_back(&data[idx[i]]);
    }
    return split;
}

/// Adam training with early stopping on validation loss: up to max_epochs,
/// stop after early_stop_patience consecutive epochs without improvement,
/// return the best-validation-loss parameters. Deterministic given seed.
inline WcCnnModel train(const WcCnnConfig& cfg, const std::vector<LabeledImage>& data) {
    cfg.validate();
    TrainSplit split = stratified_split(data, cfg.seed);

    WcCnnModel model = init_model(cfg);
    const std::size_t n_layers = model.kernels.size();
    std::vector<AdamState> kernel_state(n_layers), bias_state(n_layers);
    AdamState dense_w_state, dense_b_state;
    std::int64_t step = 0;

    Rng order_rng(mix_seed(cfg.seed, 0x08DE8));
    Rng drop_rng(mix_seed(cfg.seed, 0xD809));

    struct Snapshot {
        std::vector<ConvKernel> kernels;
        std::vector<std::vector<double>> conv_biases;
        std::vector<double> dense_weight;
        std::vector<double> dense_bias;
    };
    Snapshot best{model.kernels, model.conv_biases, model.dense_weight, model.dense_bias};
    double best_val_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    std::vector<std::size_t> order(split.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        order_rng.shuffle(order);
        double train_loss_sum = 0.0;
        std::size_t train_correct = 0;
        for (std::size_t start = 0; start < order.size();) {
            const int bn = static_cast<int>(std::min<std::size_t>(
                static_cast<std::size_t>(cfg.batch_size), order.size() - start));
            Tensor4 batch(bn, cfg.input_h, cfg.input_w, 1);
            std::vector<int> labels(static_cast<std::size_t>(bn));
            for (int i = 0; i < bn; ++i) {
                const LabeledImage* s = split.train[order[start + static_cast<std::size_t>(i)]];
                image_into_batch(batch, i, s->image);
                labels[static_cast<std::size_t>(i)] = s->label;
            }
            ForwardCache cc;
            LossAndGradients lg = loss_and_gradients(model, batch, labels, true, &drop_rng, &cc);
            train_loss_sum += lg.loss * bn;
            // training accuracy from the gradient pass's probabilities
            for (int i = 0; i < bn; ++i) {
                const double* p = cc.probs.data() + static_cast<std::size_t>(i) * cfg.output_classes;
                if ((p[1] > p[0] ? 1 : 0) == labels[static_cast<std::size_t>(i)]) ++train_correct;
            }
            ++step;
            for (std::size_t l = 0; l < n_layers; ++l) {
                adam_step(model.kernels[l].v, lg.grads.kernels[l].v, kernel_state[l], step, cfg.adam);
                adam_step(model.conv_biases[l], lg.grads.conv_biases[l], bias_state[l], step,
                          cfg.adam);
            }
            adam_step(model.dense_weight, lg.grads.dense_weight, dense_w_state, step, cfg.adam);
            adam_step(model.dense_bias, lg.grads.dense_bias, dense_b_state, step, cfg.adam);
            start += static_cast<std::size_t>(bn);
        }

        EvalResult val = evaluate(model, split.validation);
        WcCnnModel::EpochStats stats;
        stats.train_loss = order.empty() ? 0.0 : train_loss_sum / static_cast<double>(order.size());
        stats.train_acc =
            order.empty() ? 0.0 : static_cast<double>(train_correct) / static_cast<double>(order.size());
        stats.val_loss = val.loss;
        stats.val_acc = val.accuracy;
        model.history.push_back(stats);

        if (val.loss < best_val_loss) {
            best_val_loss = val.loss;
            best = Snapshot{model.kernels, model.conv_biases, model.dense_weight, model.dense_bias};
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= cfg.early_stop_patience) break;
        }
    }

    model.kernels = std::move(best.kernels);
    model.conv_biases = std::move(best.conv_biases);
    model.dense_weight = std::move(best.dense_weight);
    model.dense_bias = std::move(best.dense_bias);
    return model;
}

/// Validation accuracy of the epoch whose parameters the model carries.
/// Training snapshots at strict loss improvement, so that is the first
/// global minimum of the validation loss.
inline double best_val_accuracy(const WcCnnModel& model) {
    if (model.history.empty()) throw domain_error("model has no training history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < model.history.size(); ++i)
        if (model.history[i].val_loss < model.history[best].val_loss) best = i;
    return model.history[best].val_acc;
}

struct WcCnnPrediction {
    int label = kLabelNormal; // 0 abnormal, 1 normal
    double probability = 0.5; // of the predicted label
    double p_abnormal = 0.5;
    double p_normal = 0.5;
};

/// Inference on one image (any size; resampled to the config input).
/// Deterministic: dropout never runs outside training.
inline WcCnnPrediction predict(const WcCnnModel& model, const GrayImage& image) {
    const WcCnnConfig& cfg = model.config;
    Tensor4 batch(1, cfg.input_h, cfg.input_w, 1);
    image_into_batch(batch, 0, image);
    ForwardCache cc;
    forward(model, batch, false, nullptr, &cc);
    WcCnnPrediction out;
    out.p_abnormal = cc.probs[0];
    out.p_normal = cc.probs[1];
    out.label = out.p_normal > out.p_abnormal ? kLabelNormal : kLabelAbnormal;
    out.probability = out.label == kLabelNormal ? out.p_normal : out.p_abnormal;
    return out;
}

// ---------------------------------------------------------------------------
// Versioned binary checkpoint: config, parameters, history. Bit-exact
// round trip.
// ---------------------------------------------------------------------------

inline std::string wccnn_to_bytes(const WcCnnModel& model) {
    const WcCnnConfig& cfg = model.config;
    std::string out = "SGWCNN01";
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.input_w));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.input_h));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.conv_kernels.size()));
    for (int k : cfg.conv_kernels) detail::put_u32(out, static_cast<std::uint32_t>(k));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.conv_filters));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.pools_after));
    detail::put_f64(out, cfg.dropout_rate);
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.output_classes));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.batch_size));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.max_epochs));
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.early_stop_patience));
    detail::put_f64(out, cfg.adam.lr);
    detail::put_f64(out, cfg.adam.beta1);
    detail::put_f64(out, cfg.adam.beta2);
    detail::put_f64(out, cfg.adam.eps);
    detail::put_u64(out, cfg.seed);
    for (std::size_t l = 0; l < model.kernels.size(); ++l) {
        const ConvKernel& k = model.kernels[l];
        detail::put_u32(out, static_cast<std::uint32_t>(k.kh));
        detail::put_u32(out, static_cast<std::uint32_t>(k.kw));
        detail::put_u32(out, static_cast<std::uint32_t>(k.cin));
        detail::put_u32(out, static_cast<std::uint32_t>(k.cout));
        for (double v : k.v) detail::put_f64(out, v);
        for (double v : model.conv_biases[l]) detail::put_f64(out, v);
    }
    detail::put_u64(out, model.dense_weight.size());
    for (double v : model.dense_weight) detail::put_f64(out, v);
    for (double v : model.dense_bias) detail::put_f64(out, v);
    detail::put_u64(out, model.history.size());
    for (const auto& h : model.history) {
        detail::put_f64(out, h.train_loss);
        detail::put_f64(out, h.train_acc);
        detail::put_f64(out, h.val_loss);
        detail::put_f64(out, h.val_acc);
    }
    return out;
}

inline WcCnnModel wccnn_from_bytes(const std::string& bytes) {
    if (bytes.size() < 8 || bytes.compare(0, 8, "SGWCNN01") != 0)
        throw format_error("wccnn model: bad magic (expected SGWCNN01)");
    detail::ByteReader r{bytes, 8};
    WcCnnModel model;
    WcCnnConfig& cfg = model.config;
    cfg.input_w = static_cast<int>(r.u32());
    cfg.input_h = static_cast<int>(r.u32());
    const std::uint32_t n_layers = r.u32();
    cfg.conv_kernels.clear();
    for (std::uint32_t i = 0; i < n_layers; ++i) cfg.conv_kernels.push_back(static_cast<int>(r.u32()));
    cfg.conv_filters = static_cast<int>(r.u32());
    cfg.pools_after = static_cast<int>(r.u32());
    cfg.dropout_rate = r.f64();
    cfg.output_classes = static_cast<int>(r.u32());
    cfg.batch_size = static_cast<int>(r.u32());
    cfg.max_epochs = static_cast<int>(r.u32());
    cfg.early_stop_patience = static_cast<int>(r.u32());
    cfg.adam.lr = r.f64();
    cfg.adam.beta1 = r.f64();
    cfg.adam.beta2 = r.f64();
    cfg.adam.eps = r.f64();
    cfg.seed = r.u64();
    cfg.validate();
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const int kh = static_cast<int>(r.u32());
        const int kw = static_cast<int>(r.u32());
        const int cin = static_cast<int>(r.u32());
        const int cout = static_cast<int>(r.u32());
        ConvKernel k(kh, kw, cin, cout);
        for (auto& v : k.v) v = r.f64();
        model.kernels.push_back(std::move(k));
        std::vector<double> bias(static_cast<std::size_t>(cout));
        for (auto& v : bias) v = r.f64();
        model.conv_biases.push_back(std::move(bias));
    }
    const std::uint64_t dw = r.u64();
    model.dense_weight.resize(dw);
    for (auto& v : model.dense_weight) v = r.f64();
    model.dense_bias.resize(static_cast<std::size_t>(cfg.output_classes));
    for (auto& v : model.dense_bias) v = r.f64();
    const std::uint64_t n_hist = r.u64();
    for (std::uint64_t i = 0; i < n_hist; ++i) {
        WcCnnModel::EpochStats h;
        h.train_loss = r.f64();
        h.train_acc = r.f64();
        h.val_loss = r.f64();
        h.val_acc = r.f64();
        model.history.push_back(h);
    }
    if (r.pos != bytes.size()) throw format_error("wccnn model: trailing bytes");
    return model;
}

inline void save_wccnn(const WcCnnModel& model, const std::string& path) {
    write_file(path, wccnn_to_bytes(model));
}

inline WcCnnModel load_wccnn(const std::string& path) {
    return wccnn_from_bytes(read_file(path));
}

} // namespace sigmine
