// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "sigmine/error.hpp"
#include "sigmine/png.hpp"
#include "sigmine/rng.hpp"
#include "sigmine/wccnn.hpp"

using namespace sigmine;

namespace {

// Miniature network that still exercises every layer kind.
WcCnnConfig tiny_config() {
    WcCnnConfig cfg;
    cfg.input_w = 10;
    cfg.input_h = 8;
    cfg.conv_kernels = {3, 2};
    cfg.conv_filters = 2;
    cfg.pools_after = 1;
    cfg.dropout_rate = 0.0;
    cfg.batch_size = 2;
    cfg.max_epochs = 5;
    cfg.early_stop_patience = 2;
    cfg.seed = 1;
    return cfg;
}

Tensor4 random_batch(const WcCnnConfig& cfg, int n, std::uint64_t seed) {
    Rng rng(seed);
    Tensor4 batch(n, cfg.input_h, cfg.input_w, 1);
    for (auto& x : batch.v) x = rng.uniform();
    return batch;
}

// Vertical ink stripe on one side; trivially separable by position.
GrayImage stripe_image(int width, int height, bool left, std::uint64_t noise_seed) {
    GrayImage img = make_image(width, height, 255);
    Rng rng(noise_seed);
    const int x0 = left ? 0 : width / 2;
    const int x1 = left ? width / 2 : width;
    for (int y = 0; y < height; ++y)
        for (int x = x0; x < x1; ++x) img.set(x, y, 0);
    // a few flipped pixels so samples are not byte-identical
    for (int i = 0; i < 4; ++i) {
        const int x = static_cast<int>(rng.uniform_int(0, width - 1));
        const int y = static_cast<int>(rng.uniform_int(0, height - 1));
        img.set(x, y, static_cast<std::uint8_t>(rng.uniform_int(0, 255)));
    }
    return img;
}

std::vector<LabeledImage> stripe_data(int per_class, int width, int height) {
    std::vector<LabeledImage> data;
    for (int i = 0; i < per_class; ++i) {
        data.push_back({stripe_image(width, height, true, 100 + static_cast<std::uint64_t>(i)),
                        kLabelAbnormal});
        data.push_back({stripe_image(width, height, false, 200 + static_cast<std::uint64_t>(i)),
                        kLabelNormal});
    }
    return data;
}

void zero_dense(WcCnnModel& model) {
    for (auto& w : model.dense_weight) w = 0.0;
    for (auto& b : model.dense_bias) b = 0.0;
}

} // namespace

TEST_CASE("shape trace of the default configuration", "[wccnn]") {
    const ShapeTrace t = shape_trace(WcCnnConfig{});
    const std::vector<std::pair<int, int>> expected = {
        {200, 125}, // input
        {195, 120}, {97, 60},  // conv 6, pool
        {92, 55},   {46, 27},  // conv 6, pool
        {41, 22},   {20, 11},  // conv 6, pool
        {18, 9},    {9, 4},    // conv 3, pool
        {8, 3},                // conv 2
    };
    REQUIRE(t.stages == expected);
    CHECK(t.flatten == 8 * 3 * 128);
    CHECK(t.flatten == 3072);
    CHECK(t.classes == 2);
}

TEST_CASE("config validation", "[wccnn]") {
    CHECK_NOTHROW(WcCnnConfig{}.validate());
    CHECK_NOTHROW(tiny_config().validate());

    WcCnnConfig cfg = tiny_config();
    cfg.input_w = 0;
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.conv_kernels = {};
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.conv_kernels = {3, 0};
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.conv_kernels = {9, 9};
    CHECK_THROWS_MATCHES(cfg.validate(), domain_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("vanishes")));

    cfg = tiny_config();
    cfg.pools_after = 3;
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.dropout_rate = 1.0;
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.output_classes = 3;
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), domain_error);

    cfg = tiny_config();
    cfg.early_stop_patience = 0;
    CHECK_THROWS_AS(cfg.validate(), domain_error);
}

TEST_CASE("zeroed head gives uniform probabilities and ln 2 loss", "[wccnn]") {
    WcCnnModel model = init_model(tiny_config());
    zero_dense(model);
    Tensor4 batch = random_batch(model.config, 3, 5);
    ForwardCache cc;
    forward(model, batch, false, nullptr, &cc);
    for (double p : cc.probs) CHECK(p == Catch::Approx(0.5).margin(1e-12));
    const double loss = compute_loss(model, batch, {0, 1, 0});
    CHECK(loss == Catch::Approx(std::log(2.0)).margin(1e-9));
}

TEST_CASE("forward validation", "[wccnn]") {
    WcCnnModel model = init_model(tiny_config());
    CHECK_THROWS_AS(forward(model, Tensor4(1, 4, 4, 1), false), domain_error);

    WcCnnConfig cfg = tiny_config();
    cfg.dropout_rate = 0.5;
    WcCnnModel dropped = init_model(cfg);
    Tensor4 batch = random_batch(cfg, 1, 2);
    CHECK_THROWS_AS(forward(dropped, batch, true, nullptr), domain_error);
    CHECK_NOTHROW(forward(dropped, batch, false, nullptr)); // inference skips dropout
}

TEST_CASE("analytic gradients match finite differences", "[wccnn]") {
    WcCnnConfig cfg = tiny_config();
    WcCnnModel model = init_model(cfg);
    Tensor4 batch = random_batch(cfg, 2, 77);
    const std::vector<int> labels = {kLabelAbnormal, kLabelNormal};

    LossAndGradients lg = loss_and_gradients(model, batch, labels, false);
    CHECK(lg.loss == Catch::Approx(compute_loss(model, batch, labels)).margin(1e-12));

    const double h = 1e-5;
    const double tol = 1e-3;
    auto fd = [&](double& param) {
        const double keep = param;
        param = keep + h;
        const double up = compute_loss(model, batch, labels);
        param = keep - h;
        const double dn = compute_loss(model, batch, labels);
        param = keep;
        return (up - dn) / (2 * h);
    };

    for (std::size_t l = 0; l < model.kernels.size(); ++l) {
        for (std::size_t i = 0; i < model.kernels[l].v.size(); i += 3)
            CHECK(lg.grads.kernels[l].v[i] ==
                  Catch::Approx(fd(model.kernels[l].v[i])).margin(tol));
        for (std::size_t i = 0; i < model.conv_biases[l].size(); ++i)
            CHECK(lg.grads.conv_biases[l][i] ==
                  Catch::Approx(fd(model.conv_biases[l][i])).margin(tol));
    }
    for (std::size_t i = 0; i < model.dense_weight.size(); i += 17)
        CHECK(lg.grads.dense_weight[i] ==
              Catch::Approx(fd(model.dense_weight[i])).margin(tol));
    for (std::size_t i = 0; i < model.dense_bias.size(); ++i)
        CHECK(lg.grads.dense_bias[i] ==
              Catch::Approx(fd(model.dense_bias[i])).margin(tol));
}

TEST_CASE("dropout participates in the differentiated graph", "[wccnn]") {
    WcCnnConfig cfg = tiny_config();
    cfg.dropout_rate = 0.5;
    WcCnnModel model = init_model(cfg);
    Tensor4 batch = random_batch(cfg, 2, 9);
    const std::vector<int> labels = {0, 1};

    // Same rng seed gives the same mask, hence identical loss and gradients.
    Rng a(42), b(42), c(43);
    ForwardCache ca, cb;
    LossAndGradients la = loss_and_gradients(model, batch, labels, true, &a, &ca);
    LossAndGradients lb = loss_and_gradients(model, batch, labels, true, &b, &cb);
    CHECK(la.loss == lb.loss);
    CHECK(la.grads.dense_weight == lb.grads.dense_weight);
    CHECK(ca.drop_mask == cb.drop_mask);
    REQUIRE_FALSE(ca.drop_mask.empty());

    // A dropped feature contributes no weight gradient in its dense row.
    const int classes = cfg.output_classes;
    const int flatten = static_cast<int>(ca.flat.size()) / batch.n;
    for (int f = 0; f < flatten; ++f) {
        bool dropped_everywhere = true;
        for (int i = 0; i < batch.n; ++i)
            if (ca.drop_mask[static_cast<std::size_t>(i) * flatten + f] != 0.0)
                dropped_everywhere = false;
        if (!dropped_everywhere) continue;
        for (int o = 0; o < classes; ++o)
            CHECK(la.grads.dense_weight[static_cast<std::size_t>(f) * classes + o] == 0.0);
    }

    LossAndGradients lc = loss_and_gradients(model, batch, labels, true, &c);
    CHECK(la.loss != lc.loss); // different mask, different loss (generic data)
}

TEST_CASE("image resampling into a batch slot", "[wccnn]") {
    SECTION("exact size maps ink to 1 and background to 0") {
        GrayImage img = make_image(4, 3, 255);
        img.set(2, 1, 0);
        Tensor4 batch(1, 3, 4, 1);
        image_into_batch(batch, 0, img);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x)
                CHECK(batch.at(0, y, x, 0) ==
                      Catch::Approx(x == 2 && y == 1 ? 1.0 : 0.0).margin(1e-12));
    }

    SECTION("downsampling averages the source window") {
        GrayImage img = make_image(2, 2, 0);
        img.set(0, 0, 255);
        img.set(1, 1, 255); // half ink, half background
        Tensor4 batch(1, 1, 1, 1);
        image_into_batch(batch, 0, img);
        CHECK(batch.at(0, 0, 0, 0) == Catch::Approx(0.5).margin(1e-12));
    }

    SECTION("empty image throws") {
        Tensor4 batch(1, 2, 2, 1);
        GrayImage img;
        CHECK_THROWS_AS(image_into_batch(batch, 0, img), domain_error);
    }
}

TEST_CASE("stratified split", "[wccnn]") {
    std::vector<LabeledImage> data = stripe_data(5, 10, 8); // 5 per class
    // Grow the normal class to 10 to make the 80/20 law visible per class.
    for (int i = 0; i < 5; ++i)
        data.push_back({stripe_image(10, 8, false, 300 + static_cast<std::uint64_t>(i)),
                        kLabelNormal});

    TrainSplit split = stratified_split(data, 3);
    // abnormal: 5 -> n_val max(1, 1) = 1; normal: 10 -> n_val 2.
    REQUIRE(split.validation.size() == 3u);
    REQUIRE(split.train.size() == 12u);

    std::size_t val_abnormal = 0;
    for (const LabeledImage* s : split.validation)
        if (s->label == kLabelAbnormal) ++val_abnormal;
    CHECK(val_abnormal == 1u);

    // The two sides partition the data set exactly.
    std::set<const LabeledImage*> seen;
    for (const LabeledImage* s : split.train) seen.insert(s);
    for (const LabeledImage* s : split.validation) seen.insert(s);
    CHECK(seen.size() == data.size());

    // Deterministic in the seed.
    TrainSplit again = stratified_split(data, 3);
    CHECK(again.train == split.train);
    CHECK(again.validation == split.validation);

    SECTION("errors") {
        std::vector<LabeledImage> bad = stripe_data(2, 10, 8);
        bad[0].label = 7;
        CHECK_THROWS_AS(stratified_split(bad, 1), domain_error);

        std::vector<LabeledImage> one_class;
        one_class.push_back({stripe_image(10, 8, true, 1), kLabelAbnormal});
        one_class.push_back({stripe_image(10, 8, true, 2), kLabelAbnormal});
        CHECK_THROWS_AS(stratified_split(one_class, 1), domain_error);

        std::vector<LabeledImage> thin = stripe_data(1, 10, 8); // 1 per class
        thin.push_back({stripe_image(10, 8, false, 9), kLabelNormal});
        CHECK_THROWS_AS(stratified_split(thin, 1), domain_error);
    }
}

TEST_CASE("training separates stripe classes", "[wccnn]") {
    WcCnnConfig cfg;
    cfg.input_w = 20;
    cfg.input_h = 12;
    cfg.conv_kernels = {3, 2};
    cfg.conv_filters = 4;
    cfg.pools_after = 1;
    cfg.dropout_rate = 0.25;
    cfg.batch_size = 4;
    cfg.max_epochs = 30;
    cfg.early_stop_patience = 8;
    cfg.adam.lr = 0.01;
    cfg.seed = 13;

    std::vector<LabeledImage> data = stripe_data(10, 20, 12);
    WcCnnModel model = train(cfg, data);

    REQUIRE_FALSE(model.history.empty());
    CHECK(model.history.size() <= static_cast<std::size_t>(cfg.max_epochs));
    CHECK(best_val_accuracy(model) >= 0.8);

    // The restored snapshot classifies fresh stripes correctly.
    WcCnnPrediction left = predict(model, stripe_image(20, 12, true, 999));
    WcCnnPrediction right = predict(model, stripe_image(20, 12, false, 998));
    CHECK(left.label == kLabelAbnormal);
    CHECK(right.label == kLabelNormal);
    CHECK(left.p_abnormal + left.p_normal == Catch::Approx(1.0).margin(1e-9));
    CHECK(left.probability == std::max(left.p_abnormal, left.p_normal));

    // Inference is deterministic.
    WcCnnPrediction rerun = predict(model, stripe_image(20, 12, true, 999));
    CHECK(rerun.p_abnormal == left.p_abnormal);
}

TEST_CASE("early stopping halts stale training", "[wccnn]") {
    WcCnnConfig cfg = tiny_config();
    cfg.max_epochs = 50;
    cfg.early_stop_patience = 2;
    cfg.adam.lr = 0.0; // parameters frozen: epoch 1 sets the best, rest are stale
    std::vector<LabeledImage> data = stripe_data(3, 10, 8);
    WcCnnModel model = train(cfg, data);
    REQUIRE(model.history.size() == 3u); // best epoch + patience stale epochs
    CHECK(model.history[1].val_loss == model.history[0].val_loss);
}

TEST_CASE("training is deterministic in the seed", "[wccnn]") {
    WcCnnConfig cfg = tiny_config();
    cfg.max_epochs = 3;
    cfg.early_stop_patience = 3;
    cfg.adam.lr = 0.005;
    std::vector<LabeledImage> data = stripe_data(3, 10, 8);

    WcCnnModel a = train(cfg, data);
    WcCnnModel b = train(cfg, data);
    CHECK(a.dense_weight == b.dense_weight);
    CHECK(a.kernels[0].v == b.kernels[0].v);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_loss == b.history[i].train_loss);
        CHECK(a.history[i].val_loss == b.history[i].val_loss);
    }

    cfg.seed = 2;
    WcCnnModel c = train(cfg, data);
    CHECK(c.dense_weight != a.dense_weight);
}

TEST_CASE("history accessor", "[wccnn]") {
    WcCnnModel fresh = init_model(tiny_config());
    CHECK_THROWS_AS(best_val_accuracy(fresh), domain_error);

    WcCnnModel model = fresh;
    WcCnnModel::EpochStats e1;
    e1.val_loss = 0.9;
    e1.val_acc = 0.5;
    WcCnnModel::EpochStats e2;
    e2.val_loss = 0.4;
    e2.val_acc = 0.75;
    WcCnnModel::EpochStats e3;
    e3.val_loss = 0.4; // tie: the earlier strict minimum wins
    e3.val_acc = 1.0;
    model.history = {e1, e2, e3};
    CHECK(best_val_accuracy(model) == 0.75);
}

TEST_CASE("checkpoint round trip", "[wccnn]") {
    WcCnnConfig cfg = tiny_config();
    cfg.max_epochs = 2;
    cfg.early_stop_patience = 2;
    cfg.adam.lr = 0.005;
    std::vector<LabeledImage> data = stripe_data(3, 10, 8);
    WcCnnModel model = train(cfg, data);

    const std::string bytes = wccnn_to_bytes(model);
    WcCnnModel back = wccnn_from_bytes(bytes);

    CHECK(back.config.input_w == cfg.input_w);
    CHECK(back.config.conv_kernels == cfg.conv_kernels);
    CHECK(back.config.adam.lr == cfg.adam.lr);
    CHECK(back.config.seed == cfg.seed);
    REQUIRE(back.kernels.size() == model.kernels.size());
    for (std::size_t l = 0; l < model.kernels.size(); ++l) {
        CHECK(back.kernels[l].v == model.kernels[l].v);
        CHECK(back.conv_biases[l] == model.conv_biases[l]);
    }
    CHECK(back.dense_weight == model.dense_weight);
    CHECK(back.dense_bias == model.dense_bias);
    REQUIRE(back.history.size() == model.history.size());
    CHECK(back.history.back().val_loss == model.history.back().val_loss);

    GrayImage probe = stripe_image(10, 8, true, 55);
    CHECK(predict(back, probe).p_abnormal == predict(model, probe).p_abnormal);

    SECTION("file round trip") {
        const std::string path = "wccnn_roundtrip.bin";
        save_wccnn(model, path);
        WcCnnModel loaded = load_wccnn(path);
        CHECK(wccnn_to_bytes(loaded) == bytes);
        std::remove(path.c_str());
    }

    SECTION("malformed input") {
        CHECK_THROWS_AS(wccnn_from_bytes("notamodel"), format_error);
        CHECK_THROWS_AS(wccnn_from_bytes(bytes.substr(0, bytes.size() / 2)), format_error);
        CHECK_THROWS_AS(wccnn_from_bytes(bytes + "x"), format_error);
    }
}
