#include <cmath>
#include <fstream>

#include <doctest.h>

#include "attrikit/attributor.hpp"
#include "attrikit/errors.hpp"
#include "attrikit/prng.hpp"
#include "helpers.hpp"

using namespace attrikit;
using testutil::TempDir;

namespace {

Embedding vec(std::vector<double> values) {
    Embedding e;
    e.data = std::move(values);
    return e;
}

void zero_params(AttributorHead& h) {
    for (auto& layer : h.layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

double head_loss(const AttributorHead& h, const Embedding& e, int label) {
    return softmax_ce(forward(h, e), label).first;
}

// Central finite differences over every parameter of the head.
double max_grad_rel_error(AttributorHead h, const Embedding& e, int label, double step) {
    ParamGrads grads = zero_grads(h);
    auto [loss, dlogits] = softmax_ce(forward(h, e), label);
    (void)loss;
    accumulate_grads(h, e, dlogits, grads);

    double worst = 0.0;
    auto probe = [&](std::vector<double>& theta, const std::vector<double>& analytic) {
        for (size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + step;
            const double up = head_loss(h, e, label);
            theta[i] = saved - step;
            const double down = head_loss(h, e, label);
            theta[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double rel = std::abs(analytic[i] - numeric) /
                               std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
            worst = std::max(worst, rel);
        }
    };
    for (size_t l = 0; l < h.layers.size(); ++l) {
        probe(h.layers[l].w, grads.gw[l]);
        probe(h.layers[l].b, grads.gb[l]);
    }
    return worst;
}

std::vector<TrainSample> gaussian_blobs(int classes, int dim, int per_class, double separation,
                                        uint64_t seed) {
    GaussianSampler centers(hash_combine(seed, 1));
    std::vector<std::vector<double>> mu(static_cast<size_t>(classes),
                                        std::vector<double>(static_cast<size_t>(dim)));
    for (auto& m : mu)
        for (double& v : m) v = separation * centers.next();
    GaussianSampler noise(hash_combine(seed, 2));
    std::vector<TrainSample> samples;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            TrainSample s;
            s.label = c;
            s.input.data.resize(static_cast<size_t>(dim));
            for (int d = 0; d < dim; ++d)
                s.input.data[static_cast<size_t>(d)] = mu[static_cast<size_t>(c)][static_cast<size_t>(d)] + noise.next();
            samples.push_back(std::move(s));
        }
    return samples;
}

TrainConfig quick_config(int epochs) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.warmup_epochs = 5;
    cfg.lr = 0.01;
    cfg.min_lr = 1e-4;
    cfg.shuffle_seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("init_head: shapes, determinism, xavier bound") {
    HeadConfig lin;
    lin.kind = HeadKind::linear;
    lin.input_dim = 8;
    lin.num_classes = 3;
    lin.init_seed = 2;
    const AttributorHead h = init_head(lin);
    REQUIRE(h.layers.size() == 1);
    CHECK(h.layers[0].w.size() == 24u);
    CHECK(h.layers[0].b.size() == 3u);
    for (double b : h.layers[0].b) CHECK(b == 0.0);
    const double bound = std::sqrt(6.0 / (8 + 3));
    for (double w : h.layers[0].w) CHECK(std::abs(w) <= bound);

    const AttributorHead again = init_head(lin);
    CHECK(again.layers[0].w == h.layers[0].w);

    HeadConfig mlp;
    mlp.kind = HeadKind::mlp;
    mlp.input_dim = 8;
    mlp.num_classes = 3;
    mlp.hidden_dim = 256;
    const AttributorHead m = init_head(mlp);
    REQUIRE(m.layers.size() == 3);
    CHECK(m.layers[0].w.size() == 256u * 8u);
    CHECK(m.layers[1].w.size() == 256u * 256u);
    CHECK(m.layers[2].w.size() == 3u * 256u);

    HeadConfig bad = lin;
    bad.num_classes = 1;
    CHECK_THROWS_AS(init_head(bad), ValidationError);
}

TEST_CASE("forward: zero head, hand-set linear, mlp closed form") {
    HeadConfig lin;
    lin.input_dim = 2;
    lin.num_classes = 2;
    AttributorHead h = init_head(lin);
    zero_params(h);
    CHECK(forward(h, vec({0.3, 0.7})) == std::vector<double>{0.0, 0.0});

    h.layers[0].w = {1.5, -2.0, 0.25, 4.0};  // rows (1.5,-2) and (0.25,4)
    h.layers[0].b = {0.1, -0.3};
    const auto logits = forward(h, vec({1.0, 0.0}));
    CHECK(logits[0] == doctest::Approx(1.5 + 0.1).epsilon(1e-15));
    CHECK(logits[1] == doctest::Approx(0.25 - 0.3).epsilon(1e-15));

    HeadConfig mc;
    mc.kind = HeadKind::mlp;
    mc.input_dim = 4;
    mc.num_classes = 3;
    mc.hidden_dim = 5;
    mc.init_seed = 7;
    AttributorHead m = init_head(mc);
    // zero both hidden layers: every hidden activation becomes sigmoid(0)=0.5
    std::fill(m.layers[0].w.begin(), m.layers[0].w.end(), 0.0);
    std::fill(m.layers[1].w.begin(), m.layers[1].w.end(), 0.0);
    const auto out = forward(m, vec({0.2, -0.4, 0.6, 0.9}));
    for (int o = 0; o < 3; ++o) {
        double expect = m.layers[2].b[static_cast<size_t>(o)];
        for (int i = 0; i < 5; ++i) expect += 0.5 * m.layers[2].w[static_cast<size_t>(o) * 5 + i];
        CHECK(out[static_cast<size_t>(o)] == doctest::Approx(expect).epsilon(1e-12));
    }

    CHECK_THROWS_AS(forward(h, vec({1.0, 2.0, 3.0})), ValidationError);
}

TEST_CASE("softmax_ce: uniform logits, grad sum, finite differences") {
    const auto [loss, grad] = softmax_ce({0.7, 0.7, 0.7, 0.7, 0.7}, 2);
    CHECK(loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));

    SplitMix64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> logits(5);
        for (double& v : logits) v = 4.0 * rng.next_signed();
        const int label = static_cast<int>(rng.next_below(5));
        const auto [l, g] = softmax_ce(logits, label);
        (void)l;
        double sum = 0.0;
        for (double v : g) sum += v;
        CHECK(std::abs(sum) <= 1e-9);

        const double h = 1e-6;
        for (size_t i = 0; i < logits.size(); ++i) {
            auto up = logits, down = logits;
            up[i] += h;
            down[i] -= h;
            const double numeric =
                (softmax_ce(up, label).first - softmax_ce(down, label).first) / (2.0 * h);
            CHECK(std::abs(g[i] - numeric) <= 1e-5);
        }
    }

    CHECK_THROWS_AS(softmax_ce({1.0, 2.0}, 2), ValidationError);
    CHECK_THROWS_AS(softmax_ce({1.0, 2.0}, -1), ValidationError);
}

TEST_CASE("head gradients match central finite differences") {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 6; ++trial) {
        HeadConfig cfg;
        cfg.kind = trial % 2 == 0 ? HeadKind::linear : HeadKind::mlp;
        cfg.input_dim = 6;
        cfg.num_classes = 3;
        cfg.hidden_dim = 5;
        cfg.init_seed = 100 + trial;
        AttributorHead h = init_head(cfg);
        Embedding e;
        e.data.resize(6);
        for (double& v : e.data) v = rng.next_signed();
        const int label = static_cast<int>(rng.next_below(3));
        CHECK(max_grad_rel_error(h, e, label, 1e-5) <= 1e-4);
    }
}

TEST_CASE("adamw_step: hand-derived scalar updates") {
    HeadConfig cfg;
    cfg.input_dim = 1;
    cfg.num_classes = 2;
    TrainConfig tc;

    SUBCASE("first Adam step, no decay") {
        AttributorHead h = init_head(cfg);
        zero_params(h);
        h.layers[0].w[0] = 1.0;
        ParamGrads g = zero_grads(h);
        g.gw[0][0] = 1.0;
        tc.weight_decay = 0.0;
        adamw_step(h, g, 0.1, tc);
        // m_hat = v_hat = 1 after bias correction at step 1
        const double expect = 1.0 - 0.1 * (1.0 / (1.0 + tc.eps));
        CHECK(std::abs(h.layers[0].w[0] - expect) <= 1e-9);
        CHECK(h.layers[0].w[0] == doctest::Approx(0.9).epsilon(1e-3));
    }

    SUBCASE("pure decay with zero gradient") {
        AttributorHead h = init_head(cfg);
        zero_params(h);
        h.layers[0].w[0] = 1.0;
        h.layers[0].b[0] = 0.75;
        ParamGrads g = zero_grads(h);
        tc.weight_decay = 0.05;
        adamw_step(h, g, 0.1, tc);
        CHECK(h.layers[0].w[0] == 1.0 * (1.0 - 0.005));
        CHECK(h.layers[0].b[0] == 0.75);  // biases are not decayed
    }

    SUBCASE("zero gradient, zero decay leaves parameters untouched") {
        AttributorHead h = init_head(cfg);
        const auto before = h.layers;
        ParamGrads g = zero_grads(h);
        tc.weight_decay = 0.0;
        adamw_step(h, g, 0.1, tc);
        CHECK(h.layers[0].w == before[0].w);
        CHECK(h.layers[0].b == before[0].b);
    }

    SUBCASE("weights strictly shrink under decay with zero gradients") {
        AttributorHead h = init_head(cfg);
        const auto b0 = h.layers[0].b;
        tc.weight_decay = 0.05;
        std::vector<double> prev_abs;
        for (double w : h.layers[0].w) prev_abs.push_back(std::abs(w));
        for (int step = 0; step < 5; ++step) {
            adamw_step(h, zero_grads(h), 0.1, tc);
            for (size_t i = 0; i < h.layers[0].w.size(); ++i) {
                CHECK(std::abs(h.layers[0].w[i]) < prev_abs[i]);
                prev_abs[i] = std::abs(h.layers[0].w[i]);
            }
        }
        CHECK(h.layers[0].b == b0);
    }

    SUBCASE("gradient shape mismatch is rejected") {
        AttributorHead h = init_head(cfg);
        HeadConfig other = cfg;
        other.input_dim = 3;
        ParamGrads wrong = zero_grads(init_head(other));
        CHECK_THROWS_AS(adamw_step(h, wrong, 0.1, tc), ValidationError);
    }
}

TEST_CASE("lr_at reproduces the recipe schedule") {
    TrainConfig cfg;
    cfg.epochs = 2000;
    cfg.warmup_epochs = 20;
    cfg.lr = 2e-4;
    cfg.min_lr = 1e-5;

    CHECK(lr_at(cfg, 19) == 2e-4);                          // end of warmup
    CHECK(lr_at(cfg, 0) == doctest::Approx(2e-4 / 20.0));   // first epoch
    CHECK(lr_at(cfg, 1999) == 1e-5);                        // final epoch, exact
    CHECK(lr_at(cfg, 20) == doctest::Approx(2e-4).epsilon(1e-12));  // anneal start == peak

    // integer midpoint of the annealing phase
    TrainConfig mid;
    mid.epochs = 101;
    mid.warmup_epochs = 20;
    mid.lr = 2e-4;
    mid.min_lr = 1e-5;
    CHECK(lr_at(mid, 60) == doctest::Approx((2e-4 + 1e-5) / 2.0).epsilon(1e-12));

    // monotone non-increasing after warmup
    double prev = lr_at(cfg, cfg.warmup_epochs);
    for (int e = cfg.warmup_epochs + 1; e < cfg.epochs; ++e) {
        const double cur = lr_at(cfg, e);
        CHECK(cur <= prev);
        prev = cur;
    }

    CHECK_THROWS_AS(lr_at(cfg, -1), ValidationError);
    CHECK_THROWS_AS(lr_at(cfg, 2000), ValidationError);
    TrainConfig bad = cfg;
    bad.min_lr = 1e-3;
    CHECK_THROWS_AS(lr_at(bad, 5), ValidationError);
    bad = cfg;
    bad.warmup_epochs = 2000;
    CHECK_THROWS_AS(lr_at(bad, 5), ValidationError);
}

TEST_CASE("train reaches 99% on separable gaussian blobs and is deterministic") {
    const auto samples = gaussian_blobs(3, 8, 60, 10.0, 77);
    HeadConfig cfg;
    cfg.input_dim = 8;
    cfg.num_classes = 3;
    cfg.init_seed = 9;

    const TrainConfig tc = quick_config(200);
    const TrainResult r1 = train(init_head(cfg), samples, samples, tc);
    double best_train_acc = 0.0;
    for (const auto& rec : r1.history.epochs) best_train_acc = std::max(best_train_acc, rec.train_acc);
    CHECK(best_train_acc >= 0.99);
    CHECK(accuracy_on(r1.head, samples) >= 0.99);

    const TrainResult r2 = train(init_head(cfg), samples, samples, tc);
    REQUIRE(r1.history.epochs.size() == r2.history.epochs.size());
    for (size_t i = 0; i < r1.history.epochs.size(); ++i) {
        CHECK(r1.history.epochs[i].lr == r2.history.epochs[i].lr);
        CHECK(r1.history.epochs[i].train_loss == r2.history.epochs[i].train_loss);
        CHECK(r1.history.epochs[i].train_acc == r2.history.epochs[i].train_acc);
        CHECK(r1.history.epochs[i].val_acc == r2.history.epochs[i].val_acc);
    }
    CHECK(r1.history.best_epoch == r2.history.best_epoch);
    for (size_t l = 0; l < r1.head.layers.size(); ++l) {
        CHECK(r1.head.layers[l].w == r2.head.layers[l].w);
        CHECK(r1.head.layers[l].b == r2.head.layers[l].b);
    }
    // best_epoch bookkeeping: earliest epoch achieving the max val accuracy
    double best_val = -1.0;
    int expect_best = 0;
    for (const auto& rec : r1.history.epochs)
        if (rec.val_acc > best_val) {
            best_val = rec.val_acc;
            expect_best = rec.epoch;
        }
    CHECK(r1.history.best_epoch == expect_best);
}

TEST_CASE("train rejects empty sets and reports divergence with the epoch") {
    HeadConfig cfg;
    cfg.input_dim = 2;
    cfg.num_classes = 2;
    const auto data = gaussian_blobs(2, 2, 4, 5.0, 3);
    TrainConfig tc = quick_config(10);
    CHECK_THROWS_AS(train(init_head(cfg), {}, data, tc), ValidationError);
    CHECK_THROWS_AS(train(init_head(cfg), data, {}, tc), ValidationError);

    TrainConfig wild = tc;
    wild.lr = 1e200;
    wild.min_lr = 1.0;
    wild.warmup_epochs = 0;
    wild.batch_size = 1;
    CHECK_THROWS_WITH_AS(train(init_head(cfg), data, data, wild), doctest::Contains("epoch"),
                         DivergenceError);
}

TEST_CASE("predict: tie break, shift invariance, closed-form softmax") {
    HeadConfig cfg;
    cfg.input_dim = 1;
    cfg.num_classes = 3;
    AttributorHead h = init_head(cfg);
    h.class_names = {"alpha", "beta", "gamma"};
    zero_params(h);

    const auto [name, probs] = predict(h, vec({1.0}));
    CHECK(name == "alpha");  // all logits equal, lowest index wins
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));

    h.layers[0].w = {2.0, 1.0, 0.0};
    const auto [n1, p1] = predict(h, vec({1.0}));
    AttributorHead shifted = h;
    for (double& b : shifted.layers[0].b) b += 5.0;
    const auto [n2, p2] = predict(shifted, vec({1.0}));
    CHECK(n1 == n2);
    for (size_t i = 0; i < p1.size(); ++i) CHECK(std::abs(p1[i] - p2[i]) <= 1e-9);

    const double z = std::exp(2.0) + std::exp(1.0) + std::exp(0.0);
    CHECK(std::abs(p1[0] - std::exp(2.0) / z) <= 1e-9);
    CHECK(std::abs(p1[1] - std::exp(1.0) / z) <= 1e-9);
    CHECK(std::abs(p1[2] - std::exp(0.0) / z) <= 1e-9);
    CHECK(n1 == "alpha");
}

TEST_CASE("checkpoint round-trip and corruption") {
    TempDir dir("head");
    const auto data = gaussian_blobs(3, 4, 10, 6.0, 5);
    HeadConfig cfg;
    cfg.kind = HeadKind::mlp;
    cfg.input_dim = 4;
    cfg.num_classes = 3;
    cfg.hidden_dim = 6;
    cfg.init_seed = 21;
    AttributorHead h = train(init_head(cfg), data, data, quick_config(20)).head;
    h.class_names = {"a", "b", "c"};

    const std::string path = dir.file("head.ahd");
    save_head(h, path);
    const AttributorHead back = load_head(path);
    CHECK(back.config == h.config);
    CHECK(back.class_names == h.class_names);
    // parameters survive exactly at the f32 precision of the format
    for (size_t l = 0; l < h.layers.size(); ++l) {
        for (size_t i = 0; i < h.layers[l].w.size(); ++i)
            CHECK(back.layers[l].w[i] == static_cast<double>(static_cast<float>(h.layers[l].w[i])));
        for (size_t i = 0; i < h.layers[l].b.size(); ++i)
            CHECK(back.layers[l].b[i] == static_cast<double>(static_cast<float>(h.layers[l].b[i])));
    }

    // file-level round-trip is lossless: save(load(f)) == f byte for byte
    save_head(back, dir.file("head2.ahd"));
    CHECK(testutil::slurp(path) == testutil::slurp(dir.file("head2.ahd")));

    // loaded head predicts like the in-memory one
    const Embedding probe = data[7].input;
    const auto [n1, p1] = predict(h, probe);
    const auto [n2, p2] = predict(back, probe);
    CHECK(n1 == n2);
    for (size_t i = 0; i < p1.size(); ++i) CHECK(std::abs(p1[i] - p2[i]) <= 1e-6);

    auto bytes = testutil::slurp(path);
    {
        std::vector<uint8_t> corrupt = bytes;
        corrupt[corrupt.size() / 3] ^= 0x40;
        FILE* f = fopen(dir.file("corrupt.ahd").c_str(), "wb");
        fwrite(corrupt.data(), 1, corrupt.size(), f);
        fclose(f);
        CHECK_THROWS_AS(load_head(dir.file("corrupt.ahd")), FormatError);
    }
    {
        std::vector<uint8_t> truncated(bytes.begin(), bytes.begin() + 25);
        FILE* f = fopen(dir.file("trunc.ahd").c_str(), "wb");
        fwrite(truncated.data(), 1, truncated.size(), f);
        fclose(f);
        CHECK_THROWS_AS(load_head(dir.file("trunc.ahd")), FormatError);
    }
}

TEST_CASE("history CSV marks the best epoch") {
    TempDir dir("history");
    const auto data = gaussian_blobs(2, 3, 8, 5.0, 1);
    HeadConfig cfg;
    cfg.input_dim = 3;
    cfg.num_classes = 2;
    const TrainResult r = train(init_head(cfg), data, data, quick_config(8));
    save_history_csv(r.history, dir.file("h.csv"));
    std::ifstream in(dir.file("h.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,lr,train_loss,train_acc,val_acc,best");
    int rows = 0, best_marks = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++best_marks;
    }
    CHECK(rows == 8);
    CHECK(best_marks == 1);
}
