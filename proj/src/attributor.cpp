#include "attrikit/attributor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "attrikit/binio.hpp"
#include "attrikit/errors.hpp"
#include "attrikit/prng.hpp"

namespace attrikit {

static constexpr double kPi = 3.14159265358979323846;

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
    if (cfg.epochs < 1) throw ValidationError("train config: epochs must be >= 1");
    if (!(cfg.min_lr > 0.0 && cfg.min_lr <= cfg.lr))
        throw ValidationError("train config: need 0 < min_lr <= lr");
    if (cfg.warmup_epochs < 0 || cfg.warmup_epochs >= cfg.epochs)
        throw ValidationError("train config: need warmup_epochs < epochs");
}

static std::vector<std::pair<int, int>> layer_shapes(const HeadConfig& cfg) {
    if (cfg.kind == HeadKind::linear) return {{cfg.input_dim, cfg.num_classes}};
    return {{cfg.input_dim, cfg.hidden_dim},
            {cfg.hidden_dim, cfg.hidden_dim},
            {cfg.hidden_dim, cfg.num_classes}};
}

AttributorHead init_head(const HeadConfig& cfg) {
    if (cfg.input_dim < 1) throw ValidationError("head config: input_dim must be >= 1");
    if (cfg.num_classes < 2) throw ValidationError("head config: num_classes must be >= 2");
    if (cfg.kind == HeadKind::mlp && cfg.hidden_dim < 1)
        throw ValidationError("head config: hidden_dim must be >= 1");

    AttributorHead h;
    h.config = cfg;
    SplitMix64 rng(cfg.init_seed);
    for (auto [in, out] : layer_shapes(cfg)) {
        DenseLayer layer;
        layer.in = in;
        layer.out = out;
        layer.w.resize(static_cast<size_t>(in) * out);
        layer.b.assign(static_cast<size_t>(out), 0.0);
        const double a = std::sqrt(6.0 / (in + out));
        for (double& v : layer.w) v = rng.next_signed() * a;
        h.layers.push_back(std::move(layer));
        h.opt.mw.emplace_back(static_cast<size_t>(in) * out, 0.0);
        h.opt.vw.emplace_back(static_cast<size_t>(in) * out, 0.0);
        h.opt.mb.emplace_back(static_cast<size_t>(out), 0.0);
        h.opt.vb.emplace_back(static_cast<size_t>(out), 0.0);
    }
    return h;
}

static void affine(const DenseLayer& l, const std::vector<double>& x, std::vector<double>& y) {
    y.assign(static_cast<size_t>(l.out), 0.0);
    for (int o = 0; o < l.out; ++o) {
        const double* row = &l.w[static_cast<size_t>(o) * l.in];
        double acc = l.b[static_cast<size_t>(o)];
        for (int i = 0; i < l.in; ++i) acc += row[i] * x[static_cast<size_t>(i)];
        y[static_cast<size_t>(o)] = acc;
    }
}

static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Forward pass keeping post-activation values per layer for backprop.
static std::vector<double> forward_cached(const AttributorHead& h, const std::vector<double>& x,
                                          std::vector<std::vector<double>>* activations) {
    std::vector<double> cur = x;
    std::vector<double> next;
    const size_t last = h.layers.size() - 1;
    for (size_t l = 0; l < h.layers.size(); ++l) {
        affine(h.layers[l], cur, next);
        if (l != last)
            for (double& v : next) v = sigmoid(v);
        if (activations && l != last) activations->push_back(next);
        cur = next;
    }
    return cur;
}

std::vector<double> forward(const AttributorHead& h, const Embedding& e) {
    if (static_cast<int>(e.dim()) != h.config.input_dim)
        throw ValidationError("forward: embedding dim " + std::to_string(e.dim()) +
                              " != head input_dim " + std::to_string(h.config.input_dim));
    return forward_cached(h, e.data, nullptr);
}

std::pair<double, std::vector<double>> softmax_ce(const std::vector<double>& logits,
                                                  int true_class) {
    if (true_class < 0 || true_class >= static_cast<int>(logits.size()))
        throw ValidationError("softmax_ce: class index " + std::to_string(true_class) +
                              " out of range");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    std::vector<double> probs(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    const double loss = std::log(sum) - (logits[static_cast<size_t>(true_class)] - m);
    std::vector<double> grad = probs;
    grad[static_cast<size_t>(true_class)] -= 1.0;
    return {loss, std::move(grad)};
}

ParamGrads zero_grads(const AttributorHead& h) {
    ParamGrads g;
    for (const auto& l : h.layers) {
        g.gw.emplace_back(l.w.size(), 0.0);
        g.gb.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

void accumulate_grads(const AttributorHead& h, const Embedding& e,
                      const std::vector<double>& dlogits, ParamGrads& grads) {
    if (static_cast<int>(e.dim()) != h.config.input_dim)
        throw ValidationError("accumulate_grads: embedding dim mismatch");
    std::vector<std::vector<double>> activations;
    forward_cached(h, e.data, &activations);

    std::vector<double> delta = dlogits;
    for (size_t l = h.layers.size(); l-- > 0;) {
        const DenseLayer& layer = h.layers[l];
        const std::vector<double>& input = l == 0 ? e.data : activations[l - 1];
        auto& gw = grads.gw[l];
        auto& gb = grads.gb[l];
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[static_cast<size_t>(o)];
            gb[static_cast<size_t>(o)] += d;
            double* grow = &gw[static_cast<size_t>(o) * layer.in];
            for (int i = 0; i < layer.in; ++i) grow[i] += d * input[static_cast<size_t>(i)];
        }
        if (l == 0) break;
        std::vector<double> prev(static_cast<size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[static_cast<size_t>(o)];
            const double* row = &layer.w[static_cast<size_t>(o) * layer.in];
            for (int i = 0; i < layer.in; ++i) prev[static_cast<size_t>(i)] += d * row[i];
        }
        const std::vector<double>& act = activations[l - 1];
        for (int i = 0; i < layer.in; ++i)
            prev[static_cast<size_t>(i)] *= act[static_cast<size_t>(i)] *
                                            (1.0 - act[static_cast<size_t>(i)]);
        delta = std::move(prev);
    }
}

static void adam_update(std::vector<double>& theta, const std::vector<double>& g,
                        std::vector<double>& m, std::vector<double>& v, double lr,
                        const TrainConfig& cfg, double bc1, double bc2) {
    for (size_t i = 0; i < theta.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

void adamw_step(AttributorHead& h, const ParamGrads& grads, double lr, const TrainConfig& cfg) {
    if (grads.gw.size() != h.layers.size() || grads.gb.size() != h.layers.size())
        throw ValidationError("adamw_step: gradient layer count mismatch");
    for (size_t l = 0; l < h.layers.size(); ++l)
        if (grads.gw[l].size() != h.layers[l].w.size() ||
            grads.gb[l].size() != h.layers[l].b.size())
            throw ValidationError("adamw_step: gradient shape mismatch at layer " +
                                  std::to_string(l));

    h.opt.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(h.opt.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(h.opt.step));
    for (size_t l = 0; l < h.layers.size(); ++l) {
        auto& layer = h.layers[l];
        if (cfg.weight_decay != 0.0) {
            const double keep = 1.0 - lr * cfg.weight_decay;
            for (double& w : layer.w) w *= keep;
        }
        adam_update(layer.w, grads.gw[l], h.opt.mw[l], h.opt.vw[l], lr, cfg, bc1, bc2);
        adam_update(layer.b, grads.gb[l], h.opt.mb[l], h.opt.vb[l], lr, cfg, bc1, bc2);
    }
}

double lr_at(const TrainConfig& cfg, int epoch) {
    validate_train_config(cfg);
    if (epoch < 0 || epoch >= cfg.epochs)
        throw ValidationError("lr_at: epoch " + std::to_string(epoch) + " out of [0, " +
                              std::to_string(cfg.epochs) + ")");
    if (epoch < cfg.warmup_epochs)
        return cfg.lr * static_cast<double>(epoch + 1) / static_cast<double>(cfg.warmup_epochs);
    // Annealing phase reaches min_lr exactly at the last epoch.
    const int denom = cfg.epochs - 1 - cfg.warmup_epochs;
    if (epoch == cfg.epochs - 1 || denom <= 0) return cfg.min_lr;
    const double t = static_cast<double>(epoch - cfg.warmup_epochs) / static_cast<double>(denom);
    return cfg.min_lr + 0.5 * (cfg.lr - cfg.min_lr) * (1.0 + std::cos(kPi * t));
}

static int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
    return best;
}

double accuracy_on(const AttributorHead& h, const std::vector<TrainSample>& samples) {
    if (samples.empty()) return 0.0;
    size_t correct = 0;
    for (const auto& s : samples)
        if (argmax_lowest(forward(h, s.input)) == s.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train(AttributorHead head, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg) {
    validate_train_config(cfg);
    if (train_set.empty() || val_set.empty())
        throw ValidationError("train: train and val sets must be nonempty");
    for (const auto& s : train_set)
        if (s.label < 0 || s.label >= head.config.num_classes)
            throw ValidationError("train: label out of range");

    TrainHistory history;
    std::vector<DenseLayer> best_params = head.layers;
    double best_val = -1.0;
    int best_epoch = 0;

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at(cfg, epoch);

        SplitMix64 rng(hash_combine(cfg.shuffle_seed, static_cast<uint64_t>(epoch)));
        for (size_t i = order.size(); i-- > 1;) {
            const size_t j = rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }

        double loss_sum = 0.0;
        size_t correct = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            ParamGrads grads = zero_grads(head);
            for (size_t k = start; k < end; ++k) {
                const TrainSample& s = train_set[order[k]];
                const std::vector<double> logits = forward(head, s.input);
                auto [loss, dlogits] = softmax_ce(logits, s.label);
                if (!std::isfinite(loss))
                    throw DivergenceError("train: non-finite loss at epoch " +
                                          std::to_string(epoch));
                loss_sum += loss;
                if (argmax_lowest(logits) == s.label) ++correct;
                accumulate_grads(head, s.input, dlogits, grads);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (auto& g : grads.gw)
                for (double& v : g) v *= inv;
            for (auto& g : grads.gb)
                for (double& v : g) v *= inv;
            adamw_step(head, grads, lr, cfg);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
        rec.val_acc = accuracy_on(head, val_set);
        history.epochs.push_back(rec);

        if (rec.val_acc > best_val) {
            best_val = rec.val_acc;
            best_epoch = epoch;
            best_params = head.layers;
        }
    }

    history.best_epoch = best_epoch;
    head.layers = std::move(best_params);
    return {std::move(head), std::move(history)};
}

std::pair<std::string, std::vector<double>> predict(const AttributorHead& h, const Embedding& e) {
    const std::vector<double> logits = forward(h, e);
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    const int cls = argmax_lowest(probs);
    std::string name = cls < static_cast<int>(h.class_names.size())
                           ? h.class_names[static_cast<size_t>(cls)]
                           : std::to_string(cls);
    return {std::move(name), std::move(probs)};
}

void save_head(const AttributorHead& h, const std::string& path) {
    ByteWriter w;
    w.magic("AHD1");
    w.u32(1);
    w.u8(h.config.kind == HeadKind::linear ? 0 : 1);
    w.u32(static_cast<uint32_t>(h.config.input_dim));
    w.u32(static_cast<uint32_t>(h.config.num_classes));
    w.u32(static_cast<uint32_t>(h.config.hidden_dim));
    w.u64(h.config.init_seed);
    w.u32(static_cast<uint32_t>(h.class_names.size()));
    for (const auto& name : h.class_names) w.str(name);
    for (const auto& layer : h.layers) {
        for (double v : layer.w) w.f32(static_cast<float>(v));
        for (double v : layer.b) w.f32(static_cast<float>(v));
    }
    write_file_bytes(path, w.finish_with_checksum());
}

AttributorHead load_head(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    ByteReader r(bytes.data(), bytes.size(), path);
    r.open("AHD1");
    const uint32_t version = r.u32();
    if (version != 1)
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
    HeadConfig cfg;
    cfg.kind = r.u8() == 0 ? HeadKind::linear : HeadKind::mlp;
    cfg.input_dim = static_cast<int>(r.u32());
    cfg.num_classes = static_cast<int>(r.u32());
    cfg.hidden_dim = static_cast<int>(r.u32());
    cfg.init_seed = r.u64();
    AttributorHead h = init_head(cfg);
    const uint32_t names = r.u32();
    if (names != static_cast<uint32_t>(cfg.num_classes))
        throw FormatError(path + ": class-name count disagrees with num_classes");
    h.class_names.clear();
    for (uint32_t i = 0; i < names; ++i) h.class_names.push_back(r.str());
    for (auto& layer : h.layers) {
        for (double& v : layer.w) v = r.f32();
        for (double& v : layer.b) v = r.f32();
    }
    r.expect_end();
    return h;
}

void save_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write history CSV: " + path);
    out << "epoch,lr,train_loss,train_acc,val_acc,best\n";
    char buf[192];
    for (const auto& rec : history.epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%d", rec.epoch, rec.lr,
                      rec.train_loss, rec.train_acc, rec.val_acc,
                      rec.epoch == history.best_epoch ? 1 : 0);
        out << buf << "\n";
    }
}

}  // namespace attrikit
