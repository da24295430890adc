#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "attrikit/features.hpp"

namespace attrikit {

enum class HeadKind { linear, mlp };

struct HeadConfig {
    HeadKind kind = HeadKind::linear;
    int input_dim = 0;
    int num_classes = 0;
    int hidden_dim = 256;  // mlp only
    uint64_t init_seed = 0;

    bool operator==(const HeadConfig&) const = default;
};

// Default training recipe: AdamW (lr 2e-4, weight decay 0.05), batch 128,
// linear warmup for 20 epochs then cosine annealing down to 1e-5, selecting
// the best-validation checkpoint. Epochs default to 2000 and are normally
// overridden at desk scale.
struct TrainConfig {
    int batch_size = 128;
    int epochs = 2000;
    double lr = 2e-4;
    double weight_decay = 0.05;
    int warmup_epochs = 20;
    double min_lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint64_t shuffle_seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

void validate_train_config(const TrainConfig& cfg);

struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
};

struct ParamGrads {
    std::vector<std::vector<double>> gw;
    std::vector<std::vector<double>> gb;
};

struct OptimizerState {
    std::vector<std::vector<double>> mw, vw, mb, vb;
    int64_t step = 0;
};

struct AttributorHead {
    HeadConfig config;
    std::vector<DenseLayer> layers;
    OptimizerState opt;
    std::vector<std::string> class_names;
};

// Xavier-uniform weights from SplitMix64(init_seed), zero biases and moments.
AttributorHead init_head(const HeadConfig& cfg);

// Linear: Wx+b. MLP: three linear layers, logistic sigmoid on the two hidden
// layers, linear output.
std::vector<double> forward(const AttributorHead& h, const Embedding& e);

// Numerically stabilized softmax cross-entropy; grad = softmax - one_hot.
std::pair<double, std::vector<double>> softmax_ce(const std::vector<double>& logits,
                                                  int true_class);

ParamGrads zero_grads(const AttributorHead& h);

// Accumulates parameter gradients for one sample given d(loss)/d(logits).
void accumulate_grads(const AttributorHead& h, const Embedding& e,
                      const std::vector<double>& dlogits, ParamGrads& grads);

// Decoupled weight decay on weights (not biases), then Adam moment update
// with bias correction. Advances the shared step counter once.
void adamw_step(AttributorHead& h, const ParamGrads& grads, double lr, const TrainConfig& cfg);

// Linear warmup to lr, then cosine annealing that reaches min_lr exactly at
// the final epoch.
double lr_at(const TrainConfig& cfg, int epoch);

struct TrainSample {
    Embedding input;
    int label = 0;
};

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
};

struct TrainResult {
    AttributorHead head;  // parameters from the best-validation epoch
    TrainHistory history;
};

TrainResult train(AttributorHead head, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg);

// Argmax of softmax(logits); ties go to the lowest class index.
std::pair<std::string, std::vector<double>> predict(const AttributorHead& h, const Embedding& e);

double accuracy_on(const AttributorHead& h, const std::vector<TrainSample>& samples);

// Inference checkpoint ("AHD1"): config, class names, f32 parameters,
// FNV-1a checksum. Optimizer state is not persisted.
void save_head(const AttributorHead& h, const std::string& path);
AttributorHead load_head(const std::string& path);

void save_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace attrikit
