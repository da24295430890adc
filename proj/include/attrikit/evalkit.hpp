#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attrikit/attributor.hpp"
#include "attrikit/features.hpp"
#include "attrikit/histogram.hpp"
#include "attrikit/manifest.hpp"
#include "attrikit/pixelops.hpp"
#include "attrikit/style.hpp"

namespace attrikit {

struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<int64_t> counts;  // C x C row-major, rows = true class

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> cls)
        : classes(std::move(cls)),
          counts(classes.size() * classes.size(), 0) {}

    int64_t& at(size_t t, size_t p) { return counts[t * classes.size() + p]; }
    int64_t at(size_t t, size_t p) const { return counts[t * classes.size() + p]; }
    int64_t total() const;
    int64_t diagonal() const;
    int64_t row_sum(size_t t) const;
    int64_t col_sum(size_t p) const;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct PerClassMetrics {
    std::string class_name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int64_t support = 0;

    bool operator==(const PerClassMetrics&) const = default;
};

struct EvalReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    ConfusionMatrix confusion;
    std::vector<PerClassMetrics> per_class;
    std::map<std::string, std::string> meta;

    bool operator==(const EvalReport&) const = default;
};

// Computes accuracy and macro-averaged P/R/F1 from a confusion matrix.
// Zero-denominator classes contribute 0 and are flagged in
// meta["zero_denominator_classes"].
EvalReport compute_report(const ConfusionMatrix& confusion,
                          std::map<std::string, std::string> meta = {});

enum class Repr { pixel, style, features_file, segmentation };

std::string to_string(Repr r);
Repr repr_from_string(const std::string& s);

// How a sample record becomes a classifier input. All stochastic pieces
// carry explicit seeds; per-record seeds are derived from them by index so
// batch results are order-independent and reproducible.
struct ReprConfig {
    Repr kind = Repr::style;

    // Preprocessing: resize shorter edge, center crop (0 disables either),
    // or the single-patch pipeline when `patch` is set.
    int resize_edge = 224;
    int crop = 224;
    std::optional<PatchSpec> patch;

    // Input channel: "rgb" (default), "canny", or "aux:<name>" to use an
    // auxiliary map file from the record instead of the RGB image.
    std::string input_channel = "rgb";
    double canny_low = 0.1;
    double canny_high = 0.2;

    std::optional<PerturbSpec> perturb;
    std::optional<uint64_t> hflip_seed;  // train-time flip augmentation

    int pixel_grid = 8;

    BackboneConfig backbone;
    std::vector<int> style_layers;  // empty = all layers

    bool use_text = false;
    int text_dim = 64;
    uint64_t text_seed = 0;

    std::string features_key = "features";  // aux_maps key for Repr::features_file

    std::vector<std::string> seg_vocab;
    int seg_grid = 4;
};

std::string describe(const ReprConfig& repr);

// Per-class mean of one semantic class's binary masks plus the most common
// co-occurring classes.
struct CompositionSummary {
    std::string class_name;
    Image mean_mask;
    std::vector<std::pair<std::string, int>> top_inserted;
    int total_images = 0;
};

// For each vocabulary class, average-pool its binary mask to grid x grid
// (zeros when absent) and flatten in vocabulary order.
Embedding segmentation_embedding(const std::map<std::string, Image>& masks,
                                 const std::vector<std::string>& class_vocab, int grid);

// Turns one record into a classifier input. `record_index` feeds per-record
// seed derivation. Throws IoError for unreadable inputs.
Embedding embed_record(const SampleRecord& record, const ReprConfig& repr,
                       const Backbone& backbone, size_t record_index);

struct EmbedFailure {
    std::string image_path;
    std::string reason;
};

struct EmbeddedSet {
    std::vector<TrainSample> samples;
    std::vector<EmbedFailure> failures;
};

// Embeds every record, mapping class labels through `class_names`.
EmbeddedSet embed_manifest(const Manifest& m, const ReprConfig& repr,
                           const std::vector<std::string>& class_names, int threads = 1);

EvalReport evaluate(const AttributorHead& model, const ReprConfig& repr, const Manifest& manifest,
                    int threads = 1);

struct CrossDomainCell {
    std::string train_domain;
    std::string test_domain;
    EvalReport report;
};

// Full (train-domain model) x (test-domain manifest) grid. All models must
// share one class set.
std::vector<CrossDomainCell> cross_domain(const std::map<std::string, AttributorHead>& models,
                                          const ReprConfig& repr,
                                          const std::map<std::string, Manifest>& manifests,
                                          int threads = 1);

// Splits the manifest by edit bin (computing ratios from masks when absent)
// and evaluates each bin. Records lacking both ratio and mask are rejected.
std::map<EditBin, EvalReport> post_edit_eval(const AttributorHead& model, const ReprConfig& repr,
                                             const Manifest& manifest, int threads = 1);

enum class SweepAxis { resolution, patch_k, train_size };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepConfig {
    Manifest train_manifest;
    Manifest val_manifest;
    Manifest test_manifest;
    ReprConfig repr;
    HeadConfig head;
    TrainConfig train;
    int threads = 1;
};

struct SweepPoint {
    int value = 0;
    EvalReport report;
};

// Retrains and re-evaluates per axis value with all seeds held fixed.
std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<int>& values,
                              const SweepConfig& cfg);

// Trains a head over embedded manifests; class names come from the train
// manifest, input_dim is inferred when left 0.
struct PipelineResult {
    AttributorHead head;
    TrainHistory history;
    std::vector<EmbedFailure> failures;
};

PipelineResult train_pipeline(const Manifest& train_m, const Manifest& val_m,
                              const ReprConfig& repr, HeadConfig head_cfg,
                              const TrainConfig& train_cfg, int threads = 1);

// Elementwise mean after resampling everything to the smallest common size.
Image average_image(const std::vector<Image>& images);

// Histograms of the mean image's channels; densities integrate to 1.
std::array<Histogram, 3> color_density(const std::vector<Image>& images, int bins);

std::vector<CompositionSummary> composition_summary(
    const std::vector<std::map<std::string, Image>>& per_image_masks,
    const std::vector<std::string>& focus_classes, int top_k = 3);

// Report files: JSON is full fidelity (reimportable), CSV is flat metrics
// plus the confusion matrix.
void export_report_json(const EvalReport& report, const std::string& path);
EvalReport import_report_json(const std::string& path);
void export_report_csv(const EvalReport& report, const std::string& path);
void export_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path);
void export_grid_csv(const std::vector<CrossDomainCell>& grid, const std::string& path);

}  // namespace attrikit
