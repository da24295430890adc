#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attrikit/image.hpp"

namespace attrikit {

// One layer of features, H x W cells with N channels, row-major interleaved:
// data[(y*W + x)*N + c]. Stored as f32 to match the on-disk format exactly.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int n)
        : height(h), width(w), channels(n),
          data(static_cast<size_t>(h) * w * n, 0.0f) {}

    float& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t cell_count() const { return static_cast<size_t>(height) * width; }
};

struct FeaturePyramid {
    std::vector<FeatureMap> layers;
    std::string backbone_id;
    std::string source_image_id;
};

// Deterministic frozen convolutional pyramid: per layer `conv(3x3, same,
// edge clamp) -> relu -> 2x average pool`.
struct BackboneConfig {
    std::vector<int> layer_channels = {16, 32, 64};
    int kernel = 3;
    uint64_t seed = 0;

    bool operator==(const BackboneConfig&) const = default;
};

struct Backbone {
    BackboneConfig config;
    // filters[l] has shape [out][in][k][k] flattened; each [in][k][k] slice
    // per out-channel is scaled to unit Euclidean norm.
    std::vector<std::vector<double>> filters;
    std::vector<int> in_channels;  // per layer

    std::string id() const;
};

Backbone build_backbone(const BackboneConfig& cfg);

// Runs the pyramid on an image (1-channel inputs are replicated to RGB).
// Errors if either image axis is smaller than 2^num_layers.
FeaturePyramid extract_pyramid(const Backbone& b, const Image& img);

enum class EmbeddingKind { image, text, style, pixel, segmentation, concatenated };

struct Embedding {
    std::vector<double> data;
    EmbeddingKind kind = EmbeddingKind::image;

    size_t dim() const { return data.size(); }
};

// Average-pools the image to grid x grid blocks and flattens (block row-major,
// channels innermost).
Embedding pixel_embedding(const Image& img, int grid);

// Deterministic hashed bag-of-words stand-in for a pretrained text encoder:
// lowercase, split on non-alphanumerics, signed bucket accumulation,
// L2 normalized (zero vector for an empty prompt).
Embedding text_embedding(const std::string& prompt, int dim, uint64_t seed);

Embedding concat(const std::vector<Embedding>& parts);

// Feature file ("AFT1"): little-endian, u32 version=1, u32 layer count, per
// layer u32 H,W,N then H*W*N f32 values, trailing u64 FNV-1a checksum of the
// payload after the magic.
void save_features(const FeaturePyramid& p, const std::string& path);
FeaturePyramid load_features(const std::string& path);

}  // namespace attrikit
