#pragma once

#include <string>
#include <vector>

#include "attrikit/features.hpp"
#include "attrikit/histogram.hpp"

namespace attrikit {

// Channel-by-channel cosine similarity matrix of a feature map.
struct GramMatrix {
    int n = 0;
    std::vector<double> values;  // n x n row-major

    double at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
};

struct StyleLayerLayout {
    int layer_index = 0;
    int n = 0;
    size_t encoded_length = 0;  // n*(n+1)/2
};

// Concatenated upper triangles (diagonal included, row-major) of per-layer
// Gram matrices, in backbone layer order.
struct StyleVector {
    std::vector<double> data;
    std::vector<StyleLayerLayout> layout;

    size_t dim() const { return data.size(); }
};

// Cosine Gram over channels flattened across H*W. Zero-norm channels get a
// unit diagonal entry and zero off-diagonals.
GramMatrix gram(const FeatureMap& f);

// Empty `layers` selects every layer.
StyleVector style_vector(const FeaturePyramid& p, const std::vector<int>& layers = {});

// Inverse of the triangle encoding, for one layer of a style vector.
GramMatrix gram_from_triangle(const StyleVector& v, size_t layout_slot);

GramMatrix average_gram(const std::vector<GramMatrix>& grams);

// Density of off-diagonal entries over [-1,1]. `log_scale` is recorded as
// display metadata only.
Histogram gram_density(const GramMatrix& g, int bins, bool log_scale);

Embedding style_embedding(const StyleVector& v);

}  // namespace attrikit
