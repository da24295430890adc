#include "attrikit/style.hpp"

#include <cmath>

#include "attrikit/errors.hpp"

namespace attrikit {

GramMatrix gram(const FeatureMap& f) {
    if (f.channels < 1 || f.cell_count() < 1) throw ValidationError("gram: empty feature map");
    const int n = f.channels;
    const size_t cells = f.cell_count();

    // Transpose to channel-major so each channel is contiguous.
    std::vector<double> ch(static_cast<size_t>(n) * cells);
    for (size_t p = 0; p < cells; ++p)
        for (int c = 0; c < n; ++c) ch[static_cast<size_t>(c) * cells + p] = f.data[p * n + c];

    std::vector<double> norms(n);
    for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        const double* v = &ch[static_cast<size_t>(c) * cells];
        for (size_t p = 0; p < cells; ++p) acc += v[p] * v[p];
        norms[c] = std::sqrt(acc);
    }

    GramMatrix g;
    g.n = n;
    g.values.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        g.at(i, i) = 1.0;
        if (norms[i] == 0.0) continue;  // zero channel: unit diagonal, zero row
        const double* vi = &ch[static_cast<size_t>(i) * cells];
        for (int j = i + 1; j < n; ++j) {
            if (norms[j] == 0.0) continue;
            const double* vj = &ch[static_cast<size_t>(j) * cells];
            double dot = 0.0;
            for (size_t p = 0; p < cells; ++p) dot += vi[p] * vj[p];
            const double v = dot / (norms[i] * norms[j]);
            g.at(i, j) = v;
            g.at(j, i) = v;
        }
    }
    return g;
}

StyleVector style_vector(const FeaturePyramid& p, const std::vector<int>& layers) {
    if (p.layers.empty()) throw ValidationError("style_vector: empty pyramid");
    std::vector<int> selection = layers;
    if (selection.empty()) {
        selection.resize(p.layers.size());
        for (size_t i = 0; i < selection.size(); ++i) selection[i] = static_cast<int>(i);
    }
    StyleVector v;
    for (int idx : selection) {
        if (idx < 0 || idx >= static_cast<int>(p.layers.size()))
            throw ValidationError("style_vector: layer index " + std::to_string(idx) +
                                  " out of range (pyramid has " +
                                  std::to_string(p.layers.size()) + " layers)");
        const GramMatrix g = gram(p.layers[static_cast<size_t>(idx)]);
        StyleLayerLayout layout;
        layout.layer_index = idx;
        layout.n = g.n;
        layout.encoded_length = static_cast<size_t>(g.n) * (g.n + 1) / 2;
        for (int i = 0; i < g.n; ++i)
            for (int j = i; j < g.n; ++j) v.data.push_back(g.at(i, j));
        v.layout.push_back(layout);
    }
    return v;
}

GramMatrix gram_from_triangle(const StyleVector& v, size_t layout_slot) {
    if (layout_slot >= v.layout.size())
        throw ValidationError("gram_from_triangle: layout slot out of range");
    size_t offset = 0;
    for (size_t s = 0; s < layout_slot; ++s) offset += v.layout[s].encoded_length;
    const int n = v.layout[layout_slot].n;
    GramMatrix g;
    g.n = n;
    g.values.assign(static_cast<size_t>(n) * n, 0.0);
    size_t pos = offset;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            g.at(i, j) = v.data[pos];
            g.at(j, i) = v.data[pos];
            ++pos;
        }
    return g;
}

GramMatrix average_gram(const std::vector<GramMatrix>& grams) {
    if (grams.empty()) throw ValidationError("average_gram: empty list");
    const int n = grams[0].n;
    for (const auto& g : grams)
        if (g.n != n)
            throw ValidationError("average_gram: mixed sizes " + std::to_string(n) + " vs " +
                                  std::to_string(g.n));
    GramMatrix out;
    out.n = n;
    out.values.assign(static_cast<size_t>(n) * n, 0.0);
    for (const auto& g : grams)
        for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += g.values[i];
    for (double& v : out.values) v /= static_cast<double>(grams.size());
    return out;
}

Histogram gram_density(const GramMatrix& g, int bins, bool log_scale) {
    std::vector<double> off_diag;
    off_diag.reserve(static_cast<size_t>(g.n) * g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (i != j) off_diag.push_back(g.at(i, j));
    return make_histogram(off_diag, bins, -1.0, 1.0, log_scale);
}

Embedding style_embedding(const StyleVector& v) {
    Embedding e;
    e.kind = EmbeddingKind::style;
    e.data = v.data;
    return e;
}

}  // namespace attrikit
