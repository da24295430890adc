#include "attrikit/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "attrikit/binio.hpp"
#include "attrikit/errors.hpp"
#include "attrikit/prng.hpp"

namespace attrikit {

std::string Backbone::id() const {
    std::ostringstream out;
    out << "convpyr";
    for (int c : config.layer_channels) out << "-" << c;
    out << "-k" << config.kernel << "-s" << config.seed;
    return out.str();
}

Backbone build_backbone(const BackboneConfig& cfg) {
    if (cfg.layer_channels.empty()) throw ValidationError("backbone: no layers");
    for (int c : cfg.layer_channels)
        if (c < 1) throw ValidationError("backbone: layer channel count must be >= 1");
    if (cfg.kernel < 1 || cfg.kernel % 2 == 0)
        throw ValidationError("backbone: kernel must be odd and >= 1");

    Backbone b;
    b.config = cfg;
    SplitMix64 rng(cfg.seed);
    int in_ch = 3;
    for (int out_ch : cfg.layer_channels) {
        const size_t per_filter = static_cast<size_t>(in_ch) * cfg.kernel * cfg.kernel;
        std::vector<double> filters(per_filter * out_ch);
        for (double& v : filters) v = rng.next_signed();
        for (int o = 0; o < out_ch; ++o) {
            double norm = 0.0;
            for (size_t i = 0; i < per_filter; ++i) {
                const double v = filters[o * per_filter + i];
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (norm > 0.0)
                for (size_t i = 0; i < per_filter; ++i) filters[o * per_filter + i] /= norm;
        }
        b.filters.push_back(std::move(filters));
        b.in_channels.push_back(in_ch);
        in_ch = out_ch;
    }
    return b;
}

namespace {

// conv(same, edge clamp) -> relu -> avgpool2. Input and output are dense
// row-major interleaved buffers in double precision.
std::vector<double> layer_forward(const std::vector<double>& in, int& w, int& h, int in_ch,
                                  int out_ch, int kernel, const std::vector<double>& filters) {
    const int r = kernel / 2;
    const size_t per_filter = static_cast<size_t>(in_ch) * kernel * kernel;
    std::vector<double> conv(static_cast<size_t>(w) * h * out_ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            for (int o = 0; o < out_ch; ++o) {
                const double* f = &filters[o * per_filter];
                double acc = 0.0;
                size_t fi = 0;
                for (int ic = 0; ic < in_ch; ++ic)
                    for (int ky = -r; ky <= r; ++ky) {
                        const int sy = std::clamp(y + ky, 0, h - 1);
                        for (int kx = -r; kx <= r; ++kx) {
                            const int sx = std::clamp(x + kx, 0, w - 1);
                            acc += f[fi++] * in[(static_cast<size_t>(sy) * w + sx) * in_ch + ic];
                        }
                    }
                conv[(static_cast<size_t>(y) * w + x) * out_ch + o] = acc > 0.0 ? acc : 0.0;
            }
        }
    const int pw = w / 2, ph = h / 2;
    std::vector<double> pooled(static_cast<size_t>(pw) * ph * out_ch);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x)
            for (int o = 0; o < out_ch; ++o) {
                const size_t base = (static_cast<size_t>(2 * y) * w + 2 * x) * out_ch + o;
                const double sum = conv[base] + conv[base + out_ch] +
                                   conv[base + static_cast<size_t>(w) * out_ch] +
                                   conv[base + static_cast<size_t>(w) * out_ch + out_ch];
                pooled[(static_cast<size_t>(y) * pw + x) * out_ch + o] = sum / 4.0;
            }
    w = pw;
    h = ph;
    return pooled;
}

}  // namespace

FeaturePyramid extract_pyramid(const Backbone& b, const Image& img) {
    if (img.empty()) throw ValidationError("extract_pyramid: empty image");
    const int layers = static_cast<int>(b.filters.size());
    const int min_side = 1 << layers;
    if (img.width < min_side || img.height < min_side)
        throw ValidationError("extract_pyramid: image " + std::to_string(img.width) + "x" +
                              std::to_string(img.height) + " smaller than 2^" +
                              std::to_string(layers));

    const Image rgb = to_rgb(img);
    std::vector<double> cur(rgb.data.begin(), rgb.data.end());
    int w = rgb.width, h = rgb.height, ch = 3;

    FeaturePyramid p;
    p.backbone_id = b.id();
    for (int l = 0; l < layers; ++l) {
        const int out_ch = b.config.layer_channels[l];
        cur = layer_forward(cur, w, h, ch, out_ch, b.config.kernel, b.filters[l]);
        ch = out_ch;
        FeatureMap fm(h, w, ch);
        for (size_t i = 0; i < cur.size(); ++i) fm.data[i] = static_cast<float>(cur[i]);
        // Re-read the stored f32 values so downstream layers see exactly what
        // a save/load round-trip would.
        for (size_t i = 0; i < cur.size(); ++i) cur[i] = fm.data[i];
        p.layers.push_back(std::move(fm));
    }
    return p;
}

Embedding pixel_embedding(const Image& img, int grid) {
    if (img.empty()) throw ValidationError("pixel_embedding: empty image");
    if (grid < 1 || grid > std::min(img.width, img.height))
        throw ValidationError("pixel_embedding: grid must be in [1, min(H,W)]");
    Embedding e;
    e.kind = EmbeddingKind::pixel;
    e.data.resize(static_cast<size_t>(grid) * grid * img.channels);
    for (int by = 0; by < grid; ++by) {
        const int y0 = by * img.height / grid;
        const int y1 = (by + 1) * img.height / grid;
        for (int bx = 0; bx < grid; ++bx) {
            const int x0 = bx * img.width / grid;
            const int x1 = (bx + 1) * img.width / grid;
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) acc += img.at(x, y, c);
                e.data[(static_cast<size_t>(by) * grid + bx) * img.channels + c] =
                    acc / (double(y1 - y0) * (x1 - x0));
            }
        }
    }
    return e;
}

Embedding text_embedding(const std::string& prompt, int dim, uint64_t seed) {
    if (dim < 1) throw ValidationError("text_embedding: dim must be >= 1");
    Embedding e;
    e.kind = EmbeddingKind::text;
    e.data.assign(static_cast<size_t>(dim), 0.0);

    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        SplitMix64 rng(hash_combine(fnv1a64(token), seed));
        const size_t bucket = rng.next_below(static_cast<uint64_t>(dim));
        const double sign = (rng.next() & 1) ? 1.0 : -1.0;
        e.data[bucket] += sign;
        token.clear();
    };
    for (char ch : prompt) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        else
            flush();
    }
    flush();

    double norm = 0.0;
    for (double v : e.data) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : e.data) v /= norm;
    return e;
}

Embedding concat(const std::vector<Embedding>& parts) {
    if (parts.empty()) throw ValidationError("concat: empty embedding list");
    Embedding e;
    e.kind = EmbeddingKind::concatenated;
    for (const auto& p : parts) e.data.insert(e.data.end(), p.data.begin(), p.data.end());
    return e;
}

void save_features(const FeaturePyramid& p, const std::string& path) {
    if (p.layers.empty()) throw ValidationError("save_features: empty pyramid");
    ByteWriter w;
    w.magic("AFT1");
    w.u32(1);
    w.u32(static_cast<uint32_t>(p.layers.size()));
    for (const auto& layer : p.layers) {
        w.u32(static_cast<uint32_t>(layer.height));
        w.u32(static_cast<uint32_t>(layer.width));
        w.u32(static_cast<uint32_t>(layer.channels));
        for (float v : layer.data) w.f32(v);
    }
    write_file_bytes(path, w.finish_with_checksum());
}

FeaturePyramid load_features(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    ByteReader r(bytes.data(), bytes.size(), path);
    r.open("AFT1");
    const uint32_t version = r.u32();
    if (version != 1)
        throw FormatError(path + ": unsupported feature file version " + std::to_string(version));
    const uint32_t layer_count = r.u32();
    FeaturePyramid p;
    for (uint32_t l = 0; l < layer_count; ++l) {
        const uint32_t h = r.u32();
        const uint32_t wth = r.u32();
        const uint32_t n = r.u32();
        if (h < 1 || wth < 1 || n < 1)
            throw FormatError(path + ": invalid layer shape in feature file");
        FeatureMap fm(static_cast<int>(h), static_cast<int>(wth), static_cast<int>(n));
        for (float& v : fm.data) v = r.f32();
        p.layers.push_back(std::move(fm));
    }
    r.expect_end();
    return p;
}

}  // namespace attrikit
