#include "attrikit/pixelops.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <vector>

#include "attrikit/errors.hpp"
#include "attrikit/prng.hpp"

namespace attrikit {

namespace {

// Catmull-Rom kernel, a = -0.5.
double cubic_weight(double t) {
    t = std::abs(t);
    if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

// Resamples one axis; `horizontal` selects which. Weights are renormalized
// so constants are preserved exactly.
std::vector<double> resample_axis(const std::vector<double>& src, int src_w, int src_h, int ch,
                                  int out_len, bool horizontal) {
    const int out_w = horizontal ? out_len : src_w;
    const int out_h = horizontal ? src_h : out_len;
    const int src_len = horizontal ? src_w : src_h;
    std::vector<double> dst(static_cast<size_t>(out_w) * out_h * ch);

    const double scale = static_cast<double>(src_len) / out_len;
    for (int d = 0; d < out_len; ++d) {
        const double s = (d + 0.5) * scale - 0.5;
        const int j = static_cast<int>(std::floor(s));
        const double t = s - j;
        double w[4] = {cubic_weight(t + 1.0), cubic_weight(t), cubic_weight(1.0 - t),
                       cubic_weight(2.0 - t)};
        const double wsum = w[0] + w[1] + w[2] + w[3];
        for (double& x : w) x /= wsum;
        int idx[4];
        for (int m = 0; m < 4; ++m) idx[m] = std::clamp(j - 1 + m, 0, src_len - 1);

        if (horizontal) {
            for (int y = 0; y < out_h; ++y)
                for (int c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (int m = 0; m < 4; ++m)
                        acc += w[m] * src[(static_cast<size_t>(y) * src_w + idx[m]) * ch + c];
                    dst[(static_cast<size_t>(y) * out_w + d) * ch + c] = acc;
                }
        } else {
            for (int x = 0; x < out_w; ++x)
                for (int c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (int m = 0; m < 4; ++m)
                        acc += w[m] * src[(static_cast<size_t>(idx[m]) * src_w + x) * ch + c];
                    dst[(static_cast<size_t>(d) * out_w + x) * ch + c] = acc;
                }
        }
    }
    return dst;
}

}  // namespace

Image resize_bicubic_to(const Image& img, int out_width, int out_height) {
    if (img.empty()) throw ValidationError("resize: empty image");
    if (out_width < 1 || out_height < 1) throw ValidationError("resize: empty target");
    std::vector<double> buf =
        resample_axis(img.data, img.width, img.height, img.channels, out_width, true);
    buf = resample_axis(buf, out_width, img.height, img.channels, out_height, false);
    Image out(out_width, out_height, img.channels);
    for (size_t i = 0; i < buf.size(); ++i) out.data[i] = std::clamp(buf[i], 0.0, 1.0);
    return out;
}

Image resize_bicubic(const Image& img, int shorter_edge) {
    if (shorter_edge < 1) throw ValidationError("resize_bicubic: shorter_edge must be >= 1");
    if (img.empty()) throw ValidationError("resize_bicubic: empty image");
    const double scale = static_cast<double>(shorter_edge) / std::min(img.width, img.height);
    int out_w, out_h;
    if (img.width <= img.height) {
        out_w = shorter_edge;
        out_h = std::max(shorter_edge, static_cast<int>(std::lround(img.height * scale)));
    } else {
        out_h = shorter_edge;
        out_w = std::max(shorter_edge, static_cast<int>(std::lround(img.width * scale)));
    }
    return resize_bicubic_to(img, out_w, out_h);
}

Image center_crop(const Image& img, int size) {
    if (size < 1) throw ValidationError("center_crop: size must be >= 1");
    if (size > img.width || size > img.height)
        throw ValidationError("center_crop: size " + std::to_string(size) +
                              " exceeds image " + std::to_string(img.width) + "x" +
                              std::to_string(img.height));
    const int ox = (img.width - size) / 2;
    const int oy = (img.height - size) / 2;
    Image out(size, size, img.channels);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x + ox, y + oy, c);
    return out;
}

Image maybe_hflip(const Image& img, uint64_t seed) {
    SplitMix64 rng(seed);
    if (rng.next_double() < 0.5) return flip_horizontal(img);
    return img;
}

void validate_patch_spec(const PatchSpec& spec) {
    const bool known = spec.k == 2 || spec.k == 4 || spec.k == 8 || spec.k == 16 ||
                       spec.k == 32 || spec.k == 64 || spec.k == 128 || spec.k == 256;
    if (!known)
        throw ValidationError("patch spec: k must be one of {2,4,8,16,32,64,128,256}, got " +
                              std::to_string(spec.k));
    if (spec.intermediate_edge < 1 || spec.final_edge < 1)
        throw ValidationError("patch spec: edges must be >= 1");
    if (spec.k > spec.intermediate_edge)
        throw ValidationError("patch spec: k exceeds intermediate_edge");
}

Image crop_patch(const Image& img, const PatchSpec& spec) {
    validate_patch_spec(spec);
    Image out = resize_bicubic(img, spec.intermediate_edge);
    out = center_crop(out, spec.k);
    return resize_bicubic_to(out, spec.final_edge, spec.final_edge);
}

namespace {

std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> k(radius + 1);  // k[d] for offset d >= 0
    double sum = 0.0;
    for (int d = 0; d <= radius; ++d) {
        k[d] = std::exp(-(double(d) * d) / (2.0 * sigma * sigma));
        sum += d == 0 ? k[d] : 2.0 * k[d];
    }
    for (double& v : k) v /= sum;
    return k;
}

// 1-D convolution along an axis with a symmetric kernel. Taps at +-d are
// added pairwise first, which makes the result exactly invariant under
// horizontal mirroring of the input.
void convolve_axis(std::vector<double>& data, int w, int h, int ch,
                   const std::vector<double>& half_kernel, bool horizontal) {
    const int radius = static_cast<int>(half_kernel.size()) - 1;
    const int len = horizontal ? w : h;
    std::vector<double> out(data.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int pos = horizontal ? x : y;
            for (int c = 0; c < ch; ++c) {
                auto sample = [&](int p) {
                    p = std::clamp(p, 0, len - 1);
                    const int sx = horizontal ? p : x;
                    const int sy = horizontal ? y : p;
                    return data[(static_cast<size_t>(sy) * w + sx) * ch + c];
                };
                double acc = half_kernel[0] * sample(pos);
                for (int d = 1; d <= radius; ++d)
                    acc += half_kernel[d] * (sample(pos - d) + sample(pos + d));
                out[(static_cast<size_t>(y) * w + x) * ch + c] = acc;
            }
        }
    data.swap(out);
}

}  // namespace

Image gaussian_blur(const Image& img, double sigma, int radius) {
    if (!(sigma > 0.0)) throw ValidationError("gaussian_blur: sigma must be positive");
    if (radius < 1) throw ValidationError("gaussian_blur: radius must be >= 1");
    if (img.empty()) throw ValidationError("gaussian_blur: empty image");
    const std::vector<double> k = gaussian_kernel(sigma, radius);
    Image out = img;
    convolve_axis(out.data, out.width, out.height, out.channels, k, true);
    convolve_axis(out.data, out.width, out.height, out.channels, k, false);
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

Image bilateral_filter(const Image& img, double sigma_space, double sigma_range, int radius) {
    if (!(sigma_space > 0.0) || !(sigma_range > 0.0))
        throw ValidationError("bilateral_filter: sigmas must be positive");
    if (radius < 1) throw ValidationError("bilateral_filter: radius must be >= 1");
    if (img.empty()) throw ValidationError("bilateral_filter: empty image");

    const double inv2ss = 1.0 / (2.0 * sigma_space * sigma_space);
    const double inv2sr = 1.0 / (2.0 * sigma_range * sigma_range);
    std::vector<double> spatial((2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            spatial[(dy + radius) * (2 * radius + 1) + (dx + radius)] =
                std::exp(-(double(dx) * dx + double(dy) * dy) * inv2ss);

    Image out(img.width, img.height, img.channels);
    const int w = img.width, h = img.height;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const double center = img.at(x, y, c);
                auto term = [&](int dx, int dy, double& wgt) {
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    const int sy = std::clamp(y + dy, 0, h - 1);
                    const double v = img.at(sx, sy, c);
                    const double diff = v - center;
                    wgt = spatial[(dy + radius) * (2 * radius + 1) + (dx + radius)] *
                          std::exp(-diff * diff * inv2sr);
                    return wgt * v;
                };
                // +-dx taps paired for exact mirror symmetry.
                double acc = 0.0, norm = 0.0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    double w0;
                    acc += term(0, dy, w0);
                    norm += w0;
                    for (int dx = 1; dx <= radius; ++dx) {
                        double wl, wr;
                        const double tl = term(-dx, dy, wl);
                        const double tr = term(dx, dy, wr);
                        acc += tl + tr;
                        norm += wl + wr;
                    }
                }
                out.at(x, y, c) = std::clamp(acc / norm, 0.0, 1.0);
            }
    return out;
}

Image add_gaussian_noise(const Image& img, double sigma, uint64_t seed) {
    if (sigma < 0.0) throw ValidationError("add_gaussian_noise: sigma must be >= 0");
    if (sigma == 0.0) return img;
    Image out = img;
    GaussianSampler gauss(seed);
    for (double& v : out.data) v = std::clamp(v + sigma * gauss.next(), 0.0, 1.0);
    return out;
}

Image canny(const Image& img, double low_threshold, double high_threshold) {
    if (!(low_threshold >= 0.0 && low_threshold < high_threshold && high_threshold <= 1.0))
        throw ValidationError("canny: need 0 <= low < high <= 1");
    const Image luma = to_luma(img);
    const Image smooth = gaussian_blur(luma, 1.4, 4);

    const int w = img.width, h = img.height;
    std::vector<double> gx(static_cast<size_t>(w) * h), gy(gx.size()), mag(gx.size());
    auto s = [&](int x, int y) {
        return smooth.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1), 0);
    };
    double max_mag = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = (s(x + 1, y - 1) + 2.0 * s(x + 1, y) + s(x + 1, y + 1)) -
                              (s(x - 1, y - 1) + 2.0 * s(x - 1, y) + s(x - 1, y + 1));
            const double dy = (s(x - 1, y + 1) + 2.0 * s(x, y + 1) + s(x + 1, y + 1)) -
                              (s(x - 1, y - 1) + 2.0 * s(x, y - 1) + s(x + 1, y - 1));
            const size_t i = static_cast<size_t>(y) * w + x;
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = std::sqrt(dx * dx + dy * dy);
            max_mag = std::max(max_mag, mag[i]);
        }

    const double lo = low_threshold * max_mag;
    const double hi = high_threshold * max_mag;

    // Non-maximum suppression over 4 quantized gradient directions.
    auto m = [&](int x, int y) {
        if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
        return mag[static_cast<size_t>(y) * w + x];
    };
    std::vector<uint8_t> cls(mag.size(), 0);  // 0 none, 1 weak, 2 strong
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (mag[i] < lo || mag[i] == 0.0) continue;
            double angle = std::atan2(gy[i], gx[i]);
            if (angle < 0) angle += 3.14159265358979323846;
            const int sector = static_cast<int>(std::floor(angle / (3.14159265358979323846 / 4.0) + 0.5)) % 4;
            double n1, n2;
            switch (sector) {
                case 0: n1 = m(x - 1, y), n2 = m(x + 1, y); break;
                case 1: n1 = m(x - 1, y - 1), n2 = m(x + 1, y + 1); break;
                case 2: n1 = m(x, y - 1), n2 = m(x, y + 1); break;
                default: n1 = m(x + 1, y - 1), n2 = m(x - 1, y + 1); break;
            }
            if (mag[i] >= n1 && mag[i] >= n2) cls[i] = mag[i] >= hi ? 2 : 1;
        }

    // Hysteresis: 8-connected flood from strong pixels through weak ones.
    Image out(w, h, 1, 0.0);
    std::deque<size_t> queue;
    for (size_t i = 0; i < cls.size(); ++i)
        if (cls[i] == 2) {
            out.data[i] = 1.0;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        const size_t i = queue.front();
        queue.pop_front();
        const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const size_t ni = static_cast<size_t>(ny) * w + nx;
                if (cls[ni] == 1 && out.data[ni] == 0.0) {
                    out.data[ni] = 1.0;
                    queue.push_back(ni);
                }
            }
    }
    return out;
}

Image apply_perturb(const Image& img, const PerturbSpec& spec) {
    switch (spec.kind) {
        case PerturbSpec::Kind::gaussian_blur: return gaussian_blur(img, spec.sigma, spec.radius);
        case PerturbSpec::Kind::bilateral:
            return bilateral_filter(img, spec.sigma_space, spec.sigma_range, spec.radius);
        case PerturbSpec::Kind::gaussian_noise:
            return add_gaussian_noise(img, spec.sigma, spec.seed);
    }
    throw ValidationError("apply_perturb: unknown kind");
}

PerturbSpec parse_perturb(const std::string& text) {
    PerturbSpec spec;
    const size_t colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    if (kind == "gaussian_blur") {
        spec.kind = PerturbSpec::Kind::gaussian_blur;
        spec.sigma = 1.0;
        spec.radius = 3;
    } else if (kind == "bilateral") {
        spec.kind = PerturbSpec::Kind::bilateral;
        spec.sigma_space = 2.0;
        spec.sigma_range = 0.1;
        spec.radius = 4;
    } else if (kind == "gaussian_noise") {
        spec.kind = PerturbSpec::Kind::gaussian_noise;
        spec.sigma = 0.05;
    } else {
        throw ParseError("unknown perturbation kind: " + kind);
    }
    if (colon == std::string::npos) return spec;
    std::stringstream rest(text.substr(colon + 1));
    std::string kv;
    while (std::getline(rest, kv, ',')) {
        if (kv.empty()) continue;
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("perturbation param missing '=': " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            if (key == "sigma") spec.sigma = std::stod(val);
            else if (key == "sigma_space") spec.sigma_space = std::stod(val);
            else if (key == "sigma_range") spec.sigma_range = std::stod(val);
            else if (key == "radius") spec.radius = std::stoi(val);
            else if (key == "seed") spec.seed = std::stoull(val);
            else throw ParseError("unknown perturbation param: " + key);
        } catch (const std::invalid_argument&) {
            throw ParseError("bad perturbation value for " + key + ": " + val);
        }
    }
    return spec;
}

std::string to_string(const PerturbSpec& spec) {
    std::ostringstream out;
    switch (spec.kind) {
        case PerturbSpec::Kind::gaussian_blur:
            out << "gaussian_blur:sigma=" << spec.sigma << ",radius=" << spec.radius;
            break;
        case PerturbSpec::Kind::bilateral:
            out << "bilateral:sigma_space=" << spec.sigma_space
                << ",sigma_range=" << spec.sigma_range << ",radius=" << spec.radius;
            break;
        case PerturbSpec::Kind::gaussian_noise:
            out << "gaussian_noise:sigma=" << spec.sigma << ",seed=" << spec.seed;
            break;
    }
    return out.str();
}

}  // namespace attrikit
