#pragma once

#include <cstdint>
#include <string>

#include "attrikit/image.hpp"

namespace attrikit {

// High-frequency perturbation description. For gaussian_noise the seed makes
// the draw deterministic; batch runners derive per-sample seeds from it.
struct PerturbSpec {
    enum class Kind { gaussian_blur, bilateral, gaussian_noise };
    Kind kind = Kind::gaussian_blur;
    double sigma = 1.0;        // blur sigma (px) or noise sigma (value units)
    double sigma_space = 2.0;  // bilateral spatial sigma (px)
    double sigma_range = 0.1;  // bilateral range sigma (value units)
    int radius = 3;
    uint64_t seed = 0;

    bool operator==(const PerturbSpec&) const = default;
};

// Parses the CLI form "kind:param=value,...", e.g. "gaussian_blur:sigma=1,radius=3".
PerturbSpec parse_perturb(const std::string& text);
std::string to_string(const PerturbSpec& spec);

// Single-patch pipeline parameters: resize shorter edge -> intermediate_edge,
// center crop k x k, resize to final_edge.
struct PatchSpec {
    int k = 256;
    int intermediate_edge = 512;
    int final_edge = 224;

    bool operator==(const PatchSpec&) const = default;
};

void validate_patch_spec(const PatchSpec& spec);

// Catmull-Rom (a = -0.5) bicubic resampling with edge-clamp boundary.
// Output clamped to [0,1].
Image resize_bicubic(const Image& img, int shorter_edge);
Image resize_bicubic_to(const Image& img, int out_width, int out_height);

Image center_crop(const Image& img, int size);

// Flips iff the first uniform draw from SplitMix64(seed) < 0.5.
Image maybe_hflip(const Image& img, uint64_t seed);

Image crop_patch(const Image& img, const PatchSpec& spec);

// Separable Gaussian convolution; kernel exp(-x^2/2s^2), x in [-radius,radius],
// normalized to sum 1; edge-clamp padding.
Image gaussian_blur(const Image& img, double sigma, int radius);

// Standard bilateral filter with per-channel range distance.
Image bilateral_filter(const Image& img, double sigma_space, double sigma_range, int radius);

// Adds i.i.d. N(0, sigma^2) per value and clamps to [0,1].
Image add_gaussian_noise(const Image& img, double sigma, uint64_t seed);

// Classic edge pipeline: luma, Gaussian smooth (sigma=1.4, radius=4), Sobel,
// non-maximum suppression over 4 directions, double threshold (fractions of
// the max gradient magnitude), hysteresis by 8-connected flood from strong
// pixels. Returns a binary 1-channel image.
Image canny(const Image& img, double low_threshold, double high_threshold);

Image apply_perturb(const Image& img, const PerturbSpec& spec);

}  // namespace attrikit
