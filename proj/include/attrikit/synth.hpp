#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "attrikit/image.hpp"
#include "attrikit/manifest.hpp"

namespace attrikit {

struct TextureSpec {
    enum class Kind { none, sine, checker };
    Kind kind = Kind::none;
    double frequency = 0.0;  // sine: cycles per image edge
    int cell = 0;            // checker: cell size in px
    double amplitude = 0.0;

    bool operator==(const TextureSpec&) const = default;
};

struct NoiseSpec {
    enum class Kind { white, lowpass };
    Kind kind = Kind::white;
    double sigma = 0.0;  // in [0,1] pixel-value units

    bool operator==(const NoiseSpec&) const = default;
};

// A procedural generator identity: a fixed signature of palette, texture,
// noise, color grade and vignette applied on top of a smooth random field.
struct SynthGeneratorSpec {
    std::string name;
    int palette_levels = 256;  // per-channel quantization levels, >= 2
    TextureSpec texture;
    NoiseSpec noise;
    // Row-major 3x3 color mixing matrix; rows sum to 1 (luminance preserving).
    std::array<double, 9> grade = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    double vignette_strength = 0.0;  // in [0,1]
    uint64_t seed_base = 0;

    bool operator==(const SynthGeneratorSpec&) const = default;
};

void validate_spec(const SynthGeneratorSpec& spec);

struct PerClassCounts {
    int train = 0;
    int val = 0;
    int test = 0;
    int total() const { return train + val + test; }
};

// Smooth base content: an 8x8 uniform-random RGB grid bilinearly upsampled
// to size x size.
Image base_field(int image_size, uint64_t seed);

// Renders sample `index` for a generator: base field, then
// grade -> texture -> palette quantization -> noise -> vignette.
// Deterministic in (spec, master_seed, index).
Image render_sample(const SynthGeneratorSpec& spec, int image_size, uint64_t master_seed,
                    int index);

// Renders the full corpus to out_dir (one PNG per sample, one subdirectory
// per generator) and returns the generator-taxonomy manifest. Output bytes
// are identical for identical inputs.
Manifest synth_corpus(const std::vector<SynthGeneratorSpec>& specs, const PerClassCounts& counts,
                      int image_size, uint64_t master_seed, const std::string& out_dir);

// The built-in 5-generator configuration used by the CLI defaults.
std::vector<SynthGeneratorSpec> default_generator_specs();

// JSON array of generator specs, for CLI --spec-file.
std::vector<SynthGeneratorSpec> load_generator_specs(const std::string& path);
void save_generator_specs(const std::vector<SynthGeneratorSpec>& specs, const std::string& path);

// Free-form binary mask covering round(target_ratio * w * h) pixels, grown
// by seeded randomized flood from a few seed points. Fixture generator for
// edit-ratio studies; shape statistics are unconstrained.
Image random_blob_mask(int width, int height, double target_ratio, uint64_t seed);

}  // namespace attrikit
