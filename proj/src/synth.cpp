#include "attrikit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "attrikit/errors.hpp"
#include "attrikit/imageio.hpp"
#include "attrikit/prng.hpp"

namespace attrikit {

namespace fs = std::filesystem;

static constexpr double kPi = 3.14159265358979323846;
static constexpr int kGrid = 8;

// Stream ids for deriving independent per-stage seeds from a sample seed.
enum : uint64_t { kStreamBase = 1, kStreamNoise = 2 };

void validate_spec(const SynthGeneratorSpec& spec) {
    if (spec.name.empty()) throw ValidationError("generator spec: empty name");
    if (spec.palette_levels < 2)
        throw ValidationError("generator spec " + spec.name + ": palette_levels must be >= 2");
    if (spec.texture.amplitude < 0.0)
        throw ValidationError("generator spec " + spec.name + ": negative texture amplitude");
    if (spec.texture.kind == TextureSpec::Kind::checker && spec.texture.cell < 1)
        throw ValidationError("generator spec " + spec.name + ": checker cell must be >= 1");
    if (spec.noise.sigma < 0.0)
        throw ValidationError("generator spec " + spec.name + ": negative noise sigma");
    if (spec.vignette_strength < 0.0 || spec.vignette_strength > 1.0)
        throw ValidationError("generator spec " + spec.name + ": vignette_strength out of [0,1]");
    for (int r = 0; r < 3; ++r) {
        double sum = spec.grade[r * 3] + spec.grade[r * 3 + 1] + spec.grade[r * 3 + 2];
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("generator spec " + spec.name + ": grade row " +
                                  std::to_string(r) + " sums to " + std::to_string(sum));
    }
}

Image base_field(int image_size, uint64_t seed) {
    SplitMix64 rng(seed);
    std::array<double, kGrid * kGrid * 3> grid;
    for (double& g : grid) g = rng.next_double();

    Image out(image_size, image_size, 3);
    for (int y = 0; y < image_size; ++y) {
        double gy = (y + 0.5) * kGrid / image_size - 0.5;
        gy = std::clamp(gy, 0.0, double(kGrid - 1));
        const int iy = std::min(static_cast<int>(gy), kGrid - 2);
        const double fy = gy - iy;
        for (int x = 0; x < image_size; ++x) {
            double gx = (x + 0.5) * kGrid / image_size - 0.5;
            gx = std::clamp(gx, 0.0, double(kGrid - 1));
            const int ix = std::min(static_cast<int>(gx), kGrid - 2);
            const double fx = gx - ix;
            for (int c = 0; c < 3; ++c) {
                const double v00 = grid[(iy * kGrid + ix) * 3 + c];
                const double v01 = grid[(iy * kGrid + ix + 1) * 3 + c];
                const double v10 = grid[((iy + 1) * kGrid + ix) * 3 + c];
                const double v11 = grid[((iy + 1) * kGrid + ix + 1) * 3 + c];
                out.at(x, y, c) = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                  fy * ((1 - fx) * v10 + fx * v11);
            }
        }
    }
    return out;
}

static void apply_grade(Image& img, const std::array<double, 9>& grade) {
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        double* px = &img.data[p * 3];
        const double r = px[0], g = px[1], b = px[2];
        px[0] = std::clamp(grade[0] * r + grade[1] * g + grade[2] * b, 0.0, 1.0);
        px[1] = std::clamp(grade[3] * r + grade[4] * g + grade[5] * b, 0.0, 1.0);
        px[2] = std::clamp(grade[6] * r + grade[7] * g + grade[8] * b, 0.0, 1.0);
    }
}

static void apply_texture(Image& img, const TextureSpec& t) {
    if (t.kind == TextureSpec::Kind::none || t.amplitude == 0.0) return;
    const int s = img.width;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < s; ++x) {
            double delta = 0.0;
            if (t.kind == TextureSpec::Kind::sine) {
                delta = t.amplitude * std::sin(2.0 * kPi * t.frequency * (x + 0.5) / s) *
                        std::sin(2.0 * kPi * t.frequency * (y + 0.5) / s);
            } else {
                const bool even = ((x / t.cell) + (y / t.cell)) % 2 == 0;
                delta = even ? t.amplitude : -t.amplitude;
            }
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = std::clamp(img.at(x, y, c) + delta, 0.0, 1.0);
        }
    }
}

static void apply_palette(Image& img, int levels) {
    const double steps = levels - 1;
    for (double& v : img.data) v = std::round(v * steps) / steps;
}

static void apply_noise(Image& img, const NoiseSpec& n, uint64_t seed) {
    if (n.sigma == 0.0) return;
    GaussianSampler gauss(seed);
    if (n.kind == NoiseSpec::Kind::white) {
        for (double& v : img.data) v = std::clamp(v + n.sigma * gauss.next(), 0.0, 1.0);
        return;
    }
    // lowpass: white field smoothed with a 5x5 box (edge clamp), rescaled by
    // 5 so the interior variance stays sigma^2.
    const int w = img.width, h = img.height, ch = img.channels;
    std::vector<double> field(img.data.size());
    for (double& v : field) v = gauss.next();
    std::vector<double> horiz(img.data.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int d = -2; d <= 2; ++d) {
                    const int xs = std::clamp(x + d, 0, w - 1);
                    acc += field[(static_cast<size_t>(y) * w + xs) * ch + c];
                }
                horiz[(static_cast<size_t>(y) * w + x) * ch + c] = acc / 5.0;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int d = -2; d <= 2; ++d) {
                    const int ys = std::clamp(y + d, 0, h - 1);
                    acc += horiz[(static_cast<size_t>(ys) * w + x) * ch + c];
                }
                double& v = img.data[(static_cast<size_t>(y) * w + x) * ch + c];
                v = std::clamp(v + n.sigma * acc, 0.0, 1.0);
            }
}

static void apply_vignette(Image& img, double strength) {
    if (strength == 0.0) return;
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double rmax2 = cx * cx + cy * cy;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const double f = 1.0 - strength * (r2 / rmax2);
            for (int c = 0; c < img.channels; ++c) img.at(x, y, c) *= f;
        }
}

Image render_sample(const SynthGeneratorSpec& spec, int image_size, uint64_t master_seed,
                    int index) {
    validate_spec(spec);
    if (image_size < 16) throw ValidationError("render_sample: image_size must be >= 16");
    const uint64_t sample_seed = hash3(master_seed, spec.seed_base, static_cast<uint64_t>(index));
    Image img = base_field(image_size, hash_combine(sample_seed, kStreamBase));
    apply_grade(img, spec.grade);
    apply_texture(img, spec.texture);
    apply_palette(img, spec.palette_levels);
    apply_noise(img, spec.noise, hash_combine(sample_seed, kStreamNoise));
    apply_vignette(img, spec.vignette_strength);
    return img;
}

Manifest synth_corpus(const std::vector<SynthGeneratorSpec>& specs, const PerClassCounts& counts,
                      int image_size, uint64_t master_seed, const std::string& out_dir) {
    if (specs.empty()) throw ValidationError("synth_corpus: no generator specs");
    if (counts.train < 1 || counts.val < 1 || counts.test < 1)
        throw ValidationError("synth_corpus: per-class counts must be >= 1");
    if (image_size < 16) throw ValidationError("synth_corpus: image_size must be >= 16");
    for (const auto& s : specs) validate_spec(s);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    std::vector<SampleRecord> records;
    for (const auto& spec : specs) {
        const fs::path class_dir = fs::path(out_dir) / spec.name;
        fs::create_directories(class_dir, ec);
        if (ec) throw IoError("cannot create directory " + class_dir.string());
        for (int i = 0; i < counts.total(); ++i) {
            Split split = Split::train;
            if (i >= counts.train + counts.val)
                split = Split::test;
            else if (i >= counts.train)
                split = Split::val;
            const Image img = render_sample(spec, image_size, master_seed, i);
            const fs::path file =
                class_dir / (to_string(split) + "_" + std::to_string(i) + ".png");
            save_png(img, file.string());
            SampleRecord r;
            r.image_path = file.string();
            r.class_label = spec.name;
            r.taxonomy = Taxonomy::generator;
            r.split = split;
            records.push_back(std::move(r));
        }
    }
    return make_manifest(std::move(records));
}

std::vector<SynthGeneratorSpec> default_generator_specs() {
    std::vector<SynthGeneratorSpec> specs(5);

    specs[0].name = "aurora";
    specs[0].palette_levels = 256;
    specs[0].texture = {TextureSpec::Kind::sine, 24.0, 0, 0.08};
    specs[0].noise = {NoiseSpec::Kind::white, 0.02};
    specs[0].grade = {0.80, 0.15, 0.05, 0.10, 0.85, 0.05, 0.05, 0.10, 0.85};
    specs[0].vignette_strength = 0.10;
    specs[0].seed_base = 11;

    specs[1].name = "brushwork";
    specs[1].palette_levels = 24;
    specs[1].texture = {TextureSpec::Kind::none, 0.0, 0, 0.0};
    specs[1].noise = {NoiseSpec::Kind::lowpass, 0.04};
    specs[1].grade = {0.90, 0.05, 0.05, 0.05, 0.90, 0.05, 0.10, 0.10, 0.80};
    specs[1].vignette_strength = 0.0;
    specs[1].seed_base = 23;

    specs[2].name = "cascade";
    specs[2].palette_levels = 256;
    specs[2].texture = {TextureSpec::Kind::checker, 0.0, 5, 0.06};
    specs[2].noise = {NoiseSpec::Kind::white, 0.0};
    specs[2].grade = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};
    specs[2].vignette_strength = 0.35;
    specs[2].seed_base = 37;

    specs[3].name = "dune";
    specs[3].palette_levels = 96;
    specs[3].texture = {TextureSpec::Kind::sine, 44.0, 0, 0.05};
    specs[3].noise = {NoiseSpec::Kind::white, 0.05};
    specs[3].grade = {0.70, 0.20, 0.10, 0.15, 0.70, 0.15, 0.10, 0.20, 0.70};
    specs[3].vignette_strength = 0.0;
    specs[3].seed_base = 51;

    specs[4].name = "ember";
    specs[4].palette_levels = 256;
    specs[4].texture = {TextureSpec::Kind::none, 0.0, 0, 0.0};
    specs[4].noise = {NoiseSpec::Kind::white, 0.0};
    specs[4].grade = {0.60, 0.30, 0.10, 0.25, 0.60, 0.15, 0.15, 0.25, 0.60};
    specs[4].vignette_strength = 0.20;
    specs[4].seed_base = 67;

    return specs;
}

std::vector<SynthGeneratorSpec> load_generator_specs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_array()) throw ParseError(path + ": expected a JSON array of generator specs");
    std::vector<SynthGeneratorSpec> specs;
    for (const auto& js : j) {
        SynthGeneratorSpec s;
        s.name = js.at("name").get<std::string>();
        if (js.contains("palette_levels")) s.palette_levels = js["palette_levels"].get<int>();
        if (js.contains("texture")) {
            const auto& t = js["texture"];
            const std::string kind = t.value("kind", "none");
            if (kind == "none") s.texture.kind = TextureSpec::Kind::none;
            else if (kind == "sine") s.texture.kind = TextureSpec::Kind::sine;
            else if (kind == "checker") s.texture.kind = TextureSpec::Kind::checker;
            else throw ParseError(path + ": unknown texture kind " + kind);
            s.texture.frequency = t.value("frequency", 0.0);
            s.texture.cell = t.value("cell", 0);
            s.texture.amplitude = t.value("amplitude", 0.0);
        }
        if (js.contains("noise")) {
            const auto& n = js["noise"];
            const std::string kind = n.value("kind", "white");
            if (kind == "white") s.noise.kind = NoiseSpec::Kind::white;
            else if (kind == "lowpass") s.noise.kind = NoiseSpec::Kind::lowpass;
            else throw ParseError(path + ": unknown noise kind " + kind);
            s.noise.sigma = n.value("sigma", 0.0);
        }
        if (js.contains("grade")) {
            const auto g = js["grade"].get<std::vector<double>>();
            if (g.size() != 9) throw ParseError(path + ": grade must have 9 entries");
            std::copy(g.begin(), g.end(), s.grade.begin());
        }
        if (js.contains("vignette_strength"))
            s.vignette_strength = js["vignette_strength"].get<double>();
        if (js.contains("seed_base")) s.seed_base = js["seed_base"].get<uint64_t>();
        validate_spec(s);
        specs.push_back(std::move(s));
    }
    return specs;
}

void save_generator_specs(const std::vector<SynthGeneratorSpec>& specs,
                          const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : specs) {
        nlohmann::json js;
        js["name"] = s.name;
        js["palette_levels"] = s.palette_levels;
        nlohmann::json t;
        switch (s.texture.kind) {
            case TextureSpec::Kind::none: t["kind"] = "none"; break;
            case TextureSpec::Kind::sine: t["kind"] = "sine"; break;
            case TextureSpec::Kind::checker: t["kind"] = "checker"; break;
        }
        t["frequency"] = s.texture.frequency;
        t["cell"] = s.texture.cell;
        t["amplitude"] = s.texture.amplitude;
        js["texture"] = t;
        js["noise"] = {{"kind", s.noise.kind == NoiseSpec::Kind::white ? "white" : "lowpass"},
                       {"sigma", s.noise.sigma}};
        js["grade"] = std::vector<double>(s.grade.begin(), s.grade.end());
        js["vignette_strength"] = s.vignette_strength;
        js["seed_base"] = s.seed_base;
        j.push_back(std::move(js));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write spec file: " + path);
    out << j.dump(2) << "\n";
}

Image random_blob_mask(int width, int height, double target_ratio, uint64_t seed) {
    if (width < 1 || height < 1) throw ValidationError("random_blob_mask: empty dimensions");
    if (!(target_ratio >= 0.0 && target_ratio <= 1.0))
        throw ValidationError("random_blob_mask: target_ratio out of [0,1]");
    const size_t total = static_cast<size_t>(width) * height;
    const size_t want = static_cast<size_t>(std::llround(target_ratio * double(total)));
    Image mask(width, height, 1, 0.0);
    if (want == 0) return mask;

    SplitMix64 rng(seed);
    // Randomized flood growth from a few seed points: pop a random frontier
    // pixel, mark it, push unmarked neighbors.
    std::vector<int> frontier;
    std::vector<uint8_t> state(total, 0);  // 0 untouched, 1 queued, 2 marked
    const int seeds = 1 + static_cast<int>(rng.next_below(3));
    for (int s = 0; s < seeds; ++s) {
        const int x = static_cast<int>(rng.next_below(width));
        const int y = static_cast<int>(rng.next_below(height));
        const int idx = y * width + x;
        if (!state[idx]) {
            state[idx] = 1;
            frontier.push_back(idx);
        }
    }
    size_t marked = 0;
    while (marked < want) {
        if (frontier.empty()) {  // corpus fully flooded pockets; reseed
            const int idx = static_cast<int>(rng.next_below(total));
            if (state[idx] == 2) continue;
            state[idx] = 1;
            frontier.push_back(idx);
        }
        const size_t pick = rng.next_below(frontier.size());
        const int idx = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        if (state[idx] == 2) continue;
        state[idx] = 2;
        mask.data[idx] = 1.0;
        ++marked;
        const int x = idx % width, y = idx / width;
        const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (auto& n : nb) {
            if (n[0] < 0 || n[0] >= width || n[1] < 0 || n[1] >= height) continue;
            const int nidx = n[1] * width + n[0];
            if (state[nidx] == 0) {
                state[nidx] = 1;
                frontier.push_back(nidx);
            }
        }
    }
    return mask;
}

}  // namespace attrikit
