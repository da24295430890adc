#include <cmath>

#include <doctest.h>

#include "attrikit/errors.hpp"
#include "attrikit/pixelops.hpp"
#include "attrikit/prng.hpp"
#include "helpers.hpp"

using namespace attrikit;

namespace {

// Independent Catmull-Rom evaluation for the resize oracle.
double catmull_rom(double t) {
    t = std::abs(t);
    const double a = -0.5;
    if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
    if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
    return 0.0;
}

double oracle_resize_at(const Image& src, int out_w, int out_h, int dx, int dy, int c) {
    const double sx = (dx + 0.5) * src.width / double(out_w) - 0.5;
    const double sy = (dy + 0.5) * src.height / double(out_h) - 0.5;
    const int jx = static_cast<int>(std::floor(sx));
    const int jy = static_cast<int>(std::floor(sy));
    double acc = 0.0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            const int px = std::clamp(jx - 1 + m, 0, src.width - 1);
            const int py = std::clamp(jy - 1 + n, 0, src.height - 1);
            acc += catmull_rom(sx - (jx - 1 + m)) * catmull_rom(sy - (jy - 1 + n)) *
                   src.at(px, py, c);
        }
    return acc;
}

}  // namespace

TEST_CASE("resize_bicubic preserves constants and geometry") {
    const Image c = constant_image(448, 448, 3, 0.375);
    const Image out = resize_bicubic(c, 224);
    CHECK(out.width == 224);
    CHECK(out.height == 224);
    for (double v : out.data) CHECK(v == doctest::Approx(0.375).epsilon(1e-12));

    const Image rect = constant_image(400, 200, 1, 0.5);
    const Image rout = resize_bicubic(rect, 224);
    CHECK(rout.width == 448);
    CHECK(rout.height == 224);
}

TEST_CASE("resize_bicubic matches independently evaluated Catmull-Rom weights") {
    Image grid(2, 2, 1);
    grid.at(0, 0, 0) = 0.1;
    grid.at(1, 0, 0) = 0.9;
    grid.at(0, 1, 0) = 0.4;
    grid.at(1, 1, 0) = 0.6;
    const Image out = resize_bicubic(grid, 4);
    REQUIRE(out.width == 4);
    REQUIRE(out.height == 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const double expect = std::clamp(oracle_resize_at(grid, 4, 4, x, y, 0), 0.0, 1.0);
            CHECK(out.at(x, y, 0) == doctest::Approx(expect).epsilon(1e-9));
        }
}

TEST_CASE("center_crop offsets follow the floor rule") {
    Image img(224, 224, 1, 0.0);
    CHECK(images_equal(center_crop(img, 224), img));

    Image odd(226, 226, 1, 0.0);
    odd.at(1, 1, 0) = 1.0;
    const Image c1 = center_crop(odd, 224);
    CHECK(c1.at(0, 0, 0) == 1.0);  // offset (1,1)

    Image even(225, 225, 1, 0.0);
    even.at(0, 0, 0) = 1.0;
    const Image c2 = center_crop(even, 224);
    CHECK(c2.at(0, 0, 0) == 1.0);  // offset (0,0)

    CHECK_THROWS_AS(center_crop(img, 300), ValidationError);
}

TEST_CASE("maybe_hflip follows the seed's first uniform draw") {
    const Image img = testutil::random_image(9, 7, 3, 42);

    uint64_t flip_seed = 0, keep_seed = 0;
    bool have_flip = false, have_keep = false;
    for (uint64_t s = 0; s < 64 && !(have_flip && have_keep); ++s) {
        SplitMix64 probe(s);
        if (probe.next_double() < 0.5) {
            flip_seed = s;
            have_flip = true;
        } else {
            keep_seed = s;
            have_keep = true;
        }
    }
    REQUIRE(have_flip);
    REQUIRE(have_keep);

    CHECK(images_equal(maybe_hflip(img, flip_seed), flip_horizontal(img)));
    CHECK(images_equal(maybe_hflip(img, keep_seed), img));
    // involution
    CHECK(images_equal(maybe_hflip(maybe_hflip(img, flip_seed), flip_seed), img));

    const Image sym = constant_image(8, 8, 1, 0.25);
    for (uint64_t s : {0ULL, 1ULL, 2ULL, 3ULL})
        CHECK(images_equal(maybe_hflip(sym, s), sym));
}

TEST_CASE("crop_patch composes resize, crop, resize") {
    const Image c = constant_image(64, 48, 3, 0.7);
    for (int k : {2, 4, 8, 16, 32, 64, 128, 256}) {
        PatchSpec spec;
        spec.k = k;
        const Image out = crop_patch(c, spec);
        CHECK(out.width == 224);
        CHECK(out.height == 224);
        CHECK(out.data.size() == 224u * 224u * 3u);
        for (double v : out.data) CHECK(v == doctest::Approx(0.7).epsilon(1e-9));
    }

    const Image fix = testutil::random_image(40, 40, 1, 7);
    PatchSpec tiny;
    tiny.k = 2;
    const Image got = crop_patch(fix, tiny);
    const Image manual =
        resize_bicubic_to(center_crop(resize_bicubic(fix, 512), 2), 224, 224);
    CHECK(images_equal(got, manual));

    // degenerate crop: k == intermediate_edge leaves only the two resizes
    PatchSpec degen;
    degen.k = 256;
    degen.intermediate_edge = 256;
    const Image sq = testutil::random_image(32, 32, 1, 8);
    CHECK(images_equal(crop_patch(sq, degen),
                       resize_bicubic_to(resize_bicubic(sq, 256), 224, 224)));

    PatchSpec bad;
    bad.k = 3;
    CHECK_THROWS_AS(validate_patch_spec(bad), ValidationError);
    bad.k = 512;
    CHECK_THROWS_AS(validate_patch_spec(bad), ValidationError);
    bad.k = 256;
    bad.intermediate_edge = 128;
    CHECK_THROWS_AS(validate_patch_spec(bad), ValidationError);
}

TEST_CASE("gaussian_blur: DC preservation and impulse response") {
    const Image c = constant_image(16, 16, 3, 0.42);
    const Image blurred = gaussian_blur(c, 1.0, 3);
    for (double v : blurred.data) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));

    // impulse at the center of a 9x9 image; response = outer product of the
    // normalized 1-D kernel
    Image impulse(9, 9, 1, 0.0);
    impulse.at(4, 4, 0) = 1.0;
    const Image resp = gaussian_blur(impulse, 1.0, 3);
    std::vector<double> k(4);
    double sum = 0.0;
    for (int d = -3; d <= 3; ++d) sum += std::exp(-d * d / 2.0);
    for (int d = 0; d <= 3; ++d) k[static_cast<size_t>(d)] = std::exp(-d * d / 2.0) / sum;
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) {
            const int dx = std::abs(x - 4), dy = std::abs(y - 4);
            const double expect =
                (dx <= 3 && dy <= 3) ? k[static_cast<size_t>(dx)] * k[static_cast<size_t>(dy)]
                                     : 0.0;
            CHECK(std::abs(resp.at(x, y, 0) - expect) <= 1e-9);
        }

    CHECK_THROWS_AS(gaussian_blur(c, 0.0, 3), ValidationError);
    CHECK_THROWS_AS(gaussian_blur(c, -1.0, 3), ValidationError);
}

TEST_CASE("gaussian_blur semigroup: twice sigma=1 approximates once sigma=sqrt(2)") {
    const Image smooth = testutil::smooth_image(32, 32, 1, 3);
    const Image twice = gaussian_blur(gaussian_blur(smooth, 1.0, 4), 1.0, 4);
    const Image once = gaussian_blur(smooth, std::sqrt(2.0), 4);
    double max_dev = 0.0;
    for (size_t i = 0; i < twice.data.size(); ++i)
        max_dev = std::max(max_dev, std::abs(twice.data[i] - once.data[i]));
    CHECK(max_dev <= 2e-2);
}

TEST_CASE("gaussian_blur range containment and exact flip commutation") {
    const Image img = testutil::random_image(20, 14, 3, 11);
    const Image out = gaussian_blur(img, 1.3, 3);
    for (int c = 0; c < 3; ++c) {
        double in_min = 1.0, in_max = 0.0, out_min = 1.0, out_max = 0.0;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                in_min = std::min(in_min, img.at(x, y, c));
                in_max = std::max(in_max, img.at(x, y, c));
                out_min = std::min(out_min, out.at(x, y, c));
                out_max = std::max(out_max, out.at(x, y, c));
            }
        CHECK(out_min >= in_min);
        CHECK(out_max <= in_max);
    }
    CHECK(images_equal(gaussian_blur(flip_horizontal(img), 1.3, 3),
                       flip_horizontal(gaussian_blur(img, 1.3, 3))));
}

namespace {

// Brute-force bilateral oracle, written independently of the library path.
Image oracle_bilateral(const Image& img, double ss, double sr, int radius) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0, norm = 0.0;
                const double center = img.at(x, y, c);
                for (int dy = -radius; dy <= radius; ++dy)
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int sxp = std::clamp(x + dx, 0, img.width - 1);
                        const int syp = std::clamp(y + dy, 0, img.height - 1);
                        const double v = img.at(sxp, syp, c);
                        const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * ss * ss)) *
                                         std::exp(-(v - center) * (v - center) / (2.0 * sr * sr));
                        acc += w * v;
                        norm += w;
                    }
                out.at(x, y, c) = acc / norm;
            }
    return out;
}

}  // namespace

TEST_CASE("bilateral_filter: constant, brute-force oracle, step edge") {
    const Image c = constant_image(12, 12, 3, 0.66);
    const Image fc = bilateral_filter(c, 2.0, 0.1, 3);
    for (double v : fc.data) CHECK(v == doctest::Approx(0.66).epsilon(1e-12));

    // 8x8 step edge: 0.2 left half, 0.8 right half
    Image step(8, 8, 1);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) step.at(x, y, 0) = x < 4 ? 0.2 : 0.8;
    const Image filtered = bilateral_filter(step, 1.5, 0.05, 2);
    const Image oracle = oracle_bilateral(step, 1.5, 0.05, 2);
    for (size_t i = 0; i < filtered.data.size(); ++i)
        CHECK(filtered.data[i] == doctest::Approx(oracle.data[i]).epsilon(1e-12));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            if (x < 4)
                CHECK(filtered.at(x, y, 0) < 0.5);
            else
                CHECK(filtered.at(x, y, 0) > 0.5);
        }

    CHECK_THROWS_AS(bilateral_filter(c, 0.0, 0.1, 3), ValidationError);
    CHECK_THROWS_AS(bilateral_filter(c, 2.0, 0.0, 3), ValidationError);
}

TEST_CASE("bilateral_filter large sigma_range limit equals gaussian blur") {
    const Image img = testutil::random_image(14, 10, 3, 23);
    const Image bil = bilateral_filter(img, 2.0, 1e6, 4);
    const Image gauss = gaussian_blur(img, 2.0, 4);
    for (size_t i = 0; i < bil.data.size(); ++i)
        CHECK(std::abs(bil.data[i] - gauss.data[i]) <= 1e-6);
}

TEST_CASE("bilateral_filter commutes exactly with horizontal flip") {
    const Image img = testutil::random_image(11, 9, 3, 31);
    CHECK(images_equal(bilateral_filter(flip_horizontal(img), 1.7, 0.2, 2),
                       flip_horizontal(bilateral_filter(img, 1.7, 0.2, 2))));
}

TEST_CASE("add_gaussian_noise: identity, determinism, statistics") {
    const Image img = testutil::random_image(8, 8, 3, 5);
    CHECK(images_equal(add_gaussian_noise(img, 0.0, 9), img));
    CHECK(images_equal(add_gaussian_noise(img, 0.05, 9), add_gaussian_noise(img, 0.05, 9)));

    const Image base = constant_image(64, 64, 3, 0.5);
    const Image noisy = add_gaussian_noise(base, 0.05, 77);
    double mean = 0.0;
    for (double v : noisy.data) mean += v;
    mean /= static_cast<double>(noisy.data.size());
    double var = 0.0;
    for (double v : noisy.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(noisy.data.size());
    const double stddev = std::sqrt(var);
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));  // 0.5 +- 0.005
    CHECK(std::abs(mean - 0.5) <= 0.005);
    CHECK(stddev >= 0.04);
    CHECK(stddev <= 0.06);
}

TEST_CASE("canny: constant image, binary output, threshold validation") {
    const Image c = constant_image(32, 32, 3, 0.8);
    const Image edges = canny(c, 0.1, 0.2);
    CHECK(edges.channels == 1);
    for (double v : edges.data) CHECK(v == 0.0);

    const Image noisy = testutil::random_image(24, 24, 3, 13);
    for (double v : canny(noisy, 0.1, 0.2).data) CHECK((v == 0.0 || v == 1.0));

    CHECK_THROWS_AS(canny(c, 0.3, 0.2), ValidationError);
    CHECK_THROWS_AS(canny(c, 0.2, 0.2), ValidationError);
}

TEST_CASE("canny recovers a synthetic square boundary") {
    const int n = 64, lo = 16, hi = 48;  // square [lo,hi)
    Image img(n, n, 1, 0.2);
    for (int y = lo; y < hi; ++y)
        for (int x = lo; x < hi; ++x) img.at(x, y, 0) = 0.8;
    const Image edges = canny(img, 0.1, 0.2);

    auto inside = [&](int x, int y) { return x >= lo && x < hi && y >= lo && y < hi; };
    std::vector<std::pair<int, int>> ring;  // inner boundary of the square
    for (int y = lo; y < hi; ++y)
        for (int x = lo; x < hi; ++x)
            if (!inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1))
                ring.emplace_back(x, y);

    auto edge_near = [&](int x, int y, int tol) {
        for (int dy = -tol; dy <= tol; ++dy)
            for (int dx = -tol; dx <= tol; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (nx >= 0 && nx < n && ny >= 0 && ny < n && edges.at(nx, ny, 0) == 1.0)
                    return true;
            }
        return false;
    };

    size_t recalled = 0;
    for (auto [x, y] : ring)
        if (edge_near(x, y, 1)) ++recalled;
    const double recall = static_cast<double>(recalled) / static_cast<double>(ring.size());
    CHECK(recall >= 0.95);

    // every detected edge pixel sits within 1 px of the geometric boundary
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (edges.at(x, y, 0) != 1.0) continue;
            bool near_ring = false;
            for (int dy = -1; dy <= 1 && !near_ring; ++dy)
                for (int dx = -1; dx <= 1 && !near_ring; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < lo || nx >= hi || ny < lo || ny >= hi) continue;
                    if (!inside(nx - 1, ny) || !inside(nx + 1, ny) || !inside(nx, ny - 1) ||
                        !inside(nx, ny + 1))
                        near_ring = true;
                }
            CHECK(near_ring);
        }
}

TEST_CASE("canny depends only on luma") {
    Image img = testutil::random_image(24, 24, 3, 99);
    for (double& v : img.data) v = 0.2 + 0.6 * v;  // headroom for the recolor shift
    // shift channels while keeping 0.299R + 0.587G + 0.114B unchanged
    Image recolored = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double t = 0.05;
            recolored.at(x, y, 0) = img.at(x, y, 0) + 0.114 * t;
            recolored.at(x, y, 2) = img.at(x, y, 2) - 0.299 * t;
        }
    // guard: the construction really preserved luma to rounding noise
    const Image l1 = to_luma(img), l2 = to_luma(recolored);
    for (size_t i = 0; i < l1.data.size(); ++i)
        REQUIRE(std::abs(l1.data[i] - l2.data[i]) < 1e-12);
    CHECK(images_equal(canny(img, 0.1, 0.2), canny(recolored, 0.1, 0.2)));
}

TEST_CASE("every pixelop returns a valid image") {
    const Image img = testutil::random_image(18, 12, 3, 55);
    CHECK_NOTHROW(validate_image(resize_bicubic(img, 9)));
    CHECK_NOTHROW(validate_image(center_crop(img, 10)));
    CHECK_NOTHROW(validate_image(maybe_hflip(img, 4)));
    CHECK_NOTHROW(validate_image(gaussian_blur(img, 1.0, 3)));
    CHECK_NOTHROW(validate_image(bilateral_filter(img, 2.0, 0.1, 2)));
    CHECK_NOTHROW(validate_image(add_gaussian_noise(img, 0.05, 3)));
    CHECK_NOTHROW(validate_image(canny(img, 0.1, 0.2)));
}

TEST_CASE("perturb spec parsing") {
    const PerturbSpec blur = parse_perturb("gaussian_blur:sigma=1.5,radius=4");
    CHECK(blur.kind == PerturbSpec::Kind::gaussian_blur);
    CHECK(blur.sigma == 1.5);
    CHECK(blur.radius == 4);

    const PerturbSpec defaults = parse_perturb("bilateral");
    CHECK(defaults.kind == PerturbSpec::Kind::bilateral);
    CHECK(defaults.sigma_space == 2.0);
    CHECK(defaults.sigma_range == 0.1);
    CHECK(defaults.radius == 4);

    const PerturbSpec noise = parse_perturb("gaussian_noise:sigma=0.02,seed=12");
    CHECK(noise.sigma == 0.02);
    CHECK(noise.seed == 12);

    CHECK_THROWS_AS(parse_perturb("sharpen:amount=2"), ParseError);
    CHECK_THROWS_AS(parse_perturb("gaussian_blur:sigma"), ParseError);
    CHECK_THROWS_AS(parse_perturb("gaussian_blur:zoom=1"), ParseError);

    const Image img = testutil::random_image(10, 10, 3, 1);
    CHECK(images_equal(apply_perturb(img, blur), gaussian_blur(img, 1.5, 4)));
}
