#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "attrikit/errors.hpp"
#include "attrikit/features.hpp"
#include "attrikit/prng.hpp"
#include "attrikit/style.hpp"
#include "helpers.hpp"

using namespace attrikit;

namespace {

FeatureMap random_feature_map(int h, int w, int n, uint64_t seed) {
    FeatureMap f(h, w, n);
    SplitMix64 rng(seed);
    for (float& v : f.data) v = static_cast<float>(rng.next_signed());
    return f;
}

// Brute-force cosine oracle over flattened channels, written independently.
double oracle_cosine(const FeatureMap& f, int i, int j) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const double a = f.at(x, y, i);
            const double b = f.at(x, y, j);
            dot += a * b;
            ni += a * a;
            nj += b * b;
        }
    return dot / (std::sqrt(ni) * std::sqrt(nj));
}

}  // namespace

TEST_CASE("gram: orthogonal channels give the identity") {
    FeatureMap f(1, 2, 2);
    f.at(0, 0, 0) = 1.0f;  // channel 0 = (1, 0)
    f.at(1, 0, 1) = 1.0f;  // channel 1 = (0, 1)
    const GramMatrix g = gram(f);
    CHECK(g.at(0, 0) == 1.0);
    CHECK(g.at(1, 1) == 1.0);
    CHECK(g.at(0, 1) == 0.0);
    CHECK(g.at(1, 0) == 0.0);
}

TEST_CASE("gram: duplicated channel has unit off-diagonal") {
    FeatureMap f(2, 2, 2);
    SplitMix64 rng(4);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            const float v = static_cast<float>(rng.next_signed());
            f.at(x, y, 0) = v;
            f.at(x, y, 1) = v;
        }
    const GramMatrix g = gram(f);
    CHECK(g.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gram matches brute-force cosine on a 2x2x3 fixture") {
    const FeatureMap f = random_feature_map(2, 2, 3, 17);
    const GramMatrix g = gram(f);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double expect = i == j ? 1.0 : oracle_cosine(f, i, j);
            CHECK(std::abs(g.at(i, j) - expect) <= 1e-6);
        }
}

TEST_CASE("gram: zero-norm channels get unit diagonal and zero rows") {
    FeatureMap f = random_feature_map(2, 3, 3, 9);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) f.at(x, y, 1) = 0.0f;
    const GramMatrix g = gram(f);
    CHECK(g.at(1, 1) == 1.0);
    CHECK(g.at(0, 1) == 0.0);
    CHECK(g.at(1, 0) == 0.0);
    CHECK(g.at(1, 2) == 0.0);
}

TEST_CASE("gram invariants over random feature maps") {
    SplitMix64 dims(1234);
    for (int trial = 0; trial < 50; ++trial) {
        const int h = 1 + static_cast<int>(dims.next_below(5));
        const int w = 1 + static_cast<int>(dims.next_below(5));
        const int n = 1 + static_cast<int>(dims.next_below(7));
        FeatureMap f = random_feature_map(h, w, n, 1000 + trial);
        if (trial % 5 == 0 && n > 1)  // sprinkle zero channels
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) f.at(x, y, 0) = 0.0f;
        const GramMatrix g = gram(f);
        for (int i = 0; i < n; ++i) {
            CHECK(g.at(i, i) == 1.0);
            for (int j = 0; j < n; ++j) {
                CHECK(std::abs(g.at(i, j) - g.at(j, i)) <= 1e-6);
                CHECK(g.at(i, j) >= -1.0 - 1e-6);
                CHECK(g.at(i, j) <= 1.0 + 1e-6);
            }
        }
    }
}

TEST_CASE("gram scale invariance is exact for power-of-two scales") {
    const FeatureMap f = random_feature_map(3, 4, 5, 21);
    for (float c : {2.0f, 0.25f, 8.0f}) {
        FeatureMap scaled = f;
        for (float& v : scaled.data) v *= c;
        CHECK(gram(scaled).values == gram(f).values);
    }
}

TEST_CASE("gram is invariant under a shared spatial permutation") {
    const FeatureMap f = random_feature_map(3, 3, 4, 33);
    std::vector<size_t> perm(f.cell_count());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    SplitMix64 rng(5);
    for (size_t i = perm.size(); i-- > 1;) std::swap(perm[i], perm[rng.next_below(i + 1)]);

    FeatureMap permuted(f.height, f.width, f.channels);
    for (size_t p = 0; p < perm.size(); ++p)
        for (int c = 0; c < f.channels; ++c)
            permuted.data[perm[p] * f.channels + static_cast<size_t>(c)] =
                f.data[p * f.channels + static_cast<size_t>(c)];

    const GramMatrix a = gram(f);
    const GramMatrix b = gram(permuted);
    for (size_t i = 0; i < a.values.size(); ++i)
        CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-9);
}

TEST_CASE("style_vector dims and layout") {
    const Backbone bb = build_backbone({});
    const FeaturePyramid p = extract_pyramid(bb, testutil::random_image(16, 16, 3, 2));
    const StyleVector v = style_vector(p);
    CHECK(v.dim() == 136u + 528u + 2080u);  // 16,32,64 channels
    CHECK(v.dim() == 2744u);
    REQUIRE(v.layout.size() == 3);
    CHECK(v.layout[0].n == 16);
    CHECK(v.layout[0].encoded_length == 136u);
    CHECK(v.layout[2].encoded_length == 2080u);

    const StyleVector single = style_vector(p, {1});
    CHECK(single.dim() == 528u);

    CHECK_THROWS_AS(style_vector(p, {3}), ValidationError);
    CHECK_THROWS_AS(style_vector(p, {-1}), ValidationError);
}

TEST_CASE("style_vector triangles reconstruct the per-layer grams exactly") {
    const Backbone bb = build_backbone({});
    const FeaturePyramid p = extract_pyramid(bb, testutil::random_image(16, 16, 3, 6));
    const StyleVector v = style_vector(p);
    for (size_t slot = 0; slot < v.layout.size(); ++slot) {
        const GramMatrix direct = gram(p.layers[static_cast<size_t>(v.layout[slot].layer_index)]);
        const GramMatrix rebuilt = gram_from_triangle(v, slot);
        CHECK(rebuilt.values == direct.values);
    }
}

TEST_CASE("average_gram") {
    const FeatureMap f1 = random_feature_map(2, 2, 3, 41);
    const FeatureMap f2 = random_feature_map(2, 2, 3, 42);
    const GramMatrix g1 = gram(f1);
    const GramMatrix g2 = gram(f2);

    CHECK(average_gram({g1}).values == g1.values);

    GramMatrix eye;
    eye.n = 3;
    eye.values = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const GramMatrix avg_eye = average_gram({eye, eye});
    CHECK(avg_eye.values == eye.values);

    const GramMatrix avg = average_gram({g1, g2});
    for (size_t i = 0; i < avg.values.size(); ++i)
        CHECK(avg.values[i] == doctest::Approx((g1.values[i] + g2.values[i]) / 2.0)
                                   .epsilon(1e-15));

    GramMatrix small;
    small.n = 2;
    small.values = {1, 0, 0, 1};
    CHECK_THROWS_AS(average_gram({g1, small}), ValidationError);
    CHECK_THROWS_AS(average_gram({}), ValidationError);
}

TEST_CASE("gram_density puts mass where the off-diagonals are") {
    GramMatrix eye;
    eye.n = 4;
    eye.values.assign(16, 0.0);
    for (int i = 0; i < 4; ++i) eye.at(i, i) = 1.0;
    const Histogram h = gram_density(eye, 8, false);
    CHECK(h.integral() == doctest::Approx(1.0).epsilon(1e-9));
    // all 12 off-diagonal zeros fall in the bin containing 0
    const int zero_bin = 4;  // [-1,1) in 8 bins -> bin 4 covers [0, 0.25)
    for (int b = 0; b < 8; ++b) {
        if (b == zero_bin)
            CHECK(h.density[static_cast<size_t>(b)] == doctest::Approx(4.0));  // 1/bin_width
        else
            CHECK(h.density[static_cast<size_t>(b)] == 0.0);
    }

    GramMatrix ones;
    ones.n = 3;
    ones.values.assign(9, 1.0);
    const Histogram h1 = gram_density(ones, 8, true);
    CHECK(h1.log_scale);
    CHECK(h1.density[7] == doctest::Approx(4.0));
    CHECK(h1.integral() == doctest::Approx(1.0).epsilon(1e-9));
}
