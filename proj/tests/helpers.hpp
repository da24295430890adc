#pragma once

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "attrikit/image.hpp"
#include "attrikit/prng.hpp"

namespace testutil {

// Unique scratch directory under the system temp path, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("attrikit_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline attrikit::Image random_image(int w, int h, int c, uint64_t seed) {
    attrikit::Image img(w, h, c);
    attrikit::SplitMix64 rng(seed);
    for (double& v : img.data) v = rng.next_double();
    return img;
}

// Smooth low-frequency fixture: bilinear blend of four corner values.
inline attrikit::Image smooth_image(int w, int h, int c, uint64_t seed) {
    attrikit::SplitMix64 rng(seed);
    double corners[4];
    for (double& v : corners) v = rng.next_double();
    attrikit::Image img(w, h, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double fx = w > 1 ? double(x) / (w - 1) : 0.0;
            const double fy = h > 1 ? double(y) / (h - 1) : 0.0;
            const double v = (1 - fy) * ((1 - fx) * corners[0] + fx * corners[1]) +
                             fy * ((1 - fx) * corners[2] + fx * corners[3]);
            for (int ch = 0; ch < c; ++ch) img.at(x, y, ch) = v;
        }
    return img;
}

inline std::vector<uint8_t> slurp(const std::string& path) {
    std::vector<uint8_t> bytes;
    FILE* f = fopen(path.c_str(), "rb");
    if (!f) return bytes;
    unsigned char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) bytes.insert(bytes.end(), buf, buf + n);
    fclose(f);
    return bytes;
}

}  // namespace testutil
