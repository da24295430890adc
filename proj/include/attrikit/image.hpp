#pragma once

#include <cstdint>
#include <vector>

namespace attrikit {

// Row-major interleaved image, values in [0,1]. channels is 1 or 3.
// Index layout: data[(y*width + x)*channels + c].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool empty() const { return data.empty(); }
};

// Throws ValidationError when dimensions disagree with the payload or any
// value is non-finite / outside [0,1].
void validate_image(const Image& img, const char* context = "image");

Image constant_image(int w, int h, int c, double value);

// Exact horizontal mirror (no arithmetic on values).
Image flip_horizontal(const Image& img);

// Rec.601 luma; 1-channel input passes through unchanged.
Image to_luma(const Image& img);

// Replicates a 1-channel image to 3 channels; 3-channel input is returned as-is.
Image to_rgb(const Image& img);

bool images_equal(const Image& a, const Image& b);

}  // namespace attrikit
