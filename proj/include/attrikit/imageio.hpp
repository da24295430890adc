#pragma once

#include <string>

#include "attrikit/image.hpp"

namespace attrikit {

// Decodes a PNG or JPEG file to an RGB image with values in [0,1].
Image load_image(const std::string& path);

// Decodes a single-channel mask PNG; bytes > 127 map to 1.0, the rest to 0.0.
Image load_mask(const std::string& path);

// Writes an 8-bit PNG (grayscale for 1-channel, RGB for 3-channel inputs).
// Values are quantized with round(v*255).
void save_png(const Image& img, const std::string& path);

}  // namespace attrikit
