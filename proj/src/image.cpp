#include "attrikit/image.hpp"

#include <cmath>
#include <string>

#include "attrikit/errors.hpp"

namespace attrikit {

void validate_image(const Image& img, const char* context) {
    if (img.width < 1 || img.height < 1)
        throw ValidationError(std::string(context) + ": empty dimensions");
    if (img.channels != 1 && img.channels != 3)
        throw ValidationError(std::string(context) + ": channels must be 1 or 3, got " +
                              std::to_string(img.channels));
    const size_t expect = static_cast<size_t>(img.width) * img.height * img.channels;
    if (img.data.size() != expect)
        throw ValidationError(std::string(context) + ": data length " +
                              std::to_string(img.data.size()) + " != " + std::to_string(expect));
    for (double v : img.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ValidationError(std::string(context) + ": value out of [0,1]: " +
                                  std::to_string(v));
    }
}

Image constant_image(int w, int h, int c, double value) {
    return Image(w, h, c, value);
}

Image flip_horizontal(const Image& img) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    return out;
}

Image to_luma(const Image& img) {
    if (img.channels == 1) return img;
    Image out(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y, 0) =
                0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
    return out;
}

Image to_rgb(const Image& img) {
    if (img.channels == 3) return img;
    Image out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, 0);
    return out;
}

bool images_equal(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height && a.channels == b.channels &&
           a.data == b.data;
}

}  // namespace attrikit
