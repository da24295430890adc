#include "attrikit/imageio.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>

#include "attrikit/errors.hpp"

namespace attrikit {

Image load_image(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
    if (m.empty()) throw IoError("cannot decode image: " + path);
    Image out(m.cols, m.rows, 3);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < m.cols; ++x) {
            // OpenCV stores BGR
            out.at(x, y, 0) = row[x][2] / 255.0;
            out.at(x, y, 1) = row[x][1] / 255.0;
            out.at(x, y, 2) = row[x][0] / 255.0;
        }
    }
    return out;
}

Image load_mask(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (m.empty()) throw IoError("cannot decode mask: " + path);
    Image out(m.cols, m.rows, 1);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) out.at(x, y, 0) = row[x] > 127 ? 1.0 : 0.0;
    }
    return out;
}

static uint8_t quantize8(double v) {
    double q = std::lround(v * 255.0);
    if (q < 0) q = 0;
    if (q > 255) q = 255;
    return static_cast<uint8_t>(q);
}

void save_png(const Image& img, const std::string& path) {
    if (img.empty()) throw ValidationError("save_png: empty image");
    cv::Mat m;
    if (img.channels == 1) {
        m.create(img.height, img.width, CV_8UC1);
        for (int y = 0; y < img.height; ++y) {
            auto* row = m.ptr<uint8_t>(y);
            for (int x = 0; x < img.width; ++x) row[x] = quantize8(img.at(x, y, 0));
        }
    } else {
        m.create(img.height, img.width, CV_8UC3);
        for (int y = 0; y < img.height; ++y) {
            auto* row = m.ptr<cv::Vec3b>(y);
            for (int x = 0; x < img.width; ++x) {
                row[x][2] = quantize8(img.at(x, y, 0));
                row[x][1] = quantize8(img.at(x, y, 1));
                row[x][0] = quantize8(img.at(x, y, 2));
            }
        }
    }
    if (!cv::imwrite(path, m)) throw IoError("cannot write PNG: " + path);
}

}  // namespace attrikit
