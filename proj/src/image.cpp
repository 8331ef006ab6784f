#include "fer/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace fer {

GrayImage GrayImage::filled(int width, int height, std::uint8_t value) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, value);
    return img;
}

RgbImage RgbImage::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    RgbImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const double r = img.pixels[3 * i];
        const double g = img.pixels[3 * i + 1];
        const double b = img.pixels[3 * i + 2];
        const double luma = std::floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5);
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(luma, 0.0, 255.0));
    }
    return out;
}

GrayImage sobel_horizontal(const GrayImage& img) {
    if (img.width < 3 || img.height < 3) {
        throw ImageTooSmall("sobel_horizontal needs at least a 3x3 image, got " +
                            std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    GrayImage out = GrayImage::filled(img.width, img.height, 0);
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            const int top = img.at(x - 1, y - 1) + 2 * img.at(x, y - 1) + img.at(x + 1, y - 1);
            const int bottom = img.at(x - 1, y + 1) + 2 * img.at(x, y + 1) + img.at(x + 1, y + 1);
            out.at(x, y) = static_cast<std::uint8_t>(std::min(255, std::abs(bottom - top)));
        }
    }
    return out;
}

Rect clamp_rect(const Rect& roi, int width, int height) {
    const int x0 = std::clamp(roi.x0, 0, width);
    const int y0 = std::clamp(roi.y0, 0, height);
    const long long rx1 = static_cast<long long>(roi.x0) + std::max(roi.w, 0);
    const long long ry1 = static_cast<long long>(roi.y0) + std::max(roi.h, 0);
    const int x1 = static_cast<int>(std::clamp<long long>(rx1, x0, width));
    const int y1 = static_cast<int>(std::clamp<long long>(ry1, y0, height));
    return {x0, y0, x1 - x0, y1 - y0};
}

double region_density(const GrayImage& edges, const Rect& roi) {
    const Rect r = clamp_rect(roi, edges.width, edges.height);
    if (r.area() == 0) {
        throw EmptyRegion("ROI does not overlap the image");
    }
    long long sum = 0;
    for (int y = r.y0; y < r.y0 + r.h; ++y) {
        for (int x = r.x0; x < r.x0 + r.w; ++x) {
            sum += edges.at(x, y);
        }
    }
    return static_cast<double>(sum) / (255.0 * static_cast<double>(r.area()));
}

}  // namespace fer
