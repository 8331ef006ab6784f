#pragma once

#include <cstdint>
#include <vector>

#include "fer/errors.hpp"

namespace fer {

// Single-channel 8-bit raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    static GrayImage filled(int width, int height, std::uint8_t value);

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // r,g,b triples

    static RgbImage filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

// Axis-aligned pixel rectangle; (x0, y0) top-left inclusive.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
};

// BT.601 luma: gray = round(0.299 r + 0.587 g + 0.114 b), round half up,
// clamped to [0, 255].
GrayImage to_grayscale(const RgbImage& img);

// Horizontal-edge Sobel (vertical intensity gradient), kernel rows
// (-1,-2,-1) / (0,0,0) / (1,2,1). Output pixel = min(255, |response|).
// The 1-pixel border where the window leaves the image is set to 0.
// Throws ImageTooSmall if either dimension < 3.
GrayImage sobel_horizontal(const GrayImage& img);

// Intersection of roi with [0, width) x [0, height); may have zero area.
Rect clamp_rect(const Rect& roi, int width, int height);

// Mean of pixel/255 over the ROI clamped to the image, in [0, 1].
// Throws EmptyRegion when the clamped ROI has no pixels.
double region_density(const GrayImage& edges, const Rect& roi);

}  // namespace fer
