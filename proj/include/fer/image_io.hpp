#pragma once

#include <string>

#include "fer/image.hpp"

namespace fer {

// Binary PGM (P5), 8-bit. Comments after any header token are accepted.
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& img, const std::string& path);

// PNG via libpng. Color and palette images are converted with to_grayscale;
// 16-bit channels are stripped to 8.
GrayImage read_png_gray(const std::string& path);
void write_png_gray(const GrayImage& img, const std::string& path);

// Dispatches on the file's magic bytes (P5 or PNG signature).
GrayImage read_image_gray(const std::string& path);

}  // namespace fer
