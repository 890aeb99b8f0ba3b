#pragma once

#include <filesystem>

#include "platesift/image.hpp"

namespace platesift {

/// Binary PGM (P5, maxval 255).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Binary PPM (P6, maxval 255).
RgbImage read_ppm(const std::filesystem::path& path);

/// 8-bit grayscale or RGB(A) PNG; color input is converted with to_grayscale.
GrayImage read_png(const std::filesystem::path& path);

/// Dispatches on file magic: P5, P6 or PNG.
GrayImage read_image(const std::filesystem::path& path);

}  // namespace platesift
