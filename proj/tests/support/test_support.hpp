#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "platesift/image.hpp"

namespace platesift::testing {

/// Smooth random texture: a sum of Gaussian bumps of mixed sign and size.
inline GrayImage textured_image(int width, int height, std::uint64_t seed, int bumps = 180) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, width - 1.0);
    std::uniform_real_distribution<double> uy(0.0, height - 1.0);
    std::uniform_real_distribution<double> us(2.0, 7.0);
    std::uniform_real_distribution<double> ua(-0.5, 0.5);
    std::vector<double> field(static_cast<std::size_t>(width) * height, 0.0);
    for (int b = 0; b < bumps; ++b) {
        const double cx = ux(rng), cy = uy(rng), s = us(rng), a = ua(rng);
        const int r = static_cast<int>(std::ceil(3.0 * s));
        for (int y = std::max(0, static_cast<int>(cy) - r); y <= std::min(height - 1, static_cast<int>(cy) + r); ++y)
            for (int x = std::max(0, static_cast<int>(cx) - r); x <= std::min(width - 1, static_cast<int>(cx) + r); ++x)
                field[static_cast<std::size_t>(y) * width + x] +=
                    a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * s * s));
    }
    GrayImage img(width, height);
    for (std::size_t i = 0; i < field.size(); ++i) img.data()[i] = std::clamp(0.5 + field[i], 0.0, 1.0);
    return img;
}

/// Isotropic Gaussian spot of the given sigma on a flat background.
inline GrayImage gaussian_spot(int width, int height, double cx, double cy, double sigma, double amplitude = 0.8,
                               double background = 0.1) {
    GrayImage img(width, height, background);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img.at(x, y) += amplitude * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * sigma * sigma));
    return img;
}

inline BinaryImage random_binary(int width, int height, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution on(p);
    BinaryImage img(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.set(x, y, on(rng));
    return img;
}

/// Paints a w x h block of vertical stripes (period/2 dark, period/2 bright) at (x, y).
inline void paint_stripes(GrayImage& img, int x0, int y0, int w, int h, int period = 8, double dark = 0.15,
                          double bright = 0.85) {
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) img.at(x, y) = ((x - x0) % period) < period / 2 ? bright : dark;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("platesift_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace platesift::testing
