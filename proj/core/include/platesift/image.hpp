#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace platesift {

/// Single-channel raster with intensities in [0, 1], row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);
    GrayImage(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    double at(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& at(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Edge-replicating access; coordinates outside the raster are clamped.
    double clamped(int x, int y) const noexcept;

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// 8-bit interleaved RGB raster (R, G, B per pixel).
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;
};

class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool at(int x, int y) const noexcept { return mask_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) noexcept { mask_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::size_t count() const noexcept;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> mask_;
};

/// Inclusive pixel rectangle.
struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const noexcept { return x_max - x_min + 1; }
    int height() const noexcept { return y_max - y_min + 1; }
    long long area() const noexcept { return static_cast<long long>(width()) * height(); }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Blob {
    int label = 0;
    long long area = 0;
    BoundingBox bbox;
    long long fill_count = 0;

    friend bool operator==(const Blob&, const Blob&) = default;
};

struct FixedThreshold {
    double t = 0.5;
};
struct OtsuThreshold {};
using ThresholdMethod = std::variant<FixedThreshold, OtsuThreshold>;

// ---------------------------------------------------------------------------
// Conversions

/// Broadcast luma (0.299, 0.587, 0.114), rounded half-up to 8 bits, then scaled to [0, 1].
GrayImage to_grayscale(const RgbImage& rgb);

/// Quantizes a [0, 1] intensity to 8 bits, rounding half-up.
std::uint8_t to_byte(double v) noexcept;

// ---------------------------------------------------------------------------
// Filtering and resampling

/// Normalized 1-D Gaussian taps for radius ceil(4 * sigma); size 2r + 1.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with edge replication. Constant images are preserved exactly.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Nearest-neighbor 2x decimation: out(x, y) = in(2x, 2y).
GrayImage downsample_half(const GrayImage& img);

/// |horizontal-derivative Sobel| clamped to [0, 1]; one-pixel border is zero.
GrayImage sobel_vertical(const GrayImage& img);

/// Between-class-variance maximizing threshold over the 256-bin histogram.
double otsu_threshold(const GrayImage& img);

BinaryImage binarize(const GrayImage& img, const ThresholdMethod& method);

BinaryImage dilate_horizontal(const BinaryImage& img, int half_width);

/// 8-connected components, labelled 1.. in raster order of their first pixel.
std::vector<Blob> label_blobs(const BinaryImage& img);

/// Copies the inclusive rectangle out of img.
GrayImage crop(const GrayImage& img, const BoundingBox& box);

/// Bilinear sample with edge replication.
double sample_bilinear(const GrayImage& img, double x, double y) noexcept;

/// Row-major 2x3 affine map from output to input coordinates.
using Affine2x3 = std::array<double, 6>;

/// Inverse-mapped bilinear warp; pixels that map outside the source get `fill`.
GrayImage warp_affine(const GrayImage& img, const Affine2x3& out_to_in, int out_width, int out_height,
                      double fill);

/// Area-aware resize: prefilters with a Gaussian when shrinking, then samples bilinearly.
GrayImage resize(const GrayImage& img, int out_width, int out_height);

}  // namespace platesift
