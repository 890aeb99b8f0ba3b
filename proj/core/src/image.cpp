#include "platesift/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "platesift/error.hpp"

namespace platesift {

namespace {

void require_positive_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw DimensionError("image dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
}

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

}  // namespace

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
    require_positive_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require_positive_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("pixel buffer length does not match width * height");
    }
}

double GrayImage::clamped(int x, int y) const noexcept {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

BinaryImage::BinaryImage(int width, int height, bool fill) : width_(width), height_(height) {
    require_positive_dims(width, height);
    mask_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryImage::count() const noexcept {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::uint8_t to_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::floor(clamp01(v) * 255.0 + 0.5));
}

GrayImage to_grayscale(const RgbImage& rgb) {
    require_positive_dims(rgb.width, rgb.height);
    const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
    if (rgb.data.size() != 3 * n) {
        throw DimensionError("RGB buffer length does not match 3 * width * height");
    }
    GrayImage out(rgb.width, rgb.height);
    auto dst = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double luma = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
        // Snap away representation error so exact .5 cases round up.
        const double q = std::floor(luma + 0.5 + 1e-9);
        dst[i] = std::min(q, 255.0) / 255.0;
    }
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ParameterError("gaussian sigma must be positive");
    }
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += taps[i + radius];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    const auto taps = gaussian_kernel(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = img.width();
    const int h = img.height();

    // Each pass is evaluated as center + sum(w_k * (neighbor - center)); with
    // normalized taps this is the plain convolution, and constants come out exact.
    GrayImage tmp(w, h);
    std::vector<double> row(static_cast<std::size_t>(w + 2 * radius));
    for (int y = 0; y < h; ++y) {
        for (int i = 0; i < w + 2 * radius; ++i) row[i] = img.at(std::clamp(i - radius, 0, w - 1), y);
        for (int x = 0; x < w; ++x) {
            const double c = row[x + radius];
            double acc = 0.0;
            for (int k = 0; k <= 2 * radius; ++k) acc += taps[k] * (row[x + k] - c);
            tmp.at(x, y) = c + acc;
        }
    }

    GrayImage out(w, h);
    std::vector<double> col(static_cast<std::size_t>(h + 2 * radius));
    for (int x = 0; x < w; ++x) {
        for (int i = 0; i < h + 2 * radius; ++i) col[i] = tmp.at(x, std::clamp(i - radius, 0, h - 1));
        for (int y = 0; y < h; ++y) {
            const double c = col[y + radius];
            double acc = 0.0;
            for (int k = 0; k <= 2 * radius; ++k) acc += taps[k] * (col[y + k] - c);
            out.at(x, y) = clamp01(c + acc);
        }
    }
    return out;
}

GrayImage downsample_half(const GrayImage& img) {
    if (img.width() < 2 || img.height() < 2) {
        throw DimensionError("downsample_half needs at least 2x2 input");
    }
    GrayImage out(img.width() / 2, img.height() / 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

GrayImage sobel_vertical(const GrayImage& img) {
    if (img.width() < 3 || img.height() < 3) {
        throw DimensionError("sobel_vertical needs at least 3x3 input");
    }
    GrayImage out(img.width(), img.height(), 0.0);
    for (int y = 1; y + 1 < img.height(); ++y) {
        for (int x = 1; x + 1 < img.width(); ++x) {
            const double gx = (img.at(x + 1, y - 1) - img.at(x - 1, y - 1)) +
                              2.0 * (img.at(x + 1, y) - img.at(x - 1, y)) +
                              (img.at(x + 1, y + 1) - img.at(x - 1, y + 1));
            out.at(x, y) = clamp01(std::abs(gx));
        }
    }
    return out;
}

double otsu_threshold(const GrayImage& img) {
    std::array<double, 256> hist{};
    for (double v : img.data()) hist[to_byte(v)] += 1.0;
    const double total = static_cast<double>(img.size());

    double sum_all = 0.0;
    for (int b = 0; b < 256; ++b) sum_all += b * hist[b];

    int max_bin = 255;
    while (max_bin > 0 && hist[max_bin] == 0.0) --max_bin;

    double best_var = 0.0;
    int best_t = -1;
    double w0 = 0.0;
    double sum0 = 0.0;
    for (int t = 0; t < 255; ++t) {
        w0 += hist[t];
        sum0 += t * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    // Single-level image: nothing separates, so nothing is foreground.
    if (best_t < 0) best_t = max_bin;
    return (best_t + 0.5) / 255.0;
}

BinaryImage binarize(const GrayImage& img, const ThresholdMethod& method) {
    double threshold = 0.0;
    if (const auto* fixed = std::get_if<FixedThreshold>(&method)) {
        if (!(fixed->t >= 0.0 && fixed->t <= 1.0)) {
            throw ParameterError("fixed threshold must lie in [0, 1]");
        }
        threshold = fixed->t;
    } else {
        threshold = otsu_threshold(img);
    }
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.set(x, y, img.at(x, y) > threshold);
    return out;
}

BinaryImage dilate_horizontal(const BinaryImage& img, int half_width) {
    if (half_width < 1) throw ParameterError("dilation half width must be >= 1");
    const int w = img.width();
    BinaryImage out(w, img.height());
    for (int y = 0; y < img.height(); ++y) {
        // Distance to the most recent set pixel on the left, then on the right.
        int last = -1'000'000;
        for (int x = 0; x < w; ++x) {
            if (img.at(x, y)) last = x;
            if (x - last <= half_width) out.set(x, y, true);
        }
        last = 1'000'000;
        for (int x = w - 1; x >= 0; --x) {
            if (img.at(x, y)) last = x;
            if (last - x <= half_width) out.set(x, y, true);
        }
    }
    return out;
}

std::vector<Blob> label_blobs(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
    std::vector<Blob> blobs;
    std::vector<std::pair<int, int>> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img.at(x, y) || labels[static_cast<std::size_t>(y) * w + x] != 0) continue;

            Blob blob;
            blob.label = static_cast<int>(blobs.size()) + 1;
            blob.bbox = {x, y, x, y};
            labels[static_cast<std::size_t>(y) * w + x] = blob.label;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++blob.area;
                blob.bbox.x_min = std::min(blob.bbox.x_min, cx);
                blob.bbox.x_max = std::max(blob.bbox.x_max, cx);
                blob.bbox.y_min = std::min(blob.bbox.y_min, cy);
                blob.bbox.y_max = std::max(blob.bbox.y_max, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        auto& l = labels[static_cast<std::size_t>(ny) * w + nx];
                        if (l != 0 || !img.at(nx, ny)) continue;
                        l = blob.label;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            blob.fill_count = blob.area;
            blobs.push_back(blob);
        }
    }
    return blobs;
}

GrayImage crop(const GrayImage& img, const BoundingBox& box) {
    if (box.x_min < 0 || box.y_min < 0 || box.x_max >= img.width() || box.y_max >= img.height() ||
        box.x_min > box.x_max || box.y_min > box.y_max) {
        throw DimensionError("crop rectangle outside image");
    }
    GrayImage out(box.width(), box.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(box.x_min + x, box.y_min + y);
    return out;
}

double sample_bilinear(const GrayImage& img, double x, double y) noexcept {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    const double top = (1.0 - ax) * img.clamped(x0, y0) + ax * img.clamped(x0 + 1, y0);
    const double bottom = (1.0 - ax) * img.clamped(x0, y0 + 1) + ax * img.clamped(x0 + 1, y0 + 1);
    return (1.0 - ay) * top + ay * bottom;
}

GrayImage warp_affine(const GrayImage& img, const Affine2x3& m, int out_width, int out_height, double fill) {
    GrayImage out(out_width, out_height, fill);
    const double max_x = img.width() - 0.5;
    const double max_y = img.height() - 0.5;
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const double sx = m[0] * x + m[1] * y + m[2];
            const double sy = m[3] * x + m[4] * y + m[5];
            if (sx < -0.5 || sy < -0.5 || sx > max_x || sy > max_y) continue;
            out.at(x, y) = clamp01(sample_bilinear(img, sx, sy));
        }
    }
    return out;
}

GrayImage resize(const GrayImage& img, int out_width, int out_height) {
    require_positive_dims(out_width, out_height);
    const double fx = static_cast<double>(out_width) / img.width();
    const double fy = static_cast<double>(out_height) / img.height();
    const double shrink = std::min(fx, fy);
    const GrayImage src = shrink < 1.0 ? gaussian_blur(img, 0.5 * std::sqrt(1.0 / (shrink * shrink) - 1.0)) : img;

    GrayImage out(out_width, out_height);
    for (int y = 0; y < out_height; ++y) {
        const double sy = (y + 0.5) / fy - 0.5;
        for (int x = 0; x < out_width; ++x) {
            const double sx = (x + 0.5) / fx - 0.5;
            out.at(x, y) = clamp01(sample_bilinear(src, sx, sy));
        }
    }
    return out;
}

}  // namespace platesift
