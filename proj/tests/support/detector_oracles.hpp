#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "platesift/detector.hpp"
#include "test_support.hpp"

namespace platesift::testing {

/// Sobel, threshold, dilation, labelling and filtering called one by one.
inline std::vector<detect::PlateCandidate> manual_detection(const GrayImage& frame, const detect::DetectorParams& p) {
    const auto edges = binarize(sobel_vertical(frame), p.threshold);
    auto c = filter_blobs(label_blobs(dilate_horizontal(edges, p.dilation_half_width)), edges, p);
    std::stable_sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.area > b.area; });
    return c;
}

/// Textured frame with up to four stripe blocks of random size and period.
inline GrayImage random_frame(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_rects(0, 4);
    std::uniform_int_distribution<int> wd(20, 150), ht(4, 50), period(4, 12);
    auto frame = textured_image(256, 192, rng(), 60);
    for (int i = n_rects(rng); i > 0; --i) {
        const int w = wd(rng), h = ht(rng);
        const int x = std::uniform_int_distribution<int>(0, 255 - w)(rng);
        const int y = std::uniform_int_distribution<int>(0, 191 - h)(rng);
        paint_stripes(frame, x, y, w, h, period(rng));
    }
    return frame;
}

}  // namespace platesift::testing
