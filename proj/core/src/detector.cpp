#include "platesift/detector.hpp"

#include <algorithm>

#include "platesift/error.hpp"

namespace platesift::detect {

void DetectorParams::validate() const {
    if (dilation_half_width < 1) throw ParameterError("dilation_half_width must be >= 1");
    for (const Range* r : {&area, &aspect, &fill_ratio}) {
        if (!(r->min <= r->max)) throw ParameterError("detector range has min > max");
    }
    if (const auto* fixed = std::get_if<FixedThreshold>(&threshold); fixed && !(fixed->t >= 0.0 && fixed->t <= 1.0)) {
        throw ParameterError("fixed threshold must lie in [0, 1]");
    }
}

std::vector<PlateCandidate> filter_blobs(std::span<const Blob> blobs, const BinaryImage& edges,
                                         const DetectorParams& params) {
    std::vector<PlateCandidate> out;
    for (const auto& blob : blobs) {
        const auto& b = blob.bbox;
        PlateCandidate c;
        c.bbox = b;
        c.area = static_cast<double>(blob.area);
        c.aspect = static_cast<double>(b.width()) / b.height();
        c.compactness = c.area / static_cast<double>(b.area());

        long long set = 0;
        for (int y = b.y_min; y <= b.y_max; ++y)
            for (int x = b.x_min; x <= b.x_max; ++x) set += edges.at(x, y) ? 1 : 0;
        const long long unset = std::max(b.area() - set, 1LL);
        c.fill_ratio = static_cast<double>(set) / static_cast<double>(unset);
        c.score = c.area;

        if (params.area.contains(c.area) && params.aspect.contains(c.aspect) &&
            c.compactness >= params.compactness_min && params.fill_ratio.contains(c.fill_ratio)) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<PlateCandidate> detect_candidates(const GrayImage& frame, const DetectorParams& params) {
    params.validate();
    if (frame.width() < 32 || frame.height() < 32) {
        throw DimensionError("frame must be at least 32x32");
    }
    BoundingBox roi{0, 0, frame.width() - 1, frame.height() - 1};
    if (params.roi) {
        roi = *params.roi;
        roi.x_min = std::max(roi.x_min, 0);
        roi.y_min = std::max(roi.y_min, 0);
        roi.x_max = std::min(roi.x_max, frame.width() - 1);
        roi.y_max = std::min(roi.y_max, frame.height() - 1);
        if (roi.width() < 3 || roi.height() < 3) throw DimensionError("region of interest is too small");
    }
    const GrayImage view = params.roi ? crop(frame, roi) : frame;

    const auto edges = binarize(sobel_vertical(view), params.threshold);
    const auto dilated = dilate_horizontal(edges, params.dilation_half_width);
    const auto blobs = label_blobs(dilated);
    auto candidates = filter_blobs(blobs, edges, params);

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const PlateCandidate& a, const PlateCandidate& b) { return a.area > b.area; });
    for (auto& c : candidates) {
        c.bbox.x_min += roi.x_min;
        c.bbox.x_max += roi.x_min;
        c.bbox.y_min += roi.y_min;
        c.bbox.y_max += roi.y_min;
    }
    return candidates;
}

}  // namespace platesift::detect
