#pragma once

#include <optional>
#include <span>
#include <vector>

#include "platesift/image.hpp"

namespace platesift::detect {

struct Range {
    double min = 0.0;
    double max = 0.0;

    bool contains(double v) const noexcept { return v >= min && v <= max; }
    friend bool operator==(const Range&, const Range&) = default;
};

struct DetectorParams {
    int dilation_half_width = 8;
    Range area{500.0, 50000.0};
    Range aspect{2.0, 8.0};
    double compactness_min = 0.5;
    Range fill_ratio{0.05, 1.5};
    ThresholdMethod threshold = OtsuThreshold{};
    /// Optional region of interest; candidates are reported in frame coordinates.
    std::optional<BoundingBox> roi;

    /// Throws ParameterError for empty ranges or a non-positive dilation width.
    void validate() const;
};

struct PlateCandidate {
    BoundingBox bbox;
    double area = 0.0;
    /// width / height of the bounding box.
    double aspect = 0.0;
    /// area / bounding-box area.
    double compactness = 0.0;
    /// (#set / #unset) of the pre-dilation edge mask inside the box; #unset floors at 1.
    double fill_ratio = 0.0;
    /// Ordering key (blob area).
    double score = 0.0;

    friend bool operator==(const PlateCandidate&, const PlateCandidate&) = default;
};

/// Applies the area, aspect, compactness and fill-ratio predicates.
std::vector<PlateCandidate> filter_blobs(std::span<const Blob> blobs, const BinaryImage& edges,
                                         const DetectorParams& params);

/// Sobel -> threshold -> horizontal dilation -> blob labelling -> filtering,
/// sorted by descending area.
std::vector<PlateCandidate> detect_candidates(const GrayImage& frame, const DetectorParams& params = {});

}  // namespace platesift::detect
