#pragma once

#include <string>
#include <variant>
#include <vector>

#include "platesift/detector.hpp"
#include "platesift/homography.hpp"
#include "platesift/image.hpp"
#include "platesift/registry.hpp"
#include "platesift/sift.hpp"

namespace platesift::recognition {

struct PreprocessParams {
    /// Fraction of each dimension cropped from every side.
    double border_margin = 0.04;
    double low_percentile = 0.02;
    double high_percentile = 0.98;

    friend bool operator==(const PreprocessParams&, const PreprocessParams&) = default;
};

struct RecognitionParams {
    sift::SiftParams sift;
    double ratio_threshold = 0.8;
    geometry::RansacParams ransac;
    PreprocessParams preprocess;
    /// Accepted projected-quad area as a fraction of the preprocessed plate area.
    detect::Range quad_area_ratio{0.05, 2.0};

    friend bool operator==(const RecognitionParams&, const RecognitionParams&) = default;
};

struct NormalPlate {
    friend bool operator==(const NormalPlate&, const NormalPlate&) = default;
};

struct SpecialPlate {
    std::string label;
    /// Template outline in the coordinates of the image handed to recognize().
    geometry::Quad quad{};
    int inlier_count = 0;
    double reproj_rmse = 0.0;

    friend bool operator==(const SpecialPlate&, const SpecialPlate&) = default;
};

using Classification = std::variant<NormalPlate, SpecialPlate>;

struct TemplateDiagnostic {
    std::string label;
    int raw_matches = 0;
    /// 0 when geometric verification rejected the template.
    int inliers = 0;

    friend bool operator==(const TemplateDiagnostic&, const TemplateDiagnostic&) = default;
};

struct StageTiming {
    double preprocess_ms = 0.0;
    double extraction_ms = 0.0;
    double matching_ms = 0.0;
    double verification_ms = 0.0;
};

struct RecognitionResult {
    Classification classification = NormalPlate{};
    std::vector<TemplateDiagnostic> per_template_diagnostics;
    int query_features = 0;
    StageTiming timing;

    bool is_special() const noexcept { return std::holds_alternative<SpecialPlate>(classification); }
    /// Empty for normal plates.
    std::string label() const;
};

/// Region kept by the border crop: floor(dimension * (1 - 2 * margin)) pixels
/// per axis, centred (an odd leftover pixel goes to the far side).
BoundingBox plate_crop(int width, int height, const PreprocessParams& params);

/// Grayscale, border crop, then a 2nd/98th percentile contrast stretch.
/// Throws DimensionError when the crop leaves less than 16x16.
GrayImage preprocess_plate(const GrayImage& plate, const PreprocessParams& params = {});
GrayImage preprocess_plate(const RgbImage& plate, const PreprocessParams& params = {});

/// Classifies one plate crop against every enrolled template. Plates too small
/// to analyse come back Normal. Throws ConfigError when the registry was built
/// with different extraction parameters.
RecognitionResult recognize(const GrayImage& plate, const registry::Registry& registry,
                            const RecognitionParams& params = {});

struct FrameDetection {
    detect::PlateCandidate candidate;
    /// Quad coordinates are translated into frame coordinates.
    RecognitionResult result;
};

std::vector<FrameDetection> classify_frame(const GrayImage& frame, const registry::Registry& registry,
                                           const detect::DetectorParams& detector_params,
                                           const RecognitionParams& params = {});

/// Draws the quad outline at full intensity.
void draw_quad(GrayImage& img, const geometry::Quad& quad, double intensity = 1.0);

}  // namespace platesift::recognition
