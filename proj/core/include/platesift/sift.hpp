#pragma once

#include <array>
#include <span>
#include <vector>

#include "platesift/image.hpp"

namespace platesift::sift {

/// Extraction parameters. Defaults follow Lowe (2004).
struct SiftParams {
    int scales_per_octave = 3;
    double base_sigma = 1.6;
    /// 0 selects floor(log2(min(w, h))) - 3 octaves.
    int octave_count = 0;
    /// Blur already present in the input image.
    double assumed_blur = 0.5;
    /// Double the input before building the pyramid.
    bool upsample = false;
    double contrast_threshold = 0.03;
    double edge_ratio = 10.0;
    double orientation_peak_ratio = 0.8;
    double descriptor_clamp = 0.2;

    friend bool operator==(const SiftParams&, const SiftParams&) = default;
};

struct Octave {
    std::vector<GrayImage> images;
    /// Absolute (base-image) sigma of each image.
    std::vector<double> sigmas;
};

struct ScaleSpace {
    std::vector<Octave> octaves;
    double base_sigma = 1.6;
    int scales_per_octave = 3;
    /// Base-image pixels per level-0 pixel (0.5 when upsampled).
    double input_scale = 1.0;
};

struct DogSpace {
    /// Per octave: images[i] = G[i + 1] - G[i]. Values may be negative, so the
    /// [0, 1] intensity invariant does not apply here.
    std::vector<std::vector<GrayImage>> octaves;
};

struct Candidate {
    int octave = 0;
    int scale_index = 0;
    int x = 0;
    int y = 0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Keypoint {
    /// Sub-pixel position in input-image coordinates.
    double x = 0.0;
    double y = 0.0;
    /// Absolute scale in input-image pixels.
    double sigma = 0.0;
    /// Radians in [0, 2*pi).
    double orientation = 0.0;
    int octave = 0;
    int scale_index = 0;
    /// Interpolated |DoG| at the refined extremum.
    double contrast = 0.0;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

inline constexpr std::size_t kDescriptorSize = 128;
using Descriptor = std::array<double, kDescriptorSize>;

struct Feature {
    Keypoint keypoint;
    Descriptor descriptor;
};

ScaleSpace build_scale_space(const GrayImage& img, const SiftParams& params = {});

DogSpace compute_dog(const ScaleSpace& ss);

/// Strict 26-neighbor extrema over interior DoG levels with |D| >= 0.5 * contrast_prefilter.
std::vector<Candidate> detect_extrema(const DogSpace& dog, double contrast_prefilter);

/// Quadratic sub-pixel/sub-scale refinement, contrast and edge rejection.
std::vector<Keypoint> refine_keypoints(std::span<const Candidate> candidates, const DogSpace& dog,
                                       const ScaleSpace& ss, const SiftParams& params = {});

/// One keypoint per accepted orientation-histogram peak.
std::vector<Keypoint> assign_orientations(std::span<const Keypoint> keypoints, const ScaleSpace& ss,
                                          const SiftParams& params = {});

std::vector<Feature> compute_descriptors(std::span<const Keypoint> keypoints, const ScaleSpace& ss,
                                         const SiftParams& params = {});

/// Full pipeline, output in canonical order (octave, scale_index, y, x, orientation).
std::vector<Feature> extract_features(const GrayImage& img, const SiftParams& params = {});

}  // namespace platesift::sift
