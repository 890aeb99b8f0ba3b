#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "platesift/matching.hpp"
#include "platesift/sift.hpp"

namespace platesift::geometry {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Homogeneous image point (x, y, w).
struct HPoint {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
};

/// A template (reference) point and its observed input-image (target) point.
struct Correspondence {
    HPoint ref;
    HPoint tgt;
};

/// 3x3 projective map with target ~ H * reference, stored with unit Frobenius
/// norm and h33 >= 0 (first non-zero entry >= 0 when h33 == 0).
class Homography {
public:
    Homography();
    /// Canonicalizes the given matrix. Throws DegenerateError for a zero matrix.
    explicit Homography(const Eigen::Matrix3d& m);

    const Eigen::Matrix3d& matrix() const noexcept { return m_; }
    double operator()(int row, int col) const noexcept { return m_(row, col); }

    /// Dehomogenized image of p; nullopt when the mapped w is (near) zero.
    std::optional<Point2> apply(const HPoint& p) const noexcept;

    static Homography identity() { return Homography(); }

    friend bool operator==(const Homography&, const Homography&) = default;

private:
    Eigen::Matrix3d m_;
};

/// Conditioning result: transformed points plus the similarity T with pts' = T * pts.
struct NormalizedPoints {
    std::vector<HPoint> points;
    Eigen::Matrix3d transform;
};

/// Centroid to origin, mean distance sqrt(2).
NormalizedPoints normalize_points(std::span<const HPoint> pts);

/// Normalized DLT. Throws InsufficientDataError for < 4 correspondences and
/// DegenerateError when the design matrix loses more than one rank.
Homography dlt_homography(std::span<const Correspondence> corrs);

/// Distance between dehomogenized H * ref and tgt; +inf when H * ref is at infinity.
double reprojection_error(const Homography& h, const Correspondence& c) noexcept;

struct RansacParams {
    double inlier_threshold = 3.0;
    int max_iters = 2000;
    double confidence = 0.995;
    int min_inliers = 6;
    std::uint64_t seed = 0;

    friend bool operator==(const RansacParams&, const RansacParams&) = default;
};

struct RobustFit {
    Homography h;
    std::vector<int> inliers;
    double reproj_rmse = 0.0;
};

/// RANSAC over 4-point samples, then least-squares DLT on the consensus set.
/// Returns nullopt when fewer than min_inliers survive (or fewer than 4 inputs).
std::optional<RobustFit> robust_fit(std::span<const Correspondence> corrs, const RansacParams& params = {});

/// Builds template -> query correspondences for the given matches.
std::vector<Correspondence> correspondences_from_matches(std::span<const match::Match> matches,
                                                         std::span<const sift::Keypoint> query,
                                                         std::span<const sift::Keypoint> templ);

using Quad = std::array<Point2, 4>;

/// Maps the template corners (0,0), (w-1,0), (w-1,h-1), (0,h-1) through H.
Quad project_quad(const Homography& h, int template_width, int template_height);

/// Shoelace area (absolute).
double quad_area(const Quad& q) noexcept;

/// True for a strictly convex, non-self-intersecting quadrilateral.
bool is_convex_quad(const Quad& q) noexcept;

}  // namespace platesift::geometry
