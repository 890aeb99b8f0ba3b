#pragma once

#include <span>
#include <vector>

#include "platesift/sift.hpp"

namespace platesift::match {

struct Match {
    int query_index = 0;
    int template_index = 0;
    /// Euclidean distance to the nearest template descriptor.
    double distance = 0.0;
    /// nearest / second-nearest distance; 1 when there is no second neighbor.
    double ratio = 1.0;

    friend bool operator==(const Match&, const Match&) = default;
};

/// Distance accepted when the template holds a single descriptor and no ratio exists.
inline constexpr double kSingleNeighborMaxDistance = 0.7;

double descriptor_distance(const sift::Descriptor& a, const sift::Descriptor& b) noexcept;

/// Exact nearest-neighbor matching with the distinctiveness ratio test.
/// Accepts a query iff nearest / second-nearest < ratio_threshold. The result
/// is sorted by ascending distance, then query index.
std::vector<Match> match_descriptors(std::span<const sift::Descriptor> query,
                                     std::span<const sift::Descriptor> templ, double ratio_threshold = 0.8);

/// Keeps the a->b matches whose reverse pair appears in b->a.
std::vector<Match> cross_check(std::span<const Match> matches_ab, std::span<const Match> matches_ba);

}  // namespace platesift::match
