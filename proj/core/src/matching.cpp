#include "platesift/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "platesift/error.hpp"

namespace platesift::match {

double descriptor_distance(const sift::Descriptor& a, const sift::Descriptor& b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<Match> match_descriptors(std::span<const sift::Descriptor> query,
                                     std::span<const sift::Descriptor> templ, double ratio_threshold) {
    if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0)) {
        throw ParameterError("ratio_threshold must lie in (0, 1]");
    }
    std::vector<Match> out;
    if (query.empty() || templ.empty()) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < query.size(); ++q) {
        double best = inf;
        double second = inf;
        int best_index = -1;
        for (std::size_t t = 0; t < templ.size(); ++t) {
            const double d = descriptor_distance(query[q], templ[t]);
            if (d < best) {
                second = best;
                best = d;
                best_index = static_cast<int>(t);
            } else if (d < second) {
                second = d;
            }
        }

        Match m{static_cast<int>(q), best_index, best, 1.0};
        if (templ.size() == 1) {
            if (best < kSingleNeighborMaxDistance) out.push_back(m);
            continue;
        }
        // Two equidistant neighbors (including 0/0) are maximally ambiguous.
        m.ratio = second > 0.0 ? best / second : 1.0;
        if (m.ratio < ratio_threshold) out.push_back(m);
    }

    std::stable_sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.query_index < b.query_index;
    });
    return out;
}

std::vector<Match> cross_check(std::span<const Match> matches_ab, std::span<const Match> matches_ba) {
    std::set<std::pair<int, int>> reverse;
    for (const auto& m : matches_ba) reverse.emplace(m.template_index, m.query_index);
    std::vector<Match> out;
    for (const auto& m : matches_ab) {
        if (reverse.contains({m.query_index, m.template_index})) out.push_back(m);
    }
    return out;
}

}  // namespace platesift::match
