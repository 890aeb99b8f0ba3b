#include "platesift/homography.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "platesift/error.hpp"

namespace platesift::geometry {

namespace {

constexpr double kMinCanonicalDet = 1e-10;
constexpr double kProjectionEpsilon = 1e-12;
constexpr double kRankTolerance = 1e-9;
constexpr int kMaxRefinements = 10;

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& m) {
    const double norm = m.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateError("homography matrix is zero or not finite");
    Eigen::Matrix3d c = m / norm;
    double pivot = c(2, 2);
    if (pivot == 0.0) {
        for (int i = 0; i < 9 && pivot == 0.0; ++i) pivot = c(i / 3, i % 3);
    }
    if (pivot < 0.0) c = -c;
    return c;
}

Point2 dehomogenize(const HPoint& p) {
    if (p.w == 0.0) throw DegenerateError("point at infinity");
    return {p.x / p.w, p.y / p.w};
}

/// Twice the signed triangle area.
double cross(const Point2& a, const Point2& b, const Point2& c) noexcept {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool has_collinear_triple(const std::array<Point2, 4>& p) {
    double scale = 0.0;
    for (const auto& q : p)
        for (const auto& r : p) scale = std::max(scale, std::hypot(q.x - r.x, q.y - r.y));
    const double eps = 1e-9 * std::max(scale * scale, 1e-300);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            for (int c = b + 1; c < 4; ++c)
                if (std::abs(cross(p[a], p[b], p[c])) <= eps) return true;
    return false;
}

struct Score {
    std::vector<int> inliers;
    double rmse = std::numeric_limits<double>::infinity();
};

Score score(const Homography& h, std::span<const Correspondence> corrs, double threshold) {
    Score s;
    double sum_sq = 0.0;
    for (int i = 0; i < static_cast<int>(corrs.size()); ++i) {
        const double e = reprojection_error(h, corrs[i]);
        if (e <= threshold) {
            s.inliers.push_back(i);
            sum_sq += e * e;
        }
    }
    if (!s.inliers.empty()) s.rmse = std::sqrt(sum_sq / static_cast<double>(s.inliers.size()));
    return s;
}

bool better(const Score& a, const Score& b) {
    if (a.inliers.size() != b.inliers.size()) return a.inliers.size() > b.inliers.size();
    return a.rmse < b.rmse;
}

std::vector<Correspondence> subset(std::span<const Correspondence> corrs, const std::vector<int>& idx) {
    std::vector<Correspondence> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(corrs[i]);
    return out;
}

}  // namespace

Homography::Homography() : m_(Eigen::Matrix3d::Identity() / std::sqrt(3.0)) {}

Homography::Homography(const Eigen::Matrix3d& m) : m_(canonicalize(m)) {}

std::optional<Point2> Homography::apply(const HPoint& p) const noexcept {
    const Eigen::Vector3d v = m_ * Eigen::Vector3d(p.x, p.y, p.w);
    if (std::abs(v.z()) < kProjectionEpsilon || !v.allFinite()) return std::nullopt;
    return Point2{v.x() / v.z(), v.y() / v.z()};
}

NormalizedPoints normalize_points(std::span<const HPoint> pts) {
    if (pts.size() < 2) throw InsufficientDataError("normalization needs at least 2 points");
    std::vector<Point2> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) flat.push_back(dehomogenize(p));

    double cx = 0.0;
    double cy = 0.0;
    for (const auto& p : flat) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(flat.size());
    cy /= static_cast<double>(flat.size());

    double mean_dist = 0.0;
    for (const auto& p : flat) mean_dist += std::hypot(p.x - cx, p.y - cy);
    mean_dist /= static_cast<double>(flat.size());
    if (!(mean_dist > 1e-12 * (1.0 + std::hypot(cx, cy)))) {
        throw DegenerateError("all points coincide");
    }

    const double s = std::sqrt(2.0) / mean_dist;
    NormalizedPoints out;
    out.transform << s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0;
    out.points.reserve(flat.size());
    for (const auto& p : flat) out.points.push_back({s * (p.x - cx), s * (p.y - cy), 1.0});
    return out;
}

Homography dlt_homography(std::span<const Correspondence> corrs) {
    if (corrs.size() < 4) throw InsufficientDataError("DLT needs at least 4 correspondences");

    std::vector<HPoint> refs;
    std::vector<HPoint> tgts;
    refs.reserve(corrs.size());
    tgts.reserve(corrs.size());
    for (const auto& c : corrs) {
        refs.push_back(c.ref);
        tgts.push_back(c.tgt);
    }
    const auto nr = normalize_points(refs);
    const auto nt = normalize_points(tgts);

    // Two rows per correspondence; at least 9 rows so the SVD exposes a full V.
    const Eigen::Index n = static_cast<Eigen::Index>(corrs.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(2 * n, 9), 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = nr.points[static_cast<std::size_t>(i)];
        const auto& t = nt.points[static_cast<std::size_t>(i)];
        const Eigen::RowVector3d x(r.x, r.y, r.w);
        a.block<1, 3>(2 * i, 3) = -t.w * x;
        a.block<1, 3>(2 * i, 6) = t.y * x;
        a.block<1, 3>(2 * i + 1, 0) = t.w * x;
        a.block<1, 3>(2 * i + 1, 6) = -t.x * x;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(7) <= kRankTolerance * sv(0)) {
        throw DegenerateError("correspondences do not determine a homography");
    }
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    const Eigen::Matrix3d& tt = nt.transform;
    Eigen::Matrix3d tt_inv;
    tt_inv << 1.0 / tt(0, 0), 0.0, -tt(0, 2) / tt(0, 0), 0.0, 1.0 / tt(1, 1), -tt(1, 2) / tt(1, 1), 0.0, 0.0, 1.0;

    Homography result(tt_inv * hn * nr.transform);
    if (std::abs(result.matrix().determinant()) <= kMinCanonicalDet) {
        throw DegenerateError("estimated homography is singular");
    }
    return result;
}

double reprojection_error(const Homography& h, const Correspondence& c) noexcept {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto mapped = h.apply(c.ref);
    if (!mapped || c.tgt.w == 0.0) return inf;
    return std::hypot(mapped->x - c.tgt.x / c.tgt.w, mapped->y - c.tgt.y / c.tgt.w);
}

std::optional<RobustFit> robust_fit(std::span<const Correspondence> corrs, const RansacParams& params) {
    if (!(params.inlier_threshold > 0.0) || params.max_iters < 1 || !(params.confidence > 0.0 && params.confidence < 1.0)) {
        throw ParameterError("invalid RANSAC parameters");
    }
    const int n = static_cast<int>(corrs.size());
    const int required = std::max(4, params.min_inliers);
    if (n < 4 || n < required) return std::nullopt;

    std::vector<Point2> refs;
    std::vector<Point2> tgts;
    refs.reserve(corrs.size());
    tgts.reserve(corrs.size());
    for (const auto& c : corrs) {
        if (c.ref.w == 0.0 || c.tgt.w == 0.0) return std::nullopt;
        refs.push_back(dehomogenize(c.ref));
        tgts.push_back(dehomogenize(c.tgt));
    }

    std::mt19937_64 rng(params.seed);
    std::vector<int> pool(corrs.size());
    std::iota(pool.begin(), pool.end(), 0);

    Score best;
    std::optional<Homography> best_h;
    long long iteration_cap = params.max_iters;
    for (long long iter = 0; iter < iteration_cap; ++iter) {
        // Partial Fisher-Yates: the first four slots become the sample.
        for (int k = 0; k < 4; ++k) {
            std::uniform_int_distribution<int> pick(k, n - 1);
            std::swap(pool[k], pool[pick(rng)]);
        }
        std::array<Point2, 4> rs{};
        std::array<Point2, 4> ts{};
        std::array<Correspondence, 4> sample{};
        for (int k = 0; k < 4; ++k) {
            rs[k] = refs[pool[k]];
            ts[k] = tgts[pool[k]];
            sample[k] = corrs[pool[k]];
        }
        if (has_collinear_triple(rs) || has_collinear_triple(ts)) continue;

        Homography h;
        try {
            h = dlt_homography(sample);
        } catch (const DegenerateError&) {
            continue;
        }
        auto s = score(h, corrs, params.inlier_threshold);
        if (!best_h || better(s, best)) {
            best = std::move(s);
            best_h = h;
            const double inlier_fraction = static_cast<double>(best.inliers.size()) / n;
            const double p_good = std::pow(inlier_fraction, 4);
            if (p_good >= 1.0 - 1e-12) {
                iteration_cap = std::min<long long>(iteration_cap, iter + 1);
            } else if (p_good > 0.0) {
                const double needed = std::log(1.0 - params.confidence) / std::log(1.0 - p_good);
                iteration_cap = std::min<long long>(params.max_iters, static_cast<long long>(std::ceil(needed)));
            }
        }
    }
    if (!best_h || static_cast<int>(best.inliers.size()) < required) return std::nullopt;

    // Least-squares re-estimation on the consensus set until it stops changing.
    Homography h = *best_h;
    Score current = best;
    for (int round = 0; round < kMaxRefinements; ++round) {
        Homography refit;
        try {
            refit = dlt_homography(subset(corrs, current.inliers));
        } catch (const Error&) {
            break;
        }
        auto next = score(refit, corrs, params.inlier_threshold);
        if (next.inliers.size() < current.inliers.size()) break;
        const bool stable = next.inliers == current.inliers;
        h = refit;
        current = std::move(next);
        if (stable) break;
    }
    if (static_cast<int>(current.inliers.size()) < required) return std::nullopt;
    return RobustFit{h, std::move(current.inliers), current.rmse};
}

std::vector<Correspondence> correspondences_from_matches(std::span<const match::Match> matches,
                                                         std::span<const sift::Keypoint> query,
                                                         std::span<const sift::Keypoint> templ) {
    std::vector<Correspondence> out;
    out.reserve(matches.size());
    for (const auto& m : matches) {
        const auto& t = templ[static_cast<std::size_t>(m.template_index)];
        const auto& q = query[static_cast<std::size_t>(m.query_index)];
        out.push_back({{t.x, t.y, 1.0}, {q.x, q.y, 1.0}});
    }
    return out;
}

Quad project_quad(const Homography& h, int template_width, int template_height) {
    const double w = template_width - 1.0;
    const double hh = template_height - 1.0;
    const std::array<HPoint, 4> corners{{{0.0, 0.0, 1.0}, {w, 0.0, 1.0}, {w, hh, 1.0}, {0.0, hh, 1.0}}};
    Quad q{};
    for (std::size_t i = 0; i < corners.size(); ++i) {
        const auto p = h.apply(corners[i]);
        if (!p) throw DegenerateError("template corner maps to infinity");
        q[i] = *p;
    }
    return q;
}

double quad_area(const Quad& q) noexcept {
    double twice = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto& a = q[i];
        const auto& b = q[(i + 1) % q.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * std::abs(twice);
}

bool is_convex_quad(const Quad& q) noexcept {
    int sign = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double c = cross(q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        if (c == 0.0 || !std::isfinite(c)) return false;
        const int s = c > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign) return false;
    }
    return true;
}

}  // namespace platesift::geometry
