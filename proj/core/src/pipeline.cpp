#include "platesift/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "platesift/error.hpp"
#include "platesift/matching.hpp"

namespace platesift::recognition {

namespace {

constexpr int kMinPlateSide = 16;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// Decorrelates per-template RANSAC streams without depending on registry order.
std::uint64_t label_seed(std::uint64_t seed, const std::string& label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return seed ^ h;
}

struct Verified {
    std::string label;
    geometry::RobustFit fit;
    int width = 0;
    int height = 0;
};

bool outranks(const Verified& a, const Verified& b) {
    if (a.fit.inliers.size() != b.fit.inliers.size()) return a.fit.inliers.size() > b.fit.inliers.size();
    if (a.fit.reproj_rmse != b.fit.reproj_rmse) return a.fit.reproj_rmse < b.fit.reproj_rmse;
    return a.label < b.label;
}

}  // namespace

std::string RecognitionResult::label() const {
    if (const auto* s = std::get_if<SpecialPlate>(&classification)) return s->label;
    return {};
}

BoundingBox plate_crop(int width, int height, const PreprocessParams& params) {
    const double keep = 1.0 - 2.0 * params.border_margin;
    const auto kept = [keep](int n) { return static_cast<int>(std::floor(n * keep + 1e-9)); };
    const int w = kept(width), h = kept(height);
    const int x0 = (width - w) / 2, y0 = (height - h) / 2;
    return {x0, y0, x0 + w - 1, y0 + h - 1};
}

GrayImage preprocess_plate(const GrayImage& plate, const PreprocessParams& params) {
    if (!(params.border_margin >= 0.0 && params.border_margin < 0.5) ||
        !(params.low_percentile >= 0.0 && params.low_percentile < params.high_percentile &&
          params.high_percentile <= 1.0)) {
        throw ParameterError("invalid preprocessing parameters");
    }
    const auto box = plate_crop(plate.width(), plate.height(), params);
    if (box.width() < kMinPlateSide || box.height() < kMinPlateSide) {
        throw DimensionError("plate is smaller than 16x16 after border removal");
    }
    GrayImage out = crop(plate, box);

    std::vector<double> sorted(out.data().begin(), out.data().end());
    std::sort(sorted.begin(), sorted.end());
    const auto rank = [&](double p) {
        return sorted[static_cast<std::size_t>(std::floor(p * static_cast<double>(sorted.size() - 1)))];
    };
    const double lo = rank(params.low_percentile);
    const double hi = rank(params.high_percentile);
    if (hi - lo > 1e-9) {
        for (double& v : out.data()) v = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    }
    return out;
}

GrayImage preprocess_plate(const RgbImage& plate, const PreprocessParams& params) {
    return preprocess_plate(to_grayscale(plate), params);
}

RecognitionResult recognize(const GrayImage& plate, const registry::Registry& registry,
                            const RecognitionParams& params) {
    if (!(registry.extraction_params == params.sift)) {
        throw ConfigError("registry was enrolled with different SIFT parameters than the pipeline");
    }
    RecognitionResult result;
    result.per_template_diagnostics.reserve(registry.templates.size());

    auto t0 = Clock::now();
    std::optional<GrayImage> pre;
    try {
        pre = preprocess_plate(plate, params.preprocess);
    } catch (const DimensionError&) {
        pre.reset();
    }
    result.timing.preprocess_ms = elapsed_ms(t0);

    t0 = Clock::now();
    std::vector<sift::Keypoint> query_kps;
    std::vector<sift::Descriptor> query_desc;
    if (pre) {
        try {
            for (auto& f : sift::extract_features(*pre, params.sift)) {
                query_kps.push_back(f.keypoint);
                query_desc.push_back(f.descriptor);
            }
        } catch (const DimensionError&) {
            // Too small for a scale space: no features, hence Normal.
        }
    }
    result.query_features = static_cast<int>(query_kps.size());
    result.timing.extraction_ms = elapsed_ms(t0);

    std::optional<Verified> winner;
    for (const auto& t : registry.templates) {
        t0 = Clock::now();
        const auto matches = match::match_descriptors(query_desc, t.descriptors, params.ratio_threshold);
        result.timing.matching_ms += elapsed_ms(t0);

        t0 = Clock::now();
        const auto corrs = geometry::correspondences_from_matches(matches, query_kps, t.keypoints);
        auto ransac = params.ransac;
        ransac.seed = label_seed(params.ransac.seed, t.label);
        auto fit = geometry::robust_fit(corrs, ransac);
        result.timing.verification_ms += elapsed_ms(t0);

        result.per_template_diagnostics.push_back(
            {t.label, static_cast<int>(matches.size()), fit ? static_cast<int>(fit->inliers.size()) : 0});
        if (!fit) continue;
        Verified v{t.label, std::move(*fit), t.width, t.height};
        if (!winner || outranks(v, *winner)) winner = std::move(v);
    }

    if (!winner || !pre) return result;

    geometry::Quad quad{};
    try {
        quad = geometry::project_quad(winner->fit.h, winner->width, winner->height);
    } catch (const DegenerateError&) {
        return result;
    }
    const double plate_area = static_cast<double>(pre->width()) * pre->height();
    const double ratio = geometry::quad_area(quad) / plate_area;
    if (!geometry::is_convex_quad(quad) || !params.quad_area_ratio.contains(ratio)) return result;

    const auto box = plate_crop(plate.width(), plate.height(), params.preprocess);
    for (auto& p : quad) {
        p.x += box.x_min;
        p.y += box.y_min;
    }
    result.classification = SpecialPlate{winner->label, quad, static_cast<int>(winner->fit.inliers.size()),
                                         winner->fit.reproj_rmse};
    return result;
}

std::vector<FrameDetection> classify_frame(const GrayImage& frame, const registry::Registry& registry,
                                           const detect::DetectorParams& detector_params,
                                           const RecognitionParams& params) {
    std::vector<FrameDetection> out;
    for (const auto& c : detect::detect_candidates(frame, detector_params)) {
        auto result = recognize(crop(frame, c.bbox), registry, params);
        if (auto* s = std::get_if<SpecialPlate>(&result.classification)) {
            for (auto& p : s->quad) {
                p.x += c.bbox.x_min;
                p.y += c.bbox.y_min;
            }
        }
        out.push_back({c, std::move(result)});
    }
    return out;
}

void draw_quad(GrayImage& img, const geometry::Quad& quad, double intensity) {
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const auto& a = quad[i];
        const auto& b = quad[(i + 1) % quad.size()];
        const int steps = static_cast<int>(std::ceil(std::max(std::abs(b.x - a.x), std::abs(b.y - a.y)))) + 1;
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const int x = static_cast<int>(std::lround(a.x + t * (b.x - a.x)));
            const int y = static_cast<int>(std::lround(a.y + t * (b.y - a.y)));
            if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.at(x, y) = intensity;
        }
    }
}

}  // namespace platesift::recognition
