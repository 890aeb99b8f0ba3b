#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "platesift/error.hpp"
#include "platesift/sift.hpp"
#include "sift_oracles.hpp"
#include "test_support.hpp"

namespace platesift::sift {
namespace {

constexpr double kPi = std::numbers::pi;

double angle_diff(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2 * kPi);
    return std::min(d, 2 * kPi - d);
}

double norm(const Descriptor& d) {
    double s = 0.0;
    for (double v : d) s += v * v;
    return std::sqrt(s);
}

double dist(const Descriptor& a, const Descriptor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Scale space ----------------------------------------------------------------

TEST(ScaleSpace, ConstantImageStaysConstant) {
    const auto ss = build_scale_space(GrayImage(64, 64, 0.42));
    for (const auto& oct : ss.octaves)
        for (const auto& img : oct.images)
            for (double v : img.data()) EXPECT_EQ(v, 0.42);
}

TEST(ScaleSpace, AutoOctaveCountAndLevels) {
    const auto ss = build_scale_space(GrayImage(64, 64, 0.5));
    ASSERT_EQ(ss.octaves.size(), 3U);  // floor(log2 64) - 3
    for (std::size_t o = 0; o < ss.octaves.size(); ++o) {
        EXPECT_EQ(ss.octaves[o].images.size(), 6U);
        EXPECT_EQ(ss.octaves[o].images[0].width(), 64 >> o);
    }
}

TEST(ScaleSpace, OctaveDimensionsFloorHalve) {
    const auto ss = build_scale_space(GrayImage(101, 77, 0.5));
    ASSERT_EQ(ss.octaves.size(), 3U);  // floor(log2 77) - 3
    EXPECT_EQ(ss.octaves[1].images[0].width(), 50);
    EXPECT_EQ(ss.octaves[2].images[0].height(), 19);
}

TEST(ScaleSpace, SigmaSequence) {
    const auto ss = build_scale_space(GrayImage(64, 64, 0.5));
    const double expected[] = {1.6, 2.016, 2.540, 3.200, 4.032, 5.080};
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(ss.octaves[0].sigmas[i], expected[i], 1e-3);
    EXPECT_NEAR(ss.octaves[1].sigmas[0], 3.2, 1e-9);
}

TEST(ScaleSpace, LevelsCarryTheirNominalBlur) {
    // An impulse blurred to absolute sigma has peak 1 / (2 pi sigma^2).
    GrayImage img(65, 65, 0.0);
    img.at(32, 32) = 1.0;
    SiftParams p;
    p.assumed_blur = 0.0;
    p.octave_count = 1;
    const auto ss = build_scale_space(img, p);
    for (int i = 0; i < 6; ++i) {
        const double s = ss.octaves[0].sigmas[i];
        EXPECT_NEAR(ss.octaves[0].images[i].at(32, 32), 1.0 / (2 * kPi * s * s), 0.02 / (2 * kPi * s * s)) << i;
    }
}

TEST(ScaleSpace, TooSmallThrows) {
    EXPECT_THROW(build_scale_space(GrayImage(12, 12, 0.5)), DimensionError);
    SiftParams p;
    p.octave_count = 4;
    EXPECT_THROW(build_scale_space(GrayImage(32, 32, 0.5), p), DimensionError);
}

TEST(ScaleSpace, InvalidParamsThrow) {
    SiftParams p;
    p.scales_per_octave = 1;
    EXPECT_THROW(build_scale_space(GrayImage(64, 64), p), ParameterError);
}

// DoG ------------------------------------------------------------------------

TEST(Dog, ConstantPyramidGivesZero) {
    const auto dog = compute_dog(build_scale_space(GrayImage(64, 64, 0.3)));
    for (const auto& oct : dog.octaves) {
        EXPECT_EQ(oct.size(), 5U);
        for (const auto& img : oct)
            for (double v : img.data()) EXPECT_EQ(v, 0.0);
    }
}

TEST(Dog, IsDifferenceOfAdjacentLevels) {
    const auto img = testing::textured_image(64, 64, 3);
    const auto ss = build_scale_space(img);
    const auto dog = compute_dog(ss);
    for (std::size_t o = 0; o < ss.octaves.size(); ++o)
        for (std::size_t i = 0; i + 1 < ss.octaves[o].images.size(); ++i)
            for (std::size_t p = 0; p < dog.octaves[o][i].size(); ++p)
                EXPECT_EQ(dog.octaves[o][i].data()[p],
                          ss.octaves[o].images[i + 1].data()[p] - ss.octaves[o].images[i].data()[p]);
}

TEST(Dog, BlobExtremumNearCenter) {
    const auto img = testing::gaussian_spot(64, 64, 30, 34, 3.0);
    const auto dog = compute_dog(build_scale_space(img));
    // Brute force: most negative sample of octave 0 (bright blob -> negative DoG).
    double best = 0.0;
    int bx = -1, by = -1;
    for (const auto& level : dog.octaves[0])
        for (int y = 0; y < level.height(); ++y)
            for (int x = 0; x < level.width(); ++x)
                if (level.at(x, y) < best) {
                    best = level.at(x, y);
                    bx = x;
                    by = y;
                }
    EXPECT_LE(std::hypot(bx - 30, by - 34), 1.0);
}

// Extrema --------------------------------------------------------------------

TEST(Extrema, ZeroDogHasNone) {
    const auto dog = compute_dog(build_scale_space(GrayImage(64, 64, 0.7)));
    EXPECT_TRUE(detect_extrema(dog, 0.0).empty());
}

TEST(Extrema, CandidatesAreStrictExtrema) {
    const auto img = testing::textured_image(96, 96, 8);
    const auto dog = compute_dog(build_scale_space(img));
    const auto cands = detect_extrema(dog, 0.03);
    ASSERT_FALSE(cands.empty());
    for (const auto& c : cands) {
        ASSERT_GE(c.scale_index, 1);
        ASSERT_LE(c.scale_index, 3);
        const auto& lv = dog.octaves[c.octave];
        const double v = lv[c.scale_index].at(c.x, c.y);
        EXPECT_GE(std::abs(v), 0.015);
        int greater = 0, less = 0;
        for (int ds = -1; ds <= 1; ++ds)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (ds == 0 && dx == 0 && dy == 0) continue;
                    const double n = lv[c.scale_index + ds].at(c.x + dx, c.y + dy);
                    greater += n > v;
                    less += n < v;
                }
        EXPECT_TRUE(greater == 26 || less == 26);
    }
}

// Returns the sigma of the DoG level whose |response| at the blob center is largest.
double oracle_best_scale(const DogSpace& dog, const ScaleSpace& ss, double cx, double cy) {
    double best = -1.0, sigma = 0.0;
    for (std::size_t o = 0; o < dog.octaves.size(); ++o) {
        const double f = std::ldexp(1.0, static_cast<int>(o));
        for (std::size_t i = 1; i + 1 < dog.octaves[o].size(); ++i) {
            const auto& lv = dog.octaves[o][i];
            const double v = std::abs(lv.at(static_cast<int>(std::lround(cx / f)), static_cast<int>(std::lround(cy / f))));
            if (v > best) {
                best = v;
                sigma = ss.octaves[o].sigmas[i];
            }
        }
    }
    return sigma;
}

TEST(Extrema, BlobScaleMatchesBruteForce) {
    for (double blob_sigma : {2.5, 4.0, 6.0}) {
        // Even center so every octave samples it on-grid (no symmetric ties).
        const double cx = 64.0, cy = 64.0;
        const auto img = testing::gaussian_spot(128, 128, cx, cy, blob_sigma);
        const auto ss = build_scale_space(img);
        const auto dog = compute_dog(ss);
        const auto kps = refine_keypoints(detect_extrema(dog, 0.03), dog, ss);
        const double oracle = oracle_best_scale(dog, ss, cx, cy);
        const Keypoint* near = nullptr;
        for (const auto& k : kps)
            if (std::hypot(k.x - cx, k.y - cy) < 2.0) near = &k;
        ASSERT_NE(near, nullptr) << blob_sigma;
        EXPECT_NEAR(near->sigma, oracle, 0.25 * oracle) << blob_sigma;
        EXPECT_NEAR(near->sigma, blob_sigma, 0.25 * blob_sigma) << blob_sigma;
    }
}

TEST(Extrema, TwoBlobsGiveTwoDetections) {
    auto img = testing::gaussian_spot(128, 64, 32, 32, 3.0);
    const auto second = testing::gaussian_spot(128, 64, 96, 30, 3.0, 0.8, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] += second.data()[i];
    const auto dog = compute_dog(build_scale_space(img));
    const auto cands = detect_extrema(dog, 0.03);
    auto near = [&](double x, double y) {
        for (const auto& c : cands) {
            const double f = std::ldexp(1.0, c.octave);
            if (std::hypot(c.x * f - x, c.y * f - y) <= 2.0 * f) return true;
        }
        return false;
    };
    EXPECT_GE(cands.size(), 2U);
    EXPECT_TRUE(near(32, 32));
    EXPECT_TRUE(near(96, 30));
}

// Refinement -----------------------------------------------------------------

TEST(Refine, StepEdgeRejected) {
    GrayImage img(64, 64, 0.2);
    for (int y = 0; y < 64; ++y)
        for (int x = 32; x < 64; ++x) img.at(x, y) = 0.8;
    const auto ss = build_scale_space(img);
    const auto dog = compute_dog(ss);
    const auto cands = detect_extrema(dog, 0.0);
    const auto kps = refine_keypoints(cands, dog, ss);
    EXPECT_TRUE(kps.empty());
    // Without the edge test (huge ratio) only contrast remains: an ideal edge's
    // principal-curvature ratio is what rejects it, not its contrast.
    SiftParams loose;
    loose.edge_ratio = 1e12;
    loose.contrast_threshold = 0.0;
    for (const auto& k : refine_keypoints(cands, dog, ss, loose)) EXPECT_NEAR(k.x, 31.5, 3.0);
}

TEST(Refine, LowContrastRejected) {
    const auto img = testing::gaussian_spot(64, 64, 32, 32, 3.0, 0.01, 0.5);
    const auto ss = build_scale_space(img);
    const auto dog = compute_dog(ss);
    const auto cands = detect_extrema(dog, 0.0);
    ASSERT_FALSE(cands.empty());
    const auto kps = refine_keypoints(cands, dog, ss);
    EXPECT_TRUE(kps.empty());
    SiftParams lenient;
    lenient.contrast_threshold = 0.0001;
    const auto kept = refine_keypoints(cands, dog, ss, lenient);
    ASSERT_FALSE(kept.empty());
    for (const auto& k : kept) EXPECT_LT(k.contrast, 0.03);
}

TEST(Refine, BlobCenterSubPixel) {
    const double cx = 40.3, cy = 37.6;
    const auto img = testing::gaussian_spot(80, 80, cx, cy, 3.0);
    const auto ss = build_scale_space(img);
    const auto dog = compute_dog(ss);
    const auto kps = refine_keypoints(detect_extrema(dog, 0.03), dog, ss);
    bool found = false;
    for (const auto& k : kps) {
        if (std::hypot(k.x - cx, k.y - cy) < 0.5) found = true;
        EXPECT_GE(k.contrast, 0.03);
        EXPECT_GT(k.sigma, 0.0);
    }
    EXPECT_TRUE(found);
}

// Orientation ----------------------------------------------------------------

Keypoint centered_keypoint(const ScaleSpace& ss, double x, double y, int scale_index = 1) {
    Keypoint k;
    k.x = x;
    k.y = y;
    k.octave = 0;
    k.scale_index = scale_index;
    k.sigma = ss.octaves[0].sigmas[scale_index];
    return k;
}

TEST(Orientation, RampFollowsGradient) {
    for (double deg : {0.0, 30.0, 100.0, 215.0, 333.0}) {
        const double t = deg * kPi / 180.0;
        GrayImage img(64, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) img.at(x, y) = 0.5 + 0.005 * ((x - 32) * std::cos(t) + (y - 32) * std::sin(t));
        const auto ss = build_scale_space(img);
        const Keypoint k = centered_keypoint(ss, 32, 32);
        const auto out = assign_orientations(std::span(&k, 1), ss);
        ASSERT_EQ(out.size(), 1U) << deg;
        EXPECT_LT(angle_diff(out[0].orientation, t), 5.0 * kPi / 180.0) << deg;
    }
}

TEST(Orientation, SymmetricBlobStillEmits) {
    const auto img = testing::gaussian_spot(64, 64, 32, 32, 4.0);
    const auto ss = build_scale_space(img);
    const Keypoint k = centered_keypoint(ss, 32, 32);
    const auto out = assign_orientations(std::span(&k, 1), ss);
    ASSERT_GE(out.size(), 1U);
    for (const auto& o : out) {
        EXPECT_GE(o.orientation, 0.0);
        EXPECT_LT(o.orientation, 2 * kPi);
    }
}

TEST(Orientation, TwoEqualPopulationsGiveTwoKeypoints) {
    // I = a * max(x - c, y - c): gradient (a, 0) on one side of the diagonal and
    // (0, a) on the other, mirror-symmetric so both populations weigh the same.
    GrayImage img(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) img.at(x, y) = 0.5 + 0.01 * std::max(x - 32, y - 32);
    const auto ss = build_scale_space(img);
    const Keypoint k = centered_keypoint(ss, 32, 32);
    const auto out = assign_orientations(std::span(&k, 1), ss);
    ASSERT_EQ(out.size(), 2U);
    EXPECT_LT(angle_diff(out[0].orientation, 0.0), 5.0 * kPi / 180.0);
    EXPECT_LT(angle_diff(out[1].orientation, kPi / 2), 5.0 * kPi / 180.0);
}

// Descriptors ----------------------------------------------------------------

TEST(Descriptor, UnitNormAndClamp) {
    const auto feats = extract_features(testing::textured_image(128, 128, 17));
    ASSERT_GT(feats.size(), 20U);
    for (const auto& f : feats) {
        EXPECT_NEAR(norm(f.descriptor), 1.0, 1e-6);
        for (double v : f.descriptor) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 0.2 + 1e-6);
        }
    }
}

TEST(Descriptor, UniformPatchEmitsNothing) { EXPECT_TRUE(extract_features(GrayImage(64, 64, 0.5)).empty()); }

TEST(Descriptor, RotatedPatchMatchesItsTwin) {
    const auto img = testing::textured_image(128, 128, 23);
    const auto rotated = testing::rotate_about_center(img, 30.0);
    const auto unrelated = extract_features(testing::textured_image(128, 128, 777));
    const auto a = extract_features(img);
    const auto b = extract_features(rotated.image);
    ASSERT_FALSE(unrelated.empty());

    int checked = 0, passed = 0;
    for (const auto& fa : a) {
        const auto m = rotated.forward({fa.keypoint.x, fa.keypoint.y});
        if (std::hypot(m.x - 64, m.y - 64) > 40) continue;
        const Feature* twin = nullptr;
        double best = 1e9;
        for (const auto& fb : b) {
            const double d = std::hypot(fb.keypoint.x - m.x, fb.keypoint.y - m.y);
            const double dt = angle_diff(fb.keypoint.orientation, fa.keypoint.orientation + kPi / 6);
            if (d < 1.5 && dt < 0.2 && std::abs(std::log(fb.keypoint.sigma / fa.keypoint.sigma)) < 0.2 && d < best) {
                best = d;
                twin = &fb;
            }
        }
        if (twin == nullptr) continue;
        ++checked;
        double nearest_unrelated = 1e9;
        for (const auto& fu : unrelated) nearest_unrelated = std::min(nearest_unrelated, dist(fa.descriptor, fu.descriptor));
        passed += dist(fa.descriptor, twin->descriptor) < nearest_unrelated;
    }
    ASSERT_GE(checked, 5);
    EXPECT_GE(passed, checked * 9 / 10);
}

// Whole pipeline ---------------------------------------------------------------

TEST(ExtractFeatures, DeterministicAndCanonicallyOrdered) {
    const auto img = testing::textured_image(128, 96, 31);
    const auto a = extract_features(img);
    const auto b = extract_features(img);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].keypoint, b[i].keypoint);
        EXPECT_EQ(a[i].descriptor, b[i].descriptor);
        if (i > 0) {
            const auto& p = a[i - 1].keypoint;
            const auto& q = a[i].keypoint;
            EXPECT_LE(std::tie(p.octave, p.scale_index, p.y, p.x, p.orientation),
                      std::tie(q.octave, q.scale_index, q.y, q.x, q.orientation));
        }
    }
}

TEST(ExtractFeatures, KeypointsInsideImage) {
    const auto feats = extract_features(testing::textured_image(150, 70, 12));
    for (const auto& f : feats) {
        EXPECT_GE(f.keypoint.x, 0.0);
        EXPECT_GE(f.keypoint.y, 0.0);
        EXPECT_LT(f.keypoint.x, 150.0);
        EXPECT_LT(f.keypoint.y, 70.0);
        EXPECT_GE(f.keypoint.contrast, 0.03);
    }
}

TEST(ExtractFeatures, ConstantOffsetInvariance) {
    auto img = testing::textured_image(128, 128, 41);
    for (double& v : img.data()) v *= 0.85;
    auto shifted = img;
    for (double& v : shifted.data()) v += 0.1;
    const auto a = extract_features(img);
    const auto b = extract_features(shifted);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i].keypoint.x, b[i].keypoint.x, 1e-6);
        EXPECT_NEAR(a[i].keypoint.y, b[i].keypoint.y, 1e-6);
        EXPECT_NEAR(a[i].keypoint.orientation, b[i].keypoint.orientation, 1e-6);
    }
}

TEST(ExtractFeatures, RepeatableUnderRotationAndScale) {
    const auto img = testing::textured_image(256, 256, 2024);
    const auto base = extract_features(img);
    const auto rot = testing::rotate_about_center(img, 15.0);
    const auto r = testing::repeatability(base, extract_features(rot.image), rot.forward, 256, 256, 3.0);
    EXPECT_GE(r.rate(), 0.4);
    const auto sc = testing::scale_image(img, 0.8);
    const auto s = testing::repeatability(base, extract_features(sc.image), sc.forward, sc.image.width(),
                                          sc.image.height(), 3.0);
    EXPECT_GE(s.rate(), 0.4);
}

TEST(ExtractFeatures, UpsampleMapsBackToInputCoordinates) {
    SiftParams p;
    p.upsample = true;
    // Input (29.75, 32.75) lands on pixel (60, 65) of the pixel-center-aligned doubled grid.
    const auto img = testing::gaussian_spot(64, 64, 29.75, 32.75, 2.0);
    const auto feats = extract_features(img, p);
    bool found = false;
    for (const auto& f : feats) found = found || std::hypot(f.keypoint.x - 29.75, f.keypoint.y - 32.75) < 0.25;
    EXPECT_TRUE(found);
}

}  // namespace
}  // namespace platesift::sift
