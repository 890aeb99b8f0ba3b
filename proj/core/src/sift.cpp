#include "platesift/sift.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <tuple>

#include "platesift/error.hpp"

namespace platesift::sift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kOrientationBins = 36;
constexpr int kMaxInterpolationSteps = 5;
constexpr int kDescriptorWidth = 4;
constexpr int kDescriptorBins = 8;
constexpr double kDescriptorScaleFactor = 3.0;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationRadiusFactor = 3.0;

double wrap_angle(double a) noexcept {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

void validate(const SiftParams& p) {
    if (p.scales_per_octave < 2) throw ParameterError("scales_per_octave must be >= 2");
    if (!(p.base_sigma > 0.0)) throw ParameterError("base_sigma must be positive");
    if (p.assumed_blur < 0.0) throw ParameterError("assumed_blur must be non-negative");
    if (p.octave_count < 0) throw ParameterError("octave_count must be >= 0 (0 = auto)");
    if (!(p.edge_ratio > 0.0)) throw ParameterError("edge_ratio must be positive");
}

/// Factor from octave-local coordinates to input-image coordinates.
double octave_factor(const ScaleSpace& ss, int octave) noexcept {
    return std::ldexp(ss.input_scale, octave);
}

/// Octave-local pixel coordinate to input-image coordinate. Upsampling is
/// pixel-center aligned, so the doubled grid is offset by half a pixel.
double to_input(const ScaleSpace& ss, int octave, double v) noexcept {
    const double f = octave_factor(ss, octave);
    if (ss.input_scale == 1.0) return v * f;
    const double up = std::ldexp(v, octave);
    return (up + 0.5) * ss.input_scale - 0.5;
}

int to_local_index(const ScaleSpace& ss, int octave, double v) noexcept {
    const double up = ss.input_scale == 1.0 ? v : (v + 0.5) / ss.input_scale - 0.5;
    return static_cast<int>(std::lround(std::ldexp(up, -octave)));
}

double base_width(const ScaleSpace& ss) { return ss.octaves.front().images.front().width() * ss.input_scale; }
double base_height(const ScaleSpace& ss) { return ss.octaves.front().images.front().height() * ss.input_scale; }

/// Unit-normalizes v and caps every component at `cap`, returning the fixed
/// point of repeated clamp + renormalize: the largest components sit at `cap`
/// and the rest share the remaining energy. Fails when fewer than 1 / cap^2
/// components are non-zero (no unit vector fits under the cap).
bool clamp_and_normalize(Descriptor& v, double cap) {
    std::array<std::size_t, kDescriptorSize> order{};
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });

    double rest = 0.0;
    for (double e : v) rest += e * e;
    if (rest == 0.0) return false;

    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0) rest -= v[order[k - 1]] * v[order[k - 1]];
        const double remaining = 1.0 - static_cast<double>(k) * cap * cap;
        if (remaining <= 0.0 || rest <= 0.0) return false;
        const double scale = std::sqrt(remaining / rest);
        if (scale * v[order[k]] <= cap) {
            for (std::size_t j = 0; j < order.size(); ++j) v[order[j]] = j < k ? cap : v[order[j]] * scale;
            return true;
        }
    }
    return false;
}

}  // namespace

ScaleSpace build_scale_space(const GrayImage& img, const SiftParams& params) {
    validate(params);
    if (img.empty()) throw DimensionError("empty image");

    const int s = params.scales_per_octave;
    GrayImage base = img;
    double present_blur = params.assumed_blur;
    double input_scale = 1.0;
    if (params.upsample) {
        base = resize(img, 2 * img.width(), 2 * img.height());
        present_blur *= 2.0;
        input_scale = 0.5;
    }

    const int min_dim = std::min(base.width(), base.height());
    int octaves = params.octave_count;
    if (octaves == 0) {
        octaves = static_cast<int>(std::floor(std::log2(static_cast<double>(min_dim)))) - 3;
    }
    if (octaves < 1 || (min_dim >> (octaves - 1)) < 8) {
        throw DimensionError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                             " too small for the requested scale space");
    }

    const double k = std::pow(2.0, 1.0 / s);
    std::vector<double> rel_sigma(s + 3);
    for (int i = 0; i < s + 3; ++i) rel_sigma[i] = params.base_sigma * std::pow(k, i);

    ScaleSpace ss;
    ss.base_sigma = params.base_sigma;
    ss.scales_per_octave = s;
    ss.input_scale = input_scale;
    ss.octaves.resize(octaves);

    for (int o = 0; o < octaves; ++o) {
        auto& oct = ss.octaves[o];
        oct.images.reserve(s + 3);
        if (o == 0) {
            const double need = params.base_sigma * params.base_sigma - present_blur * present_blur;
            oct.images.push_back(need > 1e-4 ? gaussian_blur(base, std::sqrt(need)) : base);
        } else {
            // Level s of the previous octave carries exactly 2 * base_sigma.
            oct.images.push_back(downsample_half(ss.octaves[o - 1].images[s]));
        }
        for (int i = 1; i < s + 3; ++i) {
            const double inc = std::sqrt(rel_sigma[i] * rel_sigma[i] - rel_sigma[i - 1] * rel_sigma[i - 1]);
            oct.images.push_back(gaussian_blur(oct.images.back(), inc));
        }
        oct.sigmas.resize(s + 3);
        for (int i = 0; i < s + 3; ++i) oct.sigmas[i] = rel_sigma[i] * std::ldexp(input_scale, o);
    }
    return ss;
}

DogSpace compute_dog(const ScaleSpace& ss) {
    DogSpace dog;
    dog.octaves.reserve(ss.octaves.size());
    for (const auto& oct : ss.octaves) {
        std::vector<GrayImage> diffs;
        diffs.reserve(oct.images.size() - 1);
        for (std::size_t i = 0; i + 1 < oct.images.size(); ++i) {
            const auto& a = oct.images[i];
            const auto& b = oct.images[i + 1];
            std::vector<double> d(a.size());
            const auto pa = a.data();
            const auto pb = b.data();
            for (std::size_t p = 0; p < d.size(); ++p) d[p] = pb[p] - pa[p];
            diffs.emplace_back(a.width(), a.height(), std::move(d));
        }
        dog.octaves.push_back(std::move(diffs));
    }
    return dog;
}

std::vector<Candidate> detect_extrema(const DogSpace& dog, double contrast_prefilter) {
    std::vector<Candidate> out;
    const double floor_value = 0.5 * contrast_prefilter;
    for (int o = 0; o < static_cast<int>(dog.octaves.size()); ++o) {
        const auto& levels = dog.octaves[o];
        for (int i = 1; i + 1 < static_cast<int>(levels.size()); ++i) {
            const auto& prev = levels[i - 1];
            const auto& cur = levels[i];
            const auto& next = levels[i + 1];
            for (int y = 1; y + 1 < cur.height(); ++y) {
                for (int x = 1; x + 1 < cur.width(); ++x) {
                    const double v = cur.at(x, y);
                    if (std::abs(v) < floor_value) continue;
                    bool is_max = true;
                    bool is_min = true;
                    for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            for (const GrayImage* layer : {&prev, &cur, &next}) {
                                if (layer == &cur && dx == 0 && dy == 0) continue;
                                const double n = layer->at(x + dx, y + dy);
                                if (n >= v) is_max = false;
                                if (n <= v) is_min = false;
                            }
                        }
                    }
                    if (is_max || is_min) out.push_back({o, i, x, y});
                }
            }
        }
    }
    return out;
}

std::vector<Keypoint> refine_keypoints(std::span<const Candidate> candidates, const DogSpace& dog,
                                       const ScaleSpace& ss, const SiftParams& params) {
    validate(params);
    const int s = ss.scales_per_octave;
    const double r = params.edge_ratio;
    const double W = base_width(ss);
    const double H = base_height(ss);

    std::vector<Keypoint> out;
    std::set<std::tuple<int, int, int, int>> seen;

    for (const auto& cand : candidates) {
        const auto& levels = dog.octaves[cand.octave];
        int x = cand.x;
        int y = cand.y;
        int i = cand.scale_index;
        const int w = levels[0].width();
        const int h = levels[0].height();

        Eigen::Vector3d offset = Eigen::Vector3d::Zero();
        Eigen::Vector3d grad = Eigen::Vector3d::Zero();
        bool converged = false;
        bool in_range = true;
        for (int step = 0; step < kMaxInterpolationSteps; ++step) {
            const auto& p = levels[i - 1];
            const auto& c = levels[i];
            const auto& n = levels[i + 1];
            const double v = c.at(x, y);
            grad = {0.5 * (c.at(x + 1, y) - c.at(x - 1, y)), 0.5 * (c.at(x, y + 1) - c.at(x, y - 1)),
                    0.5 * (n.at(x, y) - p.at(x, y))};
            const double dxx = c.at(x + 1, y) + c.at(x - 1, y) - 2.0 * v;
            const double dyy = c.at(x, y + 1) + c.at(x, y - 1) - 2.0 * v;
            const double dss = n.at(x, y) + p.at(x, y) - 2.0 * v;
            const double dxy = 0.25 * (c.at(x + 1, y + 1) - c.at(x - 1, y + 1) - c.at(x + 1, y - 1) + c.at(x - 1, y - 1));
            const double dxs = 0.25 * (n.at(x + 1, y) - n.at(x - 1, y) - p.at(x + 1, y) + p.at(x - 1, y));
            const double dys = 0.25 * (n.at(x, y + 1) - n.at(x, y - 1) - p.at(x, y + 1) + p.at(x, y - 1));
            Eigen::Matrix3d hess;
            hess << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
            const Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
            if (!lu.isInvertible()) {
                in_range = false;
                break;
            }
            offset = -lu.solve(grad);
            if (offset.cwiseAbs().maxCoeff() < 0.5) {
                converged = true;
                break;
            }
            if (!offset.allFinite() || offset.cwiseAbs().maxCoeff() > 1e6) {
                in_range = false;
                break;
            }
            x += static_cast<int>(std::lround(offset.x()));
            y += static_cast<int>(std::lround(offset.y()));
            i += static_cast<int>(std::lround(offset.z()));
            if (i < 1 || i > s || x < 1 || x > w - 2 || y < 1 || y > h - 2) {
                in_range = false;
                break;
            }
        }
        if (!converged || !in_range) continue;

        const auto& c = levels[i];
        const double contrast = std::abs(c.at(x, y) + 0.5 * grad.dot(offset));
        if (contrast < params.contrast_threshold) continue;

        const double v = c.at(x, y);
        const double dxx = c.at(x + 1, y) + c.at(x - 1, y) - 2.0 * v;
        const double dyy = c.at(x, y + 1) + c.at(x, y - 1) - 2.0 * v;
        const double dxy = 0.25 * (c.at(x + 1, y + 1) - c.at(x - 1, y + 1) - c.at(x + 1, y - 1) + c.at(x - 1, y - 1));
        const double trace = dxx + dyy;
        const double det = dxx * dyy - dxy * dxy;
        if (det <= 0.0 || trace * trace * r >= (r + 1.0) * (r + 1.0) * det) continue;

        if (!seen.emplace(cand.octave, i, x, y).second) continue;

        const double f = octave_factor(ss, cand.octave);
        Keypoint kp;
        kp.x = to_input(ss, cand.octave, x + offset.x());
        kp.y = to_input(ss, cand.octave, y + offset.y());
        kp.sigma = ss.base_sigma * std::pow(2.0, (i + offset.z()) / s) * f;
        kp.octave = cand.octave;
        kp.scale_index = i;
        kp.contrast = contrast;
        if (kp.x < 0.0 || kp.y < 0.0 || kp.x >= W || kp.y >= H) continue;
        out.push_back(kp);
    }
    return out;
}

std::vector<Keypoint> assign_orientations(std::span<const Keypoint> keypoints, const ScaleSpace& ss,
                                          const SiftParams& params) {
    std::vector<Keypoint> out;
    out.reserve(keypoints.size());
    for (const auto& kp : keypoints) {
        const auto& img = ss.octaves[kp.octave].images[kp.scale_index];
        const double f = octave_factor(ss, kp.octave);
        const int cx = to_local_index(ss, kp.octave, kp.x);
        const int cy = to_local_index(ss, kp.octave, kp.y);
        const double weight_sigma = kOrientationSigmaFactor * kp.sigma / f;
        const int radius = static_cast<int>(std::lround(kOrientationRadiusFactor * weight_sigma));
        const double denom = 2.0 * weight_sigma * weight_sigma;

        std::array<double, kOrientationBins> raw{};
        for (int dy = -radius; dy <= radius; ++dy) {
            const int y = cy + dy;
            if (y < 1 || y > img.height() - 2) continue;
            for (int dx = -radius; dx <= radius; ++dx) {
                const int x = cx + dx;
                if (x < 1 || x > img.width() - 2) continue;
                const double gx = img.at(x + 1, y) - img.at(x - 1, y);
                const double gy = img.at(x, y + 1) - img.at(x, y - 1);
                const double mag = std::hypot(gx, gy);
                if (mag == 0.0) continue;
                const double angle = wrap_angle(std::atan2(gy, gx));
                const int bin = static_cast<int>(std::lround(angle * kOrientationBins / kTwoPi)) % kOrientationBins;
                raw[bin] += std::exp(-(dx * dx + dy * dy) / denom) * mag;
            }
        }

        std::array<double, kOrientationBins> hist{};
        for (int b = 0; b < kOrientationBins; ++b) {
            auto at = [&](int off) { return raw[(b + off + kOrientationBins) % kOrientationBins]; };
            hist[b] = (at(-2) + at(2)) / 16.0 + (at(-1) + at(1)) * 4.0 / 16.0 + at(0) * 6.0 / 16.0;
        }

        // First index wins ties for the dominant bin.
        const int argmax = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
        const double peak = hist[argmax];
        for (int b = 0; b < kOrientationBins; ++b) {
            const double left = hist[(b + kOrientationBins - 1) % kOrientationBins];
            const double right = hist[(b + 1) % kOrientationBins];
            const bool strict_peak = hist[b] > left && hist[b] > right;
            if (b != argmax && !(strict_peak && hist[b] >= params.orientation_peak_ratio * peak)) continue;
            const double curvature = left - 2.0 * hist[b] + right;
            double shift = curvature < 0.0 ? 0.5 * (left - right) / curvature : 0.0;
            shift = std::clamp(shift, -0.5, 0.5);
            Keypoint oriented = kp;
            oriented.orientation = wrap_angle((b + shift) * kTwoPi / kOrientationBins);
            out.push_back(oriented);
        }
    }
    return out;
}

std::vector<Feature> compute_descriptors(std::span<const Keypoint> keypoints, const ScaleSpace& ss,
                                         const SiftParams& params) {
    constexpr int d = kDescriptorWidth;
    constexpr int n = kDescriptorBins;
    std::vector<Feature> out;
    out.reserve(keypoints.size());

    for (const auto& kp : keypoints) {
        const auto& img = ss.octaves[kp.octave].images[kp.scale_index];
        const double f = octave_factor(ss, kp.octave);
        const int cx = to_local_index(ss, kp.octave, kp.x);
        const int cy = to_local_index(ss, kp.octave, kp.y);
        const double hist_width = kDescriptorScaleFactor * kp.sigma / f;
        const double cos_t = std::cos(kp.orientation) / hist_width;
        const double sin_t = std::sin(kp.orientation) / hist_width;
        const double max_radius = std::hypot(img.width(), img.height());
        const int radius =
            static_cast<int>(std::min(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5),
                                      static_cast<long>(max_radius)));
        const double weight_denom = 2.0 * (0.5 * d) * (0.5 * d);

        // (d + 2) x (d + 2) x (n + 2) with a one-cell guard band for interpolation.
        std::vector<double> hist(static_cast<std::size_t>((d + 2) * (d + 2) * (n + 2)), 0.0);
        auto cell = [&](int r, int c, int o) -> double& {
            return hist[static_cast<std::size_t>(((r + 1) * (d + 2) + (c + 1)) * (n + 2) + o)];
        };

        int samples = 0;
        for (int i = -radius; i <= radius; ++i) {
            for (int j = -radius; j <= radius; ++j) {
                const double x_rot = j * cos_t + i * sin_t;
                const double y_rot = -j * sin_t + i * cos_t;
                const double rbin = y_rot + d / 2.0 - 0.5;
                const double cbin = x_rot + d / 2.0 - 0.5;
                if (!(rbin > -1.0 && rbin < d && cbin > -1.0 && cbin < d)) continue;
                const int y = cy + i;
                const int x = cx + j;
                if (y < 1 || y > img.height() - 2 || x < 1 || x > img.width() - 2) continue;
                ++samples;

                const double gx = img.at(x + 1, y) - img.at(x - 1, y);
                const double gy = img.at(x, y + 1) - img.at(x, y - 1);
                const double mag = std::hypot(gx, gy) * std::exp(-(x_rot * x_rot + y_rot * y_rot) / weight_denom);
                if (mag == 0.0) continue;
                const double obin = wrap_angle(std::atan2(gy, gx) - kp.orientation) * n / kTwoPi;

                const int r0 = static_cast<int>(std::floor(rbin));
                const int c0 = static_cast<int>(std::floor(cbin));
                int o0 = static_cast<int>(std::floor(obin));
                const double dr = rbin - r0;
                const double dc = cbin - c0;
                const double dor = obin - o0;
                o0 %= n;
                for (int a = 0; a <= 1; ++a) {
                    const double wr = a ? dr : 1.0 - dr;
                    for (int b = 0; b <= 1; ++b) {
                        const double wc = b ? dc : 1.0 - dc;
                        cell(r0 + a, c0 + b, o0) += mag * wr * wc * (1.0 - dor);
                        cell(r0 + a, c0 + b, o0 + 1) += mag * wr * wc * dor;
                    }
                }
            }
        }
        if (samples == 0) continue;

        Descriptor desc{};
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                // Fold the wrap-around orientation bin.
                cell(r, c, 0) += cell(r, c, n);
                for (int o = 0; o < n; ++o) desc[static_cast<std::size_t>((r * d + c) * n + o)] = cell(r, c, o);
            }
        }

        if (!clamp_and_normalize(desc, params.descriptor_clamp)) continue;
        out.push_back({kp, desc});
    }
    return out;
}

std::vector<Feature> extract_features(const GrayImage& img, const SiftParams& params) {
    const auto ss = build_scale_space(img, params);
    const auto dog = compute_dog(ss);
    const auto candidates = detect_extrema(dog, params.contrast_threshold);
    const auto refined = refine_keypoints(candidates, dog, ss, params);
    const auto oriented = assign_orientations(refined, ss, params);
    auto features = compute_descriptors(oriented, ss, params);
    std::stable_sort(features.begin(), features.end(), [](const Feature& a, const Feature& b) {
        const auto& p = a.keypoint;
        const auto& q = b.keypoint;
        return std::tie(p.octave, p.scale_index, p.y, p.x, p.orientation) <
               std::tie(q.octave, q.scale_index, q.y, q.x, q.orientation);
    });
    return features;
}

}  // namespace platesift::sift
