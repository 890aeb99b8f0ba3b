// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "blob_oracle.hpp"
#include "detector_oracles.hpp"
#include "homography_oracles.hpp"
#include "matching_oracle.hpp"
#include "platesift/detector.hpp"
#include "platesift/evaluation.hpp"
#include "platesift/homography.hpp"
#include "platesift/image_io.hpp"
#include "platesift/matching.hpp"
#include "platesift/registry.hpp"
#include "platesift/sift.hpp"
#include "platesift/synth.hpp"
#include "sift_oracles.hpp"
#include "test_support.hpp"

namespace ps = platesift;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // <= 0: no limit
    std::function<Verdict()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// Shared corpus fixture for criteria 2 and 3.
struct Corpus {
    ps::testing::TempDir dir{"acceptance"};
    ps::registry::Registry registry;

    Corpus() {
        fs::create_directories(dir / "templates");
        for (const auto& w : ps::synth::builtin_templates()) {
            ps::write_pgm(w.image, dir / "templates" / (w.label + ".pgm"));
            registry = ps::registry::enroll(registry, w.label, w.image);
        }
    }

    ps::eval::EvalReport run(const std::string& name, const ps::synth::SynthParams& p) const {
        const auto out = dir / name;
        const auto manifest = ps::synth::synth_corpus(registry, dir / "templates", out, p);
        return ps::eval::evaluate(manifest, registry, {}, out);
    }
};

Corpus& corpus() {
    static Corpus c;
    return c;
}

ps::synth::SynthParams analog_params() {
    ps::synth::SynthParams p;
    p.seed = 42;
    p.n_special = 60;
    p.n_normal = 60;
    p.max_rotation_deg = 15.0;
    p.scale_min = 0.7;
    p.scale_max = 1.3;
    p.noise_sigma = 0.02;
    p.blur_sigma_max = 1.0;
    return p;
}

Verdict metric_arithmetic() {
    std::vector<ps::eval::ImageOutcome> outcomes;
    auto add = [&](int n, std::optional<std::string> truth, std::optional<std::string> predicted) {
        for (int i = 0; i < n; ++i) outcomes.push_back({"fixture", truth, predicted, {}, {}});
    };
    add(122, "Putrajaya", "Putrajaya");
    add(28, "Putrajaya", std::nullopt);
    add(350, std::nullopt, std::nullopt);
    const auto report = ps::eval::summarize(outcomes);
    const auto& r = report.rates;
    const auto tpr = ps::eval::format_percent(r.tpr);
    const auto fpr = ps::eval::format_percent(r.fpr);
    const auto fnr = ps::eval::format_percent(r.fnr);
    const bool ok = tpr == "81.33" && fpr == "0.00" && fnr == "18.67" && std::abs(r.tpr - 81.33) <= 0.005 &&
                    std::abs(r.fpr) <= 0.005 && std::abs(r.fnr - 18.67) <= 0.005;
    return {ok, "TPR " + tpr + "% FPR " + fpr + "% FNR " + fnr + "%"};
}

Verdict synthetic_analog() {
    const auto report = corpus().run("analog", analog_params());
    const auto& c = report.counts;
    const bool ok = report.rates.tpr >= 80.0 && c.normal_false_special == 0 && c.n_special == 60 && c.n_normal == 60 &&
                    report.warnings == 0;
    std::ostringstream d;
    d << "TPR " << ps::eval::format_percent(report.rates.tpr) << "% (" << c.special_correct << "/" << c.n_special
      << "), wrong label " << c.special_wrong_label << ", normal flagged " << c.normal_false_special << "/"
      << c.n_normal;
    return {ok, d.str()};
}

Verdict failure_mirror() {
    auto blurred = analog_params();
    blurred.n_normal = 0;
    blurred.degrade_blur_sigma = 5.0;
    auto small = analog_params();
    small.n_normal = 0;
    small.degrade_height = 18;

    bool ok = true;
    std::ostringstream d;
    for (const auto& [name, params] : {std::pair{"blur 5.0", blurred}, std::pair{"height 18", small}}) {
        const auto report = corpus().run(name == std::string("blur 5.0") ? "blurred" : "small", params);
        const auto& c = report.counts;
        const double missed = static_cast<double>(c.special_missed) / static_cast<double>(c.n_special);
        ok = ok && c.n_special == 60 && missed >= 0.9 && c.special_wrong_label == 0;
        d << name << ": " << c.special_missed << "/" << c.n_special << " Normal, wrong label "
          << c.special_wrong_label << "; ";
    }
    auto s = d.str();
    s.resize(s.size() - 2);
    return {ok, s};
}

Verdict homography_suite() {
    std::mt19937_64 rng(4);
    int recovered = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Matrix3d truth = ps::testing::random_homography(rng);
        const auto h = ps::geometry::dlt_homography(ps::testing::exact_correspondences(truth, 8, rng));
        const double err = (h.matrix() - ps::testing::canonical(truth)).norm();
        worst = std::max(worst, err);
        recovered += err < 1e-8 ? 1 : 0;
    }
    int exact = 0;
    std::vector<int> expected(14);
    for (int i = 0; i < 14; ++i) expected[i] = i;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Matrix3d truth = ps::testing::random_homography(rng);
        auto corrs = ps::testing::exact_correspondences(truth, 14, rng);
        ps::testing::append_outliers(corrs, truth, 6, 10.0, rng);
        ps::geometry::RansacParams p;
        p.inlier_threshold = 3.0;
        p.seed = static_cast<std::uint64_t>(t);
        const auto fit = ps::geometry::robust_fit(corrs, p);
        exact += fit && fit->inliers == expected ? 1 : 0;
    }
    return {recovered == 100 && exact >= 95,
            std::to_string(recovered) + "/100 exact recoveries (worst " + fmt("%.1e", worst) + "), " +
                std::to_string(exact) + "/100 exact inlier sets at 30% outliers"};
}

Verdict matcher_equivalence() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(0, 200);
    int identical = 0;
    std::size_t total_matches = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<ps::sift::Descriptor> templ, query;
        const int nt = size(rng), nq = size(rng);
        for (int i = 0; i < nt; ++i) templ.push_back(ps::testing::random_descriptor(rng));
        for (int i = 0; i < nq; ++i) {
            query.push_back(nt > 0 && i % 3 != 0 ? ps::testing::perturb(templ[static_cast<std::size_t>(i % nt)], 0.03, rng)
                                                 : ps::testing::random_descriptor(rng));
        }
        const auto got = ps::match::match_descriptors(query, templ);
        identical += got == ps::testing::brute_force_matches(query, templ, 0.8) ? 1 : 0;
        total_matches += got.size();
    }
    return {identical == 50,
            std::to_string(identical) + "/50 identical to brute force (" + std::to_string(total_matches) + " matches)"};
}

Verdict sift_repeatability() {
    const auto img = ps::testing::textured_image(256, 256, 2024);
    const auto base = ps::sift::extract_features(img);
    const auto rot = ps::testing::rotate_about_center(img, 15.0);
    const auto rot_feats = ps::sift::extract_features(rot.image);
    const auto r = ps::testing::repeatability(base, rot_feats, rot.forward, 256, 256, 3.0);
    const auto sc = ps::testing::scale_image(img, 0.8);
    const auto sc_feats = ps::sift::extract_features(sc.image);
    const auto s =
        ps::testing::repeatability(base, sc_feats, sc.forward, sc.image.width(), sc.image.height(), 3.0);

    double worst_norm = 0.0, max_component = 0.0;
    for (const auto* set : {&base, &rot_feats, &sc_feats})
        for (const auto& f : *set) {
            double n = 0.0;
            for (double v : f.descriptor) {
                n += v * v;
                max_component = std::max(max_component, v);
            }
            worst_norm = std::max(worst_norm, std::abs(std::sqrt(n) - 1.0));
        }
    const bool ok = r.rate() >= 0.4 && s.rate() >= 0.4 && worst_norm <= 1e-6 && max_component <= 0.2 + 1e-6 &&
                    !base.empty();
    return {ok, "rotation " + fmt("%.1f", 100 * r.rate()) + "%, scale " + fmt("%.1f", 100 * s.rate()) +
                    "%, norm error " + fmt("%.1e", worst_norm) + ", max component " + fmt("%.4f", max_component)};
}

Verdict image_conservation() {
    bool blur_exact = true;
    for (double v : {0.0, 0.37, 0.5, 1.0})
        for (double sigma : {0.8, 1.6, 3.0}) {
            const ps::GrayImage c(41, 29, v);
            blur_exact = blur_exact && ps::gaussian_blur(c, sigma) == c;
        }

    bool dog_zero = true;
    const auto ss = ps::sift::build_scale_space(ps::GrayImage(96, 80, 0.42));
    for (const auto& octave : ps::sift::compute_dog(ss).octaves)
        for (const auto& d : octave)
            for (double v : d.data()) dog_zero = dog_zero && v == 0.0;

    std::mt19937_64 rng(7);
    int agree = 0;
    for (int t = 0; t < 50; ++t) {
        const auto img = ps::testing::random_binary(48, 40, 0.05 + 0.012 * t, rng);
        const auto blobs = ps::label_blobs(img);
        const auto oracle = ps::testing::flood_fill_blobs(img);
        bool same = blobs.size() == oracle.size();
        long long total = 0;
        for (std::size_t i = 0; same && i < blobs.size(); ++i) {
            same = blobs[i].area == oracle[i].area && blobs[i].bbox == oracle[i].bbox;
            total += blobs[i].area;
        }
        agree += same && total == static_cast<long long>(img.count()) ? 1 : 0;
    }
    return {blur_exact && dog_zero && agree == 50, std::string("blur exact ") + (blur_exact ? "yes" : "no") +
                                                       ", DoG zero " + (dog_zero ? "yes" : "no") + ", " +
                                                       std::to_string(agree) + "/50 partitions match flood fill"};
}

Verdict detector_compositionality() {
    std::mt19937_64 rng(8);
    int agree = 0;
    for (int t = 0; t < 20; ++t) {
        const auto frame = ps::testing::random_frame(rng);
        const ps::detect::DetectorParams p;
        agree += ps::detect::detect_candidates(frame, p) == ps::testing::manual_detection(frame, p) ? 1 : 0;
    }
    ps::GrayImage frame(320, 200, 0.5);
    ps::testing::paint_stripes(frame, 60, 40, 120, 40);
    const auto c = ps::detect::detect_candidates(frame);
    double covered = 0.0;
    if (c.size() == 1) {
        const auto& b = c[0].bbox;
        const int w = std::min(b.x_max, 179) - std::max(b.x_min, 60) + 1;
        const int h = std::min(b.y_max, 79) - std::max(b.y_min, 40) + 1;
        covered = w > 0 && h > 0 ? static_cast<double>(w * h) / (120.0 * 40.0) : 0.0;
    }
    return {agree == 20 && c.size() == 1 && covered >= 0.9,
            std::to_string(agree) + "/20 frames match manual composition, one-plate frame: " +
                std::to_string(c.size()) + " candidate(s), " + fmt("%.1f", 100 * covered) + "% of plate covered"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "metric arithmetic", 1.0, metric_arithmetic},
        {2, "synthetic end-to-end analog", 180.0, synthetic_analog},
        {3, "blur / small failure mirror", 0.0, failure_mirror},
        {4, "homography suite", 10.0, homography_suite},
        {5, "matcher oracle equivalence", 10.0, matcher_equivalence},
        {6, "SIFT repeatability", 0.0, sift_repeatability},
        {7, "image-core conservation", 0.0, image_conservation},
        {8, "detector compositionality", 0.0, detector_compositionality},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
            v.pass = false;
            v.detail += "; over the " + fmt("%.0f", c.time_limit_s) + " s limit";
        }
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << v.detail << " ["
                  << fmt("%.2f", secs) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
