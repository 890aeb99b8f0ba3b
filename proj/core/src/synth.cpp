#include "platesift/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "platesift/error.hpp"
#include "platesift/image_io.hpp"

namespace platesift::synth {

namespace {

using Glyph = std::array<std::uint8_t, 7>;

constexpr Glyph rows(std::array<std::string_view, 7> r) {
    Glyph g{};
    for (int y = 0; y < 7; ++y) {
        std::uint8_t bits = 0;
        for (int x = 0; x < 5; ++x) bits = static_cast<std::uint8_t>((bits << 1) | (r[y][x] == '#' ? 1 : 0));
        g[y] = bits;
    }
    return g;
}

// clang-format off
constexpr std::array<Glyph, 26> kLetters{{
    rows({" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}),  // A
    rows({"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}),  // B
    rows({" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}),  // C
    rows({"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}),  // D
    rows({"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}),  // E
    rows({"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}),  // F
    rows({" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"}),  // G
    rows({"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}),  // H
    rows({" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}),  // I
    rows({"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "}),  // J
    rows({"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}),  // K
    rows({"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}),  // L
    rows({"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}),  // M
    rows({"#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"}),  // N
    rows({" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}),  // O
    rows({"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}),  // P
    rows({" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}),  // Q
    rows({"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}),  // R
    rows({" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}),  // S
    rows({"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}),  // T
    rows({"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}),  // U
    rows({"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}),  // V
    rows({"#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "}),  // W
    rows({"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}),  // X
    rows({"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}),  // Y
    rows({"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}),  // Z
}};

constexpr std::array<Glyph, 10> kDigits{{
    rows({" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}),  // 0
    rows({"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}),  // 1
    rows({" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}),  // 2
    rows({"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "}),  // 3
    rows({"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}),  // 4
    rows({"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}),  // 5
    rows({"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "}),  // 6
    rows({"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "}),  // 7
    rows({" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}),  // 8
    rows({" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "}),  // 9
}};
// clang-format on

// Letters absent from every built-in prefix, used for standard plates.
constexpr std::string_view kNormalLetters = "BCFGHKLMQVWXZ";

bool cell_set(const Glyph& g, int col, int row) {
    if (col < 0 || col > 4 || row < 0 || row > 6) return false;
    return ((g[row] >> (4 - col)) & 1) != 0;
}

struct Segment {
    double x0, y0, x1, y1;
};

double distance_to(const Segment& s, double px, double py) {
    const double dx = s.x1 - s.x0;
    const double dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (s.x0 + t * dx), py - (s.y0 + t * dy));
}

double coverage(double half_width, double d) { return std::clamp(half_width - d + 0.5, 0.0, 1.0); }

/// Ink fraction of a template: 0 on the paper, 1 on full-strength ink.
GrayImage ink_map(const GrayImage& img) {
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    GrayImage a(img.width(), img.height(), 0.0);
    if (*hi - *lo < 1e-9) return a;
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = (*hi - img.data()[i]) / (*hi - *lo);
    return a;
}

void composite(GrayImage& dst, const GrayImage& alpha, int ox, int oy, double ink) {
    for (int y = 0; y < alpha.height(); ++y) {
        for (int x = 0; x < alpha.width(); ++x) {
            const int tx = ox + x;
            const int ty = oy + y;
            if (tx < 0 || ty < 0 || tx >= dst.width() || ty >= dst.height()) continue;
            const double a = alpha.at(x, y);
            dst.at(tx, ty) = dst.at(tx, ty) * (1.0 - a) + ink * a;
        }
    }
}

GrayImage plate_background(int width, int height, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> base_dist(0.82, 0.93);
    std::uniform_real_distribution<double> tilt_dist(-0.03, 0.03);
    const double base = base_dist(rng);
    const double tilt = tilt_dist(rng);
    GrayImage bg(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) bg.at(x, y) = base + tilt * (static_cast<double>(y) / height - 0.5);
    return bg;
}

std::string random_digits(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> len(1, 4);
    std::uniform_int_distribution<int> digit(0, 9);
    std::string out(static_cast<std::size_t>(len(rng)), '0');
    for (auto& c : out) c = static_cast<char>('0' + digit(rng));
    if (out.front() == '0') out.front() = '1';
    return out;
}

}  // namespace

const std::array<std::uint8_t, 7>* glyph(char c) noexcept {
    const unsigned char u = static_cast<unsigned char>(std::toupper(static_cast<unsigned char>(c)));
    if (u >= 'A' && u <= 'Z') return &kLetters[u - 'A'];
    if (u >= '0' && u <= '9') return &kDigits[u - '0'];
    return nullptr;
}

GrayImage render_block_text(std::string_view text, const BlockStyle& style) {
    const int advance = (5 + style.spacing) * style.cell;
    const int width = std::max(1, static_cast<int>(text.size()) * advance - style.spacing * style.cell);
    GrayImage out(width, 7 * style.cell, style.paper);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto* g = glyph(text[i]);
        if (g == nullptr) continue;
        for (int r = 0; r < 7; ++r)
            for (int c = 0; c < 5; ++c) {
                if (!cell_set(*g, c, r)) continue;
                for (int y = 0; y < style.cell; ++y)
                    for (int x = 0; x < style.cell; ++x)
                        out.at(static_cast<int>(i) * advance + c * style.cell + x, r * style.cell + y) = style.ink;
            }
    }
    return out;
}

GrayImage render_stroke_text(std::string_view text, const StrokeStyle& style) {
    const double cell = style.cell;
    const double glyph_height = 7.0 * cell;
    const double baseline = style.margin + glyph_height;
    const double slant_extent = std::abs(style.slant) * glyph_height;
    const double advance = (5.0 + style.letter_gap) * cell;
    const double text_width = static_cast<double>(text.size()) * advance - style.letter_gap * cell;
    const double origin_x = style.margin + (style.slant < 0.0 ? slant_extent : 0.0);

    auto center = [&](std::size_t i, int c, int r) {
        const double y = style.margin + (r + 0.5) * cell;
        const double x = origin_x + static_cast<double>(i) * advance + (c + 0.5) * cell + style.slant * (baseline - y);
        return std::pair{x, y};
    };

    std::vector<Segment> segments;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto* g = glyph(text[i]);
        if (g == nullptr) continue;
        for (int r = 0; r < 7; ++r) {
            for (int c = 0; c < 5; ++c) {
                if (!cell_set(*g, c, r)) continue;
                const auto [x0, y0] = center(i, c, r);
                bool linked = false;
                auto link = [&](int nc, int nr) {
                    const auto [x1, y1] = center(i, nc, nr);
                    segments.push_back({x0, y0, x1, y1});
                    linked = true;
                };
                if (cell_set(*g, c + 1, r)) link(c + 1, r);
                if (cell_set(*g, c, r + 1)) link(c, r + 1);
                if (cell_set(*g, c + 1, r + 1) && !cell_set(*g, c + 1, r) && !cell_set(*g, c, r + 1)) link(c + 1, r + 1);
                if (cell_set(*g, c - 1, r + 1) && !cell_set(*g, c - 1, r) && !cell_set(*g, c, r + 1)) link(c - 1, r + 1);
                if (!linked) segments.push_back({x0, y0, x0, y0});
            }
        }
    }
    if (style.swash && !text.empty()) {
        const double y = baseline + 0.9 * cell;
        segments.push_back({origin_x - 0.3 * cell, y - 0.6 * cell, origin_x + 0.8 * text_width, y});
        segments.push_back({origin_x + 0.8 * text_width, y, origin_x + text_width + 0.2 * cell, y - 0.4 * cell});
    }

    const int width = static_cast<int>(std::ceil(text_width + slant_extent + 2.0 * style.margin));
    const int height = static_cast<int>(std::ceil(glyph_height + 2.0 * style.margin + (style.swash ? 1.5 * cell : 0.0)));
    GrayImage out(std::max(width, 1), std::max(height, 1), style.paper);
    const double half = 0.5 * style.stroke;
    const double reach = half + 1.0;
    for (const auto& s : segments) {
        const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - reach)));
        const int x_hi = std::min(out.width() - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + reach)));
        const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - reach)));
        const int y_hi = std::min(out.height() - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + reach)));
        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                const double cov = coverage(half, distance_to(s, x, y));
                // Keep the darkest contribution; outlines are punched out afterwards.
                out.at(x, y) = std::min(out.at(x, y), style.paper + (style.ink - style.paper) * cov);
            }
        }
    }
    if (style.outline) {
        const double inner = half - 1.6;
        for (const auto& s : segments) {
            const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - reach)));
            const int x_hi = std::min(out.width() - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + reach)));
            const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - reach)));
            const int y_hi = std::min(out.height() - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + reach)));
            for (int y = y_lo; y <= y_hi; ++y)
                for (int x = x_lo; x <= x_hi; ++x) {
                    const double cov = coverage(inner, distance_to(s, x, y));
                    out.at(x, y) = std::max(out.at(x, y), style.ink + (style.paper - style.ink) * cov);
                }
        }
    }
    return out;
}

std::vector<WordTemplate> builtin_templates() {
    auto make = [](std::string label, std::string text, StrokeStyle style) {
        return WordTemplate{std::move(label), render_stroke_text(text, style)};
    };
    StrokeStyle perodua{.stroke = 3.2, .slant = 0.25, .swash = true};
    StrokeStyle proton{.stroke = 3.6};
    StrokeStyle satria{.stroke = 2.6, .slant = 0.35, .swash = true};
    StrokeStyle tiara{.stroke = 3.4, .slant = -0.2};
    StrokeStyle putrajaya{.cell = 4.5, .stroke = 4.6, .outline = true, .letter_gap = 0.8};
    StrokeStyle putra{.stroke = 3.8, .slant = 0.3, .swash = true, .letter_gap = 1.4};
    return {
        make("Perodua", "PERODUA", perodua),   make("Proton", "PROTON", proton),
        make("Satria", "SATRIA", satria),      make("Tiara", "TIARA", tiara),
        make("Putrajaya", "PUTRAJAYA", putrajaya), make("Putra", "PUTRA", putra),
    };
}

void SynthParams::validate() const {
    if (n_special < 0 || n_normal < 0) throw ParameterError("plate counts must be non-negative");
    if (!(scale_min > 0.0 && scale_min <= scale_max)) throw ParameterError("invalid scale range");
    if (max_rotation_deg < 0.0 || noise_sigma < 0.0 || blur_sigma_max < 0.0 || degrade_blur_sigma < 0.0 ||
        degrade_height < 0) {
        throw ParameterError("synthesis parameters must be non-negative");
    }
}

GrayImage render_special_plate(const GrayImage& word, const SpecialPlateSpec& spec, std::mt19937_64& rng) {
    const double theta = spec.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double ww = word.width() * spec.scale;
    const double wh = word.height() * spec.scale;
    const int bw = static_cast<int>(std::ceil(std::abs(ww * c) + std::abs(wh * s)));
    const int bh = static_cast<int>(std::ceil(std::abs(ww * s) + std::abs(wh * c)));

    // Inverse map from the warped box back into the word image.
    const double cx_out = 0.5 * (bw - 1);
    const double cy_out = 0.5 * (bh - 1);
    const double cx_in = 0.5 * (word.width() - 1);
    const double cy_in = 0.5 * (word.height() - 1);
    const double k = 1.0 / spec.scale;
    const Affine2x3 out_to_in{k * c,  k * s, cx_in - k * (c * cx_out + s * cy_out),
                              -k * s, k * c, cy_in - k * (-s * cx_out + c * cy_out)};
    const auto alpha = warp_affine(ink_map(word), out_to_in, bw, bh, 0.0);

    const auto digits = render_block_text(spec.digits);
    const auto digits_alpha = ink_map(digits);

    constexpr int pad = 16;
    constexpr int gap = 10;
    const int width = pad + bw + gap + digits.width() + pad;
    const int height = std::max(bh, digits.height()) + 2 * 12;
    auto plate = plate_background(width, height, rng);
    std::uniform_real_distribution<double> ink_dist(0.05, 0.15);
    const double ink = ink_dist(rng);
    composite(plate, alpha, pad, (height - bh) / 2, ink);
    composite(plate, digits_alpha, pad + bw + gap, (height - digits.height()) / 2, ink);
    return plate;
}

GrayImage render_normal_plate(std::string_view text, std::mt19937_64& rng) {
    const auto glyphs = render_block_text(text);
    const auto alpha = ink_map(glyphs);
    constexpr int pad = 16;
    auto plate = plate_background(glyphs.width() + 2 * pad, glyphs.height() + 2 * 12, rng);
    std::uniform_real_distribution<double> ink_dist(0.05, 0.15);
    composite(plate, alpha, pad, 12, ink_dist(rng));
    return plate;
}

GrayImage degrade(const GrayImage& img, double blur_sigma, double noise_sigma, std::mt19937_64& rng) {
    GrayImage out = blur_sigma > 0.05 ? gaussian_blur(img, blur_sigma) : img;
    if (noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (double& v : out.data()) v = std::clamp(v + noise(rng), 0.0, 1.0);
    }
    return out;
}

std::vector<eval::ManifestEntry> synth_corpus(const registry::Registry& registry,
                                              const std::filesystem::path& templates_dir,
                                              const std::filesystem::path& out_dir, const SynthParams& params) {
    params.validate();
    if (registry.templates.empty()) throw ParameterError("registry has no templates");

    std::vector<GrayImage> words;
    std::string missing;
    for (const auto& t : registry.templates) {
        const auto path = templates_dir / (t.label + ".pgm");
        if (!std::filesystem::exists(path)) {
            missing += (missing.empty() ? "" : ", ") + t.label;
            continue;
        }
        words.push_back(read_image(path));
    }
    if (!missing.empty()) {
        throw IoError("missing template images in " + templates_dir.string() + ": " + missing);
    }
    std::filesystem::create_directories(out_dir);

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> rotation(-params.max_rotation_deg, params.max_rotation_deg);
    std::uniform_real_distribution<double> scale(params.scale_min, params.scale_max);
    std::uniform_real_distribution<double> blur(0.0, params.blur_sigma_max);

    std::vector<eval::ManifestEntry> manifest;
    char name[64];
    for (int i = 0; i < params.n_special; ++i) {
        const auto which = static_cast<std::size_t>(i) % registry.templates.size();
        SpecialPlateSpec spec;
        spec.rotation_deg = rotation(rng);
        spec.scale = scale(rng);
        spec.digits = random_digits(rng);
        auto plate = render_special_plate(words[which], spec, rng);
        plate = degrade(plate, blur(rng), params.noise_sigma, rng);
        if (params.degrade_blur_sigma > 0.0) plate = gaussian_blur(plate, params.degrade_blur_sigma);
        if (params.degrade_height > 0) {
            const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(plate.width()) *
                                                                   params.degrade_height / plate.height())));
            plate = resize(plate, w, params.degrade_height);
        }
        std::snprintf(name, sizeof(name), "special_%04d.pgm", i);
        write_pgm(plate, out_dir / name);
        manifest.push_back({name, registry.templates[which].label});
    }

    std::uniform_int_distribution<int> letter_count(2, 3);
    std::uniform_int_distribution<int> letter_pick(0, static_cast<int>(kNormalLetters.size()) - 1);
    for (int i = 0; i < params.n_normal; ++i) {
        std::string text;
        for (int n = letter_count(rng); n > 0; --n) text += kNormalLetters[static_cast<std::size_t>(letter_pick(rng))];
        text += ' ';
        text += random_digits(rng);
        auto plate = render_normal_plate(text, rng);
        plate = degrade(plate, blur(rng), params.noise_sigma, rng);
        std::snprintf(name, sizeof(name), "normal_%04d.pgm", i);
        write_pgm(plate, out_dir / name);
        manifest.push_back({name, std::nullopt});
    }
    return manifest;
}

}  // namespace platesift::synth
