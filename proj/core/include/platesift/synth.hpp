#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "platesift/evaluation.hpp"
#include "platesift/image.hpp"
#include "platesift/registry.hpp"

namespace platesift::synth {

/// Rows of a 5x7 glyph, bit 4 = leftmost column. Covers A-Z and 0-9
/// (lower case maps to upper case); nullptr for anything else.
const std::array<std::uint8_t, 7>* glyph(char c) noexcept;

/// Square-cell rendering of the 5x7 font: dark ink on a light field.
struct BlockStyle {
    int cell = 4;
    int spacing = 1;  // cells between glyphs
    double ink = 0.08;
    double paper = 0.95;
};
GrayImage render_block_text(std::string_view text, const BlockStyle& style = {});

/// Stroke rendering used for prefix word templates: glyph cells joined by
/// round-capped strokes, optionally slanted, outlined and tied to a baseline
/// swash so the word reads as one connected shape.
struct StrokeStyle {
    double cell = 5.0;
    double stroke = 3.2;
    double slant = 0.0;       // x shift per unit of height above the baseline
    bool outline = false;     // hollow strokes
    bool swash = false;       // connecting underline
    double letter_gap = 1.0;  // cells
    int margin = 8;
    double ink = 0.06;
    double paper = 0.96;
};
GrayImage render_stroke_text(std::string_view text, const StrokeStyle& style);

struct WordTemplate {
    std::string label;
    GrayImage image;
};

/// The six special prefixes, each rendered in its own style.
std::vector<WordTemplate> builtin_templates();

struct SynthParams {
    int n_special = 60;
    int n_normal = 60;
    std::uint64_t seed = 42;
    double max_rotation_deg = 15.0;
    double scale_min = 0.7;
    double scale_max = 1.3;
    double noise_sigma = 0.02;
    double blur_sigma_max = 1.0;
    /// Extra blur applied to every special plate (0 = off).
    double degrade_blur_sigma = 0.0;
    /// Specials are downscaled to this height (0 = off).
    int degrade_height = 0;

    void validate() const;
};

/// Pastes a rotated and scaled word template next to block-glyph digits.
struct SpecialPlateSpec {
    double rotation_deg = 0.0;
    double scale = 1.0;
    std::string digits = "1234";
};
GrayImage render_special_plate(const GrayImage& word, const SpecialPlateSpec& spec, std::mt19937_64& rng);

/// Standard plate: block-glyph letters and digits, no special prefix.
GrayImage render_normal_plate(std::string_view text, std::mt19937_64& rng);

/// Applies blur then additive Gaussian noise.
GrayImage degrade(const GrayImage& img, double blur_sigma, double noise_sigma, std::mt19937_64& rng);

/// Writes `special_NNNN.pgm` / `normal_NNNN.pgm` into out_dir and returns the
/// manifest (paths relative to out_dir). Specials cycle through the registry
/// labels in order. Template pixels are read from `<templates_dir>/<label>.pgm`;
/// missing files raise IoError naming every absent label.
std::vector<eval::ManifestEntry> synth_corpus(const registry::Registry& registry,
                                              const std::filesystem::path& templates_dir,
                                              const std::filesystem::path& out_dir, const SynthParams& params);

}  // namespace platesift::synth
