#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "platesift/pipeline.hpp"
#include "platesift/registry.hpp"

namespace platesift::eval {

/// Ground truth for one image: a special label, or nullopt for a normal plate.
struct ManifestEntry {
    std::string image_path;
    std::optional<std::string> special_label;

    bool is_special() const noexcept { return special_label.has_value(); }
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// One `path<TAB>label` line per image; label is `normal` or `special:<prefix>`;
/// blank lines and `#` comments are skipped. Throws FormatError.
std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::string render_manifest(std::span<const ManifestEntry> entries);
void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path);

struct EvalCounts {
    long long n_special = 0;
    long long n_normal = 0;
    long long special_correct = 0;
    long long special_wrong_label = 0;
    long long special_missed = 0;
    long long normal_false_special = 0;

    friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

/// Percentages, unrounded.
struct EvalRates {
    double tpr = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
};

enum class Outcome { SpecialCorrect, SpecialWrongLabel, SpecialMissed, NormalCorrect, NormalFalseSpecial, Error };

struct ImageOutcome {
    std::string image_path;
    std::optional<std::string> truth;
    /// Predicted special label; nullopt for Normal (or on error).
    std::optional<std::string> predicted;
    Outcome outcome = Outcome::Error;
    std::string error;
};

struct EvalReport {
    EvalCounts counts;
    EvalRates rates;
    std::vector<ImageOutcome> outcomes;
    long long warnings = 0;
};

/// tpr = correct / n_special, fnr = missed / n_special,
/// fpr = (normal_false_special + wrong_label) / (n_normal + n_special); all x100.
EvalRates compute_rates(const EvalCounts& counts);

/// Scores recorded predictions. Entries with a non-empty `error` are excluded
/// from every denominator and counted as warnings.
EvalReport summarize(std::span<const ImageOutcome> predictions);

Outcome classify_outcome(const std::optional<std::string>& truth, const std::optional<std::string>& predicted);

/// Runs recognize on every manifest image (paths relative to base_dir) and scores it.
/// Throws ParameterError for an empty manifest.
EvalReport evaluate(std::span<const ManifestEntry> manifest, const registry::Registry& registry,
                    const recognition::RecognitionParams& params, const std::filesystem::path& base_dir = {},
                    unsigned threads = 0);

/// Two decimals, half-up: 81.3333 -> "81.33".
std::string format_percent(double value);

std::string_view outcome_name(Outcome o) noexcept;

}  // namespace platesift::eval
