#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "platesift/image.hpp"
#include "platesift/sift.hpp"

namespace platesift::registry {

inline constexpr std::size_t kMinTemplateFeatures = 10;

/// Enrolled features of one special prefix.
struct Template {
    std::string label;
    int width = 0;
    int height = 0;
    std::vector<sift::Keypoint> keypoints;
    std::vector<sift::Descriptor> descriptors;
    /// FNV-1a 64 over the dimensions and 8-bit pixels of the enrolled image.
    std::uint64_t source_hash = 0;

    friend bool operator==(const Template&, const Template&) = default;
};

struct Registry {
    sift::SiftParams extraction_params;
    std::vector<Template> templates;

    friend bool operator==(const Registry&, const Registry&) = default;
};

std::uint64_t image_digest(const GrayImage& img) noexcept;

/// Extracts features from img and returns registry + the new template.
/// Throws ConflictError (duplicate label), ParameterError (empty label) or
/// InsufficientFeaturesError; the input registry is never modified.
Registry enroll(const Registry& registry, const std::string& label, const GrayImage& img,
                std::size_t min_features = kMinTemplateFeatures);

/// Exact label match; nullptr when absent.
const Template* lookup(const Registry& registry, const std::string& label) noexcept;

/// Union of two registries. Throws ConfigError on differing extraction
/// parameters and ConflictError on shared labels.
Registry merge(const Registry& a, const Registry& b);

/// Binary little-endian format, magic "PSREG" + version byte '1'.
std::vector<std::uint8_t> serialize(const Registry& registry);
Registry deserialize(std::span<const std::uint8_t> bytes);

void save(const Registry& registry, const std::filesystem::path& path);
Registry load(const std::filesystem::path& path);

}  // namespace platesift::registry
