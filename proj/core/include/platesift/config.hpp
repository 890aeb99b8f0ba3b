#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "platesift/detector.hpp"
#include "platesift/pipeline.hpp"

namespace platesift {

/// Every tunable of the detector and recognizer.
///
/// Text form is one `key = value` per line; `#` starts a comment. Keys are
/// grouped by stage (`sift.`, `match.`, `ransac.`, `preprocess.`,
/// `recognize.`, `detector.`); any key may be omitted to keep its default.
struct PipelineConfig {
    recognition::RecognitionParams recognition;
    detect::DetectorParams detector;
};

/// Throws ConfigError on unknown keys or unparsable values.
PipelineConfig parse_config(std::string_view text);

/// Throws IoError when the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical listing of every key; parse_config(render_config(c)) reproduces c.
std::string render_config(const PipelineConfig& config);

}  // namespace platesift
