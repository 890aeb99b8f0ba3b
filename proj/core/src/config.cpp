#include "platesift/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "platesift/error.hpp"

namespace platesift {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(v) + "'");
    }
    return out;
}

template <typename T>
std::string format_number(T v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + std::string(key) + "': expected true/false");
}

struct Entry {
    std::string key;
    std::function<void(PipelineConfig&, std::string_view)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename T, typename Access>
Entry number(std::string key, Access access) {
    return {key,
            [key, access](PipelineConfig& c, std::string_view v) { access(c) = parse_number<T>(key, v); },
            [access](const PipelineConfig& c) { return format_number<T>(access(c)); }};
}

const std::vector<Entry>& entries() {
    using C = PipelineConfig;
    static const std::vector<Entry> table = {
        number<int>("sift.scales_per_octave", [](auto& c) -> auto& { return c.recognition.sift.scales_per_octave; }),
        number<double>("sift.base_sigma", [](auto& c) -> auto& { return c.recognition.sift.base_sigma; }),
        number<int>("sift.octave_count", [](auto& c) -> auto& { return c.recognition.sift.octave_count; }),
        number<double>("sift.assumed_blur", [](auto& c) -> auto& { return c.recognition.sift.assumed_blur; }),
        {"sift.upsample",
         [](C& c, std::string_view v) { c.recognition.sift.upsample = parse_bool("sift.upsample", v); },
         [](const C& c) { return std::string(c.recognition.sift.upsample ? "true" : "false"); }},
        number<double>("sift.contrast_threshold", [](auto& c) -> auto& { return c.recognition.sift.contrast_threshold; }),
        number<double>("sift.edge_ratio", [](auto& c) -> auto& { return c.recognition.sift.edge_ratio; }),
        number<double>("sift.orientation_peak_ratio",
                       [](auto& c) -> auto& { return c.recognition.sift.orientation_peak_ratio; }),
        number<double>("sift.descriptor_clamp", [](auto& c) -> auto& { return c.recognition.sift.descriptor_clamp; }),
        number<double>("match.ratio_threshold", [](auto& c) -> auto& { return c.recognition.ratio_threshold; }),
        number<double>("ransac.inlier_threshold", [](auto& c) -> auto& { return c.recognition.ransac.inlier_threshold; }),
        number<int>("ransac.max_iters", [](auto& c) -> auto& { return c.recognition.ransac.max_iters; }),
        number<double>("ransac.confidence", [](auto& c) -> auto& { return c.recognition.ransac.confidence; }),
        number<int>("ransac.min_inliers", [](auto& c) -> auto& { return c.recognition.ransac.min_inliers; }),
        number<std::uint64_t>("ransac.seed", [](auto& c) -> auto& { return c.recognition.ransac.seed; }),
        number<double>("preprocess.border_margin", [](auto& c) -> auto& { return c.recognition.preprocess.border_margin; }),
        number<double>("preprocess.low_percentile",
                       [](auto& c) -> auto& { return c.recognition.preprocess.low_percentile; }),
        number<double>("preprocess.high_percentile",
                       [](auto& c) -> auto& { return c.recognition.preprocess.high_percentile; }),
        number<double>("recognize.quad_area_min", [](auto& c) -> auto& { return c.recognition.quad_area_ratio.min; }),
        number<double>("recognize.quad_area_max", [](auto& c) -> auto& { return c.recognition.quad_area_ratio.max; }),
        number<int>("detector.dilation_half_width", [](auto& c) -> auto& { return c.detector.dilation_half_width; }),
        number<double>("detector.area_min", [](auto& c) -> auto& { return c.detector.area.min; }),
        number<double>("detector.area_max", [](auto& c) -> auto& { return c.detector.area.max; }),
        number<double>("detector.aspect_min", [](auto& c) -> auto& { return c.detector.aspect.min; }),
        number<double>("detector.aspect_max", [](auto& c) -> auto& { return c.detector.aspect.max; }),
        number<double>("detector.compactness_min", [](auto& c) -> auto& { return c.detector.compactness_min; }),
        number<double>("detector.fill_ratio_min", [](auto& c) -> auto& { return c.detector.fill_ratio.min; }),
        number<double>("detector.fill_ratio_max", [](auto& c) -> auto& { return c.detector.fill_ratio.max; }),
        {"detector.threshold",
         [](C& c, std::string_view v) {
             if (v == "otsu") {
                 c.detector.threshold = OtsuThreshold{};
             } else if (v.starts_with("fixed:")) {
                 c.detector.threshold = FixedThreshold{parse_number<double>("detector.threshold", v.substr(6))};
             } else {
                 throw ConfigError("config key 'detector.threshold': expected otsu or fixed:<t>");
             }
         },
         [](const C& c) {
             if (const auto* f = std::get_if<FixedThreshold>(&c.detector.threshold)) return "fixed:" + format_number(f->t);
             return std::string("otsu");
         }},
        {"detector.roi",
         [](C& c, std::string_view v) {
             if (v == "none") {
                 c.detector.roi.reset();
                 return;
             }
             int vals[4];
             std::size_t pos = 0;
             for (int i = 0; i < 4; ++i) {
                 const auto comma = v.find(',', pos);
                 const auto part = trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos));
                 if ((i < 3) == (comma == std::string_view::npos)) {
                     throw ConfigError("config key 'detector.roi': expected none or x_min,y_min,x_max,y_max");
                 }
                 vals[i] = parse_number<int>("detector.roi", part);
                 pos = comma + 1;
             }
             c.detector.roi = BoundingBox{vals[0], vals[1], vals[2], vals[3]};
         },
         [](const C& c) {
             if (!c.detector.roi) return std::string("none");
             const auto& r = *c.detector.roi;
             return std::to_string(r.x_min) + "," + std::to_string(r.y_min) + "," + std::to_string(r.x_max) + "," +
                    std::to_string(r.y_max);
         }},
    };
    return table;
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto& table = entries();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Entry& e) { return e.key == key; });
        if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
        it->set(cfg, value);
    }
    try {
        cfg.detector.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const PipelineConfig& config) {
    std::string out;
    for (const auto& e : entries()) out += e.key + " = " + e.get(config) + "\n";
    return out;
}

}  // namespace platesift
