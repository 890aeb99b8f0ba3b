#include "platesift/registry.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>

#include "platesift/error.hpp"

namespace platesift::registry {

namespace {

constexpr std::array<std::uint8_t, 5> kMagic{'P', 'S', 'R', 'E', 'G'};
constexpr std::uint8_t kVersion = '1';

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) { put(v, 4); }
    void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::span<const std::uint8_t> bytes(std::size_t n) {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const noexcept { return pos_ == in_.size(); }
    std::size_t remaining() const noexcept { return in_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw FormatError("registry file is truncated");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_params(Writer& w, const sift::SiftParams& p) {
    w.i32(p.scales_per_octave);
    w.f64(p.base_sigma);
    w.i32(p.octave_count);
    w.f64(p.assumed_blur);
    w.u8(p.upsample ? 1 : 0);
    w.f64(p.contrast_threshold);
    w.f64(p.edge_ratio);
    w.f64(p.orientation_peak_ratio);
    w.f64(p.descriptor_clamp);
}

sift::SiftParams read_params(Reader& r) {
    sift::SiftParams p;
    p.scales_per_octave = r.i32();
    p.base_sigma = r.f64();
    p.octave_count = r.i32();
    p.assumed_blur = r.f64();
    const auto up = r.u8();
    if (up > 1) throw FormatError("registry file: bad upsample flag");
    p.upsample = up == 1;
    p.contrast_threshold = r.f64();
    p.edge_ratio = r.f64();
    p.orientation_peak_ratio = r.f64();
    p.descriptor_clamp = r.f64();
    return p;
}

// Smallest possible serialized feature: 5 f64 + 2 i32 + 128 f64.
constexpr std::size_t kFeatureBytes = 5 * 8 + 2 * 4 + sift::kDescriptorSize * 8;

}  // namespace

std::uint64_t image_digest(const GrayImage& img) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (int v : {img.width(), img.height()})
        for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(static_cast<std::uint32_t>(v) >> (8 * i)));
    for (double v : img.data()) mix(to_byte(v));
    return h;
}

Registry enroll(const Registry& registry, const std::string& label, const GrayImage& img, std::size_t min_features) {
    if (label.empty()) throw ParameterError("template label must not be empty");
    if (lookup(registry, label) != nullptr) throw ConflictError("label already enrolled: " + label);

    std::vector<sift::Feature> features;
    try {
        features = sift::extract_features(img, registry.extraction_params);
    } catch (const DimensionError& e) {
        throw InsufficientFeaturesError("template '" + label + "': " + e.what());
    }
    if (features.size() < min_features) {
        throw InsufficientFeaturesError("template '" + label + "' yields " + std::to_string(features.size()) +
                                        " features, need " + std::to_string(min_features));
    }

    Template t;
    t.label = label;
    t.width = img.width();
    t.height = img.height();
    t.source_hash = image_digest(img);
    t.keypoints.reserve(features.size());
    t.descriptors.reserve(features.size());
    for (const auto& f : features) {
        t.keypoints.push_back(f.keypoint);
        t.descriptors.push_back(f.descriptor);
    }

    Registry out = registry;
    out.templates.push_back(std::move(t));
    return out;
}

const Template* lookup(const Registry& registry, const std::string& label) noexcept {
    const auto it = std::find_if(registry.templates.begin(), registry.templates.end(),
                                 [&](const Template& t) { return t.label == label; });
    return it == registry.templates.end() ? nullptr : &*it;
}

Registry merge(const Registry& a, const Registry& b) {
    if (!(a.extraction_params == b.extraction_params)) {
        throw ConfigError("cannot merge registries built with different extraction parameters");
    }
    Registry out = a;
    for (const auto& t : b.templates) {
        if (lookup(out, t.label) != nullptr) throw ConflictError("label present in both registries: " + t.label);
        out.templates.push_back(t);
    }
    return out;
}

std::vector<std::uint8_t> serialize(const Registry& registry) {
    Writer w;
    w.bytes(kMagic);
    w.u8(kVersion);
    write_params(w, registry.extraction_params);
    w.u32(static_cast<std::uint32_t>(registry.templates.size()));
    for (const auto& t : registry.templates) {
        w.u32(static_cast<std::uint32_t>(t.label.size()));
        w.bytes({reinterpret_cast<const std::uint8_t*>(t.label.data()), t.label.size()});
        w.i32(t.width);
        w.i32(t.height);
        w.u64(t.source_hash);
        w.u32(static_cast<std::uint32_t>(t.keypoints.size()));
        for (std::size_t i = 0; i < t.keypoints.size(); ++i) {
            const auto& k = t.keypoints[i];
            w.f64(k.x);
            w.f64(k.y);
            w.f64(k.sigma);
            w.f64(k.orientation);
            w.f64(k.contrast);
            w.i32(k.octave);
            w.i32(k.scale_index);
            for (double v : t.descriptors[i]) w.f64(v);
        }
    }
    return w.take();
}

Registry deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.bytes(kMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw FormatError("not a registry file (bad magic)");
    const auto version = r.u8();
    if (version != kVersion) {
        throw VersionError("unsupported registry format version byte " + std::to_string(version));
    }

    Registry reg;
    reg.extraction_params = read_params(r);
    const auto count = r.u32();
    for (std::uint32_t n = 0; n < count; ++n) {
        Template t;
        const auto len = r.u32();
        const auto label = r.bytes(len);
        t.label.assign(label.begin(), label.end());
        if (t.label.empty()) throw FormatError("registry file: empty label");
        if (lookup(reg, t.label) != nullptr) throw FormatError("registry file: duplicate label " + t.label);
        t.width = r.i32();
        t.height = r.i32();
        if (t.width < 1 || t.height < 1) throw FormatError("registry file: bad template size");
        t.source_hash = r.u64();
        const auto features = r.u32();
        if (r.remaining() / kFeatureBytes < features) throw FormatError("registry file is truncated");
        t.keypoints.resize(features);
        t.descriptors.resize(features);
        for (std::uint32_t i = 0; i < features; ++i) {
            auto& k = t.keypoints[i];
            k.x = r.f64();
            k.y = r.f64();
            k.sigma = r.f64();
            k.orientation = r.f64();
            k.contrast = r.f64();
            k.octave = r.i32();
            k.scale_index = r.i32();
            for (double& v : t.descriptors[i]) v = r.f64();
        }
        reg.templates.push_back(std::move(t));
    }
    if (!r.done()) throw FormatError("registry file has trailing bytes");
    return reg;
}

void save(const Registry& registry, const std::filesystem::path& path) {
    const auto bytes = serialize(registry);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Registry load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize(bytes);
}

}  // namespace platesift::registry
