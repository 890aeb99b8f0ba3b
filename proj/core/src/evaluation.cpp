#include "platesift/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "platesift/error.hpp"
#include "platesift/image_io.hpp"

namespace platesift::eval {

namespace {

constexpr std::string_view kSpecialPrefix = "special:";

std::string_view strip_cr(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
    std::vector<ManifestEntry> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = strip_cr(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        const auto tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0) {
            throw FormatError("manifest line " + std::to_string(line_no) + ": expected path<TAB>label");
        }
        ManifestEntry e{std::string(line.substr(0, tab)), std::nullopt};
        const auto label = line.substr(tab + 1);
        if (label.starts_with(kSpecialPrefix) && label.size() > kSpecialPrefix.size()) {
            e.special_label = std::string(label.substr(kSpecialPrefix.size()));
        } else if (label != "normal") {
            throw FormatError("manifest line " + std::to_string(line_no) + ": label must be normal or special:<prefix>");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

std::string render_manifest(std::span<const ManifestEntry> entries) {
    std::string out;
    for (const auto& e : entries) {
        out += e.image_path;
        out += '\t';
        out += e.special_label ? std::string(kSpecialPrefix) + *e.special_label : std::string("normal");
        out += '\n';
    }
    return out;
}

void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << render_manifest(entries);
    if (!out) throw IoError("failed writing manifest " + path.string());
}

EvalRates compute_rates(const EvalCounts& c) {
    EvalRates r;
    if (c.n_special > 0) {
        r.tpr = 100.0 * static_cast<double>(c.special_correct) / static_cast<double>(c.n_special);
        r.fnr = 100.0 * static_cast<double>(c.special_missed) / static_cast<double>(c.n_special);
    }
    const long long all = c.n_special + c.n_normal;
    if (all > 0) {
        r.fpr = 100.0 * static_cast<double>(c.normal_false_special + c.special_wrong_label) / static_cast<double>(all);
    }
    return r;
}

Outcome classify_outcome(const std::optional<std::string>& truth, const std::optional<std::string>& predicted) {
    if (truth) {
        if (!predicted) return Outcome::SpecialMissed;
        return *predicted == *truth ? Outcome::SpecialCorrect : Outcome::SpecialWrongLabel;
    }
    return predicted ? Outcome::NormalFalseSpecial : Outcome::NormalCorrect;
}

EvalReport summarize(std::span<const ImageOutcome> predictions) {
    EvalReport report;
    report.outcomes.assign(predictions.begin(), predictions.end());
    auto& c = report.counts;
    for (auto& o : report.outcomes) {
        if (!o.error.empty()) {
            o.outcome = Outcome::Error;
            ++report.warnings;
            continue;
        }
        o.outcome = classify_outcome(o.truth, o.predicted);
        switch (o.outcome) {
            case Outcome::SpecialCorrect: ++c.special_correct; break;
            case Outcome::SpecialWrongLabel: ++c.special_wrong_label; break;
            case Outcome::SpecialMissed: ++c.special_missed; break;
            case Outcome::NormalFalseSpecial: ++c.normal_false_special; break;
            case Outcome::NormalCorrect:
            case Outcome::Error: break;
        }
        if (o.truth) {
            ++c.n_special;
        } else {
            ++c.n_normal;
        }
    }
    report.rates = compute_rates(c);
    return report;
}

EvalReport evaluate(std::span<const ManifestEntry> manifest, const registry::Registry& registry,
                    const recognition::RecognitionParams& params, const std::filesystem::path& base_dir,
                    unsigned threads) {
    if (manifest.empty()) throw ParameterError("manifest is empty");
    if (!(registry.extraction_params == params.sift)) {
        throw ConfigError("registry was enrolled with different SIFT parameters than the pipeline");
    }

    std::vector<ImageOutcome> predictions(manifest.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < manifest.size(); i = next++) {
            const auto& entry = manifest[i];
            auto& p = predictions[i];
            p.image_path = entry.image_path;
            p.truth = entry.special_label;
            try {
                const auto path = std::filesystem::path(entry.image_path).is_absolute()
                                      ? std::filesystem::path(entry.image_path)
                                      : base_dir / entry.image_path;
                const auto result = recognition::recognize(read_image(path), registry, params);
                if (result.is_special()) p.predicted = result.label();
            } catch (const Error& e) {
                p.error = e.what();
            }
        }
    };

    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(manifest.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return summarize(predictions);
}

std::string format_percent(double value) {
    // Tiny bias keeps exact decimal halves (e.g. 12.345 stored as 12.3449999...) rounding up.
    const double cents = std::floor(value * 100.0 + 0.5 + 1e-7);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", cents / 100.0);
    return buf;
}

std::string_view outcome_name(Outcome o) noexcept {
    switch (o) {
        case Outcome::SpecialCorrect: return "special_correct";
        case Outcome::SpecialWrongLabel: return "special_wrong_label";
        case Outcome::SpecialMissed: return "special_missed";
        case Outcome::NormalCorrect: return "normal_correct";
        case Outcome::NormalFalseSpecial: return "normal_false_special";
        case Outcome::Error: return "error";
    }
    return "error";
}

}  // namespace platesift::eval
