#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "platesift/config.hpp"
#include "platesift/detector.hpp"
#include "platesift/error.hpp"
#include "platesift/evaluation.hpp"
#include "platesift/image_io.hpp"
#include "platesift/pipeline.hpp"
#include "platesift/registry.hpp"
#include "platesift/synth.hpp"

namespace platesift::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct Context {
    std::ostream& out;
    std::ostream& err;
};

PipelineConfig effective_config(const std::string& config_path, std::optional<std::uint64_t> seed, Context& ctx) {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) cfg.recognition.ransac.seed = *seed;
    ctx.err << "# effective config\n" << render_config(cfg);
    return cfg;
}

void emit_json(const json& doc, const std::string& target, Context& ctx) {
    if (target.empty()) return;
    const auto text = doc.dump(2) + "\n";
    if (target == "-") {
        ctx.out << text;
        return;
    }
    std::ofstream f(target, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text)) throw IoError("cannot write " + target);
}

json quad_json(const geometry::Quad& q) {
    json arr = json::array();
    for (const auto& p : q) arr.push_back({p.x, p.y});
    return arr;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

// enroll ---------------------------------------------------------------------

struct EnrollArgs {
    std::string registry, label, image, config;
    std::size_t min_features = registry::kMinTemplateFeatures;
};

int cmd_enroll(const EnrollArgs& a, Context& ctx) {
    const auto cfg = effective_config(a.config, std::nullopt, ctx);
    registry::Registry reg;
    if (fs::exists(a.registry)) {
        reg = registry::load(a.registry);
        if (!a.config.empty() && !(reg.extraction_params == cfg.recognition.sift)) {
            throw ConfigError("registry " + a.registry + " uses different SIFT parameters than " + a.config);
        }
    } else {
        reg.extraction_params = cfg.recognition.sift;
    }
    reg = registry::enroll(reg, a.label, read_image(a.image), a.min_features);
    registry::save(reg, a.registry);
    const auto* t = registry::lookup(reg, a.label);
    ctx.out << "enrolled " << a.label << ": " << t->keypoints.size() << " features; registry holds "
            << reg.templates.size() << " templates\n";
    return kOk;
}

// detect ---------------------------------------------------------------------

struct DetectArgs {
    std::string image, config, json_out;
};

int cmd_detect(const DetectArgs& a, Context& ctx) {
    const auto cfg = effective_config(a.config, std::nullopt, ctx);
    const auto candidates = detect::detect_candidates(read_image(a.image), cfg.detector);
    json list = json::array();
    ctx.out << candidates.size() << " candidate(s)\n";
    for (const auto& c : candidates) {
        ctx.out << "  bbox " << c.bbox.x_min << ',' << c.bbox.y_min << ',' << c.bbox.x_max << ',' << c.bbox.y_max
                << " aspect " << c.aspect << " score " << c.score << '\n';
        list.push_back({{"bbox", {c.bbox.x_min, c.bbox.y_min, c.bbox.x_max, c.bbox.y_max}},
                        {"area", c.area},
                        {"aspect", c.aspect},
                        {"compactness", c.compactness},
                        {"fill_ratio", c.fill_ratio},
                        {"score", c.score}});
    }
    emit_json({{"schema", kSchemaVersion}, {"command", "detect"}, {"image", a.image}, {"candidates", list}},
              a.json_out, ctx);
    return kOk;
}

// recognize ------------------------------------------------------------------

struct RecognizeArgs {
    std::string registry, image, config, json_out, annotate;
    std::optional<std::uint64_t> seed;
};

int cmd_recognize(const RecognizeArgs& a, Context& ctx) {
    const auto cfg = effective_config(a.config, a.seed, ctx);
    const auto reg = registry::load(a.registry);
    auto img = read_image(a.image);
    const auto result = recognition::recognize(img, reg, cfg.recognition);

    json doc{{"schema", kSchemaVersion}, {"command", "recognize"}, {"image", a.image},
             {"query_features", result.query_features}};
    if (const auto* s = std::get_if<recognition::SpecialPlate>(&result.classification)) {
        ctx.out << "special " << s->label << " (inliers " << s->inlier_count << ", rmse " << s->reproj_rmse << ")\n";
        doc["classification"] = "special";
        doc["label"] = s->label;
        doc["quad"] = quad_json(s->quad);
        doc["inliers"] = s->inlier_count;
        doc["reproj_rmse"] = s->reproj_rmse;
        if (!a.annotate.empty()) recognition::draw_quad(img, s->quad, 1.0);
    } else {
        ctx.out << "normal\n";
        doc["classification"] = "normal";
        doc["label"] = nullptr;
        doc["quad"] = nullptr;
        doc["inliers"] = 0;
        doc["reproj_rmse"] = nullptr;
    }
    json diags = json::array();
    for (const auto& d : result.per_template_diagnostics) {
        diags.push_back({{"label", d.label}, {"raw_matches", d.raw_matches}, {"inliers", d.inliers}});
    }
    doc["templates"] = diags;
    if (!a.annotate.empty()) write_pgm(img, a.annotate);
    emit_json(doc, a.json_out, ctx);
    return kOk;
}

// eval -----------------------------------------------------------------------

struct EvalArgs {
    std::string registry, manifest, config, json_out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

int cmd_eval(const EvalArgs& a, Context& ctx) {
    const auto cfg = effective_config(a.config, a.seed, ctx);
    const auto reg = registry::load(a.registry);
    const auto manifest = eval::read_manifest(a.manifest);
    const auto report = eval::evaluate(manifest, reg, cfg.recognition, fs::path(a.manifest).parent_path(), a.threads);
    const auto& c = report.counts;
    const auto& r = report.rates;

    ctx.out << "images   special " << c.n_special << ", normal " << c.n_normal << '\n'
            << "special  correct " << c.special_correct << ", wrong label " << c.special_wrong_label << ", missed "
            << c.special_missed << '\n'
            << "normal   flagged special " << c.normal_false_special << '\n'
            << "TPR " << eval::format_percent(r.tpr) << "%\n"
            << "FPR " << eval::format_percent(r.fpr) << "%\n"
            << "FNR " << eval::format_percent(r.fnr) << "%\n";
    if (report.warnings > 0) ctx.out << "warnings " << report.warnings << " (unreadable images excluded)\n";

    json outcomes = json::array();
    for (const auto& o : report.outcomes) {
        outcomes.push_back({{"image", o.image_path},
                            {"truth", optional_string(o.truth)},
                            {"predicted", optional_string(o.predicted)},
                            {"outcome", eval::outcome_name(o.outcome)},
                            {"error", o.error.empty() ? json(nullptr) : json(o.error)}});
    }
    emit_json({{"schema", kSchemaVersion},
               {"command", "eval"},
               {"manifest", a.manifest},
               {"counts",
                {{"n_special", c.n_special},
                 {"n_normal", c.n_normal},
                 {"special_correct", c.special_correct},
                 {"special_wrong_label", c.special_wrong_label},
                 {"special_missed", c.special_missed},
                 {"normal_false_special", c.normal_false_special}}},
               {"rates", {{"tpr", r.tpr}, {"fpr", r.fpr}, {"fnr", r.fnr}}},
               {"rates_text",
                {{"tpr", eval::format_percent(r.tpr)},
                 {"fpr", eval::format_percent(r.fpr)},
                 {"fnr", eval::format_percent(r.fnr)}}},
               {"warnings", report.warnings},
               {"outcomes", outcomes}},
              a.json_out, ctx);
    return kOk;
}

// synth ----------------------------------------------------------------------

struct SynthArgs {
    std::string registry, templates, out_dir, manifest;
    synth::SynthParams params;
};

int cmd_synth(SynthArgs a, Context& ctx) {
    const auto reg = registry::load(a.registry);
    auto entries = synth::synth_corpus(reg, a.templates, a.out_dir, a.params);
    // Manifest paths are stored relative to the manifest's own directory.
    const auto manifest_dir = fs::absolute(fs::path(a.manifest)).parent_path();
    const auto out_abs = fs::absolute(a.out_dir);
    for (auto& e : entries) e.image_path = fs::proximate(out_abs / e.image_path, manifest_dir).generic_string();
    if (!manifest_dir.empty()) fs::create_directories(manifest_dir);
    eval::write_manifest(entries, a.manifest);
    ctx.out << "wrote " << a.params.n_special << " special and " << a.params.n_normal << " normal plates to "
            << a.out_dir << '\n';
    return kOk;
}

// templates ------------------------------------------------------------------

struct TemplatesArgs {
    std::string out_dir, registry, config;
};

int cmd_templates(const TemplatesArgs& a, Context& ctx) {
    const auto cfg = effective_config(a.config, std::nullopt, ctx);
    fs::create_directories(a.out_dir);
    registry::Registry reg;
    reg.extraction_params = cfg.recognition.sift;
    for (const auto& w : synth::builtin_templates()) {
        write_pgm(w.image, fs::path(a.out_dir) / (w.label + ".pgm"));
        if (!a.registry.empty()) reg = registry::enroll(reg, w.label, w.image);
        ctx.out << "template " << w.label << " " << w.image.width() << "x" << w.image.height() << '\n';
    }
    if (!a.registry.empty()) registry::save(reg, a.registry);
    return kOk;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e)) return kUsage;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const VersionError*>(&e)) {
        return kIo;
    }
    return kRejected;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Context ctx{out, err};
    CLI::App app{"Special license plate recognition with SIFT template matching", "platesift"};
    app.require_subcommand(1);
    std::function<int()> action;

    EnrollArgs enroll;
    auto* enroll_cmd = app.add_subcommand("enroll", "Add a prefix template to a registry");
    enroll_cmd->add_option("--registry", enroll.registry, "Registry file (created when absent)")->required();
    enroll_cmd->add_option("--label", enroll.label, "Prefix label")->required();
    enroll_cmd->add_option("--image", enroll.image, "Template image (PGM/PPM/PNG)")->required();
    enroll_cmd->add_option("--config", enroll.config, "Pipeline config file");
    enroll_cmd->add_option("--min-features", enroll.min_features, "Minimum template features");
    enroll_cmd->callback([&] { action = [&] { return cmd_enroll(enroll, ctx); }; });

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "Find plate candidates in a frame");
    detect_cmd->add_option("--image", detect.image, "Frame image")->required();
    detect_cmd->add_option("--config", detect.config, "Pipeline config file");
    detect_cmd->add_option("--json", detect.json_out, "Write JSON result ('-' for stdout)");
    detect_cmd->callback([&] { action = [&] { return cmd_detect(detect, ctx); }; });

    RecognizeArgs recognize;
    std::uint64_t recognize_seed = 0;
    auto* recognize_cmd = app.add_subcommand("recognize", "Classify a plate crop as normal or special");
    recognize_cmd->add_option("--registry", recognize.registry, "Registry file")->required();
    recognize_cmd->add_option("--image", recognize.image, "Plate image")->required();
    auto* recognize_seed_opt = recognize_cmd->add_option("--seed", recognize_seed, "RANSAC seed");
    recognize_cmd->add_option("--config", recognize.config, "Pipeline config file");
    recognize_cmd->add_option("--json", recognize.json_out, "Write JSON result ('-' for stdout)");
    recognize_cmd->add_option("--annotate", recognize.annotate, "Write the plate with the located prefix as PGM");
    recognize_cmd->callback([&] {
        if (recognize_seed_opt->count() > 0) recognize.seed = recognize_seed;
        action = [&] { return cmd_recognize(recognize, ctx); };
    });

    EvalArgs evaluation;
    std::uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval", "Score a labelled manifest");
    eval_cmd->add_option("--registry", evaluation.registry, "Registry file")->required();
    eval_cmd->add_option("--manifest", evaluation.manifest, "Manifest (path<TAB>normal|special:<label>)")->required();
    auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "RANSAC seed");
    eval_cmd->add_option("--config", evaluation.config, "Pipeline config file");
    eval_cmd->add_option("--json", evaluation.json_out, "Write JSON report ('-' for stdout)");
    eval_cmd->add_option("--threads", evaluation.threads, "Worker threads (0 = all cores)");
    eval_cmd->callback([&] {
        if (eval_seed_opt->count() > 0) evaluation.seed = eval_seed;
        action = [&] { return cmd_eval(evaluation, ctx); };
    });

    SynthArgs synthesis;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic plate corpus");
    synth_cmd->add_option("--registry", synthesis.registry, "Registry file")->required();
    synth_cmd->add_option("--templates", synthesis.templates, "Directory holding <label>.pgm")->required();
    synth_cmd->add_option("--out", synthesis.out_dir, "Output image directory")->required();
    synth_cmd->add_option("--manifest", synthesis.manifest, "Manifest file to write")->required();
    auto& sp = synthesis.params;
    synth_cmd->add_option("--seed", sp.seed, "Generator seed");
    synth_cmd->add_option("--n-special", sp.n_special, "Special plates");
    synth_cmd->add_option("--n-normal", sp.n_normal, "Normal plates");
    synth_cmd->add_option("--max-rotation", sp.max_rotation_deg, "Rotation range in degrees (+/-)");
    synth_cmd->add_option("--scale-min", sp.scale_min, "Minimum template scale");
    synth_cmd->add_option("--scale-max", sp.scale_max, "Maximum template scale");
    synth_cmd->add_option("--noise", sp.noise_sigma, "Additive noise sigma");
    synth_cmd->add_option("--blur-max", sp.blur_sigma_max, "Maximum blur sigma");
    synth_cmd->add_option("--degrade-blur", sp.degrade_blur_sigma, "Extra blur on special plates");
    synth_cmd->add_option("--degrade-height", sp.degrade_height, "Downscale special plates to this height");
    synth_cmd->callback([&] { action = [&] { return cmd_synth(synthesis, ctx); }; });

    TemplatesArgs templates;
    auto* templates_cmd = app.add_subcommand("templates", "Write the built-in prefix templates");
    templates_cmd->add_option("--out", templates.out_dir, "Output directory")->required();
    templates_cmd->add_option("--registry", templates.registry, "Also enroll them into this new registry");
    templates_cmd->add_option("--config", templates.config, "Pipeline config file");
    templates_cmd->callback([&] { action = [&] { return cmd_templates(templates, ctx); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kUsage;
    }

    try {
        return action();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRejected;
    }
}

}  // namespace platesift::cli
