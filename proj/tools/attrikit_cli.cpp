// attrikit: synthetic-corpus generation, feature extraction, attributor
// training and the evaluation battery as one reproducible executable.
//
// Every subcommand resolves its configuration as CLI flag > --config file >
// built-in default, then persists the resolved values in a .runconfig.json
// sidecar next to its primary output. Rerunning with the same config and
// inputs produces byte-identical primary outputs; wall-clock timestamps live
// only in the sidecar.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "attrikit/attributor.hpp"
#include "attrikit/binio.hpp"
#include "attrikit/errors.hpp"
#include "attrikit/evalkit.hpp"
#include "attrikit/features.hpp"
#include "attrikit/imageio.hpp"
#include "attrikit/manifest.hpp"
#include "attrikit/parallel.hpp"
#include "attrikit/pixelops.hpp"
#include "attrikit/prng.hpp"
#include "attrikit/style.hpp"
#include "attrikit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace attrikit;

namespace {

// Values loaded from --config, applied as defaults before flag parsing.
struct ConfigDefaults {
    json params = json::object();

    template <typename T>
    T get(const std::string& key, T fallback) const {
        if (!params.contains(key)) return fallback;
        try {
            return params[key].get<T>();
        } catch (const json::exception&) {
            throw ParseError("config: bad value for \"" + key + "\"");
        }
    }
};

ConfigDefaults load_config_defaults(int argc, char** argv) {
    ConfigDefaults cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) throw IoError(std::string("cannot open config: ") + argv[i + 1]);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ParseError(std::string(argv[i + 1]) + ": invalid JSON: " + e.what());
            }
            cfg.params = j.contains("params") ? j["params"] : j;
        }
    }
    return cfg;
}

std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_sidecar(const std::string& primary_output, const std::string& subcommand,
                   const json& params) {
    json j;
    j["subcommand"] = subcommand;
    j["params"] = params;
    j["timestamp"] = iso_timestamp();
    std::ofstream out(primary_output + ".runconfig.json", std::ios::trunc);
    if (!out) throw IoError("cannot write run-config sidecar for " + primary_output);
    out << j.dump(2) << "\n";
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

std::vector<std::string> parse_str_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void merge_into(json& params, const json& extra) {
    for (auto it = extra.begin(); it != extra.end(); ++it) params[it.key()] = it.value();
}

int default_threads() {
    if (const char* env = std::getenv("ATTRIKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

// Flag bundle shared by every subcommand that turns records into embeddings.
struct ReprFlags {
    std::string repr = "style";
    int resize = 224;
    int crop = 224;
    int patch_k = 0;
    std::string input_channel = "rgb";
    double canny_low = 0.1;
    double canny_high = 0.2;
    std::string perturb;
    int pixel_grid = 8;
    std::string backbone_channels = "16,32,64";
    int backbone_kernel = 3;
    uint64_t backbone_seed = 7;
    std::string style_layers;
    bool use_text = false;
    int text_dim = 64;
    uint64_t text_seed = 1;
    std::string features_key = "features";
    std::string seg_vocab;
    int seg_grid = 4;

    void add_options(CLI::App* cmd, const ConfigDefaults& cfg) {
        repr = cfg.get("repr", repr);
        resize = cfg.get("resize", resize);
        crop = cfg.get("crop", crop);
        patch_k = cfg.get("patch_k", patch_k);
        input_channel = cfg.get("input_channel", input_channel);
        canny_low = cfg.get("canny_low", canny_low);
        canny_high = cfg.get("canny_high", canny_high);
        perturb = cfg.get("perturb", perturb);
        pixel_grid = cfg.get("pixel_grid", pixel_grid);
        backbone_channels = cfg.get("backbone_channels", backbone_channels);
        backbone_kernel = cfg.get("backbone_kernel", backbone_kernel);
        backbone_seed = cfg.get("backbone_seed", backbone_seed);
        style_layers = cfg.get("style_layers", style_layers);
        use_text = cfg.get("use_text", use_text);
        text_dim = cfg.get("text_dim", text_dim);
        text_seed = cfg.get("text_seed", text_seed);
        features_key = cfg.get("features_key", features_key);
        seg_vocab = cfg.get("seg_vocab", seg_vocab);
        seg_grid = cfg.get("seg_grid", seg_grid);

        cmd->add_option("--repr", repr, "Representation: pixel|style|features_file|segmentation");
        cmd->add_option("--resize", resize, "Resize shorter edge (0 disables)");
        cmd->add_option("--crop", crop, "Center-crop size (0 disables)");
        cmd->add_option("--patch-k", patch_k, "Patch pipeline k (0 disables)");
        cmd->add_option("--input-channel", input_channel, "rgb, canny, or aux:<name>");
        cmd->add_option("--canny-low", canny_low, "Canny low threshold fraction");
        cmd->add_option("--canny-high", canny_high, "Canny high threshold fraction");
        cmd->add_option("--perturb", perturb, "Perturbation kind:param=value,...");
        cmd->add_option("--pixel-grid", pixel_grid, "Pixel embedding grid");
        cmd->add_option("--backbone-channels", backbone_channels, "Backbone layer channels CSV");
        cmd->add_option("--backbone-kernel", backbone_kernel, "Backbone kernel size");
        cmd->add_option("--backbone-seed", backbone_seed, "Backbone filter seed");
        cmd->add_option("--style-layers", style_layers, "Style layer selection CSV (default all)");
        cmd->add_flag("--use-text", use_text, "Concatenate prompt text embeddings");
        cmd->add_option("--text-dim", text_dim, "Text embedding dimension");
        cmd->add_option("--text-seed", text_seed, "Text embedding hash seed");
        cmd->add_option("--features-key", features_key, "aux_maps key for features_file repr");
        cmd->add_option("--seg-vocab", seg_vocab, "Segmentation vocabulary CSV");
        cmd->add_option("--seg-grid", seg_grid, "Segmentation pooling grid");
    }

    ReprConfig to_repr() const {
        ReprConfig r;
        r.kind = repr_from_string(repr);
        r.resize_edge = resize;
        r.crop = crop;
        if (patch_k > 0) {
            PatchSpec p;
            p.k = patch_k;
            validate_patch_spec(p);
            r.patch = p;
        }
        r.input_channel = input_channel;
        r.canny_low = canny_low;
        r.canny_high = canny_high;
        if (!perturb.empty()) r.perturb = parse_perturb(perturb);
        r.pixel_grid = pixel_grid;
        r.backbone.layer_channels = parse_int_list(backbone_channels);
        r.backbone.kernel = backbone_kernel;
        r.backbone.seed = backbone_seed;
        r.style_layers = parse_int_list(style_layers);
        r.use_text = use_text;
        r.text_dim = text_dim;
        r.text_seed = text_seed;
        r.features_key = features_key;
        r.seg_vocab = parse_str_list(seg_vocab);
        r.seg_grid = seg_grid;
        return r;
    }

    json to_json() const {
        return json{{"repr", repr},
                    {"resize", resize},
                    {"crop", crop},
                    {"patch_k", patch_k},
                    {"input_channel", input_channel},
                    {"canny_low", canny_low},
                    {"canny_high", canny_high},
                    {"perturb", perturb},
                    {"pixel_grid", pixel_grid},
                    {"backbone_channels", backbone_channels},
                    {"backbone_kernel", backbone_kernel},
                    {"backbone_seed", backbone_seed},
                    {"style_layers", style_layers},
                    {"use_text", use_text},
                    {"text_dim", text_dim},
                    {"text_seed", text_seed},
                    {"features_key", features_key},
                    {"seg_vocab", seg_vocab},
                    {"seg_grid", seg_grid}};
    }
};

struct TrainFlags {
    std::string head = "linear";
    int hidden_dim = 256;
    uint64_t init_seed = 3;
    int batch_size = 128;
    int epochs = 2000;
    double lr = 2e-4;
    double weight_decay = 0.05;
    int warmup_epochs = 20;
    double min_lr = 1e-5;
    uint64_t shuffle_seed = 5;
    bool augment = true;
    uint64_t augment_seed = 9;

    void add_options(CLI::App* cmd, const ConfigDefaults& cfg) {
        head = cfg.get("head", head);
        hidden_dim = cfg.get("hidden_dim", hidden_dim);
        init_seed = cfg.get("init_seed", init_seed);
        batch_size = cfg.get("batch_size", batch_size);
        epochs = cfg.get("epochs", epochs);
        lr = cfg.get("lr", lr);
        weight_decay = cfg.get("weight_decay", weight_decay);
        warmup_epochs = cfg.get("warmup_epochs", warmup_epochs);
        min_lr = cfg.get("min_lr", min_lr);
        shuffle_seed = cfg.get("shuffle_seed", shuffle_seed);
        augment = cfg.get("augment", augment);
        augment_seed = cfg.get("augment_seed", augment_seed);

        cmd->add_option("--head", head, "Head kind: linear|mlp");
        cmd->add_option("--hidden-dim", hidden_dim, "MLP hidden dimension");
        cmd->add_option("--init-seed", init_seed, "Head init seed");
        cmd->add_option("--batch-size", batch_size, "Mini-batch size");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--lr", lr, "Peak learning rate");
        cmd->add_option("--weight-decay", weight_decay, "Decoupled weight decay");
        cmd->add_option("--warmup-epochs", warmup_epochs, "Linear warmup epochs");
        cmd->add_option("--min-lr", min_lr, "Cosine annealing floor");
        cmd->add_option("--shuffle-seed", shuffle_seed, "Epoch shuffle seed");
        cmd->add_flag("--augment,!--no-augment", augment, "Horizontal-flip train augmentation");
        cmd->add_option("--augment-seed", augment_seed, "Flip augmentation seed");
    }

    HeadConfig to_head() const {
        HeadConfig h;
        h.kind = head == "mlp" ? HeadKind::mlp : HeadKind::linear;
        h.hidden_dim = hidden_dim;
        h.init_seed = init_seed;
        return h;
    }

    TrainConfig to_train() const {
        TrainConfig t;
        t.batch_size = batch_size;
        t.epochs = epochs;
        t.lr = lr;
        t.weight_decay = weight_decay;
        t.warmup_epochs = warmup_epochs;
        t.min_lr = min_lr;
        t.shuffle_seed = shuffle_seed;
        return t;
    }

    json to_json() const {
        return json{{"head", head},
                    {"hidden_dim", hidden_dim},
                    {"init_seed", init_seed},
                    {"batch_size", batch_size},
                    {"epochs", epochs},
                    {"lr", lr},
                    {"weight_decay", weight_decay},
                    {"warmup_epochs", warmup_epochs},
                    {"min_lr", min_lr},
                    {"shuffle_seed", shuffle_seed},
                    {"augment", augment},
                    {"augment_seed", augment_seed}};
    }
};

int cmd_synth(const std::string& out_dir, const std::string& spec_file,
              const std::string& per_class, int size, uint64_t seed) {
    std::vector<SynthGeneratorSpec> specs =
        spec_file.empty() ? default_generator_specs() : load_generator_specs(spec_file);
    const std::vector<int> counts = parse_int_list(per_class);
    if (counts.size() != 3)
        throw ValidationError("--per-class expects three comma-separated counts");
    PerClassCounts pcc{counts[0], counts[1], counts[2]};

    const Manifest m = synth_corpus(specs, pcc, size, seed, out_dir);
    const std::string manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
    save_manifest(m, manifest_path);

    json params{{"out", out_dir},       {"spec_file", spec_file}, {"per_class", per_class},
                {"size", size},         {"seed", seed}};
    write_sidecar(manifest_path, "synth", params);
    std::cout << "synth: " << m.records.size() << " images across " << m.classes.size()
              << " classes -> " << manifest_path << "\n";
    return 0;
}

int cmd_extract(const std::string& manifest_path, const std::string& out_dir,
                const std::string& split, const std::string& what, const ReprFlags& rflags,
                int threads) {
    Manifest m = load_manifest(manifest_path);
    if (split != "all") m = filter_split(m, split_from_string(split));
    const ReprConfig repr = rflags.to_repr();
    const Backbone backbone = build_backbone(repr.backbone);
    fs::create_directories(out_dir);

    json index = json::object();
    std::vector<std::string> failures;
    std::vector<json> entries(m.records.size());
    std::vector<std::string> errors(m.records.size());
    parallel_for(m.records.size(), threads, [&](size_t i) {
        const SampleRecord& r = m.records[i];
        const std::string file =
            (fs::path(out_dir) / ("rec_" + std::to_string(i) + ".aft")).string();
        try {
            FeaturePyramid p;
            if (what == "pyramid") {
                Image img = load_image(r.image_path);
                if (repr.resize_edge > 0) img = resize_bicubic(img, repr.resize_edge);
                if (repr.crop > 0) img = center_crop(img, repr.crop);
                p = extract_pyramid(backbone, img);
            } else {
                const Embedding e = embed_record(r, repr, backbone, i);
                FeatureMap fm(1, 1, static_cast<int>(e.dim()));
                for (size_t k = 0; k < e.data.size(); ++k)
                    fm.data[k] = static_cast<float>(e.data[k]);
                p.layers.push_back(std::move(fm));
            }
            save_features(p, file);
            const auto bytes = read_file_bytes(file);
            entries[i] = json{{"file", file},
                              {"checksum", fnv1a64(bytes.data(), bytes.size())},
                              {"class_label", r.class_label}};
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (size_t i = 0; i < m.records.size(); ++i) {
        if (!errors[i].empty())
            failures.push_back(m.records[i].image_path + ": " + errors[i]);
        else
            index[m.records[i].image_path] = entries[i];
    }

    const std::string index_path = (fs::path(out_dir) / "index.json").string();
    {
        std::ofstream out(index_path, std::ios::trunc);
        out << index.dump(2) << "\n";
    }
    if (!failures.empty()) {
        std::ofstream log(fs::path(out_dir) / "failures.log", std::ios::trunc);
        for (const auto& f : failures) log << f << "\n";
    }
    json params{{"manifest", manifest_path}, {"out", out_dir}, {"split", split}, {"what", what}};
    merge_into(params, rflags.to_json());
    write_sidecar(index_path, "extract", params);

    std::cout << "extract: " << index.size() << " cached, " << failures.size() << " failed -> "
              << index_path << "\n";
    return failures.empty() ? 0 : 1;
}

int cmd_train(const std::string& manifest_path, const std::string& out_path,
              const ReprFlags& rflags, const TrainFlags& tflags, int threads) {
    const Manifest full = load_manifest(manifest_path);
    const Manifest train_m = filter_split(full, Split::train);
    const Manifest val_m = filter_split(full, Split::val);
    if (train_m.records.empty() || val_m.records.empty())
        throw ValidationError("train: manifest needs nonempty train and val splits");

    ReprConfig repr = rflags.to_repr();
    if (tflags.augment) repr.hflip_seed = tflags.augment_seed;

    const PipelineResult result =
        train_pipeline(train_m, val_m, repr, tflags.to_head(), tflags.to_train(), threads);
    save_head(result.head, out_path);
    save_history_csv(result.history, out_path + ".history.csv");

    json params{{"manifest", manifest_path}, {"out", out_path}, {"threads", threads}};
    merge_into(params, rflags.to_json());
    merge_into(params, tflags.to_json());
    write_sidecar(out_path, "train", params);

    const auto& best = result.history.epochs[static_cast<size_t>(result.history.best_epoch)];
    std::cout << "train: best epoch " << result.history.best_epoch << " val_acc " << best.val_acc
              << " -> " << out_path << "\n";
    for (const auto& f : result.failures)
        std::cerr << "train: failed sample " << f.image_path << ": " << f.reason << "\n";
    return result.failures.empty() ? 0 : 1;
}

int cmd_eval(const std::string& manifest_path, const std::string& checkpoint,
             const std::string& report_path, const std::string& csv_path, bool by_edit_bin,
             const std::string& models_arg, const std::string& tests_arg,
             const ReprFlags& rflags, int threads) {
    const ReprConfig repr = rflags.to_repr();
    json params{{"manifest", manifest_path}, {"checkpoint", checkpoint},
                {"report", report_path},     {"csv", csv_path},
                {"by_edit_bin", by_edit_bin}, {"models", models_arg},
                {"tests", tests_arg},        {"threads", threads}};
    merge_into(params, rflags.to_json());

    size_t failures = 0;
    if (!models_arg.empty()) {
        // Cross-domain grid mode: "--models dom=ckpt,... --tests dom=manifest,..."
        std::map<std::string, AttributorHead> models;
        for (const auto& pair : parse_str_list(models_arg)) {
            const size_t eq = pair.find('=');
            if (eq == std::string::npos) throw ParseError("--models expects dom=path pairs");
            models[pair.substr(0, eq)] = load_head(pair.substr(eq + 1));
        }
        std::map<std::string, Manifest> manifests;
        for (const auto& pair : parse_str_list(tests_arg)) {
            const size_t eq = pair.find('=');
            if (eq == std::string::npos) throw ParseError("--tests expects dom=path pairs");
            manifests[pair.substr(0, eq)] = load_manifest(pair.substr(eq + 1));
        }
        const auto grid = cross_domain(models, repr, manifests, threads);
        json bundle;
        bundle["report_version"] = 1;
        bundle["grid"] = json::array();
        for (const auto& cell : grid) {
            export_report_json(cell.report, report_path + "." + cell.train_domain + "." +
                                                cell.test_domain + ".json");
            bundle["grid"].push_back(json{{"train_domain", cell.train_domain},
                                          {"test_domain", cell.test_domain},
                                          {"accuracy", cell.report.accuracy}});
            failures += std::stoul(cell.report.meta.at("failures"));
        }
        std::ofstream out(report_path, std::ios::trunc);
        out << bundle.dump(2) << "\n";
        if (!csv_path.empty()) export_grid_csv(grid, csv_path);
        write_sidecar(report_path, "eval", params);
        std::cout << "eval: " << grid.size() << " grid cells -> " << report_path << "\n";
        return failures == 0 ? 0 : 1;
    }

    const AttributorHead model = load_head(checkpoint);
    const Manifest manifest = load_manifest(manifest_path);
    if (by_edit_bin) {
        const auto bins = post_edit_eval(model, repr, manifest, threads);
        json bundle;
        bundle["report_version"] = 1;
        bundle["bins"] = json::object();
        for (const auto& [bin, report] : bins) {
            const std::string name = to_string(bin);
            export_report_json(report, report_path + "." + name + ".json");
            bundle["bins"][name] = {{"accuracy", report.accuracy},
                                    {"records", report.confusion.total()}};
            failures += std::stoul(report.meta.at("failures"));
        }
        std::ofstream out(report_path, std::ios::trunc);
        out << bundle.dump(2) << "\n";
        write_sidecar(report_path, "eval", params);
        std::cout << "eval: " << bins.size() << " edit bins -> " << report_path << "\n";
        return failures == 0 ? 0 : 1;
    }

    const EvalReport report = evaluate(model, repr, manifest, threads);
    export_report_json(report, report_path);
    if (!csv_path.empty()) export_report_csv(report, csv_path);
    write_sidecar(report_path, "eval", params);
    failures = std::stoul(report.meta.at("failures"));
    std::cout << "eval: accuracy " << report.accuracy << " over " << report.confusion.total()
              << " samples -> " << report_path << "\n";
    return failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& manifest_path, const std::string& axis_name,
              const std::string& values_csv, const std::string& out_csv,
              const ReprFlags& rflags, const TrainFlags& tflags, int threads) {
    const Manifest full = load_manifest(manifest_path);
    SweepConfig cfg;
    cfg.train_manifest = filter_split(full, Split::train);
    cfg.val_manifest = filter_split(full, Split::val);
    cfg.test_manifest = filter_split(full, Split::test);
    cfg.repr = rflags.to_repr();
    if (tflags.augment) cfg.repr.hflip_seed = tflags.augment_seed;
    cfg.head = tflags.to_head();
    cfg.train = tflags.to_train();
    cfg.threads = threads;

    const auto points = sweep(sweep_axis_from_string(axis_name), parse_int_list(values_csv), cfg);
    export_sweep_csv(points, out_csv);

    json params{{"manifest", manifest_path}, {"axis", axis_name},
                {"values", values_csv},      {"out", out_csv},
                {"threads", threads}};
    merge_into(params, rflags.to_json());
    merge_into(params, tflags.to_json());
    write_sidecar(out_csv, "sweep", params);
    std::cout << "sweep: " << points.size() << " points -> " << out_csv << "\n";
    return 0;
}

int cmd_analyze(const std::string& manifest_path, const std::string& mode,
                const std::string& out_dir, int bins, int layer, const std::string& focus_csv,
                const ReprFlags& rflags, int threads) {
    const Manifest m = load_manifest(manifest_path);
    fs::create_directories(out_dir);
    const ReprConfig repr = rflags.to_repr();
    const std::string summary_path = (fs::path(out_dir) / ("analyze_" + mode + ".json")).string();
    json summary{{"mode", mode}, {"classes", json::object()}};

    for (const auto& cls : m.classes) {
        const Manifest cm = filter_class(m, cls);
        if (mode == "color_density" || mode == "average_image") {
            std::vector<Image> images;
            for (const auto& r : cm.records) images.push_back(load_image(r.image_path));
            if (mode == "average_image") {
                const Image mean = average_image(images);
                const std::string path =
                    (fs::path(out_dir) / ("average_" + cls + ".png")).string();
                save_png(mean, path);
                summary["classes"][cls] = path;
            } else {
                const auto hists = color_density(images, bins);
                const std::string path =
                    (fs::path(out_dir) / ("color_density_" + cls + ".csv")).string();
                export_histograms_csv(
                    {{"r", hists[0]}, {"g", hists[1]}, {"b", hists[2]}}, path);
                summary["classes"][cls] = path;
            }
        } else if (mode == "gram_density") {
            const Backbone backbone = build_backbone(repr.backbone);
            std::vector<GramMatrix> grams(cm.records.size());
            parallel_for(cm.records.size(), threads, [&](size_t i) {
                Image img = load_image(cm.records[i].image_path);
                if (repr.resize_edge > 0) img = resize_bicubic(img, repr.resize_edge);
                if (repr.crop > 0) img = center_crop(img, repr.crop);
                const FeaturePyramid p = extract_pyramid(backbone, img);
                if (layer < 0 || layer >= static_cast<int>(p.layers.size()))
                    throw ValidationError("analyze: layer index out of range");
                grams[i] = gram(p.layers[static_cast<size_t>(layer)]);
            });
            const GramMatrix avg = average_gram(grams);
            const Histogram h = gram_density(avg, bins, /*log_scale=*/true);
            const std::string path =
                (fs::path(out_dir) / ("gram_density_" + cls + ".csv")).string();
            export_histogram_csv(h, path);
            summary["classes"][cls] = path;
        } else if (mode == "composition") {
            const std::vector<std::string> focus = parse_str_list(focus_csv);
            if (focus.empty()) throw ValidationError("analyze composition: --focus required");
            std::vector<std::map<std::string, Image>> per_image;
            for (const auto& r : cm.records) {
                std::map<std::string, Image> masks;
                for (const auto& [key, path] : r.aux_maps)
                    if (key.rfind("seg:", 0) == 0) masks[key.substr(4)] = load_mask(path);
                per_image.push_back(std::move(masks));
            }
            const auto summaries = composition_summary(per_image, focus);
            json cls_entry = json::object();
            for (const auto& s : summaries) {
                const std::string stem = "composition_" + cls + "_" + s.class_name;
                save_png(s.mean_mask, (fs::path(out_dir) / (stem + ".png")).string());
                {
                    // exact frequencies alongside the 8-bit visualization
                    std::ofstream csv(fs::path(out_dir) / (stem + ".csv"), std::ios::trunc);
                    char buf[32];
                    for (int y = 0; y < s.mean_mask.height; ++y) {
                        for (int x = 0; x < s.mean_mask.width; ++x) {
                            std::snprintf(buf, sizeof buf, "%.17g", s.mean_mask.at(x, y, 0));
                            csv << (x ? "," : "") << buf;
                        }
                        csv << "\n";
                    }
                }
                json top = json::array();
                for (const auto& [name, count] : s.top_inserted)
                    top.push_back(json{{"class", name}, {"count", count}});
                cls_entry[s.class_name] = {{"total_images", s.total_images}, {"top_inserted", top}};
            }
            summary["classes"][cls] = cls_entry;
        } else {
            throw ValidationError("analyze: unknown mode " + mode);
        }
    }

    {
        std::ofstream out(summary_path, std::ios::trunc);
        out << summary.dump(2) << "\n";
    }
    json params{{"manifest", manifest_path}, {"mode", mode},   {"out", out_dir},
                {"bins", bins},              {"layer", layer}, {"focus", focus_csv}};
    merge_into(params, rflags.to_json());
    write_sidecar(summary_path, "analyze", params);
    std::cout << "analyze: " << mode << " over " << m.classes.size() << " classes -> " << out_dir
              << "\n";
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& csv_path, bool pretty) {
    const EvalReport report = import_report_json(in_path);
    if (!csv_path.empty()) export_report_csv(report, csv_path);
    if (pretty) {
        std::cout << "accuracy        " << report.accuracy << "\n";
        std::cout << "macro precision " << report.macro_precision << "\n";
        std::cout << "macro recall    " << report.macro_recall << "\n";
        std::cout << "macro f1        " << report.macro_f1 << "\n";
        std::cout << "confusion (rows=true, cols=predicted):\n";
        for (size_t t = 0; t < report.confusion.classes.size(); ++t) {
            std::cout << "  " << report.confusion.classes[t] << ":";
            for (size_t p = 0; p < report.confusion.classes.size(); ++p)
                std::cout << " " << report.confusion.at(t, p);
            std::cout << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const ConfigDefaults cfg = load_config_defaults(argc, argv);

        CLI::App app{"attrikit: generator attribution toolkit"};
        app.require_subcommand(1);
        std::string config_path;
        app.add_option("--config", config_path, "JSON config with parameter defaults")
            ->expected(1);

        int threads = cfg.get("threads", default_threads());

        // synth
        auto* synth = app.add_subcommand("synth", "Render a procedural synthetic corpus");
        std::string synth_out = cfg.get<std::string>("out", "");
        std::string synth_specs = cfg.get<std::string>("spec_file", "");
        std::string synth_per_class = cfg.get<std::string>("per_class", "20,5,5");
        int synth_size = cfg.get("size", 128);
        uint64_t synth_seed = cfg.get<uint64_t>("seed", 42);
        synth->add_option("--out", synth_out, "Output directory")->required();
        synth->add_option("--spec-file", synth_specs, "Generator spec JSON (default: built-ins)");
        synth->add_option("--per-class", synth_per_class, "train,val,test counts per class");
        synth->add_option("--size", synth_size, "Image size in px");
        synth->add_option("--seed", synth_seed, "Master seed");

        // extract
        auto* extract = app.add_subcommand("extract", "Extract feature/style caches");
        std::string ex_manifest = cfg.get<std::string>("manifest", "");
        std::string ex_out = cfg.get<std::string>("out", "");
        std::string ex_split = cfg.get<std::string>("split", "all");
        std::string ex_what = cfg.get<std::string>("what", "embedding");
        ReprFlags ex_repr;
        extract->add_option("--manifest", ex_manifest, "Manifest JSONL")->required();
        extract->add_option("--out", ex_out, "Cache directory")->required();
        extract->add_option("--split", ex_split, "train|val|test|all");
        extract->add_option("--what", ex_what, "embedding|pyramid");
        ex_repr.add_options(extract, cfg);
        extract->add_option("--threads", threads, "Worker threads");

        // train
        auto* train = app.add_subcommand("train", "Train an attribution head");
        std::string tr_manifest = cfg.get<std::string>("manifest", "");
        std::string tr_out = cfg.get<std::string>("out", "");
        ReprFlags tr_repr;
        TrainFlags tr_flags;
        train->add_option("--manifest", tr_manifest, "Manifest with train/val splits")->required();
        train->add_option("--out", tr_out, "Checkpoint output path")->required();
        tr_repr.add_options(train, cfg);
        tr_flags.add_options(train, cfg);
        train->add_option("--threads", threads, "Worker threads");

        // eval
        auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
        std::string ev_manifest = cfg.get<std::string>("manifest", "");
        std::string ev_checkpoint = cfg.get<std::string>("checkpoint", "");
        std::string ev_report = cfg.get<std::string>("report", "");
        std::string ev_csv = cfg.get<std::string>("csv", "");
        std::string ev_models = cfg.get<std::string>("models", "");
        std::string ev_tests = cfg.get<std::string>("tests", "");
        bool ev_by_bin = cfg.get("by_edit_bin", false);
        ReprFlags ev_repr;
        eval->add_option("--manifest", ev_manifest, "Manifest to evaluate");
        eval->add_option("--checkpoint", ev_checkpoint, "Trained head checkpoint");
        eval->add_option("--report", ev_report, "Report JSON output")->required();
        eval->add_option("--csv", ev_csv, "Optional CSV output");
        eval->add_flag("--by-edit-bin", ev_by_bin, "Group evaluation by edit-ratio bin");
        eval->add_option("--models", ev_models, "Grid mode: dom=ckpt,... pairs");
        eval->add_option("--tests", ev_tests, "Grid mode: dom=manifest,... pairs");
        ev_repr.add_options(eval, cfg);
        eval->add_option("--threads", threads, "Worker threads");

        // sweep
        auto* sweep_cmd = app.add_subcommand("sweep", "Axis sweeps with fixed seeds");
        std::string sw_manifest = cfg.get<std::string>("manifest", "");
        std::string sw_axis = cfg.get<std::string>("axis", "train_size");
        std::string sw_values = cfg.get<std::string>("values", "");
        std::string sw_out = cfg.get<std::string>("out", "");
        ReprFlags sw_repr;
        TrainFlags sw_flags;
        sweep_cmd->add_option("--manifest", sw_manifest, "Manifest with all splits")->required();
        sweep_cmd->add_option("--axis", sw_axis, "resolution|patch_k|train_size");
        sweep_cmd->add_option("--values", sw_values, "CSV of axis values")->required();
        sweep_cmd->add_option("--out", sw_out, "Sweep CSV output")->required();
        sw_repr.add_options(sweep_cmd, cfg);
        sw_flags.add_options(sweep_cmd, cfg);
        sweep_cmd->add_option("--threads", threads, "Worker threads");

        // analyze
        auto* analyze = app.add_subcommand("analyze", "Corpus analyses (densities, averages)");
        std::string an_manifest = cfg.get<std::string>("manifest", "");
        std::string an_mode = cfg.get<std::string>("mode", "color_density");
        std::string an_out = cfg.get<std::string>("out", "");
        std::string an_focus = cfg.get<std::string>("focus", "");
        int an_bins = cfg.get("bins", 64);
        int an_layer = cfg.get("layer", 0);
        ReprFlags an_repr;
        analyze->add_option("--manifest", an_manifest, "Manifest JSONL")->required();
        analyze->add_option("--mode", an_mode,
                            "color_density|average_image|gram_density|composition");
        analyze->add_option("--out", an_out, "Output directory")->required();
        analyze->add_option("--bins", an_bins, "Histogram bins");
        analyze->add_option("--layer", an_layer, "Gram density layer index");
        analyze->add_option("--focus", an_focus, "Composition focus classes CSV");
        an_repr.add_options(analyze, cfg);
        analyze->add_option("--threads", threads, "Worker threads");

        // report
        auto* report = app.add_subcommand("report", "Convert / pretty-print report JSON");
        std::string rp_in = cfg.get<std::string>("in", "");
        std::string rp_csv = cfg.get<std::string>("csv", "");
        bool rp_pretty = cfg.get("pretty", true);
        report->add_option("--in", rp_in, "Report JSON")->required();
        report->add_option("--csv", rp_csv, "CSV output path");
        report->add_flag("--pretty,!--no-pretty", rp_pretty, "Print a summary table");

        // --config is pre-scanned before parsing; register it everywhere so
        // it is accepted in any position
        for (auto* sub : app.get_subcommands({}))
            sub->add_option("--config", config_path, "JSON config with parameter defaults");

        CLI11_PARSE(app, argc, argv);

        if (synth->parsed())
            return cmd_synth(synth_out, synth_specs, synth_per_class, synth_size, synth_seed);
        if (extract->parsed())
            return cmd_extract(ex_manifest, ex_out, ex_split, ex_what, ex_repr, threads);
        if (train->parsed()) return cmd_train(tr_manifest, tr_out, tr_repr, tr_flags, threads);
        if (eval->parsed())
            return cmd_eval(ev_manifest, ev_checkpoint, ev_report, ev_csv, ev_by_bin, ev_models,
                            ev_tests, ev_repr, threads);
        if (sweep_cmd->parsed())
            return cmd_sweep(sw_manifest, sw_axis, sw_values, sw_out, sw_repr, sw_flags, threads);
        if (analyze->parsed())
            return cmd_analyze(an_manifest, an_mode, an_out, an_bins, an_layer, an_focus, an_repr,
                               threads);
        if (report->parsed()) return cmd_report(rp_in, rp_csv, rp_pretty);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
