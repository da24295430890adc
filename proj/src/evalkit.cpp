#include "attrikit/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attrikit/errors.hpp"
#include "attrikit/imageio.hpp"
#include "attrikit/parallel.hpp"
#include "attrikit/prng.hpp"

namespace attrikit {

using nlohmann::json;

int64_t ConfusionMatrix::total() const {
    int64_t t = 0;
    for (int64_t c : counts) t += c;
    return t;
}

int64_t ConfusionMatrix::diagonal() const {
    int64_t t = 0;
    for (size_t i = 0; i < classes.size(); ++i) t += at(i, i);
    return t;
}

int64_t ConfusionMatrix::row_sum(size_t t) const {
    int64_t s = 0;
    for (size_t p = 0; p < classes.size(); ++p) s += at(t, p);
    return s;
}

int64_t ConfusionMatrix::col_sum(size_t p) const {
    int64_t s = 0;
    for (size_t t = 0; t < classes.size(); ++t) s += at(t, p);
    return s;
}

EvalReport compute_report(const ConfusionMatrix& confusion,
                          std::map<std::string, std::string> meta) {
    EvalReport r;
    r.confusion = confusion;
    const size_t c = confusion.classes.size();
    const int64_t total = confusion.total();
    r.accuracy = total > 0 ? static_cast<double>(confusion.diagonal()) / total : 0.0;

    std::string flagged;
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    for (size_t i = 0; i < c; ++i) {
        PerClassMetrics m;
        m.class_name = confusion.classes[i];
        m.support = confusion.row_sum(i);
        const int64_t tp = confusion.at(i, i);
        const int64_t col = confusion.col_sum(i);
        bool degenerate = false;
        if (col > 0) {
            m.precision = static_cast<double>(tp) / col;
        } else {
            degenerate = true;
        }
        if (m.support > 0) {
            m.recall = static_cast<double>(tp) / m.support;
        } else {
            degenerate = true;
        }
        if (m.precision + m.recall > 0.0)
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        if (degenerate) {
            if (!flagged.empty()) flagged += ";";
            flagged += m.class_name;
        }
        psum += m.precision;
        rsum += m.recall;
        fsum += m.f1;
        r.per_class.push_back(std::move(m));
    }
    if (c > 0) {
        r.macro_precision = psum / static_cast<double>(c);
        r.macro_recall = rsum / static_cast<double>(c);
        r.macro_f1 = fsum / static_cast<double>(c);
    }
    if (!flagged.empty()) meta["zero_denominator_classes"] = flagged;
    r.meta = std::move(meta);
    return r;
}

std::string to_string(Repr r) {
    switch (r) {
        case Repr::pixel: return "pixel";
        case Repr::style: return "style";
        case Repr::features_file: return "features_file";
        case Repr::segmentation: return "segmentation";
    }
    return "style";
}

Repr repr_from_string(const std::string& s) {
    if (s == "pixel") return Repr::pixel;
    if (s == "style") return Repr::style;
    if (s == "features_file") return Repr::features_file;
    if (s == "segmentation") return Repr::segmentation;
    throw ParseError("unknown representation: " + s);
}

std::string describe(const ReprConfig& repr) {
    std::ostringstream out;
    out << to_string(repr.kind);
    if (repr.patch)
        out << ",patch_k=" << repr.patch->k;
    else
        out << ",resize=" << repr.resize_edge << ",crop=" << repr.crop;
    if (repr.input_channel != "rgb") out << ",input=" << repr.input_channel;
    if (repr.kind == Repr::pixel) out << ",grid=" << repr.pixel_grid;
    if (repr.kind == Repr::style) {
        out << ",backbone_seed=" << repr.backbone.seed;
        if (!repr.style_layers.empty()) {
            out << ",layers=";
            for (size_t i = 0; i < repr.style_layers.size(); ++i)
                out << (i ? "+" : "") << repr.style_layers[i];
        }
    }
    if (repr.perturb) out << ",perturb=" << to_string(*repr.perturb);
    if (repr.use_text) out << ",text_dim=" << repr.text_dim;
    return out.str();
}

Embedding segmentation_embedding(const std::map<std::string, Image>& masks,
                                 const std::vector<std::string>& class_vocab, int grid) {
    if (class_vocab.empty()) throw ValidationError("segmentation_embedding: empty vocabulary");
    if (grid < 1) throw ValidationError("segmentation_embedding: grid must be >= 1");
    Embedding e;
    e.kind = EmbeddingKind::segmentation;
    e.data.assign(class_vocab.size() * static_cast<size_t>(grid) * grid, 0.0);
    size_t slot = 0;
    for (const auto& cls : class_vocab) {
        auto it = masks.find(cls);
        if (it != masks.end()) {
            const Embedding pooled = pixel_embedding(it->second, grid);
            std::copy(pooled.data.begin(), pooled.data.end(), e.data.begin() + slot);
        }
        slot += static_cast<size_t>(grid) * grid;
    }
    return e;
}

namespace {

Image load_input_image(const SampleRecord& record, const ReprConfig& repr) {
    if (repr.input_channel.rfind("aux:", 0) == 0) {
        const std::string key = repr.input_channel.substr(4);
        auto it = record.aux_maps.find(key);
        if (it == record.aux_maps.end())
            throw IoError(record.image_path + ": missing aux map \"" + key + "\"");
        return load_image(it->second);
    }
    return load_image(record.image_path);
}

Image preprocess(const SampleRecord& record, const ReprConfig& repr, size_t index) {
    Image img = load_input_image(record, repr);
    if (repr.input_channel == "canny") img = canny(img, repr.canny_low, repr.canny_high);
    if (repr.patch) {
        img = crop_patch(img, *repr.patch);
    } else {
        if (repr.resize_edge > 0) img = resize_bicubic(img, repr.resize_edge);
        if (repr.crop > 0) img = center_crop(img, repr.crop);
    }
    if (repr.hflip_seed) img = maybe_hflip(img, hash_combine(*repr.hflip_seed, index));
    if (repr.perturb) {
        PerturbSpec p = *repr.perturb;
        if (p.kind == PerturbSpec::Kind::gaussian_noise) p.seed = hash_combine(p.seed, index);
        img = apply_perturb(img, p);
    }
    return img;
}

std::map<std::string, Image> load_seg_masks(const SampleRecord& record) {
    std::map<std::string, Image> masks;
    for (const auto& [key, path] : record.aux_maps)
        if (key.rfind("seg:", 0) == 0) masks[key.substr(4)] = load_mask(path);
    return masks;
}

}  // namespace

Embedding embed_record(const SampleRecord& record, const ReprConfig& repr,
                       const Backbone& backbone, size_t record_index) {
    Embedding image_part;
    switch (repr.kind) {
        case Repr::pixel:
            image_part = pixel_embedding(preprocess(record, repr, record_index), repr.pixel_grid);
            break;
        case Repr::style: {
            const FeaturePyramid p =
                extract_pyramid(backbone, preprocess(record, repr, record_index));
            image_part = style_embedding(style_vector(p, repr.style_layers));
            break;
        }
        case Repr::features_file: {
            auto it = record.aux_maps.find(repr.features_key);
            if (it == record.aux_maps.end())
                throw IoError(record.image_path + ": missing aux map \"" + repr.features_key +
                              "\"");
            const FeaturePyramid p = load_features(it->second);
            image_part.kind = EmbeddingKind::image;
            for (const auto& layer : p.layers)
                image_part.data.insert(image_part.data.end(), layer.data.begin(),
                                       layer.data.end());
            break;
        }
        case Repr::segmentation: {
            if (repr.seg_vocab.empty())
                throw ValidationError("segmentation representation needs a vocabulary");
            image_part =
                segmentation_embedding(load_seg_masks(record), repr.seg_vocab, repr.seg_grid);
            break;
        }
    }
    if (!repr.use_text) return image_part;
    const Embedding text =
        text_embedding(record.prompt.value_or(""), repr.text_dim, repr.text_seed);
    return concat({image_part, text});
}

EmbeddedSet embed_manifest(const Manifest& m, const ReprConfig& repr,
                           const std::vector<std::string>& class_names, int threads) {
    std::map<std::string, int> index;
    for (size_t i = 0; i < class_names.size(); ++i)
        index[class_names[i]] = static_cast<int>(i);
    for (const auto& r : m.records)
        if (!index.count(r.class_label))
            throw ValidationError("manifest class \"" + r.class_label +
                                  "\" unknown to the model");

    const Backbone backbone = build_backbone(repr.backbone);
    std::vector<std::optional<TrainSample>> slots(m.records.size());
    std::vector<std::optional<EmbedFailure>> fails(m.records.size());
    parallel_for(m.records.size(), threads, [&](size_t i) {
        const SampleRecord& r = m.records[i];
        try {
            TrainSample s;
            s.input = embed_record(r, repr, backbone, i);
            s.label = index.at(r.class_label);
            slots[i] = std::move(s);
        } catch (const IoError& e) {
            fails[i] = EmbedFailure{r.image_path, e.what()};
        } catch (const FormatError& e) {
            fails[i] = EmbedFailure{r.image_path, e.what()};
        }
    });

    EmbeddedSet out;
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) out.samples.push_back(std::move(*slots[i]));
        if (fails[i]) out.failures.push_back(std::move(*fails[i]));
    }
    return out;
}

namespace {

std::map<std::string, std::string> base_meta(const AttributorHead& model, const ReprConfig& repr,
                                             const Manifest& manifest) {
    std::map<std::string, std::string> meta;
    std::ostringstream model_id;
    model_id << (model.config.kind == HeadKind::linear ? "linear" : "mlp") << "-"
             << model.config.input_dim << "x" << model.config.num_classes << "-seed"
             << model.config.init_seed;
    meta["model"] = model_id.str();
    meta["manifest"] = std::to_string(manifest.records.size()) + " records, " +
                       std::to_string(manifest.classes.size()) + " classes";
    meta["representation"] = describe(repr);
    meta["perturb"] = repr.perturb ? to_string(*repr.perturb) : "none";
    meta["timestamp"] = "";
    return meta;
}

void add_failures(std::map<std::string, std::string>& meta,
                  const std::vector<EmbedFailure>& failures) {
    meta["failures"] = std::to_string(failures.size());
    if (!failures.empty()) {
        std::string paths;
        for (const auto& f : failures) {
            if (!paths.empty()) paths += ";";
            paths += f.image_path;
        }
        meta["failed_paths"] = paths;
    }
}

}  // namespace

EvalReport evaluate(const AttributorHead& model, const ReprConfig& repr, const Manifest& manifest,
                    int threads) {
    for (const auto& cls : manifest.classes)
        if (std::find(model.class_names.begin(), model.class_names.end(), cls) ==
            model.class_names.end())
            throw ValidationError("evaluate: manifest class \"" + cls +
                                  "\" not among model classes");

    EmbeddedSet set = embed_manifest(manifest, repr, model.class_names, threads);
    ConfusionMatrix confusion(model.class_names);
    std::vector<int> predictions(set.samples.size());
    parallel_for(set.samples.size(), threads, [&](size_t i) {
        const std::vector<double> logits = forward(model, set.samples[i].input);
        int best = 0;
        for (int k = 1; k < static_cast<int>(logits.size()); ++k)
            if (logits[static_cast<size_t>(k)] > logits[static_cast<size_t>(best)]) best = k;
        predictions[i] = best;
    });
    for (size_t i = 0; i < set.samples.size(); ++i)
        confusion.at(static_cast<size_t>(set.samples[i].label),
                     static_cast<size_t>(predictions[i])) += 1;

    auto meta = base_meta(model, repr, manifest);
    add_failures(meta, set.failures);
    return compute_report(confusion, std::move(meta));
}

std::vector<CrossDomainCell> cross_domain(const std::map<std::string, AttributorHead>& models,
                                          const ReprConfig& repr,
                                          const std::map<std::string, Manifest>& manifests,
                                          int threads) {
    if (models.empty() || manifests.empty())
        throw ValidationError("cross_domain: need at least one model and one manifest");
    const std::vector<std::string>& ref = models.begin()->second.class_names;
    for (const auto& [domain, model] : models)
        if (model.class_names != ref)
            throw ValidationError("cross_domain: model \"" + domain +
                                  "\" has a different class set");
    std::vector<CrossDomainCell> grid;
    for (const auto& [train_domain, model] : models)
        for (const auto& [test_domain, manifest] : manifests) {
            CrossDomainCell cell;
            cell.train_domain = train_domain;
            cell.test_domain = test_domain;
            cell.report = evaluate(model, repr, manifest, threads);
            cell.report.meta["train_domain"] = train_domain;
            cell.report.meta["test_domain"] = test_domain;
            grid.push_back(std::move(cell));
        }
    return grid;
}

std::map<EditBin, EvalReport> post_edit_eval(const AttributorHead& model, const ReprConfig& repr,
                                             const Manifest& manifest, int threads) {
    std::map<EditBin, std::vector<SampleRecord>> bins;
    for (const auto& r : manifest.records) {
        if (!r.edit)
            throw ValidationError("post_edit_eval: record " + r.image_path +
                                  " has no edit metadata");
        double ratio;
        if (r.edit->edit_ratio) {
            ratio = *r.edit->edit_ratio;
        } else if (r.edit->mask_path) {
            ratio = edit_ratio(load_mask(*r.edit->mask_path));
        } else {
            throw ValidationError("post_edit_eval: record " + r.image_path +
                                  " has neither edit_ratio nor mask");
        }
        bins[edit_bin(ratio)].push_back(r);
    }
    std::map<EditBin, EvalReport> out;
    for (auto& [bin, records] : bins) {
        Manifest sub;
        sub.taxonomy = manifest.taxonomy;
        sub.records = std::move(records);
        {
            std::vector<std::string> cls;
            for (const auto& r : sub.records) cls.push_back(r.class_label);
            std::sort(cls.begin(), cls.end());
            cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
            sub.classes = std::move(cls);
        }
        EvalReport report = evaluate(model, repr, sub, threads);
        report.meta["edit_bin"] = to_string(bin);
        out[bin] = std::move(report);
    }
    return out;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "resolution") return SweepAxis::resolution;
    if (s == "patch_k") return SweepAxis::patch_k;
    if (s == "train_size") return SweepAxis::train_size;
    throw ParseError("unknown sweep axis: " + s);
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::resolution: return "resolution";
        case SweepAxis::patch_k: return "patch_k";
        case SweepAxis::train_size: return "train_size";
    }
    return "resolution";
}

namespace {

Manifest subsample_per_class(const Manifest& m, int per_class) {
    std::map<std::string, int> taken;
    Manifest out;
    out.taxonomy = m.taxonomy;
    for (const auto& r : m.records)
        if (taken[r.class_label]++ < per_class) out.records.push_back(r);
    for (const auto& cls : m.classes) {
        if (taken[cls] < per_class)
            throw ValidationError("sweep: class \"" + cls + "\" has only " +
                                  std::to_string(taken[cls]) + " records, need " +
                                  std::to_string(per_class));
    }
    out.classes = m.classes;
    return out;
}

}  // namespace

PipelineResult train_pipeline(const Manifest& train_m, const Manifest& val_m,
                              const ReprConfig& repr, HeadConfig head_cfg,
                              const TrainConfig& train_cfg, int threads) {
    if (train_m.records.empty()) throw ValidationError("train_pipeline: empty train manifest");
    const std::vector<std::string>& class_names = train_m.classes;

    EmbeddedSet train_set = embed_manifest(train_m, repr, class_names, threads);
    ReprConfig eval_repr = repr;
    eval_repr.hflip_seed.reset();  // augmentation is train-only
    EmbeddedSet val_set = embed_manifest(val_m, eval_repr, class_names, threads);
    if (train_set.samples.empty()) throw ValidationError("train_pipeline: no usable train samples");

    if (head_cfg.input_dim == 0)
        head_cfg.input_dim = static_cast<int>(train_set.samples.front().input.dim());
    head_cfg.num_classes = static_cast<int>(class_names.size());

    AttributorHead head = init_head(head_cfg);
    head.class_names = class_names;
    TrainResult result = train(std::move(head), train_set.samples, val_set.samples, train_cfg);

    PipelineResult out;
    out.head = std::move(result.head);
    out.history = std::move(result.history);
    out.failures = std::move(train_set.failures);
    out.failures.insert(out.failures.end(), val_set.failures.begin(), val_set.failures.end());
    return out;
}

std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<int>& values,
                              const SweepConfig& cfg) {
    if (values.empty()) throw ValidationError("sweep: empty value list");
    std::vector<SweepPoint> points;
    for (int v : values) {
        ReprConfig repr = cfg.repr;
        Manifest train_m = cfg.train_manifest;
        switch (axis) {
            case SweepAxis::resolution:
                if (v < 8) throw ValidationError("sweep: resolution must be >= 8");
                repr.patch.reset();
                repr.resize_edge = v;
                repr.crop = v;
                break;
            case SweepAxis::patch_k: {
                PatchSpec p = cfg.repr.patch ? *cfg.repr.patch : PatchSpec{};
                p.k = v;
                validate_patch_spec(p);
                repr.patch = p;
                break;
            }
            case SweepAxis::train_size:
                if (v < 1) throw ValidationError("sweep: train_size must be >= 1");
                train_m = subsample_per_class(cfg.train_manifest, v);
                break;
        }
        PipelineResult trained =
            train_pipeline(train_m, cfg.val_manifest, repr, cfg.head, cfg.train, cfg.threads);
        ReprConfig eval_repr = repr;
        eval_repr.hflip_seed.reset();
        SweepPoint point;
        point.value = v;
        point.report = evaluate(trained.head, eval_repr, cfg.test_manifest, cfg.threads);
        point.report.meta["axis"] = to_string(axis);
        point.report.meta["axis_value"] = std::to_string(v);
        points.push_back(std::move(point));
    }
    return points;
}

Image average_image(const std::vector<Image>& images) {
    if (images.empty()) throw ValidationError("average_image: empty list");
    int w = images[0].width, h = images[0].height;
    const int ch = images[0].channels;
    for (const auto& img : images) {
        if (img.channels != ch)
            throw ValidationError("average_image: mixed channel counts");
        w = std::min(w, img.width);
        h = std::min(h, img.height);
    }
    Image acc(w, h, ch, 0.0);
    for (const auto& img : images) {
        const Image r = (img.width == w && img.height == h) ? img : resize_bicubic_to(img, w, h);
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += r.data[i];
    }
    for (double& v : acc.data) v /= static_cast<double>(images.size());
    return acc;
}

std::array<Histogram, 3> color_density(const std::vector<Image>& images, int bins) {
    if (images.empty()) throw ValidationError("color_density: empty list");
    const Image mean = to_rgb(average_image(images));
    std::array<Histogram, 3> out;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> samples;
        samples.reserve(mean.pixel_count());
        for (size_t p = 0; p < mean.pixel_count(); ++p) samples.push_back(mean.data[p * 3 + c]);
        out[static_cast<size_t>(c)] = make_histogram(samples, bins, 0.0, 1.0);
    }
    return out;
}

std::vector<CompositionSummary> composition_summary(
    const std::vector<std::map<std::string, Image>>& per_image_masks,
    const std::vector<std::string>& focus_classes, int top_k) {
    if (per_image_masks.empty()) throw ValidationError("composition_summary: no images");
    int w = -1, h = -1;
    for (const auto& masks : per_image_masks)
        for (const auto& [cls, mask] : masks) {
            if (w < 0) {
                w = mask.width;
                h = mask.height;
            } else if (mask.width != w || mask.height != h) {
                throw ValidationError("composition_summary: mask dimension mismatch for \"" +
                                      cls + "\"");
            }
        }
    if (w < 0) throw ValidationError("composition_summary: no masks present");

    auto present = [](const Image& mask) {
        for (double v : mask.data)
            if (v != 0.0) return true;
        return false;
    };

    std::map<std::string, int> insert_counts;
    for (const auto& masks : per_image_masks)
        for (const auto& [cls, mask] : masks)
            if (present(mask) &&
                std::find(focus_classes.begin(), focus_classes.end(), cls) == focus_classes.end())
                insert_counts[cls] += 1;
    std::vector<std::pair<std::string, int>> inserted(insert_counts.begin(), insert_counts.end());
    std::sort(inserted.begin(), inserted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(inserted.size()) > top_k) inserted.resize(static_cast<size_t>(top_k));

    std::vector<CompositionSummary> out;
    for (const auto& focus : focus_classes) {
        CompositionSummary s;
        s.class_name = focus;
        s.total_images = static_cast<int>(per_image_masks.size());
        s.top_inserted = inserted;
        s.mean_mask = Image(w, h, 1, 0.0);
        for (const auto& masks : per_image_masks) {
            auto it = masks.find(focus);
            if (it == masks.end()) continue;
            for (size_t i = 0; i < s.mean_mask.data.size(); ++i)
                s.mean_mask.data[i] += it->second.data[i];
        }
        for (double& v : s.mean_mask.data) v /= static_cast<double>(per_image_masks.size());
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

json report_to_json(const EvalReport& r) {
    json j;
    j["report_version"] = 1;
    j["accuracy"] = r.accuracy;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["macro_f1"] = r.macro_f1;
    j["classes"] = r.confusion.classes;
    json rows = json::array();
    for (size_t t = 0; t < r.confusion.classes.size(); ++t) {
        json row = json::array();
        for (size_t p = 0; p < r.confusion.classes.size(); ++p) row.push_back(r.confusion.at(t, p));
        rows.push_back(row);
    }
    j["confusion"] = rows;
    json per_class = json::array();
    for (const auto& m : r.per_class) {
        per_class.push_back({{"class", m.class_name},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    j["per_class"] = per_class;
    j["meta"] = r.meta;
    return j;
}

EvalReport report_from_json(const json& j) {
    if (!j.contains("report_version") || j["report_version"].get<int>() != 1)
        throw FormatError("report: unsupported report_version");
    EvalReport r;
    r.accuracy = j["accuracy"].get<double>();
    r.macro_precision = j["macro_precision"].get<double>();
    r.macro_recall = j["macro_recall"].get<double>();
    r.macro_f1 = j["macro_f1"].get<double>();
    r.confusion.classes = j["classes"].get<std::vector<std::string>>();
    const size_t c = r.confusion.classes.size();
    r.confusion.counts.assign(c * c, 0);
    for (size_t t = 0; t < c; ++t)
        for (size_t p = 0; p < c; ++p) r.confusion.at(t, p) = j["confusion"][t][p].get<int64_t>();
    for (const auto& m : j["per_class"]) {
        PerClassMetrics pm;
        pm.class_name = m["class"].get<std::string>();
        pm.precision = m["precision"].get<double>();
        pm.recall = m["recall"].get<double>();
        pm.f1 = m["f1"].get<double>();
        pm.support = m["support"].get<int64_t>();
        r.per_class.push_back(std::move(pm));
    }
    if (j.contains("meta"))
        r.meta = j["meta"].get<std::map<std::string, std::string>>();
    return r;
}

}  // namespace

void export_report_json(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write report: " + path);
    out << report_to_json(report).dump(2) << "\n";
}

EvalReport import_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path + ": invalid report JSON: " + e.what());
    }
    return report_from_json(j);
}

void export_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write report CSV: " + path);
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "metric,value\n";
    out << "accuracy," << num(report.accuracy) << "\n";
    out << "macro_precision," << num(report.macro_precision) << "\n";
    out << "macro_recall," << num(report.macro_recall) << "\n";
    out << "macro_f1," << num(report.macro_f1) << "\n";
    for (const auto& m : report.per_class) {
        out << "precision_" << m.class_name << "," << num(m.precision) << "\n";
        out << "recall_" << m.class_name << "," << num(m.recall) << "\n";
        out << "f1_" << m.class_name << "," << num(m.f1) << "\n";
    }
    out << "confusion_true\\pred";
    for (const auto& cls : report.confusion.classes) out << "," << cls;
    out << "\n";
    for (size_t t = 0; t < report.confusion.classes.size(); ++t) {
        out << report.confusion.classes[t];
        for (size_t p = 0; p < report.confusion.classes.size(); ++p)
            out << "," << report.confusion.at(t, p);
        out << "\n";
    }
}

void export_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write sweep CSV: " + path);
    char buf[256];
    out << "axis_value,accuracy,macro_precision,macro_recall,macro_f1\n";
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g", p.value, p.report.accuracy,
                      p.report.macro_precision, p.report.macro_recall, p.report.macro_f1);
        out << buf << "\n";
    }
}

void export_grid_csv(const std::vector<CrossDomainCell>& grid, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write grid CSV: " + path);
    char buf[256];
    out << "train_domain,test_domain,accuracy,macro_precision,macro_recall,macro_f1\n";
    for (const auto& cell : grid) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g",
                      cell.train_domain.c_str(), cell.test_domain.c_str(), cell.report.accuracy,
                      cell.report.macro_precision, cell.report.macro_recall,
                      cell.report.macro_f1);
        out << buf << "\n";
    }
}

}  // namespace attrikit
