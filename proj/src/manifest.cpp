#include "attrikit/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "attrikit/errors.hpp"

namespace attrikit {

using nlohmann::json;

std::string to_string(Taxonomy t) {
    switch (t) {
        case Taxonomy::generator: return "generator";
        case Taxonomy::checkpoint: return "checkpoint";
        case Taxonomy::scheduler: return "scheduler";
        case Taxonomy::steps: return "steps";
        case Taxonomy::seed: return "seed";
    }
    return "generator";
}

std::string to_string(PromptDomain d) {
    switch (d) {
        case PromptDomain::natural: return "natural";
        case PromptDomain::creative: return "creative";
        case PromptDomain::none: return "none";
    }
    return "none";
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

Taxonomy taxonomy_from_string(const std::string& s) {
    if (s == "generator") return Taxonomy::generator;
    if (s == "checkpoint") return Taxonomy::checkpoint;
    if (s == "scheduler") return Taxonomy::scheduler;
    if (s == "steps") return Taxonomy::steps;
    if (s == "seed") return Taxonomy::seed;
    throw ParseError("unknown taxonomy: " + s);
}

PromptDomain prompt_domain_from_string(const std::string& s) {
    if (s == "natural") return PromptDomain::natural;
    if (s == "creative") return PromptDomain::creative;
    if (s == "none") return PromptDomain::none;
    throw ParseError("unknown prompt_domain: " + s);
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw ParseError("unknown split: " + s);
}

std::string to_string(EditBin b) {
    switch (b) {
        case EditBin::small: return "small";
        case EditBin::medium: return "medium";
        case EditBin::large: return "large";
        case EditBin::full: return "full";
        case EditBin::out_of_range: return "out_of_range";
    }
    return "out_of_range";
}

static std::vector<std::string> derive_classes(const std::vector<SampleRecord>& records) {
    std::set<std::string> s;
    for (const auto& r : records) s.insert(r.class_label);
    return {s.begin(), s.end()};
}

Manifest make_manifest(std::vector<SampleRecord> records) {
    Manifest m;
    std::set<std::string> seen_paths;
    for (size_t i = 0; i < records.size(); ++i) {
        if (i == 0) {
            m.taxonomy = records[0].taxonomy;
        } else if (records[i].taxonomy != m.taxonomy) {
            throw ValidationError("taxonomy conflict: record " + std::to_string(i) + " has " +
                                  to_string(records[i].taxonomy) + ", manifest has " +
                                  to_string(m.taxonomy));
        }
        if (!seen_paths.insert(records[i].image_path).second)
            throw ValidationError("duplicate image_path in manifest: " + records[i].image_path);
        if (records[i].edit && records[i].edit->edit_ratio) {
            const double r = *records[i].edit->edit_ratio;
            if (!(r >= 0.0 && r <= 1.0))
                throw ValidationError("edit_ratio out of [0,1]: " + std::to_string(r));
        }
    }
    m.records = std::move(records);
    m.classes = derive_classes(m.records);
    return m;
}

static json record_to_json(const SampleRecord& r) {
    json j;
    j["image_path"] = r.image_path;
    j["class_label"] = r.class_label;
    j["taxonomy"] = to_string(r.taxonomy);
    if (r.prompt) j["prompt"] = *r.prompt;
    j["prompt_domain"] = to_string(r.prompt_domain);
    j["split"] = to_string(r.split);
    if (r.edit) {
        json e;
        e["editor"] = r.edit->editor;
        if (r.edit->mask_path) e["mask_path"] = *r.edit->mask_path;
        if (r.edit->edit_ratio) e["edit_ratio"] = *r.edit->edit_ratio;
        j["edit"] = e;
    }
    if (!r.aux_maps.empty()) j["aux_maps"] = r.aux_maps;
    return j;
}

static SampleRecord record_from_json(const json& j) {
    SampleRecord r;
    if (!j.contains("image_path") || !j["image_path"].is_string())
        throw ParseError("missing image_path");
    if (!j.contains("class_label") || !j["class_label"].is_string())
        throw ParseError("missing class_label");
    r.image_path = j["image_path"].get<std::string>();
    r.class_label = j["class_label"].get<std::string>();
    if (j.contains("taxonomy")) r.taxonomy = taxonomy_from_string(j["taxonomy"].get<std::string>());
    if (j.contains("prompt") && !j["prompt"].is_null()) r.prompt = j["prompt"].get<std::string>();
    if (j.contains("prompt_domain"))
        r.prompt_domain = prompt_domain_from_string(j["prompt_domain"].get<std::string>());
    if (j.contains("split")) r.split = split_from_string(j["split"].get<std::string>());
    if (j.contains("edit") && !j["edit"].is_null()) {
        EditInfo e;
        const json& je = j["edit"];
        if (!je.contains("editor") || !je["editor"].is_string())
            throw ParseError("edit block missing editor");
        e.editor = je["editor"].get<std::string>();
        if (je.contains("mask_path") && !je["mask_path"].is_null())
            e.mask_path = je["mask_path"].get<std::string>();
        if (je.contains("edit_ratio") && !je["edit_ratio"].is_null())
            e.edit_ratio = je["edit_ratio"].get<double>();
        r.edit = e;
    }
    if (j.contains("aux_maps") && !j["aux_maps"].is_null())
        r.aux_maps = j["aux_maps"].get<std::map<std::string, std::string>>();
    return r;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    std::vector<SampleRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        try {
            records.push_back(record_from_json(j));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return make_manifest(std::move(records));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open manifest for writing: " + path);
    for (const auto& r : m.records) out << record_to_json(r).dump() << "\n";
    if (!out) throw IoError("write failed: " + path);
}

Manifest filter_split(const Manifest& m, Split s) {
    Manifest out;
    out.taxonomy = m.taxonomy;
    for (const auto& r : m.records)
        if (r.split == s) out.records.push_back(r);
    out.classes = derive_classes(out.records);
    return out;
}

Manifest filter_class(const Manifest& m, const std::string& class_label) {
    Manifest out;
    out.taxonomy = m.taxonomy;
    for (const auto& r : m.records)
        if (r.class_label == class_label) out.records.push_back(r);
    out.classes = derive_classes(out.records);
    return out;
}

double edit_ratio(const Image& mask) {
    if (mask.empty()) throw ValidationError("edit_ratio: empty mask");
    if (mask.channels != 1) throw ValidationError("edit_ratio: mask must be single-channel");
    size_t ones = 0;
    for (double v : mask.data) {
        if (v == 1.0)
            ++ones;
        else if (v != 0.0)
            throw ValidationError("edit_ratio: non-binary mask value " + std::to_string(v));
    }
    return static_cast<double>(ones) / static_cast<double>(mask.data.size());
}

EditBin edit_bin(double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw ValidationError("edit_bin: ratio out of [0,1]: " + std::to_string(ratio));
    if (ratio <= 0.15) return EditBin::small;
    if (ratio <= 0.30) return EditBin::medium;
    if (ratio <= 0.60) return EditBin::large;
    if (ratio == 1.0) return EditBin::full;
    return EditBin::out_of_range;
}

}  // namespace attrikit
