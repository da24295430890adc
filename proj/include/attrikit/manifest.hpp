#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attrikit/image.hpp"

namespace attrikit {

// Which labeling a record participates in. "generator" is the main
// attribution task; the others are the inference-stage hyperparameter
// taxonomies carried by manifests.
enum class Taxonomy { generator, checkpoint, scheduler, steps, seed };

enum class PromptDomain { natural, creative, none };

enum class Split { train, val, test };

std::string to_string(Taxonomy t);
std::string to_string(PromptDomain d);
std::string to_string(Split s);
Taxonomy taxonomy_from_string(const std::string& s);
PromptDomain prompt_domain_from_string(const std::string& s);
Split split_from_string(const std::string& s);

struct EditInfo {
    std::string editor;
    std::optional<std::string> mask_path;
    std::optional<double> edit_ratio;  // fraction in [0,1]

    bool operator==(const EditInfo&) const = default;
};

// One image with its labels and optional auxiliary map paths. aux_maps keys
// are channel names; segmentation masks use keys of the form "seg:<class>".
struct SampleRecord {
    std::string image_path;
    std::string class_label;
    Taxonomy taxonomy = Taxonomy::generator;
    std::optional<std::string> prompt;
    PromptDomain prompt_domain = PromptDomain::none;
    Split split = Split::train;
    std::optional<EditInfo> edit;
    std::map<std::string, std::string> aux_maps;

    bool operator==(const SampleRecord&) const = default;
};

struct Manifest {
    std::vector<SampleRecord> records;
    std::vector<std::string> classes;  // sorted distinct class labels
    Taxonomy taxonomy = Taxonomy::generator;

    bool operator==(const Manifest&) const = default;
};

// Builds a manifest from records: derives the sorted class list and checks
// the single-taxonomy and no-duplicate invariants.
Manifest make_manifest(std::vector<SampleRecord> records);

// Reads a JSON Lines manifest file. Errors carry the offending line number.
Manifest load_manifest(const std::string& path);

// Writes the exact JSONL format load_manifest accepts (round-trip identity).
void save_manifest(const Manifest& m, const std::string& path);

// Subset by split; classes recomputed from the surviving records.
Manifest filter_split(const Manifest& m, Split s);

// Subset by class label (helper for per-class analyses).
Manifest filter_class(const Manifest& m, const std::string& class_label);

// Fraction of 1-pixels in a binary mask. Non-binary values are rejected.
double edit_ratio(const Image& mask);

enum class EditBin { small, medium, large, full, out_of_range };

std::string to_string(EditBin b);

// [0,0.15] -> small, (0.15,0.30] -> medium, (0.30,0.60] -> large,
// 1.0 -> full, (0.60,1.0) -> out_of_range. Upper-inclusive boundaries.
EditBin edit_bin(double ratio);

}  // namespace attrikit
