#pragma once

#include "gnv/image.hpp"
#include "gnv/mask_ops.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gnv {

struct CategorySpec {
    int id = 0;           // positive, unique
    std::string name;     // unique
    std::string description;  // gloss appended to standard prompts
};

struct CocoImage {
    int id = 0;
    std::string file_name;
    int width = 0;
    int height = 0;
};

struct CocoAnnotation {
    int id = 0;
    int image_id = 0;
    int category_id = 0;
    RleMask segmentation;
    Bbox bbox;
    std::uint64_t area = 0;
    int iscrowd = 0;
};

struct CocoDataset {
    std::vector<CocoImage> images;
    std::vector<CocoAnnotation> annotations;
    std::vector<CategorySpec> categories;
};

// One rendered scene ready for emission: pixels plus the surviving
// (annotated) instances' visible masks.
struct RenderedScene {
    RgbaImage image;
    struct Instance {
        int category_id = 0;
        BinaryMask visible_mask;
    };
    std::vector<Instance> instances;
};

struct CategoryCounts {
    std::uint64_t generated = 0;
    std::uint64_t kept = 0;
    std::uint64_t filtered = 0;
};

struct PipelineStats {
    std::uint64_t generated = 0;
    std::uint64_t kept = 0;
    std::uint64_t filtered = 0;
    double invalid_rate = 0.0;  // filtered / generated; 0 for an empty run
    std::map<std::string, CategoryCounts> per_category;
    std::map<std::string, std::uint64_t> per_criterion_failures;
};

// Writes images/ PNGs and annotations.json under out_dir with ids dense
// from 1, and returns the in-memory dataset. ConsistencyError when an
// instance would produce an invalid annotation.
CocoDataset emit_dataset(const std::vector<RenderedScene>& scenes,
                         const std::vector<CategorySpec>& categories,
                         const std::filesystem::path& out_dir);

// Re-checks every dataset invariant (reference integrity, RLE decodability,
// area/bbox agreement, sibling disjointness, file existence). Empty result
// means the dataset on disk is valid.
std::vector<std::string> validate_dataset(const std::filesystem::path& out_dir);

// Aggregates the verdict sidecars under run_dir/assets into pipeline stats.
PipelineStats compute_stats(const std::filesystem::path& run_dir);

std::string stats_to_json_text(const PipelineStats& stats);
std::string dataset_to_json_text(const CocoDataset& dataset);
CocoDataset dataset_from_json_text(const std::string& text);

}  // namespace gnv
