#include "gnv/dataset.hpp"

#include "gnv/errors.hpp"
#include "gnv/png_io.hpp"
#include "gnv/util.hpp"
#include "gnv/validation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

namespace gnv {

namespace {

using json = nlohmann::json;

json rle_to_json(const RleMask& rle) {
    json counts = json::array();
    for (std::uint64_t c : rle.counts) counts.push_back(c);
    return json{{"size", json::array({rle.height, rle.width})}, {"counts", std::move(counts)}};
}

RleMask rle_from_json(const json& j) {
    RleMask rle;
    rle.height = j.at("size").at(0).get<int>();
    rle.width = j.at("size").at(1).get<int>();
    for (const auto& c : j.at("counts")) rle.counts.push_back(c.get<std::uint64_t>());
    return rle;
}

std::string image_file_name(int id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.png", id);
    return buf;
}

// The "only the first count may be zero" structural rule, which decode
// alone does not enforce.
bool rle_counts_well_formed(const RleMask& rle) {
    for (std::size_t i = 1; i < rle.counts.size(); ++i) {
        if (rle.counts[i] == 0) return false;
    }
    return !rle.counts.empty();
}

}  // namespace

std::string dataset_to_json_text(const CocoDataset& dataset) {
    json j;
    j["images"] = json::array();
    for (const auto& img : dataset.images) {
        j["images"].push_back(json{{"id", img.id},
                                   {"file_name", img.file_name},
                                   {"width", img.width},
                                   {"height", img.height}});
    }
    j["annotations"] = json::array();
    for (const auto& ann : dataset.annotations) {
        j["annotations"].push_back(json{{"id", ann.id},
                                        {"image_id", ann.image_id},
                                        {"category_id", ann.category_id},
                                        {"segmentation", rle_to_json(ann.segmentation)},
                                        {"bbox", json::array({ann.bbox.x, ann.bbox.y,
                                                              ann.bbox.w, ann.bbox.h})},
                                        {"area", ann.area},
                                        {"iscrowd", ann.iscrowd}});
    }
    j["categories"] = json::array();
    for (const auto& cat : dataset.categories) {
        j["categories"].push_back(json{{"id", cat.id},
                                       {"name", cat.name},
                                       {"description", cat.description}});
    }
    return j.dump(2) + "\n";
}

CocoDataset dataset_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw IoError("annotations.json is not valid JSON: " + std::string(ex.what()));
    }
    CocoDataset dataset;
    for (const auto& img : j.at("images")) {
        dataset.images.push_back(CocoImage{img.at("id").get<int>(),
                                           img.at("file_name").get<std::string>(),
                                           img.at("width").get<int>(),
                                           img.at("height").get<int>()});
    }
    for (const auto& ann : j.at("annotations")) {
        CocoAnnotation a;
        a.id = ann.at("id").get<int>();
        a.image_id = ann.at("image_id").get<int>();
        a.category_id = ann.at("category_id").get<int>();
        a.segmentation = rle_from_json(ann.at("segmentation"));
        a.bbox = Bbox{ann.at("bbox").at(0).get<int>(), ann.at("bbox").at(1).get<int>(),
                      ann.at("bbox").at(2).get<int>(), ann.at("bbox").at(3).get<int>()};
        a.area = ann.at("area").get<std::uint64_t>();
        a.iscrowd = ann.at("iscrowd").get<int>();
        dataset.annotations.push_back(std::move(a));
    }
    for (const auto& cat : j.at("categories")) {
        dataset.categories.push_back(CategorySpec{cat.at("id").get<int>(),
                                                  cat.at("name").get<std::string>(),
                                                  cat.value("description", "")});
    }
    return dataset;
}

CocoDataset emit_dataset(const std::vector<RenderedScene>& scenes,
                         const std::vector<CategorySpec>& categories,
                         const std::filesystem::path& out_dir) {
    CocoDataset dataset;
    dataset.categories = categories;

    std::filesystem::create_directories(out_dir / "images");

    int next_annotation_id = 1;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        const RenderedScene& scene = scenes[s];
        check_image(scene.image);

        CocoImage img;
        img.id = static_cast<int>(s) + 1;
        img.file_name = image_file_name(img.id);
        img.width = scene.image.width;
        img.height = scene.image.height;
        write_png_file(out_dir / "images" / img.file_name, scene.image);
        dataset.images.push_back(img);

        for (const auto& inst : scene.instances) {
            if (inst.visible_mask.width != scene.image.width ||
                inst.visible_mask.height != scene.image.height) {
                throw ConsistencyError("visible mask dimensions differ from the scene image");
            }
            if (inst.visible_mask.empty_mask()) {
                throw ConsistencyError("instance with an empty visible mask reached emission");
            }
            bool known = std::any_of(categories.begin(), categories.end(),
                                     [&](const CategorySpec& c) { return c.id == inst.category_id; });
            if (!known) {
                throw ConsistencyError("annotation references unknown category id " +
                                       std::to_string(inst.category_id));
            }

            CocoAnnotation ann;
            ann.id = next_annotation_id++;
            ann.image_id = img.id;
            ann.category_id = inst.category_id;
            ann.segmentation = rle_encode(inst.visible_mask);
            ann.bbox = mask_to_bbox(inst.visible_mask);
            ann.area = inst.visible_mask.area();
            ann.iscrowd = 0;
            if (rle_area(ann.segmentation) != ann.area) {
                throw ConsistencyError("RLE area disagrees with mask area");
            }
            dataset.annotations.push_back(std::move(ann));
        }
    }

    write_text_file(out_dir / "annotations.json", dataset_to_json_text(dataset));
    return dataset;
}

std::vector<std::string> validate_dataset(const std::filesystem::path& out_dir) {
    std::filesystem::path annotations_path = out_dir / "annotations.json";
    if (!std::filesystem::exists(annotations_path)) {
        throw IoError("annotations.json not found under " + out_dir.string());
    }
    CocoDataset dataset = dataset_from_json_text(read_text_file(annotations_path));

    std::vector<std::string> violations;
    auto flag = [&](const std::string& message) { violations.push_back(message); };

    std::map<int, const CocoImage*> images_by_id;
    for (const auto& img : dataset.images) {
        if (!images_by_id.emplace(img.id, &img).second) {
            flag("duplicate image id " + std::to_string(img.id));
        }
        if (!std::filesystem::exists(out_dir / "images" / img.file_name)) {
            flag("image file missing: " + img.file_name);
        }
    }
    std::map<int, std::string> categories_by_id;
    for (const auto& cat : dataset.categories) {
        if (!categories_by_id.emplace(cat.id, cat.name).second) {
            flag("duplicate category id " + std::to_string(cat.id));
        }
    }

    std::map<int, BinaryMask> occupancy;  // per image, union of sibling masks
    std::map<int, int> annotation_ids;
    for (const auto& ann : dataset.annotations) {
        std::string tag = "annotation " + std::to_string(ann.id);
        if (++annotation_ids[ann.id] > 1) flag("duplicate annotation id " + std::to_string(ann.id));

        auto img_it = images_by_id.find(ann.image_id);
        if (img_it == images_by_id.end()) {
            flag(tag + ": unknown image id " + std::to_string(ann.image_id));
            continue;
        }
        if (!categories_by_id.count(ann.category_id)) {
            flag(tag + ": unknown category id " + std::to_string(ann.category_id));
        }
        if (ann.iscrowd != 0) flag(tag + ": iscrowd must be 0");

        const CocoImage& img = *img_it->second;
        if (ann.segmentation.width != img.width || ann.segmentation.height != img.height) {
            flag(tag + ": segmentation size differs from image size");
            continue;
        }
        if (!rle_counts_well_formed(ann.segmentation)) {
            flag(tag + ": RLE counts malformed (interior zero run)");
            continue;
        }
        BinaryMask mask;
        try {
            mask = rle_decode(ann.segmentation);
        } catch (const BadCounts& ex) {
            flag(tag + ": RLE undecodable: " + ex.what());
            continue;
        }
        if (mask.empty_mask()) {
            flag(tag + ": decoded mask is empty");
            continue;
        }
        if (mask.area() != ann.area) {
            flag(tag + ": area field " + std::to_string(ann.area) + " != decoded area " +
                 std::to_string(mask.area()));
        }
        Bbox expected = mask_to_bbox(mask);
        if (!(expected == ann.bbox)) {
            flag(tag + ": bbox does not match the decoded mask");
        }

        auto [occ_it, fresh] = occupancy.try_emplace(ann.image_id, img.width, img.height);
        BinaryMask& occupied = occ_it->second;
        bool overlap = false;
        for (std::size_t i = 0; i < mask.bits.size(); ++i) {
            if (mask.bits[i] && occupied.bits[i]) overlap = true;
            occupied.bits[i] |= mask.bits[i];
        }
        (void)fresh;
        if (overlap) flag(tag + ": overlaps a sibling mask in image " + std::to_string(ann.image_id));
    }
    return violations;
}

PipelineStats compute_stats(const std::filesystem::path& run_dir) {
    PipelineStats stats;
    std::filesystem::path assets_dir = run_dir / "assets";
    if (!std::filesystem::exists(assets_dir)) return stats;

    std::vector<std::filesystem::path> verdict_files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(assets_dir)) {
        if (entry.is_regular_file() && entry.path().filename().string().ends_with(".verdict.json")) {
            verdict_files.push_back(entry.path());
        }
    }
    std::sort(verdict_files.begin(), verdict_files.end());

    for (const auto& path : verdict_files) {
        ValidationVerdict verdict = verdict_from_json_text(read_text_file(path));
        ++stats.generated;
        CategoryCounts& cat = stats.per_category[verdict.category];
        ++cat.generated;
        if (verdict.final == FinalDecision::Keep) {
            ++stats.kept;
            ++cat.kept;
        } else {
            ++stats.filtered;
            ++cat.filtered;
        }
        for (const auto& criterion : verdict.criteria) {
            if (criterion.outcome == CriterionOutcome::Fail) {
                ++stats.per_criterion_failures[to_string(criterion.name)];
            }
        }
    }
    stats.invalid_rate = stats.generated == 0
                             ? 0.0
                             : static_cast<double>(stats.filtered) / static_cast<double>(stats.generated);
    return stats;
}

std::string stats_to_json_text(const PipelineStats& stats) {
    json per_category = json::object();
    for (const auto& [name, counts] : stats.per_category) {
        per_category[name] = json{{"generated", counts.generated},
                                  {"kept", counts.kept},
                                  {"filtered", counts.filtered}};
    }
    json per_criterion = json::object();
    for (const auto& [name, count] : stats.per_criterion_failures) {
        per_criterion[name] = count;
    }
    json j{{"generated", stats.generated},
           {"kept", stats.kept},
           {"filtered", stats.filtered},
           {"invalid_rate", stats.invalid_rate},
           {"per_category", std::move(per_category)},
           {"per_criterion_failures", std::move(per_criterion)}};
    return j.dump(2) + "\n";
}

}  // namespace gnv
