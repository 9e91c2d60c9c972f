#pragma once

#include "gnv/backend.hpp"
#include "gnv/compositor.hpp"
#include "gnv/dataset.hpp"
#include "gnv/prompt_optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gnv {

struct FilterConfig {
    int alpha_threshold = 128;
    int median_kernel = 15;
    double min_area_fraction = 0.001;  // of image area
};

struct DatasetConfig {
    int size = 0;          // composite images to produce
    int image_size = 640;  // square scenes
    std::filesystem::path out_dir = "out";
};

struct BackgroundConfig {
    std::vector<std::string> settings = {"indoor", "outdoor"};
    std::string prompt_template = "A {object} in an empty {setting} background";
    std::string mode = "independent";  // or "matched"
};

// Whole-run configuration; defaults mirror the serving hyperparameters the
// pipeline assumes (sampling 0.7/0.9/256, diffusion 25/7/1, kernel 15,
// 640x640, five optimizer iterations).
struct RunConfig {
    std::uint64_t seed = 0;
    int parallelism = 4;
    std::map<std::string, BackendEndpoint> endpoints;  // chat, vision_chat, image_gen[, harmonizer]
    std::vector<CategorySpec> categories;
    OptimizerConfig optimizer;
    ImageGenRequest generation;  // per-item prompt/seed filled by the pipeline
    FilterConfig filter;
    PlacementPolicy policy;
    HarmonizerConfig harmonizer;
    DatasetConfig dataset;
    BackgroundConfig background;
    std::filesystem::path prompts_dir = "assets/prompts";

    RunConfig() { optimizer.role_templates = default_role_templates(); }
};

// Parses and validates a config file; relative prompts_dir and mock script
// paths resolve against the file's directory. Throws ConfigError.
RunConfig load_config_file(const std::filesystem::path& path);
RunConfig config_from_json_text(const std::string& text,
                                const std::filesystem::path& base_dir = {});

std::string config_to_json_text(const RunConfig& config);

// Fingerprint of everything that affects outputs (out_dir excluded, so a
// moved run directory still resumes).
std::string config_hash(const RunConfig& config);

// Structural checks shared by every stage entry point.
void check_config(const RunConfig& config);

const BackendEndpoint& require_endpoint(const RunConfig& config, const std::string& key);

}  // namespace gnv
