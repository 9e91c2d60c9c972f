#include "gnv/config.hpp"

#include "gnv/errors.hpp"
#include "gnv/util.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace gnv {

namespace {

using json = nlohmann::json;

json endpoint_to_json(const BackendEndpoint& e) {
    json j{{"role", to_string(e.role)},
           {"base_url", e.base_url},
           {"timeout", e.timeout_seconds},
           {"max_retries", e.max_retries},
           {"backoff_ms", e.backoff_ms},
           {"model", e.model},
           {"max_image_bytes", e.max_image_bytes}};
    if (e.auth_token) j["auth_token"] = *e.auth_token;
    return j;
}

BackendEndpoint endpoint_from_json(const json& j, const std::filesystem::path& base_dir) {
    BackendEndpoint e;
    e.role = backend_role_from_string(j.at("role").get<std::string>());
    e.base_url = j.at("base_url").get<std::string>();
    if (is_mock_role(e.role) && !base_dir.empty()) {
        std::filesystem::path p = e.base_url;
        if (p.is_relative()) e.base_url = (base_dir / p).string();
    }
    if (j.contains("auth_token")) e.auth_token = j.at("auth_token").get<std::string>();
    e.timeout_seconds = j.value("timeout", e.timeout_seconds);
    e.max_retries = j.value("max_retries", e.max_retries);
    e.backoff_ms = j.value("backoff_ms", e.backoff_ms);
    e.model = j.value("model", e.model);
    e.max_image_bytes = j.value("max_image_bytes", e.max_image_bytes);
    return e;
}

}  // namespace

std::string config_to_json_text(const RunConfig& c) {
    json endpoints = json::object();
    for (const auto& [key, endpoint] : c.endpoints) {
        endpoints[key] = endpoint_to_json(endpoint);
    }
    json categories = json::array();
    for (const auto& cat : c.categories) {
        categories.push_back(json{{"id", cat.id}, {"name", cat.name},
                                  {"description", cat.description}});
    }
    json templates = json::object();
    for (const auto& [key, text] : c.optimizer.role_templates) templates[key] = text;

    json j{
        {"seed", c.seed},
        {"parallelism", c.parallelism},
        {"endpoints", std::move(endpoints)},
        {"categories", std::move(categories)},
        {"optimizer",
         json{{"max_iterations", c.optimizer.max_iterations},
              {"token_budget", c.optimizer.token_budget},
              {"role_templates", std::move(templates)}}},
        {"generation",
         json{{"steps", c.generation.steps},
              {"guidance_scale", c.generation.guidance_scale},
              {"strength", c.generation.strength},
              {"width", c.generation.width},
              {"height", c.generation.height},
              {"negative_prompt", c.generation.negative_prompt}}},
        {"filter",
         json{{"alpha_threshold", c.filter.alpha_threshold},
              {"median_kernel", c.filter.median_kernel},
              {"min_area_fraction", c.filter.min_area_fraction}}},
        {"policy",
         json{{"instances_per_image", json::array({c.policy.min_instances, c.policy.max_instances})},
              {"scale_range", json::array({c.policy.scale_min, c.policy.scale_max})},
              {"max_pairwise_iou", c.policy.max_pairwise_iou},
              {"min_visible_fraction", c.policy.min_visible_fraction},
              {"max_attempts", c.policy.max_attempts}}},
        {"harmonizer",
         json{{"kind", to_string(c.harmonizer.kind)},
              {"fallback_to_identity", c.harmonizer.fallback_to_identity}}},
        {"dataset",
         json{{"size", c.dataset.size},
              {"image_size", c.dataset.image_size},
              {"out_dir", c.dataset.out_dir.string()}}},
        {"background",
         json{{"settings", c.background.settings},
              {"prompt_template", c.background.prompt_template},
              {"mode", c.background.mode}}},
        {"prompts_dir", c.prompts_dir.string()},
    };
    return j.dump(2) + "\n";
}

RunConfig config_from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError("config is not valid JSON: " + std::string(ex.what()));
    }

    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.parallelism = j.value("parallelism", c.parallelism);
        if (j.contains("endpoints")) {
            for (const auto& [key, value] : j.at("endpoints").items()) {
                c.endpoints[key] = endpoint_from_json(value, base_dir);
            }
        }
        if (j.contains("categories")) {
            for (const auto& cat : j.at("categories")) {
                c.categories.push_back(CategorySpec{cat.at("id").get<int>(),
                                                    cat.at("name").get<std::string>(),
                                                    cat.value("description", "")});
            }
        }
        if (j.contains("optimizer")) {
            const json& o = j.at("optimizer");
            c.optimizer.max_iterations = o.value("max_iterations", c.optimizer.max_iterations);
            c.optimizer.token_budget = o.value("token_budget", c.optimizer.token_budget);
            if (o.contains("role_templates")) {
                for (const auto& [key, value] : o.at("role_templates").items()) {
                    c.optimizer.role_templates[key] = value.get<std::string>();
                }
            }
        }
        if (j.contains("generation")) {
            const json& g = j.at("generation");
            c.generation.steps = g.value("steps", c.generation.steps);
            c.generation.guidance_scale = g.value("guidance_scale", c.generation.guidance_scale);
            c.generation.strength = g.value("strength", c.generation.strength);
            c.generation.width = g.value("width", c.generation.width);
            c.generation.height = g.value("height", c.generation.height);
            c.generation.negative_prompt = g.value("negative_prompt", c.generation.negative_prompt);
        }
        if (j.contains("filter")) {
            const json& f = j.at("filter");
            c.filter.alpha_threshold = f.value("alpha_threshold", c.filter.alpha_threshold);
            c.filter.median_kernel = f.value("median_kernel", c.filter.median_kernel);
            c.filter.min_area_fraction = f.value("min_area_fraction", c.filter.min_area_fraction);
        }
        if (j.contains("policy")) {
            const json& p = j.at("policy");
            if (p.contains("instances_per_image")) {
                c.policy.min_instances = p.at("instances_per_image").at(0).get<int>();
                c.policy.max_instances = p.at("instances_per_image").at(1).get<int>();
            }
            if (p.contains("scale_range")) {
                c.policy.scale_min = p.at("scale_range").at(0).get<double>();
                c.policy.scale_max = p.at("scale_range").at(1).get<double>();
            }
            c.policy.max_pairwise_iou = p.value("max_pairwise_iou", c.policy.max_pairwise_iou);
            c.policy.min_visible_fraction =
                p.value("min_visible_fraction", c.policy.min_visible_fraction);
            c.policy.max_attempts = p.value("max_attempts", c.policy.max_attempts);
        }
        if (j.contains("harmonizer")) {
            const json& h = j.at("harmonizer");
            c.harmonizer.kind = harmonizer_kind_from_string(h.value("kind", "color_transfer"));
            c.harmonizer.fallback_to_identity =
                h.value("fallback_to_identity", c.harmonizer.fallback_to_identity);
        }
        if (j.contains("dataset")) {
            const json& d = j.at("dataset");
            c.dataset.size = d.value("size", c.dataset.size);
            c.dataset.image_size = d.value("image_size", c.dataset.image_size);
            if (d.contains("out_dir")) c.dataset.out_dir = d.at("out_dir").get<std::string>();
        }
        if (j.contains("background")) {
            const json& b = j.at("background");
            if (b.contains("settings")) {
                c.background.settings = b.at("settings").get<std::vector<std::string>>();
            }
            c.background.prompt_template =
                b.value("prompt_template", c.background.prompt_template);
            c.background.mode = b.value("mode", c.background.mode);
        }
        if (j.contains("prompts_dir")) c.prompts_dir = j.at("prompts_dir").get<std::string>();
    } catch (const json::exception& ex) {
        throw ConfigError("config field error: " + std::string(ex.what()));
    }

    if (!base_dir.empty()) {
        if (c.prompts_dir.is_relative()) c.prompts_dir = base_dir / c.prompts_dir;
        if (c.dataset.out_dir.is_relative()) c.dataset.out_dir = base_dir / c.dataset.out_dir;
    }
    if (c.harmonizer.kind == HarmonizerKind::External) {
        auto it = c.endpoints.find("harmonizer");
        if (it != c.endpoints.end()) c.harmonizer.endpoint = it->second;
    }
    return c;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    RunConfig c = config_from_json_text(read_text_file(path), path.parent_path());
    check_config(c);
    return c;
}

std::string config_hash(const RunConfig& config) {
    RunConfig canonical = config;
    canonical.dataset.out_dir.clear();
    return hex64(fnv1a64(config_to_json_text(canonical)));
}

void check_config(const RunConfig& config) {
    if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (config.dataset.size < 0) throw ConfigError("dataset.size must be >= 0");
    if (config.dataset.image_size < 64 || config.dataset.image_size % 8 != 0) {
        throw ConfigError("dataset.image_size must be >= 64 and a multiple of 8");
    }
    if (config.filter.median_kernel < 1 || config.filter.median_kernel % 2 == 0) {
        throw ConfigError("filter.median_kernel must be odd and >= 1");
    }
    if (config.filter.alpha_threshold < 0 || config.filter.alpha_threshold > 255) {
        throw ConfigError("filter.alpha_threshold must be in [0, 255]");
    }
    if (config.background.mode != "independent" && config.background.mode != "matched") {
        throw ConfigError("background.mode must be 'independent' or 'matched'");
    }
    if (config.optimizer.max_iterations < 1) {
        throw ConfigError("optimizer.max_iterations must be >= 1");
    }

    std::set<int> category_ids;
    std::set<std::string> category_names;
    for (const auto& cat : config.categories) {
        if (cat.id <= 0) throw ConfigError("category ids must be positive");
        if (!category_ids.insert(cat.id).second) {
            throw ConfigError("duplicate category id " + std::to_string(cat.id));
        }
        if (cat.name.empty() || !category_names.insert(cat.name).second) {
            throw ConfigError("category names must be nonempty and unique");
        }
    }

    static const std::map<std::string, std::pair<BackendRole, BackendRole>> kAllowedRoles = {
        {"chat", {BackendRole::Chat, BackendRole::MockChat}},
        {"vision_chat", {BackendRole::VisionChat, BackendRole::MockVision}},
        {"image_gen", {BackendRole::ImageGen, BackendRole::MockImage}},
    };
    for (const auto& [key, endpoint] : config.endpoints) {
        check_endpoint(endpoint);
        auto it = kAllowedRoles.find(key);
        if (it != kAllowedRoles.end() && endpoint.role != it->second.first &&
            endpoint.role != it->second.second) {
            throw ConfigError("endpoint '" + key + "' has incompatible role " +
                              to_string(endpoint.role));
        }
    }
}

const BackendEndpoint& require_endpoint(const RunConfig& config, const std::string& key) {
    auto it = config.endpoints.find(key);
    if (it == config.endpoints.end()) {
        throw ConfigError("missing endpoint '" + key + "' in config");
    }
    return it->second;
}

}  // namespace gnv
