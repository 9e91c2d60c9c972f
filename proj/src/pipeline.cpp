#include "gnv/pipeline.hpp"

#include "gnv/compositor.hpp"
#include "gnv/dataset.hpp"
#include "gnv/errors.hpp"
#include "gnv/mask_ops.hpp"
#include "gnv/png_io.hpp"
#include "gnv/prompt_optimizer.hpp"
#include "gnv/util.hpp"
#include "gnv/validation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace gnv {

namespace {

using json = nlohmann::json;

std::string item_id(const char* prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%06d", prefix, index + 1);
    return buf;
}

std::string render_template(std::string text,
                            const std::map<std::string, std::string>& values) {
    for (const auto& [name, value] : values) {
        std::string placeholder = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = text.find(placeholder, pos)) != std::string::npos) {
            text.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return text;
}

std::string category_with_gloss(const CategorySpec& cat) {
    return cat.description.empty() ? cat.name : cat.name + " (" + cat.description + ")";
}

// Bounded worker pool over [0, count). Per-item error policy belongs to fn;
// anything that escapes aborts the stage after the pool drains.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

class ProgressSink {
public:
    ProgressSink(const ProgressFn& fn, std::string stage)
        : fn_(fn), stage_(std::move(stage)) {}

    void emit(const std::string& item, const std::string& status,
              const std::string& message = "") const {
        if (!fn_) return;
        std::lock_guard<std::mutex> lock(mutex_);
        fn_(ProgressEvent{stage_, item, status, message});
    }

private:
    const ProgressFn& fn_;
    std::string stage_;
    mutable std::mutex mutex_;
};

OptimizerConfig make_optimizer_config(const RunConfig& config) {
    OptimizerConfig opt = config.optimizer;
    auto pick = [&](const char* specific) -> const BackendEndpoint& {
        auto it = config.endpoints.find(specific);
        if (it != config.endpoints.end()) return it->second;
        return require_endpoint(config, "chat");
    };
    opt.agent_endpoint = pick("optimizer_agent");
    opt.evaluator_endpoint = pick("optimizer_evaluator");
    opt.validator_endpoint = pick("optimizer_validator");
    for (const BackendEndpoint* e :
         {&opt.agent_endpoint, &opt.evaluator_endpoint, &opt.validator_endpoint}) {
        if (e->role != BackendRole::Chat && e->role != BackendRole::MockChat) {
            throw ConfigError("optimizer endpoints must be chat-capable");
        }
    }
    if (opt.role_templates.empty()) opt.role_templates = default_role_templates();
    return opt;
}

struct AssetMeta {
    std::string id;
    std::string category;
    int category_id = 0;
    std::string prompt;
    std::uint64_t seed = 0;
    std::string status;  // generated | degenerate | kept | filtered
    int width = 0;
    int height = 0;
};

void write_asset_meta(const std::filesystem::path& dir, const AssetMeta& meta) {
    json j{{"id", meta.id},          {"category", meta.category},
           {"category_id", meta.category_id}, {"prompt", meta.prompt},
           {"seed", meta.seed},      {"status", meta.status},
           {"width", meta.width},    {"height", meta.height}};
    write_text_file(dir / "meta.json", j.dump(2) + "\n");
}

AssetMeta read_asset_meta(const std::filesystem::path& dir) {
    json j = json::parse(read_text_file(dir / "meta.json"));
    AssetMeta meta;
    meta.id = j.at("id").get<std::string>();
    meta.category = j.at("category").get<std::string>();
    meta.category_id = j.at("category_id").get<int>();
    meta.prompt = j.at("prompt").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.status = j.at("status").get<std::string>();
    meta.width = j.at("width").get<int>();
    meta.height = j.at("height").get<int>();
    return meta;
}

std::vector<std::filesystem::path> sorted_subdirs(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::exists(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_directory()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    std::string raw = read_text_file(path);
    int w = 0;
    int h = 0;
    auto samples = decode_png_gray(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(raw.data()),
                                      raw.size()),
        w, h);
    BinaryMask mask(w, h);
    for (std::size_t i = 0; i < samples.size(); ++i) mask.bits[i] = samples[i] >= 128 ? 1 : 0;
    return mask;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> samples(mask.bits.size());
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = mask.bits[i] ? 255 : 0;
    auto bytes = encode_png_gray(mask.width, mask.height, samples);
    write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

std::filesystem::path prompts_out_dir(const RunConfig& c) { return c.dataset.out_dir / "prompts"; }
std::filesystem::path assets_dir(const RunConfig& c) { return c.dataset.out_dir / "assets"; }
std::filesystem::path backgrounds_dir(const RunConfig& c) { return c.dataset.out_dir / "backgrounds"; }
std::filesystem::path scenes_dir(const RunConfig& c) { return c.dataset.out_dir / "scenes"; }

void require_categories(const RunConfig& config) {
    if (config.categories.empty()) throw ConfigError("config has no categories");
}

}  // namespace

RunState ensure_run_state(const std::filesystem::path& run_dir, const std::string& hash) {
    std::filesystem::create_directories(run_dir);
    std::filesystem::path path = run_dir / "run_state.json";
    if (std::filesystem::exists(path)) {
        json j = json::parse(read_text_file(path));
        RunState state{j.at("config_hash").get<std::string>()};
        if (state.config_hash != hash) {
            throw ConfigError("run directory " + run_dir.string() +
                              " was produced with a different config (hash " + state.config_hash +
                              " vs " + hash + "); use a fresh --out directory");
        }
        return state;
    }
    RunState state{hash};
    write_text_file(path, json{{"config_hash", hash}}.dump(2) + "\n");
    return state;
}

int default_instance_count(const RunConfig& config) {
    double mean = 0.5 * (config.policy.min_instances + config.policy.max_instances);
    return static_cast<int>(std::llround(config.dataset.size * mean));
}

StageCounts run_optimize_prompts(const RunConfig& config, const ProgressFn& progress) {
    check_config(config);
    require_categories(config);
    OptimizerConfig opt = make_optimizer_config(config);
    ensure_run_state(config.dataset.out_dir, config_hash(config));
    ProgressSink sink(progress, "prompts");

    const std::string probe_category = category_with_gloss(config.categories.front());
    struct Job {
        const char* role;
        const char* initial_asset;
        const char* output;
    };
    const Job jobs[] = {
        {"ld_agent", "ld_agent_initial.txt", "ld_agent_system_prompt.txt"},
        {"validator", "validator_initial.txt", "validator_system_prompt.txt"},
    };

    StageCounts counts;
    for (const Job& job : jobs) {
        std::filesystem::path output = prompts_out_dir(config) / job.output;
        if (std::filesystem::exists(output)) {
            ++counts.skipped;
            sink.emit(job.role, "skipped", "prompt already optimized");
            continue;
        }
        std::string initial = read_text_file(config.prompts_dir / job.initial_asset);
        OptimizationTrace trace = optimize_system_prompt(initial, probe_category, opt);
        write_trace(trace, job.role, config.dataset.out_dir / "traces");
        write_text_file(output, trace.final_system_prompt);
        ++counts.done;
        sink.emit(job.role, "ok",
                  trace.accepted
                      ? "accepted after " + std::to_string(trace.iterations_used) + " iteration(s)"
                      : "not accepted after " + std::to_string(trace.iterations_used) +
                            " iteration(s); using last candidate");
    }
    return counts;
}

StageCounts run_generate(const RunConfig& config, int count, const ProgressFn& progress) {
    check_config(config);
    require_categories(config);
    const BackendEndpoint& chat_ep = require_endpoint(config, "chat");
    const BackendEndpoint& image_ep = require_endpoint(config, "image_gen");
    ensure_run_state(config.dataset.out_dir, config_hash(config));
    if (count < 0) count = default_instance_count(config);

    std::filesystem::path ld_prompt_path = prompts_out_dir(config) / "ld_agent_system_prompt.txt";
    if (!std::filesystem::exists(ld_prompt_path)) {
        throw ConfigError("missing " + ld_prompt_path.string() + "; run optimize-prompts first");
    }
    std::string ld_system_prompt = read_text_file(ld_prompt_path);

    OptimizerConfig opt = make_optimizer_config(config);
    opt.agent_endpoint = chat_ep;

    ProgressSink sink(progress, "generate");
    StageCounts counts;
    std::mutex counts_mutex;
    auto bump = [&](std::size_t StageCounts::* member) {
        std::lock_guard<std::mutex> lock(counts_mutex);
        ++(counts.*member);
    };

    const std::size_t settings = config.background.settings.size();
    parallel_for(static_cast<std::size_t>(count), config.parallelism, [&](std::size_t i) {
        const CategorySpec& cat = config.categories[i % config.categories.size()];
        std::string id = item_id("inst", static_cast<int>(i));
        std::filesystem::path dir = assets_dir(config) / id;

        if (!std::filesystem::exists(dir / "meta.json")) {
            try {
                std::string prompt =
                    generate_downstream_prompt(ld_system_prompt, category_with_gloss(cat), opt);
                ImageGenRequest req = config.generation;
                req.positive_prompt = prompt;
                req.wants_alpha = true;
                req.seed = mix_seed(config.seed, "generate", i);
                RgbaImage raw = generate_image(image_ep, req);
                RgbaImage denoised = median_filter_alpha(raw, config.filter.median_kernel);
                BinaryMask mask = alpha_to_mask(
                    denoised, static_cast<std::uint8_t>(config.filter.alpha_threshold));
                auto min_area = static_cast<std::size_t>(std::llround(
                    config.filter.min_area_fraction * denoised.width * denoised.height));
                mask = drop_specks(mask, min_area);

                AssetMeta meta{id,       cat.name, cat.id,
                               prompt,   req.seed, mask.empty_mask() ? "degenerate" : "generated",
                               raw.width, raw.height};
                write_png_file(dir / "image.png", denoised);
                write_mask_png(dir / "mask.png", mask);
                write_asset_meta(dir, meta);
                bump(&StageCounts::done);
                sink.emit(id, "ok", meta.status);
            } catch (const Error& ex) {
                bump(&StageCounts::failed);
                sink.emit(id, "failed", ex.what());
                return;
            }
        } else {
            bump(&StageCounts::skipped);
            sink.emit(id, "skipped", "already generated");
        }

        // one background per configured setting, matched to this item's category
        for (std::size_t s = 0; s < settings; ++s) {
            const std::string& setting = config.background.settings[s];
            std::string bg_id = item_id("bg", static_cast<int>(i)) + "_" + setting;
            std::filesystem::path bg_dir = backgrounds_dir(config) / bg_id;
            if (std::filesystem::exists(bg_dir / "meta.json")) continue;
            try {
                ImageGenRequest req = config.generation;
                req.positive_prompt =
                    render_template(config.background.prompt_template,
                                    {{"object", category_with_gloss(cat)}, {"setting", setting}});
                req.wants_alpha = false;
                req.seed = mix_seed(config.seed, "background", i * settings + s);
                RgbaImage bg = generate_image(image_ep, req);
                write_png_file(bg_dir / "image.png", bg);
                json meta{{"id", bg_id},     {"category", cat.name},
                          {"setting", setting}, {"seed", req.seed},
                          {"prompt", req.positive_prompt}};
                write_text_file(bg_dir / "meta.json", meta.dump(2) + "\n");
            } catch (const Error& ex) {
                sink.emit(bg_id, "failed", ex.what());
            }
        }
    });
    return counts;
}

StageCounts run_validate(const RunConfig& config, const ProgressFn& progress) {
    check_config(config);
    const BackendEndpoint& vision_ep = require_endpoint(config, "vision_chat");
    ensure_run_state(config.dataset.out_dir, config_hash(config));

    std::filesystem::path validator_prompt_path =
        prompts_out_dir(config) / "validator_system_prompt.txt";
    if (!std::filesystem::exists(validator_prompt_path)) {
        throw ConfigError("missing " + validator_prompt_path.string() +
                          "; run optimize-prompts first");
    }
    std::string validator_template = read_text_file(validator_prompt_path);

    std::vector<std::filesystem::path> asset_dirs = sorted_subdirs(assets_dir(config));
    if (asset_dirs.empty()) {
        throw ConfigError("no generated assets under " + assets_dir(config).string() +
                          "; run generate first");
    }

    ProgressSink sink(progress, "validate");
    StageCounts counts;
    std::mutex counts_mutex;
    auto bump = [&](std::size_t StageCounts::* member) {
        std::lock_guard<std::mutex> lock(counts_mutex);
        ++(counts.*member);
    };

    parallel_for(asset_dirs.size(), config.parallelism, [&](std::size_t i) {
        const std::filesystem::path& dir = asset_dirs[i];
        AssetMeta meta = read_asset_meta(dir);
        std::filesystem::path verdict_path = dir / (meta.id + ".verdict.json");
        if (meta.status == "degenerate") {
            bump(&StageCounts::skipped);
            sink.emit(meta.id, "skipped", "degenerate asset");
            return;
        }
        if (std::filesystem::exists(verdict_path)) {
            bump(&StageCounts::skipped);
            sink.emit(meta.id, "skipped", "already validated");
            return;
        }
        try {
            RgbaImage image = read_png_file(dir / "image.png");
            std::string system_prompt = render_template(validator_template, {});
            std::size_t pos = 0;
            while ((pos = system_prompt.find("[Category Name]", pos)) != std::string::npos) {
                system_prompt.replace(pos, 15, meta.category);
                pos += meta.category.size();
            }
            ValidationVerdict verdict =
                validate_instance(image, meta.category, system_prompt, vision_ep);
            write_text_file(verdict_path, verdict_to_json_text(verdict));
            meta.status = verdict.final == FinalDecision::Keep ? "kept" : "filtered";
            write_asset_meta(dir, meta);
            bump(&StageCounts::done);
            sink.emit(meta.id, "ok", meta.status);
        } catch (const Error& ex) {
            bump(&StageCounts::failed);
            sink.emit(meta.id, "failed", ex.what());
        }
    });
    return counts;
}

StageCounts run_compose(const RunConfig& config, const ProgressFn& progress) {
    check_config(config);
    ensure_run_state(config.dataset.out_dir, config_hash(config));

    // kept instances, cropped to their mask bbox so placement scale refers
    // to the object itself
    AssetStore store;
    std::vector<InstanceRef> refs;
    std::map<std::string, std::string> category_of;  // instance id -> category name
    for (const auto& dir : sorted_subdirs(assets_dir(config))) {
        AssetMeta meta = read_asset_meta(dir);
        if (meta.status != "kept") continue;
        RgbaImage image = read_png_file(dir / "image.png");
        BinaryMask mask = read_mask_png(dir / "mask.png");
        if (mask.width != image.width || mask.height != image.height || mask.empty_mask()) {
            continue;
        }
        Bbox box = mask_to_bbox(mask);
        RgbaImage cropped(box.w, box.h);
        BinaryMask cropped_mask(box.w, box.h);
        for (int y = 0; y < box.h; ++y) {
            for (int x = 0; x < box.w; ++x) {
                const std::uint8_t* src = image.at(box.x + x, box.y + y);
                std::copy(src, src + 4, cropped.at(x, y));
                cropped_mask.set(x, y, mask.get(box.x + x, box.y + y));
            }
        }
        store[meta.id] = InstanceAssetData{meta.id, meta.category_id,
                                           std::move(cropped), std::move(cropped_mask)};
        refs.push_back(InstanceRef{meta.id, box.w, box.h});
        category_of[meta.id] = meta.category;
    }
    if (refs.empty()) {
        throw NoValidInstances("no kept instances to compose; validation filtered everything");
    }

    struct BackgroundEntry {
        std::filesystem::path dir;
        std::string category;
    };
    std::vector<BackgroundEntry> backgrounds;
    for (const auto& dir : sorted_subdirs(backgrounds_dir(config))) {
        json meta = json::parse(read_text_file(dir / "meta.json"));
        backgrounds.push_back({dir, meta.value("category", "")});
    }
    if (backgrounds.empty()) {
        throw ConfigError("no backgrounds under " + backgrounds_dir(config).string() +
                          "; run generate first");
    }

    HarmonizerConfig harmonizer = config.harmonizer;
    const int side = config.dataset.image_size;
    ProgressSink sink(progress, "compose");
    StageCounts counts;
    std::mutex counts_mutex;
    auto bump = [&](std::size_t StageCounts::* member) {
        std::lock_guard<std::mutex> lock(counts_mutex);
        ++(counts.*member);
    };

    parallel_for(static_cast<std::size_t>(config.dataset.size), config.parallelism,
                 [&](std::size_t s) {
        std::string scene_id = item_id("scene", static_cast<int>(s));
        std::filesystem::path dir = scenes_dir(config) / scene_id;
        if (std::filesystem::exists(dir / "scene.json")) {
            bump(&StageCounts::skipped);
            sink.emit(scene_id, "skipped", "already composed");
            return;
        }
        try {
            std::uint64_t scene_seed = mix_seed(config.seed, "compose", s);
            std::vector<Placement> placements =
                sample_placements(side, side, refs, config.policy, scene_seed);

            // background choice: any, or matched to the first placement
            std::size_t bg_index = mix_seed(scene_seed, "pick-bg", 0) % backgrounds.size();
            if (config.background.mode == "matched" && !placements.empty()) {
                const std::string& want = category_of[placements.front().instance_id];
                std::vector<std::size_t> matching;
                for (std::size_t b = 0; b < backgrounds.size(); ++b) {
                    if (backgrounds[b].category == want) matching.push_back(b);
                }
                if (!matching.empty()) {
                    bg_index = matching[mix_seed(scene_seed, "pick-bg", 1) % matching.size()];
                }
            }
            RgbaImage background = read_png_file(backgrounds[bg_index].dir / "image.png");
            if (background.width != side || background.height != side) {
                background = resize_bilinear(background, side, side);
            }

            CompositeScene scene;
            scene.background = std::move(background);
            scene.placements = placements;
            scene.seed = scene_seed;
            RenderResult result = render(scene, store, harmonizer,
                                         config.policy.min_visible_fraction);
            scene.rendered = result.image;
            scene.visible_masks = result.visible_masks;

            json placements_json = json::array();
            for (std::size_t p = 0; p < placements.size(); ++p) {
                const Placement& placement = placements[p];
                RleMask rle = rle_encode(result.visible_masks[p]);
                json counts_json = json::array();
                for (std::uint64_t c : rle.counts) counts_json.push_back(c);
                placements_json.push_back(json{
                    {"instance_id", placement.instance_id},
                    {"category_id", store.at(placement.instance_id).category_id},
                    {"scale", placement.scale},
                    {"x", placement.x},
                    {"y", placement.y},
                    {"z", placement.z},
                    {"annotated", static_cast<bool>(result.annotated[p])},
                    {"visible_rle",
                     json{{"size", json::array({rle.height, rle.width})},
                          {"counts", std::move(counts_json)}}},
                });
            }
            json scene_json{{"id", scene_id},
                            {"seed", scene_seed},
                            {"background_id", backgrounds[bg_index].dir.filename().string()},
                            {"placements", std::move(placements_json)}};
            write_png_file(dir / "image.png", result.image);
            write_text_file(dir / "scene.json", scene_json.dump(2) + "\n");
            bump(&StageCounts::done);
            sink.emit(scene_id, "ok",
                      std::to_string(placements.size()) + " placement(s)");
        } catch (const Error& ex) {
            bump(&StageCounts::failed);
            sink.emit(scene_id, "failed", ex.what());
        }
    });

    if (config.dataset.size > 0 && counts.done == 0 && counts.skipped == 0) {
        throw NoValidInstances("every scene failed to compose");
    }
    return counts;
}

StageCounts run_emit(const RunConfig& config, const ProgressFn& progress) {
    check_config(config);
    ensure_run_state(config.dataset.out_dir, config_hash(config));
    ProgressSink sink(progress, "emit");

    std::vector<std::filesystem::path> scene_dirs = sorted_subdirs(scenes_dir(config));
    if (config.dataset.size > 0 && scene_dirs.empty()) {
        throw ConfigError("no scenes under " + scenes_dir(config).string() +
                          "; run compose first");
    }

    std::vector<RenderedScene> scenes;
    scenes.reserve(scene_dirs.size());
    for (const auto& dir : scene_dirs) {
        json meta = json::parse(read_text_file(dir / "scene.json"));
        RenderedScene scene;
        scene.image = read_png_file(dir / "image.png");
        for (const auto& placement : meta.at("placements")) {
            if (!placement.at("annotated").get<bool>()) continue;
            RleMask rle;
            rle.height = placement.at("visible_rle").at("size").at(0).get<int>();
            rle.width = placement.at("visible_rle").at("size").at(1).get<int>();
            for (const auto& c : placement.at("visible_rle").at("counts")) {
                rle.counts.push_back(c.get<std::uint64_t>());
            }
            scene.instances.push_back(RenderedScene::Instance{
                placement.at("category_id").get<int>(), rle_decode(rle)});
        }
        scenes.push_back(std::move(scene));
    }

    CocoDataset dataset = emit_dataset(scenes, config.categories, config.dataset.out_dir);
    sink.emit("annotations.json", "ok",
              std::to_string(dataset.images.size()) + " image(s), " +
                  std::to_string(dataset.annotations.size()) + " annotation(s)");

    PipelineStats stats = compute_stats(config.dataset.out_dir);
    write_text_file(config.dataset.out_dir / "stats.json", stats_to_json_text(stats));
    sink.emit("stats.json", "ok", "invalid_rate " + std::to_string(stats.invalid_rate));

    json prompt_hashes = json::object();
    for (const char* name : {"ld_agent_system_prompt.txt", "validator_system_prompt.txt"}) {
        std::filesystem::path p = prompts_out_dir(config) / name;
        if (std::filesystem::exists(p)) prompt_hashes[name] = hex64(fnv1a64(read_text_file(p)));
    }
    json manifest{{"config_hash", config_hash(config)},
                  {"seed", config.seed},
                  {"prompt_assets", std::move(prompt_hashes)},
                  {"images", dataset.images.size()},
                  {"annotations", dataset.annotations.size()},
                  {"generated", stats.generated},
                  {"kept", stats.kept},
                  {"filtered", stats.filtered}};
    write_text_file(config.dataset.out_dir / "run_manifest.json", manifest.dump(2) + "\n");

    std::vector<std::string> violations = validate_dataset(config.dataset.out_dir);
    if (!violations.empty()) {
        for (const auto& violation : violations) sink.emit("check", "failed", violation);
        throw ConsistencyError("emitted dataset failed validation with " +
                               std::to_string(violations.size()) + " violation(s)");
    }
    sink.emit("check", "ok", "dataset valid");

    StageCounts counts;
    counts.done = scenes.size();
    return counts;
}

void run_all(const RunConfig& config, int count, const ProgressFn& progress) {
    run_optimize_prompts(config, progress);
    run_generate(config, count, progress);
    run_validate(config, progress);
    run_compose(config, progress);
    run_emit(config, progress);
}

}  // namespace gnv
