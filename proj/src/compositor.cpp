#include "gnv/compositor.hpp"

#include "gnv/base64.hpp"
#include "gnv/errors.hpp"
#include "gnv/png_io.hpp"
#include "gnv/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace gnv {

namespace {

using json = nlohmann::json;

struct Stats {
    double mean[3] = {0, 0, 0};
    double stddev[3] = {0, 0, 0};
    std::size_t count = 0;
};

Stats channel_stats(const RgbaImage& image, bool foreground_only) {
    Stats s;
    double sum[3] = {0, 0, 0};
    double sq[3] = {0, 0, 0};
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
        const std::uint8_t* p = image.pixels.data() + i * 4;
        if (foreground_only && p[3] < 128) continue;
        for (int c = 0; c < 3; ++c) {
            sum[c] += p[c];
            sq[c] += static_cast<double>(p[c]) * p[c];
        }
        ++s.count;
    }
    if (s.count == 0) return s;
    for (int c = 0; c < 3; ++c) {
        s.mean[c] = sum[c] / s.count;
        double var = sq[c] / s.count - s.mean[c] * s.mean[c];
        s.stddev[c] = var > 0 ? std::sqrt(var) : 0.0;
    }
    return s;
}

RgbaImage color_transfer(const RgbaImage& region, const RgbaImage& context) {
    Stats fg = channel_stats(region, true);
    Stats bg = channel_stats(context, false);
    if (fg.count == 0 || bg.count == 0) return region;

    RgbaImage out = region;
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        std::uint8_t* p = out.pixels.data() + i * 4;
        if (p[3] == 0) continue;
        for (int c = 0; c < 3; ++c) {
            double v = p[c] - fg.mean[c];
            if (fg.stddev[c] > 1e-9) v *= bg.stddev[c] / fg.stddev[c];
            v += bg.mean[c];
            p[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return out;
}

RgbaImage external_harmonize(const RgbaImage& region, const RgbaImage& context,
                             const HarmonizerConfig& cfg) {
    if (!cfg.endpoint) throw ConfigError("external harmonizer needs an endpoint");

    // naive blend of the region over its context, as the model input
    RgbaImage composite = context;
    std::vector<std::uint8_t> mask_samples(region.pixel_count());
    for (std::size_t i = 0; i < region.pixel_count(); ++i) {
        const std::uint8_t* src = region.pixels.data() + i * 4;
        std::uint8_t* dst = composite.pixels.data() + i * 4;
        unsigned a = src[3];
        for (int c = 0; c < 3; ++c) {
            dst[c] = static_cast<std::uint8_t>((src[c] * a + dst[c] * (255 - a) + 127) / 255);
        }
        dst[3] = 255;
        mask_samples[i] = src[3] >= 128 ? 255 : 0;
    }

    json body{
        {"composite_png_base64", base64_encode(encode_png_rgba(composite))},
        {"mask_png_base64",
         base64_encode(encode_png_gray(region.width, region.height, mask_samples))},
    };
    json reply = http_post_json(*cfg.endpoint, "/v1/harmonize", body);
    if (!reply.contains("image_png_base64") || !reply.at("image_png_base64").is_string()) {
        throw ProtocolError("harmonizer reply missing image_png_base64");
    }
    auto png = base64_decode(reply.at("image_png_base64").get<std::string>());
    RgbaImage harmonized = decode_png_rgba(png);
    if (harmonized.width != region.width || harmonized.height != region.height) {
        throw ShapeMismatch("harmonizer returned wrong dimensions");
    }
    // keep the original silhouette; the model only adjusts appearance
    for (std::size_t i = 0; i < harmonized.pixel_count(); ++i) {
        harmonized.pixels[i * 4 + 3] = region.pixels[i * 4 + 3];
    }
    return harmonized;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    double t = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + t * (hi - lo);
}

Bbox clip_to_canvas(int x, int y, int w, int h, int canvas_w, int canvas_h) {
    int x0 = std::max(0, x);
    int y0 = std::max(0, y);
    int x1 = std::min(canvas_w, x + w);
    int y1 = std::min(canvas_h, y + h);
    if (x1 <= x0 || y1 <= y0) return Bbox{0, 0, 0, 0};
    return Bbox{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

HarmonizerKind harmonizer_kind_from_string(const std::string& name) {
    if (name == "identity") return HarmonizerKind::Identity;
    if (name == "color_transfer") return HarmonizerKind::ColorTransfer;
    if (name == "external") return HarmonizerKind::External;
    throw ConfigError("unknown harmonizer kind: " + name);
}

std::string to_string(HarmonizerKind kind) {
    switch (kind) {
        case HarmonizerKind::Identity: return "identity";
        case HarmonizerKind::ColorTransfer: return "color_transfer";
        case HarmonizerKind::External: return "external";
    }
    return "identity";
}

double bbox_iou(const Bbox& a, const Bbox& b) {
    int x0 = std::max(a.x, b.x);
    int y0 = std::max(a.y, b.y);
    int x1 = std::min(a.x + a.w, b.x + b.w);
    int y1 = std::min(a.y + a.h, b.y + b.h);
    double inter = (x1 > x0 && y1 > y0) ? static_cast<double>(x1 - x0) * (y1 - y0) : 0.0;
    double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0 ? inter / uni : 0.0;
}

BinaryMask resize_mask_nearest(const BinaryMask& mask, int out_w, int out_h) {
    if (mask.width < 1 || mask.height < 1) throw InvalidArgument("cannot resize an empty mask");
    if (out_w < 1 || out_h < 1) throw ShapeError("resize target must be at least 1x1");
    BinaryMask out(out_w, out_h);
    for (int oy = 0; oy < out_h; ++oy) {
        int sy = std::clamp(static_cast<int>((oy + 0.5) * mask.height / out_h), 0, mask.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            int sx = std::clamp(static_cast<int>((ox + 0.5) * mask.width / out_w), 0, mask.width - 1);
            out.set(ox, oy, mask.get(sx, sy));
        }
    }
    return out;
}

std::vector<Placement> sample_placements(int background_width, int background_height,
                                         const std::vector<InstanceRef>& instances,
                                         const PlacementPolicy& policy, std::uint64_t seed) {
    if (instances.empty()) throw InvalidArgument("instances must be nonempty");
    if (policy.min_instances < 1 || policy.max_instances < policy.min_instances) {
        throw InvalidArgument("instances_per_image range is empty");
    }
    if (policy.scale_min <= 0 || policy.scale_max < policy.scale_min) {
        throw InvalidArgument("scale range is empty");
    }
    if (policy.max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");

    std::mt19937_64 rng(seed);
    int count = uniform_int(rng, policy.min_instances, policy.max_instances);

    std::vector<Placement> placements;
    std::vector<Bbox> accepted_boxes;
    for (int k = 0; k < count; ++k) {
        const InstanceRef& inst = instances[static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<int>(instances.size()) - 1))];
        if (inst.width < 1 || inst.height < 1) continue;

        for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
            double frac = uniform_real(rng, policy.scale_min, policy.scale_max);
            double factor = frac * background_height / inst.height;
            int sw = std::max(1, static_cast<int>(std::lround(inst.width * factor)));
            int sh = std::max(1, static_cast<int>(std::lround(inst.height * factor)));
            int x = uniform_int(rng, -sw + 1, background_width - 1);
            int y = uniform_int(rng, -sh + 1, background_height - 1);

            Bbox box{x, y, sw, sh};
            Bbox on_canvas = clip_to_canvas(x, y, sw, sh, background_width, background_height);
            double visible = static_cast<double>(on_canvas.w) * on_canvas.h;
            if (visible < policy.min_visible_fraction * sw * sh) continue;

            bool overlaps = std::any_of(accepted_boxes.begin(), accepted_boxes.end(),
                                        [&](const Bbox& other) {
                                            return bbox_iou(box, other) > policy.max_pairwise_iou;
                                        });
            if (overlaps) continue;

            placements.push_back(Placement{inst.id, factor, x, y,
                                           static_cast<int>(placements.size())});
            accepted_boxes.push_back(box);
            break;
        }
    }
    if (placements.empty()) {
        throw NoPlacementsPossible("no placement satisfied the policy for any instance");
    }
    return placements;
}

RgbaImage harmonize(const RgbaImage& pasted_region, const RgbaImage& background_context,
                    const HarmonizerConfig& cfg) {
    check_image(pasted_region);
    check_image(background_context);
    if (pasted_region.width != background_context.width ||
        pasted_region.height != background_context.height) {
        throw InvalidArgument("region and context must have equal dimensions");
    }
    switch (cfg.kind) {
        case HarmonizerKind::Identity:
            return pasted_region;
        case HarmonizerKind::ColorTransfer:
            return color_transfer(pasted_region, background_context);
        case HarmonizerKind::External:
            try {
                return external_harmonize(pasted_region, background_context, cfg);
            } catch (const Error&) {
                if (cfg.fallback_to_identity) return pasted_region;
                throw;
            }
    }
    return pasted_region;
}

RenderResult render(const CompositeScene& scene, const AssetStore& assets,
                    const HarmonizerConfig& harmonizer_cfg, double min_visible_fraction) {
    check_image(scene.background);
    if (scene.background.empty()) throw InvalidArgument("scene background must be nonempty");

    const int cw = scene.background.width;
    const int ch = scene.background.height;

    std::vector<std::size_t> order(scene.placements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.placements[a].z < scene.placements[b].z;
    });

    RenderResult result;
    result.image = flatten_over_black(scene.background);
    for (std::size_t i = 0; i < result.image.pixel_count(); ++i) {
        result.image.pixels[i * 4 + 3] = 255;
    }
    result.visible_masks.assign(scene.placements.size(), BinaryMask(cw, ch));
    result.annotated.assign(scene.placements.size(), false);

    std::vector<int> owner(static_cast<std::size_t>(cw) * ch, -1);
    std::vector<std::size_t> full_areas(scene.placements.size(), 0);

    for (std::size_t idx : order) {
        const Placement& p = scene.placements[idx];
        auto it = assets.find(p.instance_id);
        if (it == assets.end()) throw MissingAsset("no asset with id " + p.instance_id);
        const InstanceAssetData& asset = it->second;
        if (asset.mask.width != asset.image.width || asset.mask.height != asset.image.height) {
            throw MissingAsset("asset " + p.instance_id + " mask/image size mismatch");
        }

        int sw = static_cast<int>(std::lround(asset.image.width * p.scale));
        int sh = static_cast<int>(std::lround(asset.image.height * p.scale));
        if (sw < 1 || sh < 1) throw ShapeError("scaled instance smaller than 1 px");

        RgbaImage scaled = resize_bilinear(asset.image, sw, sh);
        BinaryMask scaled_mask = resize_mask_nearest(asset.mask, sw, sh);
        full_areas[idx] = scaled_mask.area();

        // silhouette comes from the binary mask; alpha outside it is dropped
        for (int y = 0; y < sh; ++y) {
            for (int x = 0; x < sw; ++x) {
                if (!scaled_mask.get(x, y)) scaled.at(x, y)[3] = 0;
            }
        }

        Bbox clip = clip_to_canvas(p.x, p.y, sw, sh, cw, ch);
        if (clip.w == 0 || clip.h == 0) continue;

        // crop both sides to the on-canvas window
        RgbaImage region(clip.w, clip.h);
        RgbaImage context(clip.w, clip.h);
        for (int y = 0; y < clip.h; ++y) {
            for (int x = 0; x < clip.w; ++x) {
                const std::uint8_t* src = scaled.at(clip.x - p.x + x, clip.y - p.y + y);
                std::copy(src, src + 4, region.at(x, y));
                const std::uint8_t* bg = result.image.at(clip.x + x, clip.y + y);
                std::copy(bg, bg + 4, context.at(x, y));
            }
        }
        RgbaImage shaded = harmonize(region, context, harmonizer_cfg);

        for (int y = 0; y < clip.h; ++y) {
            for (int x = 0; x < clip.w; ++x) {
                if (scaled_mask.get(clip.x - p.x + x, clip.y - p.y + y)) {
                    owner[static_cast<std::size_t>(clip.y + y) * cw + (clip.x + x)] =
                        static_cast<int>(idx);
                }
                const std::uint8_t* src = shaded.at(x, y);
                std::uint8_t* dst = result.image.at(clip.x + x, clip.y + y);
                unsigned a = src[3];
                if (a == 0) continue;
                for (int c = 0; c < 3; ++c) {
                    dst[c] = static_cast<std::uint8_t>(
                        (src[c] * a + dst[c] * (255 - a) + 127) / 255);
                }
            }
        }
    }

    std::vector<std::size_t> visible_areas(scene.placements.size(), 0);
    for (std::size_t pix = 0; pix < owner.size(); ++pix) {
        int who = owner[pix];
        if (who < 0) continue;
        result.visible_masks[static_cast<std::size_t>(who)].bits[pix] = 1;
        ++visible_areas[static_cast<std::size_t>(who)];
    }
    for (std::size_t i = 0; i < scene.placements.size(); ++i) {
        result.annotated[i] =
            full_areas[i] > 0 &&
            static_cast<double>(visible_areas[i]) >=
                min_visible_fraction * static_cast<double>(full_areas[i]);
    }
    return result;
}

}  // namespace gnv
