#pragma once

#include "gnv/backend.hpp"
#include "gnv/image.hpp"
#include "gnv/mask_ops.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gnv {

// One pasted instance: scale is the resize factor applied to the source
// pixels, position is the top-left of the scaled instance on the canvas
// (may hang off the edges), higher z pastes later and occludes lower.
struct Placement {
    std::string instance_id;
    double scale = 1.0;
    int x = 0;
    int y = 0;
    int z = 0;
};

struct PlacementPolicy {
    int min_instances = 1;
    int max_instances = 6;
    double scale_min = 0.2;   // fraction of canvas height
    double scale_max = 0.8;
    double max_pairwise_iou = 0.3;
    double min_visible_fraction = 0.25;
    int max_attempts = 50;
};

struct CompositeScene {
    RgbaImage background;  // alpha ignored
    std::vector<Placement> placements;  // sorted by z ascending
    std::uint64_t seed = 0;
    std::optional<RgbaImage> rendered;
    std::optional<std::vector<BinaryMask>> visible_masks;
};

enum class HarmonizerKind {
    Identity,
    ColorTransfer,
    External,
};

HarmonizerKind harmonizer_kind_from_string(const std::string& name);
std::string to_string(HarmonizerKind kind);

struct HarmonizerConfig {
    HarmonizerKind kind = HarmonizerKind::ColorTransfer;
    std::optional<BackendEndpoint> endpoint;  // External only
    bool fallback_to_identity = true;
};

// What sample_placements needs to know about a candidate instance.
struct InstanceRef {
    std::string id;
    int width = 0;
    int height = 0;
};

// A validated foreground ready for compositing.
struct InstanceAssetData {
    std::string id;
    int category_id = 0;
    RgbaImage image;
    BinaryMask mask;
};

using AssetStore = std::map<std::string, InstanceAssetData>;

// Draws an instance count, then rejection-samples (scale, position) per
// instance until the bbox-IoU against everything accepted stays within
// policy.max_pairwise_iou; instances that exhaust max_attempts are skipped.
// Deterministic in (inputs, seed). NoPlacementsPossible when nothing lands.
std::vector<Placement> sample_placements(int background_width, int background_height,
                                         const std::vector<InstanceRef>& instances,
                                         const PlacementPolicy& policy, std::uint64_t seed);

struct RenderResult {
    RgbaImage image;
    std::vector<BinaryMask> visible_masks;  // one per placement, pairwise disjoint
    std::vector<bool> annotated;            // false = visible area below threshold
};

// Scales (images bilinear, masks nearest), harmonizes, and alpha-composites
// every placement in z order. Each visible mask is the placement's scaled
// mask minus all higher-z masks, clipped to the canvas.
RenderResult render(const CompositeScene& scene, const AssetStore& assets,
                    const HarmonizerConfig& harmonizer,
                    double min_visible_fraction = 0.25);

// identity passes through; color_transfer matches the foreground's
// per-channel mean/stddev to the context; external defers to an HTTP
// harmonizer and falls back to identity when configured.
RgbaImage harmonize(const RgbaImage& pasted_region, const RgbaImage& background_context,
                    const HarmonizerConfig& cfg);

double bbox_iou(const Bbox& a, const Bbox& b);

BinaryMask resize_mask_nearest(const BinaryMask& mask, int out_w, int out_h);

}  // namespace gnv
