#pragma once

#include "gnv/image.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace gnv {

// Row-major binary raster; one byte per bit for cheap indexing.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1, width * height entries

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t area() const;
    bool empty_mask() const { return area() == 0; }

    bool operator==(const BinaryMask&) const = default;
};

// Axis-aligned box, top-left anchored, in pixels.
struct Bbox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const Bbox&) const = default;
};

// COCO run-length encoding: column-major scan, alternating runs of 0s and
// 1s, first count is the leading 0-run (possibly zero).
struct RleMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint64_t> counts;

    bool operator==(const RleMask&) const = default;
};

// Denoises the alpha channel with a kernel x kernel 2-D median (edge
// replication); RGB bytes pass through untouched. Kernel must be odd,
// >= 1 and <= min(width, height), else BadKernel.
RgbaImage median_filter_alpha(const RgbaImage& image, int kernel);

// Bit set iff alpha >= threshold.
BinaryMask alpha_to_mask(const RgbaImage& image, std::uint8_t threshold);

// 8-connected components, sorted by area descending (stable for ties).
std::vector<std::pair<BinaryMask, std::size_t>> connected_components(const BinaryMask& mask);

// Removes every component whose area is < min_area.
BinaryMask drop_specks(const BinaryMask& mask, std::size_t min_area);

// Tightest box containing all set bits; EmptyMask when none are set.
Bbox mask_to_bbox(const BinaryMask& mask);

RleMask rle_encode(const BinaryMask& mask);

// BadCounts when sum(counts) != width*height.
BinaryMask rle_decode(const RleMask& rle);

std::uint64_t rle_area(const RleMask& rle);

}  // namespace gnv
