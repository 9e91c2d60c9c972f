#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gnv {

// Row-major 8-bit RGBA raster. The alpha channel carries the object
// silhouette for generated foregrounds.
struct RgbaImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 4

    RgbaImage() = default;
    RgbaImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4, 0) {}

    bool empty() const { return width <= 0 || height <= 0; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 4;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 4;
    }

    std::span<const std::uint8_t> bytes() const { return {pixels.data(), pixels.size()}; }

    bool operator==(const RgbaImage&) const = default;
};

// Throws InvalidArgument when the buffer length does not match width*height*4.
void check_image(const RgbaImage& image);

// Replaces transparency with opaque black: out = rgb*a/255, alpha = 255.
RgbaImage flatten_over_black(const RgbaImage& image);

// Bilinear resample of all four channels. Target dimensions must be >= 1.
RgbaImage resize_bilinear(const RgbaImage& image, int out_w, int out_h);

std::uint64_t image_checksum(const RgbaImage& image);

}  // namespace gnv
