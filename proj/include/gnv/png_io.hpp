#pragma once

#include "gnv/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gnv {

// In-memory PNG codec for 8-bit RGBA and grayscale rasters.

std::vector<std::uint8_t> encode_png_rgba(const RgbaImage& image);

// Accepts any PNG color type; the result always has four channels.
// `had_alpha`, when given, reports whether the source carried one.
RgbaImage decode_png_rgba(std::span<const std::uint8_t> data, bool* had_alpha = nullptr);

std::vector<std::uint8_t> encode_png_gray(int width, int height,
                                          std::span<const std::uint8_t> samples);
std::vector<std::uint8_t> decode_png_gray(std::span<const std::uint8_t> data,
                                          int& width, int& height);

void write_png_file(const std::filesystem::path& path, const RgbaImage& image);
RgbaImage read_png_file(const std::filesystem::path& path);

}  // namespace gnv
