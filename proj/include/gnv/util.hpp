#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace gnv {

std::string trim(std::string_view s);

// Strips surrounding whitespace plus one layer of matching quotes ("..." or '...').
std::string strip_quotes(std::string_view s);

std::string to_lower(std::string_view s);

bool contains_ci(std::string_view haystack, std::string_view needle);

// FNV-1a, 64 bit. Fingerprinting only.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t value);

// Splits a seed into independent per-item streams.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string timestamp_utc_compact();

}  // namespace gnv
