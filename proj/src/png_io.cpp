#include "gnv/png_io.hpp"

#include "gnv/errors.hpp"
#include "gnv/util.hpp"

#include <png.h>

#include <cstring>
#include <fstream>

namespace gnv {

namespace {

std::vector<std::uint8_t> encode_with_format(const void* buffer, int width, int height,
                                             png_uint_32 format) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = format;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, buffer, 0, nullptr)) {
        throw IoError(std::string("png encode (size pass) failed: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, buffer, 0, nullptr)) {
        throw IoError(std::string("png encode failed: ") + img.message);
    }
    out.resize(size);
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png_rgba(const RgbaImage& image) {
    check_image(image);
    if (image.empty()) throw InvalidArgument("cannot encode an empty image");
    return encode_with_format(image.pixels.data(), image.width, image.height, PNG_FORMAT_RGBA);
}

RgbaImage decode_png_rgba(std::span<const std::uint8_t> data, bool* had_alpha) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, data.data(), data.size())) {
        throw ProtocolError(std::string("png decode failed: ") + img.message);
    }
    if (had_alpha) *had_alpha = (img.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    img.format = PNG_FORMAT_RGBA;
    RgbaImage out(static_cast<int>(img.width), static_cast<int>(img.height));
    if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
        throw ProtocolError(std::string("png decode failed: ") + img.message);
    }
    return out;
}

std::vector<std::uint8_t> encode_png_gray(int width, int height,
                                          std::span<const std::uint8_t> samples) {
    if (width < 1 || height < 1) throw InvalidArgument("cannot encode an empty image");
    if (samples.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidArgument("gray sample buffer length must be width*height");
    }
    return encode_with_format(samples.data(), width, height, PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> decode_png_gray(std::span<const std::uint8_t> data,
                                          int& width, int& height) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, data.data(), data.size())) {
        throw ProtocolError(std::string("png decode failed: ") + img.message);
    }
    img.format = PNG_FORMAT_GRAY;
    width = static_cast<int>(img.width);
    height = static_cast<int>(img.height);
    std::vector<std::uint8_t> samples(static_cast<std::size_t>(width) * height);
    if (!png_image_finish_read(&img, nullptr, samples.data(), 0, nullptr)) {
        throw ProtocolError(std::string("png decode failed: ") + img.message);
    }
    return samples;
}

void write_png_file(const std::filesystem::path& path, const RgbaImage& image) {
    auto bytes = encode_png_rgba(image);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

RgbaImage read_png_file(const std::filesystem::path& path) {
    std::string raw = read_text_file(path);
    return decode_png_rgba(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

}  // namespace gnv
