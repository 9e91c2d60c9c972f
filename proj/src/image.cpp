#include "gnv/image.hpp"

#include "gnv/errors.hpp"
#include "gnv/util.hpp"

#include <algorithm>
#include <cmath>

namespace gnv {

void check_image(const RgbaImage& image) {
    if (image.width < 0 || image.height < 0) {
        throw InvalidArgument("image dimensions must be non-negative");
    }
    std::size_t expected = static_cast<std::size_t>(image.width) * image.height * 4;
    if (image.pixels.size() != expected) {
        throw InvalidArgument("pixel buffer length must be width*height*4");
    }
}

RgbaImage flatten_over_black(const RgbaImage& image) {
    check_image(image);
    RgbaImage out(image.width, image.height);
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
        const std::uint8_t* src = image.pixels.data() + i * 4;
        std::uint8_t* dst = out.pixels.data() + i * 4;
        unsigned a = src[3];
        dst[0] = static_cast<std::uint8_t>((src[0] * a + 127) / 255);
        dst[1] = static_cast<std::uint8_t>((src[1] * a + 127) / 255);
        dst[2] = static_cast<std::uint8_t>((src[2] * a + 127) / 255);
        dst[3] = 255;
    }
    return out;
}

RgbaImage resize_bilinear(const RgbaImage& image, int out_w, int out_h) {
    check_image(image);
    if (image.empty()) throw InvalidArgument("cannot resize an empty image");
    if (out_w < 1 || out_h < 1) throw ShapeError("resize target must be at least 1x1");

    RgbaImage out(out_w, out_h);
    const double sx = static_cast<double>(image.width) / out_w;
    const double sy = static_cast<double>(image.height) / out_h;
    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = std::clamp(y0 + 1, 0, image.height - 1);
        y0 = std::clamp(y0, 0, image.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = std::clamp(x0 + 1, 0, image.width - 1);
            x0 = std::clamp(x0, 0, image.width - 1);

            const std::uint8_t* p00 = image.at(x0, y0);
            const std::uint8_t* p10 = image.at(x1, y0);
            const std::uint8_t* p01 = image.at(x0, y1);
            const std::uint8_t* p11 = image.at(x1, y1);
            std::uint8_t* dst = out.at(ox, oy);
            for (int c = 0; c < 4; ++c) {
                double top = p00[c] * (1.0 - wx) + p10[c] * wx;
                double bottom = p01[c] * (1.0 - wx) + p11[c] * wx;
                double v = top * (1.0 - wy) + bottom * wy;
                dst[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

std::uint64_t image_checksum(const RgbaImage& image) {
    return fnv1a64(image.bytes());
}

}  // namespace gnv
