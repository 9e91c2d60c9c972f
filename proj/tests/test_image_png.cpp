#include <doctest.h>

#include "gnv/errors.hpp"
#include "gnv/image.hpp"
#include "gnv/png_io.hpp"

#include <random>

using namespace gnv;

namespace {

RgbaImage random_image(std::mt19937_64& rng, int w, int h) {
    RgbaImage img(w, h);
    for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng());
    return img;
}

}  // namespace

TEST_CASE("check_image rejects bad buffers") {
    RgbaImage img(2, 2);
    img.pixels.pop_back();
    CHECK_THROWS_AS(check_image(img), InvalidArgument);
}

TEST_CASE("png rgba round trip") {
    std::mt19937_64 rng(11);
    for (int n = 0; n < 10; ++n) {
        int w = 1 + static_cast<int>(rng() % 40);
        int h = 1 + static_cast<int>(rng() % 40);
        RgbaImage img = random_image(rng, w, h);
        bool had_alpha = false;
        RgbaImage back = decode_png_rgba(encode_png_rgba(img), &had_alpha);
        CHECK(had_alpha);
        CHECK(back == img);
    }
}

TEST_CASE("png gray round trip") {
    std::mt19937_64 rng(13);
    std::vector<std::uint8_t> samples(15 * 9);
    for (auto& s : samples) s = static_cast<std::uint8_t>(rng());
    auto bytes = encode_png_gray(15, 9, samples);
    int w = 0;
    int h = 0;
    auto back = decode_png_gray(bytes, w, h);
    CHECK(w == 15);
    CHECK(h == 9);
    CHECK(back == samples);
}

TEST_CASE("png decode rejects garbage") {
    std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(decode_png_rgba(junk), ProtocolError);
}

TEST_CASE("flatten over black premultiplies and opaques") {
    RgbaImage img(1, 2);
    std::uint8_t* p0 = img.at(0, 0);
    p0[0] = 200; p0[1] = 100; p0[2] = 50; p0[3] = 0;
    std::uint8_t* p1 = img.at(0, 1);
    p1[0] = 200; p1[1] = 100; p1[2] = 50; p1[3] = 255;
    RgbaImage flat = flatten_over_black(img);
    CHECK(flat.at(0, 0)[0] == 0);
    CHECK(flat.at(0, 0)[3] == 255);
    CHECK(flat.at(0, 1)[0] == 200);
    CHECK(flat.at(0, 1)[1] == 100);
    CHECK(flat.at(0, 1)[3] == 255);
}

TEST_CASE("bilinear resize at identical size copies pixels") {
    std::mt19937_64 rng(17);
    RgbaImage img = random_image(rng, 9, 7);
    CHECK(resize_bilinear(img, 9, 7) == img);
}

TEST_CASE("bilinear resize of constant image stays constant") {
    RgbaImage img(8, 8);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.pixels[i * 4 + 0] = 90;
        img.pixels[i * 4 + 1] = 10;
        img.pixels[i * 4 + 2] = 250;
        img.pixels[i * 4 + 3] = 255;
    }
    RgbaImage out = resize_bilinear(img, 19, 3);
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        CHECK(out.pixels[i * 4 + 0] == 90);
        CHECK(out.pixels[i * 4 + 2] == 250);
    }
    CHECK_THROWS_AS(resize_bilinear(img, 0, 5), ShapeError);
}
