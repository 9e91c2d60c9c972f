#include <doctest.h>

#include "gnv/errors.hpp"
#include "gnv/mask_ops.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace gnv;

namespace {

// ── independent oracles ─────────────────────────────────────────

// Windowed median with replicate padding, the slow obvious way.
std::uint8_t median_oracle_at(const std::vector<std::uint8_t>& alpha, int w, int h,
                              int x, int y, int k) {
    std::vector<std::uint8_t> window;
    window.reserve(static_cast<std::size_t>(k) * k);
    int r = k / 2;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            int sx = std::clamp(x + dx, 0, w - 1);
            int sy = std::clamp(y + dy, 0, h - 1);
            window.push_back(alpha[static_cast<std::size_t>(sy) * w + sx]);
        }
    }
    std::sort(window.begin(), window.end());
    return window[window.size() / 2];
}

// Flood fill from every unvisited set bit, 8-connected.
std::vector<std::size_t> component_areas_oracle(const BinaryMask& mask) {
    std::vector<std::size_t> areas;
    std::vector<std::uint8_t> seen(mask.bits.size(), 0);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            std::size_t start = static_cast<std::size_t>(y) * mask.width + x;
            if (!mask.bits[start] || seen[start]) continue;
            std::size_t area = 0;
            std::vector<std::size_t> queue{start};
            seen[start] = 1;
            while (!queue.empty()) {
                std::size_t idx = queue.back();
                queue.pop_back();
                ++area;
                int cx = static_cast<int>(idx % mask.width);
                int cy = static_cast<int>(idx / mask.width);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = cx + dx;
                        int ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
                        std::size_t n = static_cast<std::size_t>(ny) * mask.width + nx;
                        if (mask.bits[n] && !seen[n]) {
                            seen[n] = 1;
                            queue.push_back(n);
                        }
                    }
                }
            }
            areas.push_back(area);
        }
    }
    std::sort(areas.rbegin(), areas.rend());
    return areas;
}

Bbox bbox_oracle(const BinaryMask& mask) {
    int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
    return Bbox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

BinaryMask random_mask(std::mt19937_64& rng, int max_side, double density = 0.5) {
    int w = 1 + static_cast<int>(rng() % max_side);
    int h = 1 + static_cast<int>(rng() % max_side);
    BinaryMask mask(w, h);
    for (auto& bit : mask.bits) {
        bit = (static_cast<double>(rng() >> 11) * 0x1.0p-53) < density ? 1 : 0;
    }
    return mask;
}

RgbaImage image_with_alpha(const std::vector<std::uint8_t>& alpha, int w, int h,
                           std::mt19937_64& rng) {
    RgbaImage img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.pixels[i * 4 + 0] = static_cast<std::uint8_t>(rng());
        img.pixels[i * 4 + 1] = static_cast<std::uint8_t>(rng());
        img.pixels[i * 4 + 2] = static_cast<std::uint8_t>(rng());
        img.pixels[i * 4 + 3] = alpha[i];
    }
    return img;
}

}  // namespace

TEST_CASE("median filter: kernel 1 is the identity") {
    std::mt19937_64 rng(3);
    std::vector<std::uint8_t> alpha(25);
    for (auto& a : alpha) a = static_cast<std::uint8_t>(rng());
    RgbaImage img = image_with_alpha(alpha, 5, 5, rng);
    CHECK(median_filter_alpha(img, 1) == img);
}

TEST_CASE("median filter removes an isolated speck") {
    std::mt19937_64 rng(4);
    std::vector<std::uint8_t> alpha(25, 255);
    alpha[12] = 0;  // centre pixel
    RgbaImage img = image_with_alpha(alpha, 5, 5, rng);
    RgbaImage out = median_filter_alpha(img, 3);
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        CHECK(out.pixels[i * 4 + 3] == 255);
    }
}

TEST_CASE("median filter rejects bad kernels") {
    RgbaImage img(5, 5);
    CHECK_THROWS_AS(median_filter_alpha(img, 4), BadKernel);
    CHECK_THROWS_AS(median_filter_alpha(img, 0), BadKernel);
    CHECK_THROWS_AS(median_filter_alpha(img, 7), BadKernel);  // > min side
}

TEST_CASE("median filter matches the brute-force oracle and keeps RGB") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const int w = 32, h = 32;
        std::vector<std::uint8_t> alpha(static_cast<std::size_t>(w) * h);
        for (auto& a : alpha) a = static_cast<std::uint8_t>(rng());
        RgbaImage img = image_with_alpha(alpha, w, h, rng);
        for (int k : {3, 5, 9, 15}) {
            RgbaImage out = median_filter_alpha(img, k);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const std::uint8_t* src = img.at(x, y);
                    const std::uint8_t* dst = out.at(x, y);
                    REQUIRE(dst[0] == src[0]);
                    REQUIRE(dst[1] == src[1]);
                    REQUIRE(dst[2] == src[2]);
                    REQUIRE(dst[3] == median_oracle_at(alpha, w, h, x, y, k));
                }
            }
        }
    }
}

TEST_CASE("median filter is idempotent on constant alpha") {
    std::mt19937_64 rng(6);
    std::vector<std::uint8_t> alpha(64, 200);
    RgbaImage img = image_with_alpha(alpha, 8, 8, rng);
    RgbaImage once = median_filter_alpha(img, 5);
    CHECK(median_filter_alpha(once, 5) == once);
}

TEST_CASE("alpha_to_mask thresholds per pixel") {
    std::mt19937_64 rng(7);
    std::vector<std::uint8_t> zero(12, 0), full(12, 255);
    RgbaImage img_zero = image_with_alpha(zero, 4, 3, rng);
    RgbaImage img_full = image_with_alpha(full, 4, 3, rng);
    CHECK(alpha_to_mask(img_zero, 128).area() == 0);
    CHECK(alpha_to_mask(img_full, 128).area() == 12);

    std::vector<std::uint8_t> alpha(30 * 20);
    for (auto& a : alpha) a = static_cast<std::uint8_t>(rng());
    RgbaImage img = image_with_alpha(alpha, 30, 20, rng);
    BinaryMask mask = alpha_to_mask(img, 77);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        REQUIRE(static_cast<bool>(mask.bits[i]) == (alpha[i] >= 77));
    }
}

TEST_CASE("alpha_to_mask is monotone in threshold") {
    std::mt19937_64 rng(8);
    std::vector<std::uint8_t> alpha(16 * 16);
    for (auto& a : alpha) a = static_cast<std::uint8_t>(rng());
    RgbaImage img = image_with_alpha(alpha, 16, 16, rng);
    std::size_t previous = alpha_to_mask(img, 0).area();
    for (int t : {32, 64, 128, 192, 255}) {
        std::size_t area = alpha_to_mask(img, static_cast<std::uint8_t>(t)).area();
        CHECK(area <= previous);
        previous = area;
    }
}

TEST_CASE("connected components: listed examples") {
    BinaryMask empty(6, 6);
    CHECK(connected_components(empty).empty());

    BinaryMask two(8, 4);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) {
            two.set(x, y, true);
            two.set(x + 5, y + 2, true);
        }
    }
    auto comps = connected_components(two);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].second == 4);
    CHECK(comps[1].second == 4);

    BinaryMask full(5, 3);
    std::fill(full.bits.begin(), full.bits.end(), 1);
    auto one = connected_components(full);
    REQUIRE(one.size() == 1);
    CHECK(one[0].second == 15);
}

TEST_CASE("connected components partition the mask and match the flood-fill oracle") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        BinaryMask mask = random_mask(rng, 32, 0.35);
        auto comps = connected_components(mask);

        std::vector<std::size_t> areas;
        BinaryMask accum(mask.width, mask.height);
        std::size_t total = 0;
        for (const auto& [comp, area] : comps) {
            areas.push_back(area);
            CHECK(comp.area() == area);
            total += area;
            for (std::size_t i = 0; i < accum.bits.size(); ++i) {
                REQUIRE(!(accum.bits[i] && comp.bits[i]));  // pairwise disjoint
                accum.bits[i] |= comp.bits[i];
            }
        }
        CHECK(accum == mask);  // union equals input
        CHECK(total == mask.area());
        CHECK(std::is_sorted(areas.begin(), areas.end(), std::greater<>()));
        CHECK(areas == component_areas_oracle(mask));
    }
}

TEST_CASE("drop_specks keeps only large components") {
    BinaryMask mask(20, 20);
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) mask.set(x, y, true);  // area 100
    }
    mask.set(15, 15, true);
    mask.set(16, 15, true);
    mask.set(15, 16, true);  // area-3 speck

    CHECK(drop_specks(mask, 0) == mask);
    BinaryMask cleaned = drop_specks(mask, 10);
    CHECK(cleaned.area() == 100);
    CHECK_FALSE(cleaned.get(15, 15));
    CHECK(drop_specks(mask, 1000).area() == 0);
}

TEST_CASE("mask_to_bbox") {
    BinaryMask single(10, 10);
    single.set(3, 5, true);
    CHECK(mask_to_bbox(single) == Bbox{3, 5, 1, 1});

    BinaryMask full(10, 8);
    std::fill(full.bits.begin(), full.bits.end(), 1);
    CHECK(mask_to_bbox(full) == Bbox{0, 0, 10, 8});

    BinaryMask empty(4, 4);
    CHECK_THROWS_AS(mask_to_bbox(empty), EmptyMask);

    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        BinaryMask mask = random_mask(rng, 24, 0.2);
        if (mask.area() == 0) continue;
        Bbox box = mask_to_bbox(mask);
        CHECK(box == bbox_oracle(mask));
        // box touches set bits on all four edges
        bool left = false, right = false, top = false, bottom = false;
        for (int y = box.y; y < box.y + box.h; ++y) {
            left = left || mask.get(box.x, y);
            right = right || mask.get(box.x + box.w - 1, y);
        }
        for (int x = box.x; x < box.x + box.w; ++x) {
            top = top || mask.get(x, box.y);
            bottom = bottom || mask.get(x, box.y + box.h - 1);
        }
        CHECK(left);
        CHECK(right);
        CHECK(top);
        CHECK(bottom);
    }
}

TEST_CASE("rle: listed examples, column-major") {
    BinaryMask empty(2, 2);
    CHECK(rle_encode(empty).counts == std::vector<std::uint64_t>{4});

    BinaryMask full(2, 2);
    std::fill(full.bits.begin(), full.bits.end(), 1);
    CHECK(rle_encode(full).counts == std::vector<std::uint64_t>{0, 4});

    // first column set in a 3x3: three leading 1s in column-major order
    BinaryMask column(3, 3);
    for (int y = 0; y < 3; ++y) column.set(0, y, true);
    CHECK(rle_encode(column).counts == std::vector<std::uint64_t>{0, 3, 6});
}

TEST_CASE("rle round trip identity over random masks") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        BinaryMask mask = random_mask(rng, 13, 0.5);
        RleMask rle = rle_encode(mask);
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < rle.counts.size(); ++i) {
            if (i > 0) CHECK(rle.counts[i] > 0);  // only the first count may be 0
            sum += rle.counts[i];
        }
        CHECK(sum == static_cast<std::uint64_t>(mask.width) * mask.height);
        CHECK(rle_area(rle) == mask.area());
        CHECK(rle_decode(rle) == mask);
    }
}

TEST_CASE("rle decode rejects count-sum mismatches") {
    RleMask rle;
    rle.width = 2;
    rle.height = 2;
    rle.counts = {3};
    CHECK_THROWS_AS(rle_decode(rle), BadCounts);
}
