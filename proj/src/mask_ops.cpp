#include "gnv/mask_ops.hpp"

#include "gnv/errors.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace gnv {

std::size_t BinaryMask::area() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(),
                                                  [](std::uint8_t b) { return b != 0; }));
}

namespace {

// Sliding-histogram median over one output row: seed the histogram with the
// window at x=0, then add/remove one column per step.
void median_row(const std::uint8_t* alpha, int w, int h, int oy, int k,
                std::uint8_t* out_row) {
    const int r = k / 2;
    const int mid = (k * k) / 2;  // window is odd^2

    auto clamp_x = [&](int x) { return std::clamp(x, 0, w - 1); };
    auto clamp_y = [&](int y) { return std::clamp(y, 0, h - 1); };

    std::array<int, 256> hist{};
    for (int dy = -r; dy <= r; ++dy) {
        const std::uint8_t* row = alpha + static_cast<std::size_t>(clamp_y(oy + dy)) * w;
        for (int dx = -r; dx <= r; ++dx) {
            ++hist[row[clamp_x(dx)]];
        }
    }

    auto histogram_median = [&]() -> std::uint8_t {
        int acc = 0;
        for (int v = 0; v < 256; ++v) {
            acc += hist[v];
            if (acc > mid) return static_cast<std::uint8_t>(v);
        }
        return 255;
    };

    out_row[0] = histogram_median();
    for (int ox = 1; ox < w; ++ox) {
        const int x_add = clamp_x(ox + r);
        const int x_del = clamp_x(ox - 1 - r);
        for (int dy = -r; dy <= r; ++dy) {
            const std::uint8_t* row = alpha + static_cast<std::size_t>(clamp_y(oy + dy)) * w;
            ++hist[row[x_add]];
            --hist[row[x_del]];
        }
        out_row[ox] = histogram_median();
    }
}

}  // namespace

RgbaImage median_filter_alpha(const RgbaImage& image, int kernel) {
    check_image(image);
    if (kernel < 1 || kernel % 2 == 0 || kernel > std::min(image.width, image.height)) {
        throw BadKernel("median kernel must be odd, >= 1 and <= min(width, height)");
    }
    RgbaImage out = image;
    if (kernel == 1) return out;

    const int w = image.width;
    const int h = image.height;
    std::vector<std::uint8_t> alpha(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        alpha[i] = image.pixels[i * 4 + 3];
    }
    std::vector<std::uint8_t> filtered(alpha.size());
    for (int oy = 0; oy < h; ++oy) {
        median_row(alpha.data(), w, h, oy, kernel, filtered.data() + static_cast<std::size_t>(oy) * w);
    }
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        out.pixels[i * 4 + 3] = filtered[i];
    }
    return out;
}

BinaryMask alpha_to_mask(const RgbaImage& image, std::uint8_t threshold) {
    check_image(image);
    BinaryMask mask(image.width, image.height);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) {
        mask.bits[i] = image.pixels[i * 4 + 3] >= threshold ? 1 : 0;
    }
    return mask;
}

std::vector<std::pair<BinaryMask, std::size_t>> connected_components(const BinaryMask& mask) {
    std::vector<std::pair<BinaryMask, std::size_t>> components;
    if (mask.width <= 0 || mask.height <= 0) return components;

    const int w = mask.width;
    const int h = mask.height;
    std::vector<std::uint8_t> visited(mask.bits.size(), 0);
    std::vector<std::size_t> stack;

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            std::size_t start = static_cast<std::size_t>(sy) * w + sx;
            if (!mask.bits[start] || visited[start]) continue;

            BinaryMask comp(w, h);
            std::size_t area = 0;
            stack.clear();
            stack.push_back(start);
            visited[start] = 1;
            while (!stack.empty()) {
                std::size_t idx = stack.back();
                stack.pop_back();
                comp.bits[idx] = 1;
                ++area;
                int x = static_cast<int>(idx % w);
                int y = static_cast<int>(idx / w);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = x + dx;
                        int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.bits[nidx] && !visited[nidx]) {
                            visited[nidx] = 1;
                            stack.push_back(nidx);
                        }
                    }
                }
            }
            components.emplace_back(std::move(comp), area);
        }
    }
    std::stable_sort(components.begin(), components.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return components;
}

BinaryMask drop_specks(const BinaryMask& mask, std::size_t min_area) {
    if (min_area == 0) return mask;
    BinaryMask out(mask.width, mask.height);
    for (const auto& [comp, area] : connected_components(mask)) {
        if (area < min_area) continue;
        for (std::size_t i = 0; i < out.bits.size(); ++i) {
            out.bits[i] |= comp.bits[i];
        }
    }
    return out;
}

Bbox mask_to_bbox(const BinaryMask& mask) {
    int min_x = mask.width, min_y = mask.height, max_x = -1, max_y = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            min_x = std::min(min_x, x);
            min_y = std::min(min_y, y);
            max_x = std::max(max_x, x);
            max_y = std::max(max_y, y);
        }
    }
    if (max_x < 0) throw EmptyMask("mask has no set bits");
    return Bbox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle;
    rle.width = mask.width;
    rle.height = mask.height;
    std::uint64_t run = 0;
    std::uint8_t current = 0;  // COCO runs start counting zeros
    for (int x = 0; x < mask.width; ++x) {
        for (int y = 0; y < mask.height; ++y) {
            std::uint8_t bit = mask.get(x, y) ? 1 : 0;
            if (bit == current) {
                ++run;
            } else {
                rle.counts.push_back(run);
                current = bit;
                run = 1;
            }
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
    if (rle.width < 0 || rle.height < 0) throw BadCounts("negative dimensions");
    std::uint64_t total = std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
    std::uint64_t expected = static_cast<std::uint64_t>(rle.width) * rle.height;
    if (total != expected) {
        throw BadCounts("sum of counts != width*height");
    }
    BinaryMask mask(rle.width, rle.height);
    std::uint64_t pos = 0;
    std::uint8_t value = 0;
    for (std::uint64_t count : rle.counts) {
        for (std::uint64_t i = 0; i < count; ++i, ++pos) {
            if (value) {
                int x = static_cast<int>(pos / rle.height);
                int y = static_cast<int>(pos % rle.height);
                mask.set(x, y, true);
            }
        }
        value ^= 1;
    }
    return mask;
}

std::uint64_t rle_area(const RleMask& rle) {
    std::uint64_t area = 0;
    for (std::size_t i = 1; i < rle.counts.size(); i += 2) {
        area += rle.counts[i];
    }
    return area;
}

}  // namespace gnv
