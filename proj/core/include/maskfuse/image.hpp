#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "maskfuse/mask.hpp"

namespace maskfuse {

// Interleaved 8-bit RGB, row-major, origin top-left (same addressing as
// BinaryMask).
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    Image() = default;
    Image(int w, int h, std::array<std::uint8_t, 3> fill = {0, 0, 0});

    std::uint8_t* at(int x, int y) {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    bool operator==(const Image&) const = default;
};

// Binary PPM (P6). Lossless and byte-stable, which keeps augmented datasets
// reproducible bit-for-bit.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// Alpha-blend `color` over the image where the mask is set.
void blend_mask(Image& image, const BinaryMask& mask, std::array<std::uint8_t, 3> color,
                double alpha);

// Draw the mask's 4-neighborhood boundary in `color`.
void draw_mask_outline(Image& image, const BinaryMask& mask,
                       std::array<std::uint8_t, 3> color);

}  // namespace maskfuse
