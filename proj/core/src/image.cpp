#include "maskfuse/image.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace maskfuse {

Image::Image(int w, int h, std::array<std::uint8_t, 3> fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("Image: dimensions must be >= 1x1");
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill[0];
        pixels[i + 1] = fill[1];
        pixels[i + 2] = fill[2];
    }
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open " + path.string());

    std::string magic;
    in >> magic;
    if (magic != "P6")
        throw std::runtime_error("read_ppm: " + path.string() + " is not a binary PPM");

    auto next_int = [&](const char* what) {
        // Skip whitespace and '#' comment lines between header fields.
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        if (!in || v < 0)
            throw std::runtime_error("read_ppm: bad " + std::string(what) + " in " +
                                     path.string());
        return v;
    };

    const long w = next_int("width");
    const long h = next_int("height");
    const long maxval = next_int("maxval");
    if (w < 1 || h < 1 || maxval != 255)
        throw std::runtime_error("read_ppm: unsupported geometry or maxval in " +
                                 path.string());
    in.get();  // single whitespace after maxval

    Image img(static_cast<int>(w), static_cast<int>(h));
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("read_ppm: truncated pixel data in " + path.string());
    return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path.string());
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw std::runtime_error("write_ppm: write failed for " + path.string());
}

void blend_mask(Image& image, const BinaryMask& mask, std::array<std::uint8_t, 3> color,
                double alpha) {
    if (mask.width() != image.width || mask.height() != image.height)
        throw std::invalid_argument("blend_mask: resolution mismatch");
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            if (!mask.at(x, y)) continue;
            std::uint8_t* px = image.at(x, y);
            for (int c = 0; c < 3; ++c)
                px[c] = static_cast<std::uint8_t>(px[c] * (1.0 - alpha) +
                                                  color[c] * alpha + 0.5);
        }
}

void draw_mask_outline(Image& image, const BinaryMask& mask,
                       std::array<std::uint8_t, 3> color) {
    if (mask.width() != image.width || mask.height() != image.height)
        throw std::invalid_argument("draw_mask_outline: resolution mismatch");
    auto interior = [&](int x, int y) {
        return x > 0 && y > 0 && x + 1 < mask.width() && y + 1 < mask.height() &&
               mask.at(x - 1, y) && mask.at(x + 1, y) && mask.at(x, y - 1) &&
               mask.at(x, y + 1);
    };
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            if (!mask.at(x, y) || interior(x, y)) continue;
            std::uint8_t* px = image.at(x, y);
            px[0] = color[0];
            px[1] = color[1];
            px[2] = color[2];
        }
}

}  // namespace maskfuse
