#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace maskfuse {

// Dense per-pixel instance bitmap. Addressing convention used everywhere in
// this library: x grows right, y grows down, origin at the top-left; logical
// index of (x, y) is y * width + x (row-major). Bits are packed 64 per word
// and the tail beyond width*height is kept zero, so word-level comparison and
// popcount are exact.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);

    static BinaryMask filled(int width, int height, bool value);

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int x, int y) const {
        const std::size_t i = index(x, y);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(int x, int y, bool v) {
        const std::size_t i = index(x, y);
        const std::uint64_t bit = 1ull << (i & 63);
        if (v)
            words_[i >> 6] |= bit;
        else
            words_[i >> 6] &= ~bit;
    }

    std::int64_t area() const;

    std::span<const std::uint64_t> words() const { return words_; }
    // Low-level access for word-wise set arithmetic; callers must keep the
    // tail bits beyond width*height zero.
    std::span<std::uint64_t> mutable_words() { return words_; }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint64_t> words_;
};

// COCO-convention run-length encoding: runs count pixels over the column-major
// scan (x * height + y), the first run counting 0-pixels. A zero-length run is
// legal only as the first element (mask starting with a 1-pixel).
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint64_t> counts;

    bool operator==(const RleMask&) const = default;
};

// Throws std::invalid_argument when the run sequence does not cover exactly
// height*width pixels or contains an interior zero-length run.
void validate_rle(const RleMask& rle);

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

std::int64_t mask_area(const BinaryMask& mask);
std::int64_t mask_area(const RleMask& rle);  // sum of odd-indexed runs, no decode

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b);

// |a∩b| / |a∪b|; 0 when both masks are empty. Resolution mismatch throws.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Word-level set arithmetic; operands must share resolution.
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b);  // a \ b

}  // namespace maskfuse
