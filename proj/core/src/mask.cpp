#include "maskfuse/mask.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace maskfuse {

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("BinaryMask: dimensions must be >= 1x1");
    const std::size_t bits =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    words_.assign((bits + 63) / 64, 0);
}

BinaryMask BinaryMask::filled(int width, int height, bool value) {
    BinaryMask m(width, height);
    if (value) {
        for (auto& w : m.words_) w = ~0ull;
        const std::size_t bits =
            static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        const unsigned tail = bits & 63;
        if (tail != 0) m.words_.back() &= (1ull << tail) - 1;
    }
    return m;
}

std::int64_t BinaryMask::area() const {
    std::int64_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

void validate_rle(const RleMask& rle) {
    if (rle.width < 1 || rle.height < 1)
        throw std::invalid_argument("RleMask: dimensions must be >= 1x1");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        if (rle.counts[i] == 0 && i != 0)
            throw std::invalid_argument(
                "RleMask: zero-length run at position " + std::to_string(i) +
                " (zero is only legal as the first run)");
        total += rle.counts[i];
    }
    const std::uint64_t expected = static_cast<std::uint64_t>(rle.width) *
                                   static_cast<std::uint64_t>(rle.height);
    if (total != expected)
        throw std::invalid_argument("RleMask: runs cover " + std::to_string(total) +
                                    " pixels, expected " + std::to_string(expected));
}

RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle;
    rle.height = mask.height();
    rle.width = mask.width();
    bool prev = false;
    std::uint64_t run = 0;
    for (int x = 0; x < mask.width(); ++x) {
        for (int y = 0; y < mask.height(); ++y) {
            const bool v = mask.at(x, y);
            if (v != prev) {
                rle.counts.push_back(run);
                run = 0;
                prev = v;
            }
            ++run;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
    validate_rle(rle);
    BinaryMask mask(rle.width, rle.height);
    std::uint64_t pos = 0;
    bool value = false;
    for (std::uint64_t count : rle.counts) {
        if (value) {
            for (std::uint64_t k = 0; k < count; ++k) {
                const std::uint64_t i = pos + k;
                mask.set(static_cast<int>(i / rle.height),
                         static_cast<int>(i % rle.height), true);
            }
        }
        pos += count;
        value = !value;
    }
    return mask;
}

std::int64_t mask_area(const BinaryMask& mask) { return mask.area(); }

std::int64_t mask_area(const RleMask& rle) {
    std::int64_t n = 0;
    for (std::size_t i = 1; i < rle.counts.size(); i += 2)
        n += static_cast<std::int64_t>(rle.counts[i]);
    return n;
}

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("intersection_area: resolution mismatch");
    const auto wa = a.words();
    const auto wb = b.words();
    std::int64_t n = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) n += std::popcount(wa[i] & wb[i]);
    return n;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    const std::int64_t inter = intersection_area(a, b);
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

template <typename Op>
BinaryMask word_op(const BinaryMask& a, const BinaryMask& b, Op op, const char* name) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument(std::string(name) + ": resolution mismatch");
    BinaryMask out(a.width(), a.height());
    const auto wa = a.words();
    const auto wb = b.words();
    const auto wo = out.mutable_words();
    for (std::size_t i = 0; i < wa.size(); ++i) wo[i] = op(wa[i], wb[i]);
    return out;
}

}  // namespace

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    return word_op(a, b, [](std::uint64_t x, std::uint64_t y) { return x & y; },
                   "mask_and");
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    return word_op(a, b, [](std::uint64_t x, std::uint64_t y) { return x | y; },
                   "mask_or");
}

BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b) {
    return word_op(a, b, [](std::uint64_t x, std::uint64_t y) { return x & ~y; },
                   "mask_subtract");
}

}  // namespace maskfuse
