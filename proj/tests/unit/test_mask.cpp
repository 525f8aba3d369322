#include <doctest.h>

#include "maskfuse/mask.hpp"
#include "maskfuse/prediction.hpp"
#include "maskfuse/rng.hpp"
#include "test_util.hpp"

using namespace maskfuse;

namespace {

// Brute-force oracles used throughout: straight per-pixel loops, no codec, no
// word tricks.
std::int64_t brute_area(const BinaryMask& m) {
    std::int64_t n = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) ++n;
    return n;
}

std::pair<std::int64_t, std::int64_t> brute_inter_union(const BinaryMask& a,
                                                        const BinaryMask& b) {
    std::int64_t inter = 0, uni = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            const bool va = a.at(x, y), vb = b.at(x, y);
            inter += va && vb;
            uni += va || vb;
        }
    return {inter, uni};
}

}  // namespace

TEST_CASE("rle_encode fixed cases") {
    BinaryMask zero(3, 3);
    CHECK(rle_encode(zero).counts == std::vector<std::uint64_t>{9});

    BinaryMask corner(3, 3);
    corner.set(0, 0, true);
    CHECK(rle_encode(corner).counts == std::vector<std::uint64_t>{0, 1, 8});
}

TEST_CASE("rle_decode fixed cases") {
    CHECK(rle_decode({3, 3, {9}}) == BinaryMask(3, 3));
    CHECK(rle_decode({3, 3, {0, 9}}) == BinaryMask::filled(3, 3, true));

    // Column-major index 4 inside a 3x3 grid is (x=1, y=1).
    const BinaryMask m = rle_decode({3, 3, {4, 1, 4}});
    CHECK(m.area() == 1);
    CHECK(m.at(1, 1));
}

TEST_CASE("rle_decode rejects malformed runs") {
    CHECK_THROWS_AS(rle_decode({3, 3, {8}}), std::invalid_argument);
    CHECK_THROWS_AS(rle_decode({3, 3, {10}}), std::invalid_argument);
    CHECK_THROWS_AS(rle_decode({3, 3, {4, 0, 5}}), std::invalid_argument);
    CHECK_THROWS_AS(rle_decode({3, 3, {9, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(rle_decode({0, 3, {0}}), std::invalid_argument);
}

TEST_CASE("rle roundtrip over random masks") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 1 + static_cast<int>(rng.uniform_index(96));
        const int h = 1 + static_cast<int>(rng.uniform_index(96));
        const BinaryMask m = testutil::random_mask(rng, w, h, rng.uniform());
        const RleMask rle = rle_encode(m);
        CHECK(rle_decode(rle) == m);
        CHECK(mask_area(rle) == brute_area(m));
    }
}

TEST_CASE("mask_area fixed and oracle cases") {
    CHECK(mask_area(BinaryMask(3, 3)) == 0);
    CHECK(mask_area(BinaryMask::filled(3, 3, true)) == 9);

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask m = testutil::random_mask(rng, 40, 30, rng.uniform());
        CHECK(mask_area(m) == brute_area(m));
    }
}

TEST_CASE("mask_iou fixed cases") {
    const BinaryMask a = testutil::rect_mask(8, 8, 1, 1, 2, 2);
    CHECK(mask_iou(a, a) == 1.0);

    // Two 2x2 squares overlapping in exactly one pixel: 1 / (4 + 4 - 1).
    const BinaryMask p = testutil::rect_mask(8, 8, 0, 0, 1, 1);
    const BinaryMask q = testutil::rect_mask(8, 8, 1, 1, 2, 2);
    CHECK(mask_iou(p, q) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

    const BinaryMask r = testutil::rect_mask(8, 8, 5, 5, 6, 6);
    CHECK(mask_iou(p, r) == 0.0);

    CHECK(mask_iou(BinaryMask(4, 4), BinaryMask(4, 4)) == 0.0);  // empty vs empty
    CHECK_THROWS_AS(mask_iou(BinaryMask(4, 4), BinaryMask(5, 4)), std::invalid_argument);
}

TEST_CASE("mask_iou equals brute force exactly") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const BinaryMask a = testutil::random_mask(rng, 33, 21, rng.uniform());
        const BinaryMask b = testutil::random_mask(rng, 33, 21, rng.uniform());
        const auto [inter, uni] = brute_inter_union(a, b);
        const double expected =
            uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
        CHECK(mask_iou(a, b) == expected);
        CHECK(mask_iou(a, b) == mask_iou(b, a));
        CHECK(mask_iou(a, b) >= 0.0);
        CHECK(mask_iou(a, b) <= 1.0);
    }
}

TEST_CASE("adding pixels never shrinks intersection or union") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask a = testutil::random_mask(rng, 24, 24, 0.3);
        const BinaryMask b = testutil::random_mask(rng, 24, 24, 0.3);
        BinaryMask grown = a;
        for (int add = 0; add < 20; ++add)
            grown.set(static_cast<int>(rng.uniform_index(24)),
                      static_cast<int>(rng.uniform_index(24)), true);
        CHECK(intersection_area(grown, b) >= intersection_area(a, b));
        CHECK(grown.area() + b.area() - intersection_area(grown, b) >=
              a.area() + b.area() - intersection_area(a, b));
    }
}

TEST_CASE("iou_matrix") {
    PredictionSet single;
    single.image_id = 1;
    single.width = single.height = 4;
    single.predictions.push_back({testutil::rect_mask(4, 4, 0, 0, 1, 1), 1, 0.5, ""});
    const auto one = iou_matrix(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0][0] == 1.0);

    PredictionSet disjoint;
    disjoint.image_id = 1;
    disjoint.width = 16;
    disjoint.height = 4;
    for (int i = 0; i < 4; ++i)
        disjoint.predictions.push_back(
            {testutil::rect_mask(16, 4, 4 * i, 0, 4 * i + 2, 2), 1, 0.5, ""});
    const auto eye = iou_matrix(disjoint);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(eye[i][j] == (i == j ? 1.0 : 0.0));

    Rng rng(19);
    const PredictionSet crowd = testutil::random_crowd(rng, 8, 24, 24, 2);
    const auto m = iou_matrix(crowd);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(m[i][j] ==
                  mask_iou(crowd.predictions[i].mask, crowd.predictions[j].mask));
            CHECK(m[i][j] == m[j][i]);
        }
}

TEST_CASE("word-level set arithmetic matches per-pixel definition") {
    Rng rng(23);
    const BinaryMask a = testutil::random_mask(rng, 70, 9, 0.4);
    const BinaryMask b = testutil::random_mask(rng, 70, 9, 0.4);
    const BinaryMask i = mask_and(a, b);
    const BinaryMask u = mask_or(a, b);
    const BinaryMask d = mask_subtract(a, b);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 70; ++x) {
            CHECK(i.at(x, y) == (a.at(x, y) && b.at(x, y)));
            CHECK(u.at(x, y) == (a.at(x, y) || b.at(x, y)));
            CHECK(d.at(x, y) == (a.at(x, y) && !b.at(x, y)));
        }
}

TEST_CASE("prediction set validation") {
    PredictionSet set;
    set.image_id = 1;
    set.width = set.height = 4;
    set.predictions.push_back({BinaryMask(4, 4), 1, 0.5, ""});
    CHECK_NOTHROW(validate(set));

    set.predictions.push_back({BinaryMask(5, 4), 1, 0.5, ""});
    CHECK_THROWS_AS(validate(set), std::invalid_argument);

    set.predictions.pop_back();
    set.predictions.push_back({BinaryMask(4, 4), 1, 1.5, ""});
    CHECK_THROWS_AS(validate(set), std::invalid_argument);
}
