#include <doctest.h>

#include <cmath>

#include "maskfuse/coco.hpp"
#include "maskfuse/eval.hpp"
#include "test_util.hpp"

using namespace maskfuse;

namespace {

GroundTruth gt_one(int w, int h, const BinaryMask& mask, int cat = 1) {
    GroundTruth gt;
    gt.image_id = 1;
    gt.width = w;
    gt.height = h;
    gt.instances.push_back({mask, cat, 1});
    return gt;
}

PredictionSet preds_one(int w, int h, const BinaryMask& mask, double score,
                        int cat = 1) {
    PredictionSet set;
    set.image_id = 1;
    set.width = w;
    set.height = h;
    set.predictions.push_back({mask, cat, score, ""});
    return set;
}

// a and b with IoU exactly 3/5: |inter| = 3, |union| = 5.
std::pair<BinaryMask, BinaryMask> masks_iou_3_5(int w, int h) {
    BinaryMask a(w, h), b(w, h);
    for (int x = 0; x < 3; ++x) {
        a.set(x, 0, true);
        b.set(x, 0, true);
    }
    a.set(3, 0, true);
    b.set(4, 0, true);
    return {a, b};
}

}  // namespace

TEST_CASE("match_predictions basic cases") {
    const auto [ma, mb] = masks_iou_3_5(8, 4);
    const GroundTruth gt = gt_one(8, 4, ma);
    const EvalConfig cfg;

    SUBCASE("IoU 0.6 matches at threshold 0.5") {
        const auto matches =
            match_predictions(preds_one(8, 4, mb, 0.9), gt, 1, 0.5, cfg.max_dets);
        REQUIRE(matches.size() == 1);
        CHECK(matches[0].matched);
    }
    SUBCASE("IoU 0.6 misses at threshold 0.75") {
        const auto matches =
            match_predictions(preds_one(8, 4, mb, 0.9), gt, 1, 0.75, cfg.max_dets);
        REQUIRE(matches.size() == 1);
        CHECK(!matches[0].matched);
    }
    SUBCASE("two predictions over one GT: only the higher-scored one matches") {
        PredictionSet two = preds_one(8, 4, ma, 0.9);
        two.predictions.push_back({ma, 1, 0.7, ""});
        const auto matches = match_predictions(two, gt, 1, 0.5, cfg.max_dets);
        REQUIRE(matches.size() == 2);
        CHECK(matches[0].score == 0.9);
        CHECK(matches[0].matched);
        CHECK(!matches[1].matched);
    }
}

TEST_CASE("average_precision basics") {
    const EvalConfig cfg;
    SUBCASE("no predictions, some GT: AP 0") {
        CHECK(average_precision({}, 3, cfg) == 0.0);
    }
    SUBCASE("no GT is undefined") {
        CHECK_THROWS_AS(average_precision({{0.9, true, 1, 0}}, 0, cfg),
                        std::invalid_argument);
    }
    SUBCASE("one TP covering the single GT: AP 1") {
        CHECK(average_precision({{0.9, true, 1, 0}}, 1, cfg) == 1.0);
    }
    SUBCASE("half the GT covered perfectly: AP 51/101") {
        std::vector<PredMatch> matches{{1.0, true, 1, 0}, {1.0, true, 1, 1}};
        CHECK(average_precision(matches, 4, cfg) ==
              doctest::Approx(51.0 / 101.0).epsilon(1e-12));
    }
}

TEST_CASE("evaluate: perfect predictions give mAP 1") {
    Rng rng(3);
    std::vector<GroundTruth> gts;
    std::vector<PredictionSet> preds;
    for (int i = 1; i <= 4; ++i) {
        GroundTruth gt;
        gt.image_id = i;
        gt.width = gt.height = 32;
        PredictionSet set;
        set.image_id = i;
        set.width = set.height = 32;
        for (int k = 0; k < 3; ++k) {
            const BinaryMask m = testutil::random_blob(rng, 32, 32);
            if (m.area() == 0) continue;
            gt.instances.push_back({m, 1 + k % 2, k + 1});
            set.predictions.push_back({m, 1 + k % 2, 1.0, ""});
        }
        gts.push_back(std::move(gt));
        preds.push_back(std::move(set));
    }
    const ApReport report = evaluate(preds, gts, EvalConfig{});
    CHECK(report.map == 1.0);
    for (const auto& [cat, ap] : report.per_category_ap) CHECK(ap == 1.0);
    for (double ap : report.per_threshold_ap) CHECK(ap == 1.0);
}

TEST_CASE("evaluate: IoU-0.6 sweep gives mAP 0.30 exactly") {
    const auto [ma, mb] = masks_iou_3_5(8, 4);
    const std::vector<GroundTruth> gts{gt_one(8, 4, ma)};
    const std::vector<PredictionSet> preds{preds_one(8, 4, mb, 0.9)};
    const ApReport report = evaluate(preds, gts, EvalConfig{});
    // thresholds 0.50, 0.55, 0.60 match; the remaining seven do not
    for (std::size_t t = 0; t < 10; ++t)
        CHECK(report.per_category_per_threshold.at(1)[t] == (t <= 2 ? 1.0 : 0.0));
    CHECK(report.map == 0.3);
}

TEST_CASE("evaluate: committed three-image fixture") {
    // Expected values computed by the independent rational-arithmetic oracle
    // in tests/oracles/make_fixtures.py.
    const CocoDataset ds = read_dataset_json(std::string(MASKFUSE_FIXTURE_DIR) +
                                             "/eval_fixture_gt.json");
    const auto results = read_results_json(std::string(MASKFUSE_FIXTURE_DIR) +
                                           "/eval_fixture_results.json");
    const auto gts = dataset_to_ground_truth(ds);
    const auto preds = results_to_prediction_sets(results, "");
    const ApReport report = evaluate(preds, gts, EvalConfig{});

    const double cat1_low = 92.5 / 101.0;   // thresholds 0.50 .. 0.70
    const double cat1_mid = 50.5 / 101.0;   // threshold 0.75
    const double cat1_high = 34.0 / 101.0;  // thresholds 0.80 .. 0.95
    const auto& cat1 = report.per_category_per_threshold.at(1);
    for (std::size_t t = 0; t < 5; ++t)
        CHECK(cat1[t] == doctest::Approx(cat1_low).epsilon(1e-9));
    CHECK(cat1[5] == doctest::Approx(cat1_mid).epsilon(1e-9));
    for (std::size_t t = 6; t < 10; ++t)
        CHECK(cat1[t] == doctest::Approx(cat1_high).epsilon(1e-9));

    const auto& cat2 = report.per_category_per_threshold.at(2);
    for (std::size_t t = 0; t < 10; ++t)
        CHECK(cat2[t] == doctest::Approx(51.0 / 101.0).epsilon(1e-9));

    CHECK(report.per_category_ap.at(1) == doctest::Approx(649.0 / 1010.0).epsilon(1e-9));
    CHECK(report.per_category_ap.at(2) == doctest::Approx(51.0 / 101.0).epsilon(1e-9));
    CHECK(report.map == doctest::Approx(1159.0 / 2020.0).epsilon(1e-9));
}

TEST_CASE("evaluate properties") {
    Rng rng(9);
    // Random predictions around random GT blobs, some dropped, some spurious.
    std::vector<GroundTruth> gts;
    std::vector<PredictionSet> preds;
    for (int i = 1; i <= 6; ++i) {
        GroundTruth gt;
        gt.image_id = i;
        gt.width = gt.height = 48;
        PredictionSet set;
        set.image_id = i;
        set.width = set.height = 48;
        for (int k = 0; k < 4; ++k) {
            const BinaryMask m = testutil::random_blob(rng, 48, 48);
            gt.instances.push_back({m, 1 + k % 3, k + 1});
            if (rng.uniform() < 0.75)
                set.predictions.push_back({m, 1 + k % 3, rng.uniform(0.2, 1.0), ""});
            if (rng.uniform() < 0.3)
                set.predictions.push_back(
                    {testutil::random_blob(rng, 48, 48), 1 + k % 3,
                     rng.uniform(0.1, 0.9), ""});
        }
        gts.push_back(std::move(gt));
        preds.push_back(std::move(set));
    }
    const EvalConfig cfg;
    const ApReport base = evaluate(preds, gts, cfg);

    SUBCASE("AP never rises with the IoU threshold") {
        for (const auto& [cat, per_thr] : base.per_category_per_threshold)
            for (std::size_t t = 1; t < per_thr.size(); ++t)
                CHECK(per_thr[t] <= per_thr[t - 1] + 1e-12);
    }

    SUBCASE("all reported values in [0,1]") {
        CHECK(base.map >= 0.0);
        CHECK(base.map <= 1.0);
        for (const auto& [cat, ap] : base.per_category_ap) {
            CHECK(ap >= 0.0);
            CHECK(ap <= 1.0);
        }
    }

    SUBCASE("scaling every score by 0.5 changes nothing") {
        std::vector<PredictionSet> scaled = preds;
        for (auto& s : scaled)
            for (auto& p : s.predictions) p.score *= 0.5;
        const ApReport r = evaluate(scaled, gts, cfg);
        CHECK(r.map == base.map);
        for (const auto& [cat, ap] : r.per_category_ap)
            CHECK(ap == base.per_category_ap.at(cat));
    }

    SUBCASE("duplicating a matched prediction never increases AP") {
        std::vector<PredictionSet> dup = preds;
        for (auto& s : dup)
            if (!s.predictions.empty()) {
                InstancePrediction copy = s.predictions[0];
                copy.score = std::max(0.0, copy.score - 0.05);
                s.predictions.push_back(std::move(copy));
            }
        const ApReport r = evaluate(dup, gts, cfg);
        CHECK(r.map <= base.map + 1e-12);
    }

    SUBCASE("thread count does not change the report") {
        const ApReport r = evaluate(preds, gts, cfg, 4);
        CHECK(r.map == base.map);
    }
}

TEST_CASE("evaluate: unknown prediction categories are harmless") {
    const auto [ma, mb] = masks_iou_3_5(8, 4);
    const std::vector<GroundTruth> gts{gt_one(8, 4, ma)};
    PredictionSet set = preds_one(8, 4, ma, 1.0);
    set.predictions.push_back({mb, 42, 0.9, ""});  // category with no GT anywhere
    const std::vector<PredictionSet> preds{set};
    const ApReport report = evaluate(preds, gts, EvalConfig{});
    CHECK(report.map == 1.0);
    CHECK(report.per_category_ap.count(42) == 0);  // excluded, not scored 0
}

TEST_CASE("evaluate rejects inconsistent inputs") {
    const auto [ma, mb] = masks_iou_3_5(8, 4);
    const std::vector<GroundTruth> gts{gt_one(8, 4, ma)};
    std::vector<PredictionSet> twice{preds_one(8, 4, ma, 1.0), preds_one(8, 4, mb, 0.5)};
    CHECK_THROWS_AS(evaluate(twice, gts, EvalConfig{}), std::invalid_argument);

    PredictionSet wrong = preds_one(8, 4, ma, 1.0);
    wrong.width = 16;
    wrong.predictions.clear();
    const std::vector<PredictionSet> bad{wrong};
    CHECK_THROWS_AS(evaluate(bad, gts, EvalConfig{}), std::invalid_argument);
}
