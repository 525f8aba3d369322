#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "maskfuse/prediction.hpp"

namespace maskfuse {

// Per-image ground truth as seen by the evaluator.
struct GroundTruth {
    std::int64_t image_id = 0;
    int width = 0;
    int height = 0;
    std::vector<GtInstance> instances;
};

struct EvalConfig {
    std::vector<double> iou_thresholds;  // default 0.50:0.05:0.95
    int max_dets = 100;                  // per-image cap, applied before matching
    int recall_points = 101;             // evenly spaced in [0,1]

    EvalConfig();
};

void validate(const EvalConfig& config);

// One scored detection label after matching, the raw material of a PR curve.
struct PredMatch {
    double score = 0.0;
    bool matched = false;  // true = TP, false = FP
    std::int64_t image_id = 0;
    int input_index = 0;  // tie-break for deterministic curves
};

// Greedy matching for one image and one category at one IoU threshold:
// predictions in descending score order each take the unmatched ground truth
// with the highest IoU >= iou_thr. `ious[p][g]` must hold prediction-vs-GT
// overlaps for exactly the given index lists.
std::vector<PredMatch> match_predictions(const PredictionSet& preds,
                                         const GroundTruth& gts, int category_id,
                                         double iou_thr, int max_dets);

// 101-point interpolated average precision from score-sorted TP/FP labels.
// `gt_count` is the number of ground-truth instances of the category across
// the dataset. Returns a value in [0,1].
double average_precision(std::vector<PredMatch> matches, std::int64_t gt_count,
                         const EvalConfig& config);

struct ApReport {
    double map = 0.0;                               // mean over categories, then thresholds
    std::map<int, double> per_category_ap;          // mean over thresholds
    std::vector<double> per_threshold_ap;           // mean over categories
    std::map<int, std::vector<double>> per_category_per_threshold;
    std::vector<double> iou_thresholds;
    std::map<int, std::int64_t> gt_counts;
};

// Full COCO-convention evaluation over a dataset. Categories absent from the
// ground truth are excluded from the means rather than scored 0. Predictions
// and ground truth are joined on image_id; prediction sets for unknown images
// only ever produce false positives.
ApReport evaluate(std::span<const PredictionSet> predictions,
                  std::span<const GroundTruth> ground_truth, const EvalConfig& config,
                  int threads = 1);

}  // namespace maskfuse
