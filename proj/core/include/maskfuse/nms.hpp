#pragma once

#include <optional>
#include <span>
#include <vector>

#include "maskfuse/prediction.hpp"

namespace maskfuse {

enum class NmsKernel { linear, gaussian };
enum class CategoryMode { per_category, agnostic };

struct NmsConfig {
    NmsKernel kernel = NmsKernel::gaussian;
    double sigma = 2.0;
    double score_threshold = 0.05;
    int max_keep = 100;
    CategoryMode category_mode = CategoryMode::per_category;
    std::optional<int> pre_top_k;  // cap on inputs before decay; unset = unlimited
};

void validate(const NmsConfig& config);

// Score-decay factors for a crowd sorted by descending score.
//
// With f_linear(x) = 1 - x and f_gauss(x) = exp(-x^2 / sigma), let
// iou_max_i = max over higher-scored k of iou(k, i) (0 for the top item);
// the factor for item j is min over higher-scored i of f(iou(i,j)) / f(iou_max_i).
// The top item's factor is exactly 1. For the linear kernel the denominator is
// floored at 1e-6 so exact duplicates above i keep the ratio finite.
std::vector<double> decay_factors(std::span<const double> scores,
                                  const std::vector<std::vector<double>>& ious,
                                  const NmsConfig& config);

// Soft suppression over mask predictions: each score is multiplied by its
// decay factor, predictions with decayed score < score_threshold are removed,
// survivors are sorted by decayed score and truncated to max_keep. In
// per-category mode the decay is computed independently within each
// category_id. Ties are broken by (category_id, then stable input index).
PredictionSet matrix_nms(const PredictionSet& set, const NmsConfig& config);

// Classical greedy hard NMS: iterate by descending score, drop any prediction
// whose IoU with an already-kept one exceeds iou_threshold. Reference
// implementation used by tests to cross-check the soft path.
PredictionSet greedy_nms(const PredictionSet& set, double iou_threshold,
                         CategoryMode category_mode = CategoryMode::agnostic);

}  // namespace maskfuse
