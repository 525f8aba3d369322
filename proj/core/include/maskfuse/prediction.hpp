#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskfuse/mask.hpp"

namespace maskfuse {

// One predicted instance. `source` tags where the prediction came from
// (model identifier or TTA-transform identifier); empty means unspecified.
struct InstancePrediction {
    BinaryMask mask;
    int category_id = 0;
    double score = 0.0;
    std::string source;
};

// All predictions for one image. Every member mask shares (width, height).
struct PredictionSet {
    std::int64_t image_id = 0;
    int width = 0;
    int height = 0;
    std::vector<InstancePrediction> predictions;
};

// One ground-truth instance; shared by the augmentation and evaluation sides.
struct GtInstance {
    BinaryMask mask;
    int category_id = 0;
    std::int64_t instance_id = 0;
};

// Throws std::invalid_argument on a mask whose resolution differs from the
// set's, or a score outside [0, 1].
void validate(const PredictionSet& set);

// Pairwise mask IoU; entry (i, j) = mask_iou(pred_i, pred_j).
std::vector<std::vector<double>> iou_matrix(const PredictionSet& set);

}  // namespace maskfuse
