#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>

#include "maskfuse/nms.hpp"
#include "maskfuse/prediction.hpp"

namespace maskfuse {

enum class ResizeMethod { nearest, bilinear_threshold };

// One test-time augmentation leg: resize by `scale`, optionally mirror along x.
struct TtaTransform {
    double scale = 1.0;
    bool hflip = false;
};

// Transformed dimensions, rounded half-up per axis and clamped to >= 1.
std::pair<int, int> transformed_size(const TtaTransform& t, int orig_w, int orig_h);

// Short stable identifier, e.g. "s1.25+hflip"; recorded in inverted sources.
std::string transform_tag(const TtaTransform& t);

// Predictions made on a transformed image, remembering the original geometry.
struct TtaPrediction {
    PredictionSet predictions;  // at the transformed resolution
    TtaTransform transform;
    int original_width = 0;
    int original_height = 0;
};

// Per-source score multipliers; sources without an entry use 1.0, which
// reproduces plain raw-score pooling. Calibrated scores are clipped to [0,1].
struct CalibrationConfig {
    std::map<std::string, double> source_multipliers;

    double multiplier_for(const std::string& source) const {
        auto it = source_multipliers.find(source);
        return it == source_multipliers.end() ? 1.0 : it->second;
    }
};

void validate(const CalibrationConfig& calibration);

// Nearest keeps exact pixels (integer-factor roundtrips recover the input);
// bilinear interpolates the 0/1 field and binarizes at 0.5.
BinaryMask resize_mask(const BinaryMask& mask, int target_w, int target_h,
                       ResizeMethod method);

// Pixel (x, y) -> (width-1-x, y).
BinaryMask hflip_mask(const BinaryMask& mask);

// Maps predictions back to original geometry: un-flip (if flipped), then
// resize to (original_width, original_height). Scores and categories are
// untouched; the transform tag is appended to each source.
PredictionSet invert_predictions(const TtaPrediction& tta, ResizeMethod method);

// Concatenates sets (which must share image_id and resolution) in the given
// order, applying per-source score multipliers.
PredictionSet pool(std::span<const PredictionSet> sets,
                   const CalibrationConfig& calibration);

// invert_predictions on every leg, pool, then matrix_nms.
PredictionSet tta_merge(std::span<const TtaPrediction> preds, const NmsConfig& nms,
                        ResizeMethod method);

// Multi-model fusion: pool then matrix_nms. The final fusion step of the
// inference pipeline.
PredictionSet ensemble(std::span<const PredictionSet> model_outputs,
                       const CalibrationConfig& calibration, const NmsConfig& nms);

}  // namespace maskfuse
