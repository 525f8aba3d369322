#pragma once

#include <cstdint>
#include <vector>

#include "maskfuse/coco.hpp"
#include "maskfuse/copy_paste.hpp"
#include "maskfuse/prediction.hpp"

namespace maskfuse {

enum class ShapeFamily { rectangles, ellipses, mixed };

// Perturbation applied independently per simulated detector: whole-mask shift
// up to jitter_px plus occasional one-pixel grow/shrink, random instance
// drops, extra jittered duplicates, and Gaussian score noise.
struct NoiseModel {
    double jitter_px = 2.0;
    double drop_prob = 0.15;
    double duplicate_prob = 0.1;
    double score_noise = 0.1;
};

struct SynthConfig {
    int image_count = 200;
    int width = 256;
    int height = 256;
    int category_count = 5;
    double longtail_exponent = 2.0;  // category k drawn with weight (k+1)^-exponent
    int min_instances = 3;
    int max_instances = 8;
    ShapeFamily shapes = ShapeFamily::mixed;
    int model_count = 3;
    NoiseModel noise;
    std::uint64_t seed = 0;
};

void validate(const SynthConfig& config);

struct SynthOutput {
    std::vector<DatasetSample> dataset;  // clean, disjoint ground-truth shapes
    // model_predictions[m][i] aligns with dataset[i].
    std::vector<std::vector<PredictionSet>> model_predictions;
};

// Deterministic for a given config; every image and every simulated model has
// its own derived seed, so regenerating with more threads or fewer models
// leaves the rest untouched.
SynthOutput synth(const SynthConfig& config, int threads = 1);

std::vector<CocoCategory> synth_categories(const SynthConfig& config);

}  // namespace maskfuse
