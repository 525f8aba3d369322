#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "maskfuse/image.hpp"
#include "maskfuse/prediction.hpp"

namespace maskfuse {

// Image pixels plus ground-truth instances; the unit of augmentation.
// Instance ids are unique within a sample and all masks share the image
// resolution.
struct DatasetSample {
    std::int64_t image_id = 0;
    Image image;
    std::vector<GtInstance> instances;
};

struct ClassStats {
    std::map<int, std::int64_t> counts;  // category_id -> instance count
};

enum class PasteMode { simple, balanced };

struct BalanceConfig {
    double beta = 0.999;               // effective-number hyper-parameter
    int pastes_per_image = 3;
    double min_visible_fraction = 0.1; // occlusion survival threshold
    double hflip_prob = 0.5;
    PasteMode mode = PasteMode::balanced;
    // Optional uniform scale jitter on crops; [1, 1] keeps crops untouched.
    double scale_jitter_min = 1.0;
    double scale_jitter_max = 1.0;
};

void validate(const BalanceConfig& config);

// One extracted instance: a tight bounding-box patch plus the mask inside it.
// The mask is non-empty and touches all four sides of the patch.
struct InstanceCrop {
    Image patch;
    BinaryMask mask;
    int category_id = 0;
    std::int64_t origin_sample_id = 0;
};

struct SourcePool {
    std::vector<InstanceCrop> crops;
    std::map<int, std::vector<std::size_t>> by_category;  // category -> crop indices
};

SourcePool build_source_pool(std::span<const DatasetSample> samples);
ClassStats collect_class_stats(std::span<const DatasetSample> samples);

// Effective number of samples E_n = (1 - beta^n) / (1 - beta); E_0 = 0 and
// E_n = 1 for n >= 1 at beta = 0. Requires 0 <= beta < 1.
double effective_number(std::int64_t n, double beta);

// w_c proportional to 1 / E_{n_c} over categories with n_c >= 1, normalized to
// sum 1; absent categories get weight 0. Throws when every count is zero.
std::map<int, double> class_sampling_weights(const ClassStats& stats, double beta);

// Draws k crops: category first (proportional to its weight, restricted to
// categories that actually have crops), then a uniform crop within the
// category. Deterministic given the seed.
std::vector<InstanceCrop> sample_instances(const SourcePool& pool,
                                           const std::map<int, double>& weights, int k,
                                           std::uint64_t seed);

// Hard-composites crops onto the target. Pasted pixels replace target pixels
// under each crop mask (later pastes win); every earlier instance mask loses
// the pasted pixels; instances whose visible area drops below
// min_visible_fraction of their entry area are removed. Placement offsets are
// uniform over positions keeping at least half of the crop mask inside the
// image; crops are clipped at the border and dropped when nothing remains.
DatasetSample paste(const DatasetSample& target, std::span<const InstanceCrop> crops,
                    const BalanceConfig& config, std::uint64_t seed);

struct AugmentReport {
    std::map<int, std::int64_t> before_counts;
    std::map<int, std::int64_t> after_counts;
    std::map<int, std::int64_t> pasted_counts;  // categories of the drawn crops
};

// Builds the pool and the stats from the dataset itself, then pastes into
// every sample. mode == simple draws categories uniformly; mode == balanced
// uses class_sampling_weights. Per-sample seeds derive from (seed, image_id),
// so the result is identical for any thread count.
std::vector<DatasetSample> augment_dataset(std::span<const DatasetSample> samples,
                                           const BalanceConfig& config,
                                           std::uint64_t seed,
                                           AugmentReport* report = nullptr,
                                           int threads = 1);

}  // namespace maskfuse
