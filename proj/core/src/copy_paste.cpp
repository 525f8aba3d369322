#include "maskfuse/copy_paste.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "maskfuse/parallel.hpp"
#include "maskfuse/rng.hpp"
#include "maskfuse/tta.hpp"

namespace maskfuse {

namespace {

constexpr int kPlacementAttempts = 64;

Image hflip_image(const Image& img) {
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* src = img.at(x, y);
            std::uint8_t* dst = out.at(img.width - 1 - x, y);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    return out;
}

Image resize_image_nearest(const Image& img, int tw, int th) {
    Image out(tw, th);
    for (int ty = 0; ty < th; ++ty) {
        const int sy = std::clamp(
            static_cast<int>(std::floor((ty + 0.5) * img.height / static_cast<double>(th))),
            0, img.height - 1);
        for (int tx = 0; tx < tw; ++tx) {
            const int sx = std::clamp(
                static_cast<int>(std::floor((tx + 0.5) * img.width / static_cast<double>(tw))),
                0, img.width - 1);
            const std::uint8_t* src = img.at(sx, sy);
            std::uint8_t* dst = out.at(tx, ty);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return out;
}

BinaryMask resize_mask_nearest(const BinaryMask& mask, int tw, int th) {
    BinaryMask out(tw, th);
    for (int ty = 0; ty < th; ++ty) {
        const int sy = std::clamp(
            static_cast<int>(std::floor((ty + 0.5) * mask.height() / static_cast<double>(th))),
            0, mask.height() - 1);
        for (int tx = 0; tx < tw; ++tx) {
            const int sx = std::clamp(
                static_cast<int>(std::floor((tx + 0.5) * mask.width() / static_cast<double>(tw))),
                0, mask.width() - 1);
            if (mask.at(sx, sy)) out.set(tx, ty, true);
        }
    }
    return out;
}

struct Bbox {
    int x0, y0, x1, y1;  // inclusive
};

bool tight_bbox(const BinaryMask& mask, Bbox& box) {
    box = {mask.width(), mask.height(), -1, -1};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            box.x0 = std::min(box.x0, x);
            box.y0 = std::min(box.y0, y);
            box.x1 = std::max(box.x1, x);
            box.y1 = std::max(box.y1, y);
        }
    return box.x1 >= 0;
}

// Re-crops a jittered crop so its mask touches all four patch sides again.
bool retighten(InstanceCrop& crop) {
    Bbox box;
    if (!tight_bbox(crop.mask, box)) return false;
    const int bw = box.x1 - box.x0 + 1;
    const int bh = box.y1 - box.y0 + 1;
    if (bw == crop.mask.width() && bh == crop.mask.height()) return true;
    Image patch(bw, bh);
    BinaryMask mask(bw, bh);
    for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) {
            const std::uint8_t* src = crop.patch.at(box.x0 + x, box.y0 + y);
            std::uint8_t* dst = patch.at(x, y);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
            if (crop.mask.at(box.x0 + x, box.y0 + y)) mask.set(x, y, true);
        }
    crop.patch = std::move(patch);
    crop.mask = std::move(mask);
    return true;
}

std::int64_t visible_pixels(const BinaryMask& mask, int ox, int oy, int image_w,
                            int image_h) {
    const int x_lo = std::max(0, -ox);
    const int y_lo = std::max(0, -oy);
    const int x_hi = std::min(mask.width(), image_w - ox);
    const int y_hi = std::min(mask.height(), image_h - oy);
    std::int64_t n = 0;
    for (int y = y_lo; y < y_hi; ++y)
        for (int x = x_lo; x < x_hi; ++x)
            if (mask.at(x, y)) ++n;
    return n;
}

}  // namespace

void validate(const BalanceConfig& config) {
    if (config.beta < 0.0 || config.beta >= 1.0)
        throw std::invalid_argument("BalanceConfig: beta must be in [0,1)");
    if (config.pastes_per_image < 0)
        throw std::invalid_argument("BalanceConfig: pastes_per_image must be >= 0");
    if (config.min_visible_fraction < 0.0 || config.min_visible_fraction > 1.0)
        throw std::invalid_argument("BalanceConfig: min_visible_fraction outside [0,1]");
    if (config.hflip_prob < 0.0 || config.hflip_prob > 1.0)
        throw std::invalid_argument("BalanceConfig: hflip_prob outside [0,1]");
    if (config.scale_jitter_min <= 0.0 || config.scale_jitter_max < config.scale_jitter_min)
        throw std::invalid_argument("BalanceConfig: bad scale jitter range");
}

SourcePool build_source_pool(std::span<const DatasetSample> samples) {
    SourcePool pool;
    for (const auto& sample : samples) {
        for (const auto& inst : sample.instances) {
            Bbox box;
            if (!tight_bbox(inst.mask, box)) continue;  // empty mask
            const int bw = box.x1 - box.x0 + 1;
            const int bh = box.y1 - box.y0 + 1;
            InstanceCrop crop;
            crop.patch = Image(bw, bh);
            crop.mask = BinaryMask(bw, bh);
            for (int y = 0; y < bh; ++y)
                for (int x = 0; x < bw; ++x) {
                    const std::uint8_t* src = sample.image.at(box.x0 + x, box.y0 + y);
                    std::uint8_t* dst = crop.patch.at(x, y);
                    dst[0] = src[0];
                    dst[1] = src[1];
                    dst[2] = src[2];
                    if (inst.mask.at(box.x0 + x, box.y0 + y)) crop.mask.set(x, y, true);
                }
            crop.category_id = inst.category_id;
            crop.origin_sample_id = sample.image_id;
            pool.by_category[crop.category_id].push_back(pool.crops.size());
            pool.crops.push_back(std::move(crop));
        }
    }
    return pool;
}

ClassStats collect_class_stats(std::span<const DatasetSample> samples) {
    ClassStats stats;
    for (const auto& sample : samples)
        for (const auto& inst : sample.instances) ++stats.counts[inst.category_id];
    return stats;
}

double effective_number(std::int64_t n, double beta) {
    if (beta < 0.0 || beta >= 1.0)
        throw std::invalid_argument("effective_number: beta must be in [0,1)");
    if (n < 0) throw std::invalid_argument("effective_number: n must be >= 0");
    if (n == 0) return 0.0;
    if (beta == 0.0) return 1.0;
    return (1.0 - std::pow(beta, static_cast<double>(n))) / (1.0 - beta);
}

std::map<int, double> class_sampling_weights(const ClassStats& stats, double beta) {
    std::map<int, double> weights;
    double total = 0.0;
    for (const auto& [cat, n] : stats.counts) {
        if (n >= 1) {
            const double w = 1.0 / effective_number(n, beta);
            weights[cat] = w;
            total += w;
        } else {
            weights[cat] = 0.0;
        }
    }
    if (total <= 0.0)
        throw std::invalid_argument("class_sampling_weights: no category with n >= 1");
    for (auto& [cat, w] : weights) w /= total;
    return weights;
}

std::vector<InstanceCrop> sample_instances(const SourcePool& pool,
                                           const std::map<int, double>& weights, int k,
                                           std::uint64_t seed) {
    if (k < 0) throw std::invalid_argument("sample_instances: k must be >= 0");
    std::vector<std::pair<int, double>> eligible;
    double total = 0.0;
    for (const auto& [cat, w] : weights) {
        if (w <= 0.0) continue;
        auto it = pool.by_category.find(cat);
        if (it == pool.by_category.end() || it->second.empty()) continue;
        eligible.emplace_back(cat, w);
        total += w;
    }
    if (eligible.empty() || total <= 0.0)
        throw std::invalid_argument(
            "sample_instances: no positive-weight category has crops");

    Rng rng(seed);
    std::vector<InstanceCrop> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        int cat = eligible.back().first;
        for (const auto& [c, w] : eligible) {
            acc += w;
            if (u < acc) {
                cat = c;
                break;
            }
        }
        const auto& indices = pool.by_category.at(cat);
        out.push_back(pool.crops[indices[rng.uniform_index(indices.size())]]);
    }
    return out;
}

DatasetSample paste(const DatasetSample& target, std::span<const InstanceCrop> crops,
                    const BalanceConfig& config, std::uint64_t seed) {
    validate(config);
    DatasetSample out = target;
    const int image_w = out.image.width;
    const int image_h = out.image.height;

    std::vector<std::int64_t> entry_area;
    entry_area.reserve(out.instances.size() + crops.size());
    std::int64_t next_id = 1;
    for (const auto& inst : out.instances) {
        entry_area.push_back(inst.mask.area());
        next_id = std::max(next_id, inst.instance_id + 1);
    }

    Rng rng(seed);
    const bool jitter_active =
        config.scale_jitter_min != 1.0 || config.scale_jitter_max != 1.0;

    for (const auto& source_crop : crops) {
        InstanceCrop crop = source_crop;
        if (rng.bernoulli(config.hflip_prob)) {
            crop.patch = hflip_image(crop.patch);
            crop.mask = hflip_mask(crop.mask);
        }
        if (jitter_active) {
            const double f = rng.uniform(config.scale_jitter_min, config.scale_jitter_max);
            const int tw = std::max(1, static_cast<int>(std::floor(f * crop.mask.width() + 0.5)));
            const int th = std::max(1, static_cast<int>(std::floor(f * crop.mask.height() + 0.5)));
            crop.patch = resize_image_nearest(crop.patch, tw, th);
            crop.mask = resize_mask_nearest(crop.mask, tw, th);
            if (!retighten(crop)) continue;  // jitter erased the mask
        }

        const int cw = crop.mask.width();
        const int ch = crop.mask.height();
        const std::int64_t crop_area = crop.mask.area();

        // Uniform offset over placements keeping >= half of the crop's mask
        // inside the image, found by rejection; fall back to a fully-inside
        // placement when the crop fits, otherwise keep the last attempt.
        int ox = 0, oy = 0;
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            ox = static_cast<int>(rng.uniform_int(-cw + 1, image_w - 1));
            oy = static_cast<int>(rng.uniform_int(-ch + 1, image_h - 1));
            if (2 * visible_pixels(crop.mask, ox, oy, image_w, image_h) >= crop_area) {
                placed = true;
                break;
            }
        }
        if (!placed && cw <= image_w && ch <= image_h) {
            ox = static_cast<int>(rng.uniform_int(0, image_w - cw));
            oy = static_cast<int>(rng.uniform_int(0, image_h - ch));
        }

        BinaryMask visible(image_w, image_h);
        std::int64_t visible_count = 0;
        const int x_lo = std::max(0, -ox);
        const int y_lo = std::max(0, -oy);
        const int x_hi = std::min(cw, image_w - ox);
        const int y_hi = std::min(ch, image_h - oy);
        for (int y = y_lo; y < y_hi; ++y)
            for (int x = x_lo; x < x_hi; ++x) {
                if (!crop.mask.at(x, y)) continue;
                visible.set(ox + x, oy + y, true);
                const std::uint8_t* src = crop.patch.at(x, y);
                std::uint8_t* dst = out.image.at(ox + x, oy + y);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
                ++visible_count;
            }
        if (visible_count == 0) continue;  // fully clipped out

        for (auto& inst : out.instances) inst.mask = mask_subtract(inst.mask, visible);
        out.instances.push_back({std::move(visible), crop.category_id, next_id++});
        entry_area.push_back(visible_count);
    }

    // Occlusion survival: drop instances whose remaining area fell under the
    // threshold (empty masks always go).
    std::vector<GtInstance> kept;
    kept.reserve(out.instances.size());
    for (std::size_t i = 0; i < out.instances.size(); ++i) {
        const std::int64_t area = out.instances[i].mask.area();
        if (area == 0) continue;
        if (static_cast<double>(area) <
            config.min_visible_fraction * static_cast<double>(entry_area[i]))
            continue;
        kept.push_back(std::move(out.instances[i]));
    }
    out.instances = std::move(kept);
    return out;
}

std::vector<DatasetSample> augment_dataset(std::span<const DatasetSample> samples,
                                           const BalanceConfig& config,
                                           std::uint64_t seed, AugmentReport* report,
                                           int threads) {
    validate(config);
    const ClassStats stats = collect_class_stats(samples);

    std::vector<DatasetSample> out(samples.size());
    std::vector<std::map<int, std::int64_t>> drawn(samples.size());

    if (config.pastes_per_image == 0) {
        out.assign(samples.begin(), samples.end());
    } else {
        const SourcePool pool = build_source_pool(samples);
        std::map<int, double> weights;
        if (config.mode == PasteMode::balanced) {
            weights = class_sampling_weights(stats, config.beta);
        } else {
            std::int64_t present = 0;
            for (const auto& [cat, n] : stats.counts)
                if (n >= 1) ++present;
            if (present == 0)
                throw std::invalid_argument("augment_dataset: no category with n >= 1");
            for (const auto& [cat, n] : stats.counts)
                weights[cat] = n >= 1 ? 1.0 / static_cast<double>(present) : 0.0;
        }

        parallel_for(static_cast<std::int64_t>(samples.size()), threads,
                     [&](std::int64_t i) {
                         const auto& sample = samples[static_cast<std::size_t>(i)];
                         const std::uint64_t sample_seed =
                             mix_seed(seed, static_cast<std::uint64_t>(sample.image_id));
                         const auto crops =
                             sample_instances(pool, weights, config.pastes_per_image,
                                              mix_seed(sample_seed, "pick"));
                         for (const auto& c : crops)
                             ++drawn[static_cast<std::size_t>(i)][c.category_id];
                         out[static_cast<std::size_t>(i)] =
                             paste(sample, crops, config, mix_seed(sample_seed, "paste"));
                     });
    }

    if (report) {
        report->before_counts = stats.counts;
        report->after_counts.clear();
        report->pasted_counts.clear();
        for (const auto& sample : out)
            for (const auto& inst : sample.instances)
                ++report->after_counts[inst.category_id];
        for (const auto& d : drawn)
            for (const auto& [cat, n] : d) report->pasted_counts[cat] += n;
    }
    return out;
}

}  // namespace maskfuse
