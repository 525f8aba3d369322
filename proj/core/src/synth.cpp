#include "maskfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "maskfuse/parallel.hpp"
#include "maskfuse/rng.hpp"

namespace maskfuse {

namespace {

BinaryMask draw_rectangle(int image_w, int image_h, int cx, int cy, int half_w,
                          int half_h) {
    BinaryMask m(image_w, image_h);
    const int x0 = std::max(0, cx - half_w);
    const int x1 = std::min(image_w - 1, cx + half_w);
    const int y0 = std::max(0, cy - half_h);
    const int y1 = std::min(image_h - 1, cy + half_h);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m.set(x, y, true);
    return m;
}

BinaryMask draw_ellipse(int image_w, int image_h, int cx, int cy, int half_w,
                        int half_h) {
    BinaryMask m(image_w, image_h);
    const double aw = std::max(1, half_w);
    const double ah = std::max(1, half_h);
    const int x0 = std::max(0, cx - half_w);
    const int x1 = std::min(image_w - 1, cx + half_w);
    const int y0 = std::max(0, cy - half_h);
    const int y1 = std::min(image_h - 1, cy + half_h);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x - cx) / aw;
            const double dy = (y - cy) / ah;
            if (dx * dx + dy * dy <= 1.0) m.set(x, y, true);
        }
    return m;
}

BinaryMask shift_mask(const BinaryMask& mask, int dx, int dy) {
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx >= 0 && ny >= 0 && nx < mask.width() && ny < mask.height())
                out.set(nx, ny, true);
        }
    return out;
}

BinaryMask grow_mask(const BinaryMask& mask) {
    BinaryMask out = mask;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            if (x > 0) out.set(x - 1, y, true);
            if (y > 0) out.set(x, y - 1, true);
            if (x + 1 < mask.width()) out.set(x + 1, y, true);
            if (y + 1 < mask.height()) out.set(x, y + 1, true);
        }
    return out;
}

BinaryMask shrink_mask(const BinaryMask& mask) {
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const bool keep = x > 0 && y > 0 && x + 1 < mask.width() &&
                              y + 1 < mask.height() && mask.at(x - 1, y) &&
                              mask.at(x + 1, y) && mask.at(x, y - 1) && mask.at(x, y + 1);
            if (keep) out.set(x, y, true);
        }
    return out;
}

std::array<std::uint8_t, 3> category_color(int category_id, std::uint64_t seed) {
    Rng rng(mix_seed(seed, mix_seed(0x636f6c6f72ull, static_cast<std::uint64_t>(category_id))));
    return {static_cast<std::uint8_t>(64 + rng.uniform_index(192)),
            static_cast<std::uint8_t>(64 + rng.uniform_index(192)),
            static_cast<std::uint8_t>(64 + rng.uniform_index(192))};
}

BinaryMask jitter_mask(const BinaryMask& mask, const NoiseModel& noise, Rng& rng) {
    BinaryMask out = mask;
    const int j = static_cast<int>(std::lround(noise.jitter_px));
    if (j > 0) {
        const int dx = static_cast<int>(rng.uniform_int(-j, j));
        const int dy = static_cast<int>(rng.uniform_int(-j, j));
        if (dx != 0 || dy != 0) out = shift_mask(out, dx, dy);
        const double roll = rng.uniform();
        if (roll < 1.0 / 3.0)
            out = grow_mask(out);
        else if (roll < 2.0 / 3.0)
            out = shrink_mask(out);
    }
    return out;
}

}  // namespace

void validate(const SynthConfig& config) {
    if (config.image_count < 1) throw std::invalid_argument("SynthConfig: image_count >= 1");
    if (config.width < 32 || config.height < 32)
        throw std::invalid_argument("SynthConfig: dimensions must be >= 32");
    if (config.category_count < 1)
        throw std::invalid_argument("SynthConfig: category_count >= 1");
    if (config.min_instances < 0 || config.max_instances < config.min_instances)
        throw std::invalid_argument("SynthConfig: bad instance count range");
    if (config.model_count < 1) throw std::invalid_argument("SynthConfig: model_count >= 1");
    if (config.longtail_exponent < 0.0)
        throw std::invalid_argument("SynthConfig: longtail_exponent must be >= 0");
    for (double p : {config.noise.drop_prob, config.noise.duplicate_prob})
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("SynthConfig: probabilities must lie in [0,1]");
    if (config.noise.jitter_px < 0.0 || config.noise.score_noise < 0.0)
        throw std::invalid_argument("SynthConfig: noise magnitudes must be >= 0");
}

std::vector<CocoCategory> synth_categories(const SynthConfig& config) {
    std::vector<CocoCategory> cats;
    cats.reserve(static_cast<std::size_t>(config.category_count));
    for (int c = 1; c <= config.category_count; ++c) {
        char name[16];
        std::snprintf(name, sizeof(name), "cat%02d", c);
        cats.push_back({c, name});
    }
    return cats;
}

SynthOutput synth(const SynthConfig& config, int threads) {
    validate(config);

    std::vector<double> category_weights(static_cast<std::size_t>(config.category_count));
    double weight_total = 0.0;
    for (int c = 0; c < config.category_count; ++c) {
        category_weights[static_cast<std::size_t>(c)] =
            std::pow(static_cast<double>(c + 1), -config.longtail_exponent);
        weight_total += category_weights[static_cast<std::size_t>(c)];
    }

    SynthOutput out;
    out.dataset.resize(static_cast<std::size_t>(config.image_count));
    out.model_predictions.assign(static_cast<std::size_t>(config.model_count), {});
    for (auto& per_model : out.model_predictions)
        per_model.resize(static_cast<std::size_t>(config.image_count));

    parallel_for(config.image_count, threads, [&](std::int64_t ii) {
        const std::int64_t image_id = ii + 1;
        const std::uint64_t image_seed =
            mix_seed(mix_seed(config.seed, "image"), static_cast<std::uint64_t>(image_id));
        Rng rng(image_seed);

        DatasetSample sample;
        sample.image_id = image_id;
        sample.image = Image(config.width, config.height, {40, 40, 48});

        const int target = static_cast<int>(
            rng.uniform_int(config.min_instances, config.max_instances));
        BinaryMask occupied(config.width, config.height);
        std::int64_t next_instance = 1;
        for (int k = 0; k < target; ++k) {
            // Long-tail category draw.
            const double u = rng.uniform() * weight_total;
            double acc = 0.0;
            int category = config.category_count;
            for (int c = 0; c < config.category_count; ++c) {
                acc += category_weights[static_cast<std::size_t>(c)];
                if (u < acc) {
                    category = c + 1;
                    break;
                }
            }

            bool use_rect = config.shapes == ShapeFamily::rectangles;
            if (config.shapes == ShapeFamily::mixed) use_rect = rng.bernoulli(0.5);

            // Rejection-place disjoint shapes; give up quietly when crowded.
            for (int attempt = 0; attempt < 16; ++attempt) {
                const int half_w = static_cast<int>(
                    rng.uniform_int(config.width / 24 + 2, config.width / 8 + 2));
                const int half_h = static_cast<int>(
                    rng.uniform_int(config.height / 24 + 2, config.height / 8 + 2));
                const int cx = static_cast<int>(rng.uniform_int(half_w, config.width - 1 - half_w));
                const int cy = static_cast<int>(rng.uniform_int(half_h, config.height - 1 - half_h));
                BinaryMask m = use_rect
                                   ? draw_rectangle(config.width, config.height, cx, cy,
                                                    half_w, half_h)
                                   : draw_ellipse(config.width, config.height, cx, cy,
                                                  half_w, half_h);
                if (intersection_area(m, occupied) != 0) continue;
                occupied = mask_or(occupied, m);
                const auto color = category_color(category, config.seed);
                blend_mask(sample.image, m, color, 1.0);
                sample.instances.push_back({std::move(m), category, next_instance++});
                break;
            }
        }
        out.dataset[static_cast<std::size_t>(ii)] = std::move(sample);
    });

    // Simulated detectors perturb the clean ground truth independently.
    parallel_for(static_cast<std::int64_t>(config.model_count) * config.image_count,
                 threads, [&](std::int64_t flat) {
                     const int m = static_cast<int>(flat / config.image_count);
                     const std::int64_t ii = flat % config.image_count;
                     const DatasetSample& sample = out.dataset[static_cast<std::size_t>(ii)];
                     Rng rng(mix_seed(
                         mix_seed(mix_seed(config.seed, "model"),
                                  static_cast<std::uint64_t>(m)),
                         static_cast<std::uint64_t>(sample.image_id)));

                     PredictionSet set;
                     set.image_id = sample.image_id;
                     set.width = sample.image.width;
                     set.height = sample.image.height;
                     char tag[16];
                     std::snprintf(tag, sizeof(tag), "model%d", m);

                     for (const auto& inst : sample.instances) {
                         if (rng.bernoulli(config.noise.drop_prob)) continue;
                         BinaryMask mask = jitter_mask(inst.mask, config.noise, rng);
                         const double score =
                             std::clamp(rng.normal(0.8, config.noise.score_noise), 0.0, 1.0);
                         if (mask.area() == 0 || score == 0.0) continue;
                         set.predictions.push_back({mask, inst.category_id, score, tag});
                         if (rng.bernoulli(config.noise.duplicate_prob)) {
                             BinaryMask dup = jitter_mask(inst.mask, config.noise, rng);
                             const double dup_score = score * rng.uniform(0.5, 0.9);
                             if (dup.area() > 0 && dup_score > 0.0)
                                 set.predictions.push_back(
                                     {std::move(dup), inst.category_id, dup_score, tag});
                         }
                     }
                     out.model_predictions[static_cast<std::size_t>(m)]
                                          [static_cast<std::size_t>(ii)] = std::move(set);
                 });

    return out;
}

}  // namespace maskfuse
