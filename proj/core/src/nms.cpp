#include "maskfuse/nms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace maskfuse {

namespace {

constexpr double kLinearDenominatorFloor = 1e-6;

// Sort order used throughout: score descending, then category_id ascending,
// then stable input index.
std::vector<std::size_t> sorted_order(const std::vector<InstancePrediction>& preds) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
        return preds[a].category_id < preds[b].category_id;
    });
    return order;
}

}  // namespace

void validate(const NmsConfig& config) {
    if (config.sigma <= 0.0) throw std::invalid_argument("NmsConfig: sigma must be > 0");
    if (config.score_threshold < 0.0 || config.score_threshold > 1.0)
        throw std::invalid_argument("NmsConfig: score_threshold outside [0,1]");
    if (config.max_keep < 1) throw std::invalid_argument("NmsConfig: max_keep must be >= 1");
    if (config.pre_top_k && *config.pre_top_k < 1)
        throw std::invalid_argument("NmsConfig: pre_top_k must be >= 1");
}

std::vector<double> decay_factors(std::span<const double> scores,
                                  const std::vector<std::vector<double>>& ious,
                                  const NmsConfig& config) {
    validate(config);
    const std::size_t n = scores.size();
    if (ious.size() != n)
        throw std::invalid_argument("decay_factors: IoU matrix size differs from scores");
    for (std::size_t i = 1; i < n; ++i)
        if (scores[i] > scores[i - 1])
            throw std::invalid_argument("decay_factors: scores must be sorted descending");

    // iou_max[i] = strongest overlap from anything scored above i.
    std::vector<double> iou_max(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) iou_max[i] = std::max(iou_max[i], ious[k][i]);

    std::vector<double> decay(n, 1.0);
    for (std::size_t j = 1; j < n; ++j) {
        double worst = 1.0;
        for (std::size_t i = 0; i < j; ++i) {
            double ratio;
            if (config.kernel == NmsKernel::gaussian) {
                // f(x)/f(m) = exp((m^2 - x^2)/sigma), evaluated with one exp.
                const double x = ious[i][j];
                const double m = iou_max[i];
                ratio = std::exp((m * m - x * x) / config.sigma);
            } else {
                const double denom = std::max(1.0 - iou_max[i], kLinearDenominatorFloor);
                ratio = (1.0 - ious[i][j]) / denom;
            }
            worst = std::min(worst, ratio);
        }
        decay[j] = worst;
    }
    return decay;
}

PredictionSet matrix_nms(const PredictionSet& set, const NmsConfig& config) {
    validate(config);
    validate(set);

    std::vector<std::size_t> order = sorted_order(set.predictions);
    if (config.pre_top_k && order.size() > static_cast<std::size_t>(*config.pre_top_k))
        order.resize(static_cast<std::size_t>(*config.pre_top_k));

    PredictionSet sorted;
    sorted.image_id = set.image_id;
    sorted.width = set.width;
    sorted.height = set.height;
    sorted.predictions.reserve(order.size());
    for (std::size_t idx : order) sorted.predictions.push_back(set.predictions[idx]);

    const std::size_t n = sorted.predictions.size();
    const auto ious = iou_matrix(sorted);

    std::vector<double> decay(n, 1.0);
    if (config.category_mode == CategoryMode::agnostic) {
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = sorted.predictions[i].score;
        decay = decay_factors(scores, ious, config);
    } else {
        // Group by category; each group stays sorted because the global order is.
        std::vector<int> cats;
        for (const auto& p : sorted.predictions)
            if (std::find(cats.begin(), cats.end(), p.category_id) == cats.end())
                cats.push_back(p.category_id);
        for (int cat : cats) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (sorted.predictions[i].category_id == cat) members.push_back(i);
            std::vector<double> scores(members.size());
            std::vector<std::vector<double>> sub(members.size(),
                                                 std::vector<double>(members.size()));
            for (std::size_t a = 0; a < members.size(); ++a) {
                scores[a] = sorted.predictions[members[a]].score;
                for (std::size_t b = 0; b < members.size(); ++b)
                    sub[a][b] = ious[members[a]][members[b]];
            }
            const auto sub_decay = decay_factors(scores, sub, config);
            for (std::size_t a = 0; a < members.size(); ++a)
                decay[members[a]] = sub_decay[a];
        }
    }

    struct Scored {
        double decayed;
        std::size_t sorted_index;
    };
    std::vector<Scored> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double decayed = sorted.predictions[i].score * decay[i];
        if (decayed < config.score_threshold) continue;
        kept.push_back({decayed, i});
    }
    std::stable_sort(kept.begin(), kept.end(), [&](const Scored& a, const Scored& b) {
        if (a.decayed != b.decayed) return a.decayed > b.decayed;
        return sorted.predictions[a.sorted_index].category_id <
               sorted.predictions[b.sorted_index].category_id;
    });
    if (kept.size() > static_cast<std::size_t>(config.max_keep))
        kept.resize(static_cast<std::size_t>(config.max_keep));

    PredictionSet out;
    out.image_id = set.image_id;
    out.width = set.width;
    out.height = set.height;
    out.predictions.reserve(kept.size());
    for (const auto& k : kept) {
        InstancePrediction p = sorted.predictions[k.sorted_index];
        p.score = k.decayed;
        out.predictions.push_back(std::move(p));
    }
    return out;
}

PredictionSet greedy_nms(const PredictionSet& set, double iou_threshold,
                         CategoryMode category_mode) {
    validate(set);
    const std::vector<std::size_t> order = sorted_order(set.predictions);

    PredictionSet out;
    out.image_id = set.image_id;
    out.width = set.width;
    out.height = set.height;
    for (std::size_t idx : order) {
        const auto& cand = set.predictions[idx];
        bool suppressed = false;
        for (const auto& keep : out.predictions) {
            if (category_mode == CategoryMode::per_category &&
                keep.category_id != cand.category_id)
                continue;
            if (mask_iou(keep.mask, cand.mask) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) out.predictions.push_back(cand);
    }
    return out;
}

}  // namespace maskfuse
