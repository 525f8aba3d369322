#include "maskfuse/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "maskfuse/parallel.hpp"

namespace maskfuse {

namespace {

// Prediction indices by (score desc, input index asc), capped per image.
std::vector<int> capped_order(const PredictionSet& set, int max_dets) {
    std::vector<int> order(set.predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return set.predictions[a].score > set.predictions[b].score;
    });
    if (order.size() > static_cast<std::size_t>(max_dets))
        order.resize(static_cast<std::size_t>(max_dets));
    return order;
}

// Greedy assignment for one (image, category, threshold); prediction rows of
// `ious` must be in descending score order already.
std::vector<PredMatch> greedy_match(const std::vector<const InstancePrediction*>& preds,
                                    const std::vector<int>& pred_inputs,
                                    std::size_t gt_count,
                                    const std::vector<std::vector<double>>& ious,
                                    double iou_thr, std::int64_t image_id) {
    std::vector<bool> gt_taken(gt_count, false);
    std::vector<PredMatch> out;
    out.reserve(preds.size());
    for (std::size_t p = 0; p < preds.size(); ++p) {
        double best = iou_thr;
        int match = -1;
        for (std::size_t g = 0; g < gt_count; ++g) {
            if (gt_taken[g]) continue;
            const double iou = ious[p][g];
            if (iou >= best && (match < 0 || iou > best)) {
                best = iou;
                match = static_cast<int>(g);
            }
        }
        if (match >= 0) gt_taken[static_cast<std::size_t>(match)] = true;
        out.push_back({preds[p]->score, match >= 0, image_id, pred_inputs[p]});
    }
    return out;
}

}  // namespace

EvalConfig::EvalConfig() {
    for (int k = 0; k < 10; ++k) iou_thresholds.push_back((50 + 5 * k) / 100.0);
}

void validate(const EvalConfig& config) {
    if (config.iou_thresholds.empty())
        throw std::invalid_argument("EvalConfig: empty iou_thresholds");
    for (std::size_t i = 0; i < config.iou_thresholds.size(); ++i) {
        const double t = config.iou_thresholds[i];
        if (t <= 0.0 || t > 1.0)
            throw std::invalid_argument("EvalConfig: thresholds must lie in (0,1]");
        if (i > 0 && t <= config.iou_thresholds[i - 1])
            throw std::invalid_argument("EvalConfig: thresholds must strictly increase");
    }
    if (config.max_dets < 1) throw std::invalid_argument("EvalConfig: max_dets must be >= 1");
    if (config.recall_points < 2)
        throw std::invalid_argument("EvalConfig: recall_points must be >= 2");
}

std::vector<PredMatch> match_predictions(const PredictionSet& preds,
                                         const GroundTruth& gts, int category_id,
                                         double iou_thr, int max_dets) {
    std::vector<const InstancePrediction*> cat_preds;
    std::vector<int> inputs;
    for (int idx : capped_order(preds, max_dets)) {
        const auto& p = preds.predictions[static_cast<std::size_t>(idx)];
        if (p.category_id != category_id) continue;
        cat_preds.push_back(&p);
        inputs.push_back(idx);
    }
    std::vector<const GtInstance*> cat_gts;
    for (const auto& g : gts.instances)
        if (g.category_id == category_id) cat_gts.push_back(&g);

    std::vector<std::vector<double>> ious(cat_preds.size(),
                                          std::vector<double>(cat_gts.size(), 0.0));
    for (std::size_t p = 0; p < cat_preds.size(); ++p)
        for (std::size_t g = 0; g < cat_gts.size(); ++g)
            ious[p][g] = mask_iou(cat_preds[p]->mask, cat_gts[g]->mask);

    return greedy_match(cat_preds, inputs, cat_gts.size(), ious, iou_thr, gts.image_id);
}

double average_precision(std::vector<PredMatch> matches, std::int64_t gt_count,
                         const EvalConfig& config) {
    validate(config);
    if (gt_count <= 0)
        throw std::invalid_argument(
            "average_precision: undefined for a category with no ground truth");
    if (matches.empty()) return 0.0;

    std::sort(matches.begin(), matches.end(), [](const PredMatch& a, const PredMatch& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.input_index < b.input_index;
    });

    const std::size_t n = matches.size();
    std::vector<double> recall(n), precision(n);
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (matches[i].matched)
            ++tp;
        else
            ++fp;
        recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
        precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    // Monotone envelope from the right.
    for (std::size_t i = n - 1; i-- > 0;)
        precision[i] = std::max(precision[i], precision[i + 1]);

    const int points = config.recall_points;
    double sum = 0.0;
    for (int k = 0; k < points; ++k) {
        const double r = static_cast<double>(k) / static_cast<double>(points - 1);
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end())
            sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    return sum / static_cast<double>(points);
}

ApReport evaluate(std::span<const PredictionSet> predictions,
                  std::span<const GroundTruth> ground_truth, const EvalConfig& config,
                  int threads) {
    validate(config);

    std::unordered_map<std::int64_t, const GroundTruth*> gt_by_image;
    for (const auto& gt : ground_truth) {
        if (!gt_by_image.emplace(gt.image_id, &gt).second)
            throw std::invalid_argument("evaluate: duplicate ground-truth image_id " +
                                        std::to_string(gt.image_id));
    }
    {
        std::set<std::int64_t> seen;
        for (const auto& p : predictions) {
            validate(p);
            if (!seen.insert(p.image_id).second)
                throw std::invalid_argument("evaluate: duplicate prediction set for image " +
                                            std::to_string(p.image_id));
            auto it = gt_by_image.find(p.image_id);
            if (it != gt_by_image.end() &&
                (p.width != it->second->width || p.height != it->second->height))
                throw std::invalid_argument("evaluate: prediction resolution differs from "
                                            "ground truth for image " +
                                            std::to_string(p.image_id));
        }
    }

    std::map<int, std::int64_t> gt_counts;
    for (const auto& gt : ground_truth)
        for (const auto& inst : gt.instances) ++gt_counts[inst.category_id];

    std::vector<int> categories;
    for (const auto& [cat, n] : gt_counts)
        if (n >= 1) categories.push_back(cat);

    const std::size_t n_thr = config.iou_thresholds.size();
    const std::size_t n_cat = categories.size();
    static const GroundTruth kEmptyGt{};

    // matches[image][category][threshold]
    std::vector<std::vector<std::vector<std::vector<PredMatch>>>> per_image(
        predictions.size());
    parallel_for(static_cast<std::int64_t>(predictions.size()), threads, [&](std::int64_t ii) {
        const auto& pred_set = predictions[static_cast<std::size_t>(ii)];
        auto git = gt_by_image.find(pred_set.image_id);
        const GroundTruth& gt = git == gt_by_image.end() ? kEmptyGt : *git->second;

        auto& slot = per_image[static_cast<std::size_t>(ii)];
        slot.assign(n_cat, std::vector<std::vector<PredMatch>>(n_thr));

        const std::vector<int> order = capped_order(pred_set, config.max_dets);
        for (std::size_t c = 0; c < n_cat; ++c) {
            const int cat = categories[c];
            std::vector<const InstancePrediction*> cat_preds;
            std::vector<int> inputs;
            for (int idx : order) {
                const auto& p = pred_set.predictions[static_cast<std::size_t>(idx)];
                if (p.category_id != cat) continue;
                cat_preds.push_back(&p);
                inputs.push_back(idx);
            }
            if (cat_preds.empty()) continue;
            std::vector<const GtInstance*> cat_gts;
            for (const auto& g : gt.instances)
                if (g.category_id == cat) cat_gts.push_back(&g);

            std::vector<std::vector<double>> ious(
                cat_preds.size(), std::vector<double>(cat_gts.size(), 0.0));
            for (std::size_t p = 0; p < cat_preds.size(); ++p)
                for (std::size_t g = 0; g < cat_gts.size(); ++g)
                    ious[p][g] = mask_iou(cat_preds[p]->mask, cat_gts[g]->mask);

            for (std::size_t t = 0; t < n_thr; ++t)
                slot[c][t] = greedy_match(cat_preds, inputs, cat_gts.size(), ious,
                                          config.iou_thresholds[t], pred_set.image_id);
        }
    });

    ApReport report;
    report.iou_thresholds = config.iou_thresholds;
    report.gt_counts = gt_counts;
    report.per_threshold_ap.assign(n_thr, 0.0);

    for (std::size_t c = 0; c < n_cat; ++c) {
        const int cat = categories[c];
        std::vector<double> ap_per_thr(n_thr, 0.0);
        for (std::size_t t = 0; t < n_thr; ++t) {
            std::vector<PredMatch> all;
            for (const auto& slot : per_image)
                if (!slot.empty())
                    all.insert(all.end(), slot[c][t].begin(), slot[c][t].end());
            ap_per_thr[t] = average_precision(std::move(all), gt_counts.at(cat), config);
        }
        report.per_category_per_threshold[cat] = ap_per_thr;
        report.per_category_ap[cat] =
            std::accumulate(ap_per_thr.begin(), ap_per_thr.end(), 0.0) /
            static_cast<double>(n_thr);
        for (std::size_t t = 0; t < n_thr; ++t) report.per_threshold_ap[t] += ap_per_thr[t];
    }

    if (n_cat > 0) {
        for (auto& v : report.per_threshold_ap) v /= static_cast<double>(n_cat);
        double total = 0.0;
        for (const auto& [cat, ap] : report.per_category_ap) total += ap;
        report.map = total / static_cast<double>(n_cat);
    }
    return report;
}

}  // namespace maskfuse
