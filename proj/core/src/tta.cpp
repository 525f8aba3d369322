#include "maskfuse/tta.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace maskfuse {

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

BinaryMask resize_nearest(const BinaryMask& mask, int tw, int th) {
    const int sw = mask.width();
    const int sh = mask.height();
    std::vector<int> src_x(tw), src_y(th);
    for (int tx = 0; tx < tw; ++tx)
        src_x[tx] = std::clamp(
            static_cast<int>(std::floor((tx + 0.5) * sw / static_cast<double>(tw))), 0,
            sw - 1);
    for (int ty = 0; ty < th; ++ty)
        src_y[ty] = std::clamp(
            static_cast<int>(std::floor((ty + 0.5) * sh / static_cast<double>(th))), 0,
            sh - 1);
    BinaryMask out(tw, th);
    for (int ty = 0; ty < th; ++ty)
        for (int tx = 0; tx < tw; ++tx)
            if (mask.at(src_x[tx], src_y[ty])) out.set(tx, ty, true);
    return out;
}

BinaryMask resize_bilinear_threshold(const BinaryMask& mask, int tw, int th) {
    const int sw = mask.width();
    const int sh = mask.height();
    struct Axis {
        int lo, hi;
        double frac;
    };
    std::vector<Axis> ax(tw), ay(th);
    for (int tx = 0; tx < tw; ++tx) {
        const double fx = (tx + 0.5) * sw / static_cast<double>(tw) - 0.5;
        const double fl = std::floor(fx);
        ax[tx] = {std::clamp(static_cast<int>(fl), 0, sw - 1),
                  std::clamp(static_cast<int>(fl) + 1, 0, sw - 1), fx - fl};
    }
    for (int ty = 0; ty < th; ++ty) {
        const double fy = (ty + 0.5) * sh / static_cast<double>(th) - 0.5;
        const double fl = std::floor(fy);
        ay[ty] = {std::clamp(static_cast<int>(fl), 0, sh - 1),
                  std::clamp(static_cast<int>(fl) + 1, 0, sh - 1), fy - fl};
    }
    BinaryMask out(tw, th);
    for (int ty = 0; ty < th; ++ty) {
        const auto& y = ay[ty];
        for (int tx = 0; tx < tw; ++tx) {
            const auto& x = ax[tx];
            const double v00 = mask.at(x.lo, y.lo) ? 1.0 : 0.0;
            const double v10 = mask.at(x.hi, y.lo) ? 1.0 : 0.0;
            const double v01 = mask.at(x.lo, y.hi) ? 1.0 : 0.0;
            const double v11 = mask.at(x.hi, y.hi) ? 1.0 : 0.0;
            const double top = v00 + (v10 - v00) * x.frac;
            const double bot = v01 + (v11 - v01) * x.frac;
            const double v = top + (bot - top) * y.frac;
            if (v >= 0.5) out.set(tx, ty, true);
        }
    }
    return out;
}

}  // namespace

std::pair<int, int> transformed_size(const TtaTransform& t, int orig_w, int orig_h) {
    if (t.scale <= 0.0) throw std::invalid_argument("TtaTransform: scale must be > 0");
    return {std::max(1, round_half_up(t.scale * orig_w)),
            std::max(1, round_half_up(t.scale * orig_h))};
}

std::string transform_tag(const TtaTransform& t) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "s%g%s", t.scale, t.hflip ? "+hflip" : "");
    return buf;
}

void validate(const CalibrationConfig& calibration) {
    for (const auto& [source, mult] : calibration.source_multipliers)
        if (mult <= 0.0)
            throw std::invalid_argument("CalibrationConfig: multiplier for '" + source +
                                        "' must be > 0");
}

BinaryMask resize_mask(const BinaryMask& mask, int target_w, int target_h,
                       ResizeMethod method) {
    if (target_w < 1 || target_h < 1)
        throw std::invalid_argument("resize_mask: target dimensions must be >= 1x1");
    if (target_w == mask.width() && target_h == mask.height()) return mask;
    return method == ResizeMethod::nearest
               ? resize_nearest(mask, target_w, target_h)
               : resize_bilinear_threshold(mask, target_w, target_h);
}

BinaryMask hflip_mask(const BinaryMask& mask) {
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) out.set(mask.width() - 1 - x, y, true);
    return out;
}

PredictionSet invert_predictions(const TtaPrediction& tta, ResizeMethod method) {
    validate(tta.predictions);
    const auto [tw, th] = transformed_size(tta.transform, tta.original_width,
                                           tta.original_height);
    if (tta.predictions.width != tw || tta.predictions.height != th)
        throw std::invalid_argument(
            "invert_predictions: prediction resolution does not match the transform");

    const std::string tag = transform_tag(tta.transform);
    PredictionSet out;
    out.image_id = tta.predictions.image_id;
    out.width = tta.original_width;
    out.height = tta.original_height;
    out.predictions.reserve(tta.predictions.predictions.size());
    for (const auto& p : tta.predictions.predictions) {
        InstancePrediction inv;
        const BinaryMask& unflipped = tta.transform.hflip ? hflip_mask(p.mask) : p.mask;
        inv.mask = resize_mask(unflipped, tta.original_width, tta.original_height, method);
        inv.category_id = p.category_id;
        inv.score = p.score;
        inv.source = p.source.empty() ? tag : p.source + "|" + tag;
        out.predictions.push_back(std::move(inv));
    }
    return out;
}

PredictionSet pool(std::span<const PredictionSet> sets,
                   const CalibrationConfig& calibration) {
    if (sets.empty()) throw std::invalid_argument("pool: no input sets");
    validate(calibration);
    for (const auto& s : sets) {
        validate(s);
        if (s.image_id != sets.front().image_id || s.width != sets.front().width ||
            s.height != sets.front().height)
            throw std::invalid_argument("pool: sets disagree on image_id or resolution");
    }
    PredictionSet out;
    out.image_id = sets.front().image_id;
    out.width = sets.front().width;
    out.height = sets.front().height;
    for (const auto& s : sets) {
        for (const auto& p : s.predictions) {
            InstancePrediction q = p;
            q.score = std::clamp(q.score * calibration.multiplier_for(q.source), 0.0, 1.0);
            out.predictions.push_back(std::move(q));
        }
    }
    return out;
}

PredictionSet tta_merge(std::span<const TtaPrediction> preds, const NmsConfig& nms,
                        ResizeMethod method) {
    if (preds.empty()) throw std::invalid_argument("tta_merge: no input predictions");
    for (const auto& t : preds)
        if (t.original_width != preds.front().original_width ||
            t.original_height != preds.front().original_height)
            throw std::invalid_argument("tta_merge: inputs disagree on original geometry");
    std::vector<PredictionSet> inverted;
    inverted.reserve(preds.size());
    for (const auto& t : preds) inverted.push_back(invert_predictions(t, method));
    return matrix_nms(pool(inverted, CalibrationConfig{}), nms);
}

PredictionSet ensemble(std::span<const PredictionSet> model_outputs,
                       const CalibrationConfig& calibration, const NmsConfig& nms) {
    return matrix_nms(pool(model_outputs, calibration), nms);
}

}  // namespace maskfuse
