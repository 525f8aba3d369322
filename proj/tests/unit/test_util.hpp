#pragma once

#include <algorithm>
#include <vector>

#include "maskfuse/prediction.hpp"
#include "maskfuse/rng.hpp"

namespace testutil {

inline maskfuse::BinaryMask random_mask(maskfuse::Rng& rng, int w, int h,
                                        double density) {
    maskfuse::BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.uniform() < density) m.set(x, y, true);
    return m;
}

// Filled axis-aligned rectangle, inclusive corners clamped to the grid.
inline maskfuse::BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    maskfuse::BinaryMask m(w, h);
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) m.set(x, y, true);
    return m;
}

inline maskfuse::BinaryMask random_blob(maskfuse::Rng& rng, int w, int h) {
    const int bw = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(w)));
    const int bh = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(h)));
    const int x0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(w - bw + 1)));
    const int y0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(h - bh + 1)));
    return rect_mask(w, h, x0, y0, x0 + bw - 1, y0 + bh - 1);
}

// Overlapping blobs with strictly distinct scores, the common NMS input.
inline maskfuse::PredictionSet random_crowd(maskfuse::Rng& rng, int n, int w, int h,
                                            int categories) {
    maskfuse::PredictionSet set;
    set.image_id = 1;
    set.width = w;
    set.height = h;
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) scores.push_back((i + 1) / static_cast<double>(n + 1));
    // deterministic shuffle
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(scores[i], scores[j]);
    }
    for (int i = 0; i < n; ++i) {
        maskfuse::InstancePrediction p;
        p.mask = random_blob(rng, w, h);
        p.category_id = 1 + static_cast<int>(
                                rng.uniform_index(static_cast<std::uint64_t>(categories)));
        p.score = scores[static_cast<std::size_t>(i)];
        set.predictions.push_back(std::move(p));
    }
    return set;
}

// Output comparison that ignores ordering: multiset of (category, score, mask).
inline bool same_prediction_multiset(const maskfuse::PredictionSet& a,
                                     const maskfuse::PredictionSet& b) {
    if (a.predictions.size() != b.predictions.size()) return false;
    std::vector<bool> used(b.predictions.size(), false);
    for (const auto& pa : a.predictions) {
        bool found = false;
        for (std::size_t j = 0; j < b.predictions.size(); ++j) {
            if (used[j]) continue;
            const auto& pb = b.predictions[j];
            if (pa.category_id == pb.category_id && pa.score == pb.score &&
                pa.mask == pb.mask) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace testutil
