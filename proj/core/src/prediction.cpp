#include "maskfuse/prediction.hpp"

#include <stdexcept>
#include <string>

namespace maskfuse {

void validate(const PredictionSet& set) {
    if (set.width < 1 || set.height < 1)
        throw std::invalid_argument("PredictionSet: dimensions must be >= 1x1");
    for (std::size_t i = 0; i < set.predictions.size(); ++i) {
        const auto& p = set.predictions[i];
        if (p.mask.width() != set.width || p.mask.height() != set.height)
            throw std::invalid_argument("PredictionSet: prediction " + std::to_string(i) +
                                        " mask resolution differs from the set");
        if (p.score < 0.0 || p.score > 1.0)
            throw std::invalid_argument("PredictionSet: prediction " + std::to_string(i) +
                                        " score outside [0,1]");
    }
}

std::vector<std::vector<double>> iou_matrix(const PredictionSet& set) {
    const std::size_t n = set.predictions.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = mask_iou(set.predictions[i].mask, set.predictions[i].mask);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = mask_iou(set.predictions[i].mask, set.predictions[j].mask);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    return m;
}

}  // namespace maskfuse
