#include "prevcare/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace prevcare {

double roc_auc(const Vector& scores, const Vector& labels) {
    if (scores.size() != labels.size()) throw DataError("roc_auc: size mismatch");
    const auto n = scores.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores(a) < scores(b); });
    // Mid-ranks over tie groups.
    double rank_sum_pos = 0.0;
    double n_pos = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores(idx[j + 1]) == scores(idx[i])) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels(idx[k]) > 0.5) {
                rank_sum_pos += mid;
                n_pos += 1.0;
            }
        }
        i = j + 1;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw DataError("roc_auc: both classes are required");
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace prevcare
