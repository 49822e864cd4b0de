#pragma once

#include "prevcare/core.hpp"

#include <optional>
#include <vector>

namespace prevcare {

/// Flat binary tree node. Leaves have feature == -1 and no children.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;
    double weight = 0.0;  // training weight (or sample count) reaching the node

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int leaf_index(const Eigen::Ref<const Vector>& x) const;
    double predict(const Eigen::Ref<const Vector>& x) const { return nodes[leaf_index(x)].value; }
    int depth() const;
    int n_leaves() const;
};

enum class SplitCriterion { variance, gini, entropy };

struct CartParams {
    SplitCriterion criterion = SplitCriterion::variance;
    int max_depth = -1;  // unlimited when negative
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int max_features = 0;  // 0 = consider all features
    double min_impurity_decrease = 1e-12;
};

/// Weighted CART on targets `y`. Gini/entropy assume y in {0,1}; leaves hold the weighted mean.
/// `rows` selects (possibly repeated) training rows; empty means all rows.
Tree fit_cart(const Matrix& X, const Vector& y, const Vector& weights, const CartParams& params,
              Rng& rng, const std::vector<int>& rows = {});

/// Best single split of one feature by exhaustive threshold scan, for diagnostics and tests.
struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};
std::optional<SplitChoice> best_split(const Matrix& X, const Vector& y, const Vector& weights,
                                      SplitCriterion criterion, int min_samples_leaf = 1);

}  // namespace prevcare
