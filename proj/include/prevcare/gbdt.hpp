#pragma once

#include "prevcare/tree.hpp"

#include <cstdint>
#include <vector>

namespace prevcare {

enum class ClassWeight { none, balanced };

/// Per-sample weights for binary labels; `balanced` uses n / (2 n_class).
Vector class_weights(const Vector& y, ClassWeight mode);

struct GbdtParams {
    int n_trees = 100;
    int n_leaves = 31;
    double learning_rate = 0.1;
    int min_child_samples = 20;
    double lambda_l1 = 0.0;
    double lambda_l2 = 0.0;
    ClassWeight class_weight = ClassWeight::balanced;
    int max_depth = -1;
    /// Rows sampled per tree when the training set is larger; 0 disables.
    std::size_t bin_sample_cap = 0;
};

/// Gradient-boosted trees for binary log-loss.
/// p(x) = sigmoid(base_score + learning_rate * sum_t tree_t(x)).
struct GbdtModel {
    GbdtParams params;
    double base_score = 0.0;
    std::vector<Tree> trees;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    std::vector<double> train_loss;  // weighted mean loss after each round; [0] is the prior

    double raw_score(const Eigen::Ref<const Vector>& x) const;
    double predict_proba(const Eigen::Ref<const Vector>& x) const;
};

GbdtModel fit_gbdt(const Matrix& X, const Vector& y, const GbdtParams& params, std::uint64_t seed);

}  // namespace prevcare
