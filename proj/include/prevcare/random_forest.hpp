#pragma once

#include "prevcare/gbdt.hpp"
#include "prevcare/tree.hpp"

#include <vector>

namespace prevcare {

enum class MaxFeatures { sqrt, log2, all };

struct ForestParams {
    int n_trees = 100;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int max_depth = -1;
    MaxFeatures max_features = MaxFeatures::sqrt;
    SplitCriterion criterion = SplitCriterion::gini;
    ClassWeight class_weight = ClassWeight::none;
    bool bootstrap = true;
    double sample_fraction = 1.0;  // of n, drawn with replacement when bootstrapping
};

/// Bagged classification trees; leaves hold the weighted positive fraction.
struct ForestModel {
    ForestParams params;
    std::vector<Tree> trees;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    Vector oob_proba;  // NaN for rows never out of bag

    double predict_proba(const Eigen::Ref<const Vector>& x) const;
    /// Fraction of rows with an OOB prediction that are misclassified at 0.5.
    double oob_error(const Vector& y) const;
};

int resolve_max_features(MaxFeatures mode, int n_features);

ForestModel fit_random_forest(const Matrix& X, const Vector& y, const ForestParams& params,
                              std::uint64_t seed);

}  // namespace prevcare
