#include "prevcare/tree.hpp"

#include <algorithm>
#include <numeric>

namespace prevcare {

int Tree::leaf_index(const Eigen::Ref<const Vector>& x) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        const auto& n = nodes[node];
        node = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return node;
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (!n.is_leaf()) {
            d[n.left] = d[n.right] = d[i] + 1;
            best = std::max(best, d[i] + 1);
        }
    }
    return best;
}

int Tree::n_leaves() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                          [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Stats {
    double w = 0.0;
    double wy = 0.0;
    double wyy = 0.0;

    void add(double weight, double y) {
        w += weight;
        wy += weight * y;
        wyy += weight * y * y;
    }
    Stats operator-(const Stats& o) const { return {w - o.w, wy - o.wy, wyy - o.wyy}; }
};

double impurity(const Stats& s, SplitCriterion c) {
    if (s.w <= 0.0) return 0.0;
    const double mean = s.wy / s.w;
    switch (c) {
        case SplitCriterion::variance:
            return std::max(0.0, s.wyy / s.w - mean * mean);
        case SplitCriterion::gini:
            return 2.0 * mean * (1.0 - mean);
        case SplitCriterion::entropy: {
            const double p = clamp01(mean);
            double h = 0.0;
            if (p > 0.0) h -= p * std::log2(p);
            if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
            return h;
        }
    }
    return 0.0;
}

struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

// Scans sorted positions of one feature; returns the best admissible split.
Candidate scan_feature(const Matrix& X, const Vector& y, const Vector& w, std::vector<int>& idx,
                       int feature, const Stats& total, SplitCriterion crit, int min_leaf,
                       double parent_impurity) {
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return X(a, feature) < X(b, feature); });
    Candidate best;
    Stats left;
    const auto n = idx.size();
    for (std::size_t p = 0; p + 1 < n; ++p) {
        left.add(w(idx[p]), y(idx[p]));
        const double xv = X(idx[p], feature);
        const double xn = X(idx[p + 1], feature);
        if (!(xv < xn)) continue;
        const auto n_left = static_cast<int>(p + 1);
        const auto n_right = static_cast<int>(n - p - 1);
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const Stats right = total - left;
        const double dec = total.w * parent_impurity - left.w * impurity(left, crit) -
                           right.w * impurity(right, crit);
        if (dec > best.decrease) {
            best = {feature, 0.5 * (xv + xn), dec};
        }
    }
    return best;
}

struct Builder {
    const Matrix& X;
    const Vector& y;
    const Vector& w;
    const CartParams& params;
    Rng& rng;
    Tree tree;
    double total_weight = 1.0;

    int build(std::vector<int> idx, int depth) {
        Stats s;
        for (int i : idx) s.add(w(i), y(i));
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[node_id].value = s.w > 0.0 ? s.wy / s.w : 0.0;
        tree.nodes[node_id].weight = s.w;

        const auto n = static_cast<int>(idx.size());
        if ((params.max_depth >= 0 && depth >= params.max_depth) || n < params.min_samples_split ||
            n < 2 * params.min_samples_leaf) {
            return node_id;
        }
        const double parent_imp = impurity(s, params.criterion);
        if (parent_imp <= 0.0) return node_id;

        const int d = static_cast<int>(X.cols());
        std::vector<int> features(d);
        std::iota(features.begin(), features.end(), 0);
        int n_try = d;
        if (params.max_features > 0 && params.max_features < d) {
            n_try = params.max_features;
            for (int k = 0; k < n_try; ++k) {
                std::uniform_int_distribution<int> pick(k, d - 1);
                std::swap(features[k], features[pick(rng)]);
            }
        }
        Candidate best;
        std::vector<int> scratch = idx;
        for (int k = 0; k < n_try; ++k) {
            auto c = scan_feature(X, y, w, scratch, features[k], s, params.criterion,
                                  params.min_samples_leaf, parent_imp);
            if (c.feature >= 0 && c.decrease > best.decrease) best = c;
        }
        // min_impurity_decrease is relative to the total training weight, as in sklearn.
        if (best.feature < 0 || best.decrease / total_weight < params.min_impurity_decrease) {
            return node_id;
        }
        std::vector<int> left_idx;
        std::vector<int> right_idx;
        for (int i : idx) {
            (X(i, best.feature) <= best.threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = build(std::move(left_idx), depth + 1);
        const int r = build(std::move(right_idx), depth + 1);
        auto& node = tree.nodes[node_id];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }
};

}  // namespace

Tree fit_cart(const Matrix& X, const Vector& y, const Vector& weights, const CartParams& params,
              Rng& rng, const std::vector<int>& rows) {
    if (X.rows() != y.size() || weights.size() != y.size()) {
        throw DataError("fit_cart: X, y and weights must have the same number of rows");
    }
    std::vector<int> idx = rows;
    if (idx.empty()) {
        idx.resize(static_cast<std::size_t>(X.rows()));
        std::iota(idx.begin(), idx.end(), 0);
    }
    if (idx.empty()) {
        throw DataError("fit_cart: no training rows");
    }
    Builder b{X, y, weights, params, rng, {}, 0.0};
    for (int i : idx) b.total_weight += weights(i);
    if (b.total_weight <= 0.0) b.total_weight = 1.0;
    b.build(std::move(idx), 0);
    return std::move(b.tree);
}

std::optional<SplitChoice> best_split(const Matrix& X, const Vector& y, const Vector& weights,
                                      SplitCriterion criterion, int min_samples_leaf) {
    Stats s;
    for (Eigen::Index i = 0; i < y.size(); ++i) s.add(weights(i), y(i));
    const double parent = impurity(s, criterion);
    std::vector<int> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    Candidate best;
    for (int f = 0; f < X.cols(); ++f) {
        auto c = scan_feature(X, y, weights, idx, f, s, criterion, min_samples_leaf, parent);
        if (c.feature >= 0 && c.decrease > best.decrease) best = c;
    }
    if (best.feature < 0) return std::nullopt;
    return SplitChoice{best.feature, best.threshold, best.decrease};
}

}  // namespace prevcare
