#include "prevcare/random_forest.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace prevcare {

int resolve_max_features(MaxFeatures mode, int d) {
    switch (mode) {
        case MaxFeatures::sqrt:
            return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));
        case MaxFeatures::log2:
            return std::max(1, static_cast<int>(std::log2(static_cast<double>(d))));
        case MaxFeatures::all:
            break;
    }
    return d;
}

double ForestModel::predict_proba(const Eigen::Ref<const Vector>& x) const {
    if (static_cast<std::size_t>(x.size()) != n_features) {
        throw DataError("forest: expected " + std::to_string(n_features) + " features, got " +
                        std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    // Keep strictly inside (0,1) so downstream log-losses stay finite.
    return std::clamp(sum / static_cast<double>(trees.size()), 1e-6, 1.0 - 1e-6);
}

double ForestModel::oob_error(const Vector& y) const {
    std::size_t count = 0;
    std::size_t wrong = 0;
    for (Eigen::Index i = 0; i < oob_proba.size(); ++i) {
        if (std::isnan(oob_proba(i))) continue;
        ++count;
        if ((oob_proba(i) >= 0.5) != (y(i) > 0.5)) ++wrong;
    }
    return count ? static_cast<double>(wrong) / static_cast<double>(count)
                 : std::numeric_limits<double>::quiet_NaN();
}

ForestModel fit_random_forest(const Matrix& X, const Vector& y, const ForestParams& params,
                              std::uint64_t seed) {
    const auto n = X.rows();
    if (y.size() != n) throw DataError("fit_random_forest: X and y row counts differ");
    if (n == 0) throw DataError("fit_random_forest: no rows");
    if (!X.allFinite() || !y.allFinite()) throw DataError("fit_random_forest: non-finite inputs");
    const double pos = y.sum();
    if (pos <= 0.0 || pos >= static_cast<double>(n)) {
        throw DataError("fit_random_forest: labels are all identical; use a prior-only model instead");
    }
    if (params.n_trees < 1 || !(params.sample_fraction > 0.0)) {
        throw ConfigError("fit_random_forest: invalid parameters");
    }

    ForestModel model;
    model.params = params;
    model.n_features = static_cast<std::size_t>(X.cols());
    model.seed = seed;
    const Vector w = class_weights(y, params.class_weight);

    CartParams cart;
    cart.criterion = params.criterion;
    cart.max_depth = params.max_depth;
    cart.min_samples_split = params.min_samples_split;
    cart.min_samples_leaf = params.min_samples_leaf;
    cart.max_features = resolve_max_features(params.max_features, static_cast<int>(X.cols()));

    const auto draw = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(params.sample_fraction * static_cast<double>(n))));
    Vector oob_sum = Vector::Zero(n);
    Vector oob_count = Vector::Zero(n);
    std::vector<char> in_bag;
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<int> rows;
        rows.reserve(static_cast<std::size_t>(draw));
        if (params.bootstrap) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
            for (Eigen::Index k = 0; k < draw; ++k) rows.push_back(pick(rng));
        } else {
            std::vector<int> all(static_cast<std::size_t>(n));
            std::iota(all.begin(), all.end(), 0);
            if (draw < n) {
                std::shuffle(all.begin(), all.end(), rng);
                all.resize(static_cast<std::size_t>(draw));
                std::sort(all.begin(), all.end());
            }
            rows = std::move(all);
        }
        model.trees.push_back(fit_cart(X, y, w, cart, rng, rows));
        in_bag.assign(static_cast<std::size_t>(n), 0);
        for (int r : rows) in_bag[r] = 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (in_bag[i]) continue;
            oob_sum(i) += model.trees.back().predict(X.row(i).transpose());
            oob_count(i) += 1.0;
        }
    }
    model.oob_proba = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (oob_count(i) > 0.0) model.oob_proba(i) = oob_sum(i) / oob_count(i);
    }
    return model;
}

}  // namespace prevcare
