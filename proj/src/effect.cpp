#include "prevcare/effect.hpp"

#include "prevcare/learners.hpp"

#include <algorithm>
#include <numeric>

namespace prevcare {

using nlohmann::json;

double CausalForest::raw_cate(const Eigen::Ref<const Vector>& x) const {
    if (static_cast<std::size_t>(x.size()) != n_features) {
        throw DataError("causal forest: expected " + std::to_string(n_features) + " features, got " +
                        std::to_string(x.size()));
    }
    if (trees.empty()) throw DataError("causal forest has no trees");
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

double CausalForest::estimate(const Eigen::Ref<const Vector>& x) const { return clamp01(raw_cate(x)); }

double estimate_cate(const CausalForest& forest, const Eigen::Ref<const Vector>& x) { return forest.estimate(x); }

namespace {

struct ArmStats {
    double n_t = 0.0;
    double n_c = 0.0;
    double y_t = 0.0;
    double y_c = 0.0;

    void add(double y, double t) {
        if (t > 0.5) {
            n_t += 1.0;
            y_t += y;
        } else {
            n_c += 1.0;
            y_c += y;
        }
    }
    ArmStats operator-(const ArmStats& o) const { return {n_t - o.n_t, n_c - o.n_c, y_t - o.y_t, y_c - o.y_c}; }
    ArmStats operator+(const ArmStats& o) const { return {n_t + o.n_t, n_c + o.n_c, y_t + o.y_t, y_c + o.y_c}; }
    double n() const { return n_t + n_c; }
    // Risk reduction: control mean minus treated mean.
    double tau() const { return (n_c > 0 ? y_c / n_c : 0.0) - (n_t > 0 ? y_t / n_t : 0.0); }
};

class HonestGrower {
public:
    HonestGrower(const Matrix& X, const Vector& y, const Vector& t, const CausalForestParams& p, Rng& rng)
        : X_(X), y_(y), t_(t), p_(p), rng_(rng) {}

    Tree grow(std::vector<Eigen::Index> rows) {
        Tree tree;
        build(tree, std::move(rows), 0);
        return tree;
    }

private:
    bool admissible(const ArmStats& s) const {
        return s.n() >= p_.min_samples_leaf && s.n_t >= p_.min_treated_per_leaf && s.n_c >= 1.0;
    }

    int build(Tree& tree, std::vector<Eigen::Index> rows, int depth) {
        ArmStats total;
        for (auto i : rows) total.add(y_(i), t_(i));
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[id].weight = total.n();
        if (depth >= p_.max_depth || total.n() < 2.0 * p_.min_samples_leaf) return id;

        const int d = static_cast<int>(X_.cols());
        std::vector<int> features(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
        const int n_try = p_.max_features > 0 ? std::min(p_.max_features, d) : d;
        for (int k = 0; k < n_try; ++k) {
            std::uniform_int_distribution<int> pick(k, d - 1);
            std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick(rng_))]);
        }
        const double parent_score = total.n() * total.tau() * total.tau();
        double best_score = parent_score;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (int k = 0; k < n_try; ++k) {
            const int f = features[static_cast<std::size_t>(k)];
            std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return X_(a, f) < X_(b, f); });
            ArmStats left;
            for (std::size_t pos = 0; pos + 1 < rows.size(); ++pos) {
                left.add(y_(rows[pos]), t_(rows[pos]));
                const double xv = X_(rows[pos], f);
                const double xn = X_(rows[pos + 1], f);
                if (!(xv < xn)) continue;
                const ArmStats right = total - left;
                if (!admissible(left) || !admissible(right)) continue;
                const double score = left.n() * left.tau() * left.tau() + right.n() * right.tau() * right.tau();
                if (score > best_score + 1e-12) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (xv + xn);
                }
            }
        }
        if (best_feature < 0) return id;
        std::vector<Eigen::Index> lrows;
        std::vector<Eigen::Index> rrows;
        for (auto i : rows) (X_(i, best_feature) <= best_threshold ? lrows : rrows).push_back(i);
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(tree, std::move(lrows), depth + 1);
        const int r = build(tree, std::move(rrows), depth + 1);
        auto& node = tree.nodes[id];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Matrix& X_;
    const Vector& y_;
    const Vector& t_;
    const CausalForestParams& p_;
    Rng& rng_;
};

// Collapses subtrees whose estimation leaves break the count constraints; returns subtree stats.
ArmStats prune(Tree& tree, int node, const std::vector<ArmStats>& leaf_stats, const CausalForestParams& p) {
    auto& n = tree.nodes[node];
    if (n.is_leaf()) return leaf_stats[static_cast<std::size_t>(node)];
    const ArmStats l = prune(tree, n.left, leaf_stats, p);
    const ArmStats r = prune(tree, n.right, leaf_stats, p);
    auto ok = [&](const ArmStats& s) { return s.n_t >= p.min_treated_per_leaf && s.n_c >= 1.0; };
    const auto& ln = tree.nodes[n.left];
    const auto& rn = tree.nodes[n.right];
    if ((ln.is_leaf() && !ok(l)) || (rn.is_leaf() && !ok(r))) {
        n.feature = -1;
        n.left = n.right = -1;
    }
    return l + r;
}

// Drops nodes no longer reachable after pruning and renumbers the rest.
Tree compact(const Tree& in) {
    Tree out;
    std::vector<int> remap(in.nodes.size(), -1);
    std::vector<int> order;
    std::vector<int> todo{0};
    while (!todo.empty()) {
        const int id = todo.back();
        todo.pop_back();
        remap[static_cast<std::size_t>(id)] = static_cast<int>(order.size());
        order.push_back(id);
        const auto& n = in.nodes[static_cast<std::size_t>(id)];
        if (!n.is_leaf()) {
            todo.push_back(n.right);
            todo.push_back(n.left);
        }
    }
    for (int id : order) {
        TreeNode n = in.nodes[static_cast<std::size_t>(id)];
        if (!n.is_leaf()) {
            n.left = remap[static_cast<std::size_t>(n.left)];
            n.right = remap[static_cast<std::size_t>(n.right)];
        }
        out.nodes.push_back(n);
    }
    return out;
}

}  // namespace

CausalForest fit_causal_forest(const Matrix& X, const Vector& y, const Vector& t, const CausalForestParams& params,
                               std::uint64_t seed) {
    const auto n = X.rows();
    if (y.size() != n || t.size() != n) throw DataError("fit_causal_forest: X, y and t must align");
    if (!X.allFinite() || !y.allFinite()) throw DataError("fit_causal_forest: non-finite inputs");
    const double treated = t.sum();
    if (treated <= 0.0) {
        throw DataError("fit_causal_forest: no treated units; use a known effect (effect mode 'known') instead");
    }
    if (treated >= static_cast<double>(n)) throw DataError("fit_causal_forest: no control units");
    if (params.n_estimators < 1 || params.max_depth < 0 || params.min_samples_leaf < 1 ||
        !(params.subsample > 0.0 && params.subsample <= 1.0) ||
        !(params.split_fraction > 0.0 && params.split_fraction < 1.0)) {
        throw ConfigError("fit_causal_forest: invalid parameters");
    }

    CausalForest forest;
    forest.params = params;
    forest.n_features = static_cast<std::size_t>(X.cols());
    forest.seed = seed;
    const auto draw = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::llround(params.subsample * n)));
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    for (int b = 0; b < params.n_estimators; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        std::shuffle(all.begin(), all.end(), rng);
        const auto m = std::min<Eigen::Index>(draw, n);
        const auto n_split = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(params.split_fraction * m)), 1, m - 1);
        std::vector<Eigen::Index> s1(all.begin(), all.begin() + n_split);
        std::vector<Eigen::Index> s2(all.begin() + n_split, all.begin() + m);
        std::sort(s1.begin(), s1.end());
        std::sort(s2.begin(), s2.end());

        HonestGrower grower(X, y, t, params, rng);
        Tree tree = grower.grow(s1);

        std::vector<ArmStats> leaf_stats(tree.nodes.size());
        for (auto i : s2) leaf_stats[static_cast<std::size_t>(tree.leaf_index(X.row(i).transpose()))].add(y(i), t(i));
        prune(tree, 0, leaf_stats, params);
        tree = compact(tree);

        std::vector<ArmStats> final_stats(tree.nodes.size());
        for (auto i : s2) final_stats[static_cast<std::size_t>(tree.leaf_index(X.row(i).transpose()))].add(y(i), t(i));
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            if (!tree.nodes[k].is_leaf()) continue;
            const auto& s = final_stats[k];
            // A root without both arms in the estimation half carries no information.
            tree.nodes[k].value = (s.n_t > 0 && s.n_c > 0) ? s.tau() : 0.0;
            tree.nodes[k].weight = s.n();
        }
        forest.trees.push_back(std::move(tree));
        forest.split_rows.push_back(std::move(s1));
        forest.estimate_rows.push_back(std::move(s2));
    }
    return forest;
}

Vector effect_row(const PatientRecord& r) {
    Vector x(r.features.size() + 2);
    x(0) = r.fasting_glucose;
    x.segment(1, r.features.size()) = r.features;
    x(x.size() - 1) = static_cast<double>(r.year);
    return x;
}

EffectData effect_training_data(const Panel& panel, int before_year) {
    EffectData d;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        const auto& r = panel.records()[i];
        if (r.year < before_year && r.onset_next.has_value()) d.records.push_back(i);
    }
    const auto rows = static_cast<Eigen::Index>(d.records.size());
    d.X.resize(rows, static_cast<Eigen::Index>(panel.n_features() + 2));
    d.y.resize(rows);
    d.t.resize(rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const auto& r = panel.records()[d.records[static_cast<std::size_t>(k)]];
        d.X.row(k) = effect_row(r).transpose();
        d.y(k) = *r.onset_next ? 1.0 : 0.0;
        d.t(k) = r.treated ? 1.0 : 0.0;
    }
    return d;
}

CausalForest fit_causal_forest(const Panel& panel, const CausalForestParams& params, std::uint64_t seed,
                               int before_year) {
    auto d = effect_training_data(panel, before_year);
    if (d.records.empty()) {
        throw InsufficientDataError("causal forest: no labeled records before year " + std::to_string(before_year));
    }
    return fit_causal_forest(d.X, d.y, d.t, params, seed);
}

void validate(const EffectSpec& spec) {
    if (!(spec.known_gamma >= 0.0 && spec.known_gamma <= 1.0)) {
        throw ConfigError("known_gamma must lie in [0,1]");
    }
}

double effect_at(const EffectSpec& spec, const CausalForest* forest, const Eigen::Ref<const Vector>& x,
                 int years_since_start, double risk) {
    if (years_since_start < 0) throw DataError("effect_at: years_since_start must be >= 0");
    if (spec.mode == EffectMode::known) {
        return spec.decay ? spec.known_gamma * std::exp(-static_cast<double>(years_since_start)) : spec.known_gamma;
    }
    if (forest == nullptr) throw DataError("effect_at: forest mode requires a fitted causal forest");
    const double tau = forest->raw_cate(x);
    if (spec.scale == EffectScale::absolute) return clamp01(tau);
    if (risk <= 0.0) return 0.0;
    return clamp01(tau / risk);
}

json forest_to_json(const CausalForest& f) {
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
    return {{"format_version", kModelFormatVersion},
            {"kind", "causal_forest"},
            {"params",
             {{"n_estimators", f.params.n_estimators},
              {"max_features", f.params.max_features},
              {"max_depth", f.params.max_depth},
              {"min_samples_leaf", f.params.min_samples_leaf},
              {"min_treated_per_leaf", f.params.min_treated_per_leaf},
              {"subsample", f.params.subsample},
              {"split_fraction", f.params.split_fraction}}},
            {"n_features", f.n_features},
            {"seed", f.seed},
            {"trees", trees}};
}

CausalForest forest_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion || j.at("kind") != "causal_forest") {
            throw IoError("not a causal forest document of a supported version");
        }
        CausalForest f;
        const auto& p = j.at("params");
        f.params.n_estimators = p.at("n_estimators").get<int>();
        f.params.max_features = p.at("max_features").get<int>();
        f.params.max_depth = p.at("max_depth").get<int>();
        f.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        f.params.min_treated_per_leaf = p.at("min_treated_per_leaf").get<int>();
        f.params.subsample = p.at("subsample").get<double>();
        f.params.split_fraction = p.at("split_fraction").get<double>();
        f.n_features = j.at("n_features").get<std::size_t>();
        f.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
        return f;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed causal forest document: ") + e.what());
    }
}

}  // namespace prevcare
