#include "prevcare/effect.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace prevcare;
using prevcare::testing::randomized_trial;

namespace {

double mean_over(const CausalForest& f, const Matrix& X, bool absolute, bool clipped) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Vector x = X.row(i).transpose();
        const double v = clipped ? estimate_cate(f, x) : f.raw_cate(x);
        s += absolute ? std::abs(v) : v;
    }
    return s / X.rows();
}

Tree leaf_tree(double value) {
    Tree t;
    t.nodes.push_back(TreeNode{});
    t.nodes[0].value = value;
    return t;
}

}  // namespace

TEST_SUITE("effect") {

TEST_CASE("constant effect 0.3 is recovered on average") {
    const auto d = randomized_trial(5000, [](const Vector&) { return 0.3; }, 1);
    const CausalForest f = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 1);
    CHECK(std::abs(mean_over(f, d.X, false, false) - 0.3) <= 0.05);
}

TEST_CASE("null effect gives small estimates") {
    const auto d = randomized_trial(5000, [](const Vector&) { return 0.0; }, 2);
    const CausalForest f = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 2);
    CHECK(mean_over(f, d.X, true, true) <= 0.03);
}

TEST_CASE("step effect: the two groups separate") {
    const auto d = randomized_trial(5000, [](const Vector& x) { return x(1) > 0.0 ? 0.4 : 0.0; }, 3);
    const CausalForest f = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 3);
    double hi = 0.0, lo = 0.0, nh = 0.0, nl = 0.0;
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
        const double v = f.raw_cate(d.X.row(i).transpose());
        if (d.X(i, 1) > 0.0) { hi += v; nh += 1; } else { lo += v; nl += 1; }
    }
    CHECK(std::abs((hi / nh - lo / nl) - 0.4) <= 0.1);
}

TEST_CASE("honesty and leaf support") {
    const auto d = randomized_trial(4000, [](const Vector& x) { return 0.1 + 0.1 * (x(2) > 0); }, 4);
    CausalForestParams p;
    const CausalForest f = fit_causal_forest(d.X, d.y, d.t, p, 4);
    REQUIRE(f.trees.size() == static_cast<std::size_t>(p.n_estimators));
    for (std::size_t k = 0; k < f.trees.size(); ++k) {
        std::set<Eigen::Index> grow(f.split_rows[k].begin(), f.split_rows[k].end());
        for (auto r : f.estimate_rows[k]) CHECK(grow.count(r) == 0);
        CHECK(f.trees[k].depth() <= p.max_depth);

        std::map<int, std::pair<int, int>> support;  // leaf -> (treated, control)
        for (auto r : f.estimate_rows[k]) {
            auto& s = support[f.trees[k].leaf_index(d.X.row(r).transpose())];
            (d.t(r) > 0.5 ? s.first : s.second) += 1;
        }
        for (const auto& [leaf, s] : support) {
            CHECK(s.first >= p.min_treated_per_leaf);
            CHECK(s.second >= 1);
        }
    }
}

TEST_CASE("permuted treatment destroys the signal") {
    auto d = randomized_trial(5000, [](const Vector&) { return 0.3; }, 5);
    Rng rng(77);
    std::vector<double> t(d.t.data(), d.t.data() + d.t.size());
    std::shuffle(t.begin(), t.end(), rng);
    d.t = Eigen::Map<Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
    const CausalForest f = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 5);
    CHECK(mean_over(f, d.X, true, false) < 0.05);
}

TEST_CASE("estimates do not depend on tree order") {
    const auto d = randomized_trial(3000, [](const Vector& x) { return 0.2 + 0.1 * std::tanh(x(3)); }, 6);
    CausalForest f = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 6);
    std::vector<double> before;
    for (int i = 0; i < 50; ++i) before.push_back(f.raw_cate(d.X.row(i).transpose()));
    std::reverse(f.trees.begin(), f.trees.end());
    for (int i = 0; i < 50; ++i) CHECK(f.raw_cate(d.X.row(i).transpose()) == doctest::Approx(before[i]).epsilon(1e-12));
}

TEST_CASE("single tree, clipping and determinism") {
    CausalForest f;
    f.n_features = 2;
    f.trees = {leaf_tree(0.2)};
    const Vector x = Vector::Zero(2);
    CHECK(estimate_cate(f, x) == doctest::Approx(0.2));
    f.trees = {leaf_tree(-0.05)};
    CHECK(estimate_cate(f, x) == 0.0);
    f.trees = {leaf_tree(1.2)};
    CHECK(estimate_cate(f, x) == 1.0);
    CHECK_THROWS_AS(estimate_cate(f, Vector::Zero(3)), DataError);

    const auto d = randomized_trial(2000, [](const Vector&) { return 0.2; }, 7);
    const auto a = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 9);
    const auto b = fit_causal_forest(d.X, d.y, d.t, CausalForestParams{}, 9);
    CHECK(forest_to_json(a).dump() == forest_to_json(b).dump());
    const auto back = forest_from_json(nlohmann::json::parse(forest_to_json(a).dump()));
    CHECK(back.raw_cate(d.X.row(0).transpose()) == a.raw_cate(d.X.row(0).transpose()));
}

TEST_CASE("no treated units is an error") {
    const auto d = randomized_trial(500, [](const Vector&) { return 0.0; }, 8);
    CHECK_THROWS_AS(fit_causal_forest(d.X, d.y, Vector::Zero(500), CausalForestParams{}, 1), DataError);
}

TEST_CASE("known effect with exponential decay") {
    EffectSpec spec;
    spec.mode = EffectMode::known;
    spec.known_gamma = 0.58;
    spec.decay = true;
    const Vector x = Vector::Zero(1);
    CHECK(effect_at(spec, nullptr, x, 0) == doctest::Approx(0.58).epsilon(1e-15));
    CHECK(effect_at(spec, nullptr, x, 1) == doctest::Approx(0.21337).epsilon(1e-4));
    CHECK(std::abs(effect_at(spec, nullptr, x, 1) - 0.58 * std::exp(-1.0)) < 1e-15);
    spec.decay = false;
    CHECK(effect_at(spec, nullptr, x, 4) == 0.58);
    spec.known_gamma = 0.0;
    spec.decay = true;
    CHECK(effect_at(spec, nullptr, x, 3) == 0.0);
    CHECK_THROWS_AS(effect_at(spec, nullptr, x, -1), DataError);

    EffectSpec forest_mode;
    CHECK_THROWS_AS(effect_at(forest_mode, nullptr, x, 0), DataError);
    spec.known_gamma = 1.5;
    CHECK_THROWS_AS(validate(spec), ConfigError);
}

TEST_CASE("relative scale divides by the predicted risk") {
    CausalForest f;
    f.n_features = 1;
    f.trees = {leaf_tree(0.1)};
    EffectSpec spec;
    spec.scale = EffectScale::relative;
    CHECK(effect_at(spec, &f, Vector::Zero(1), 0, 0.4) == doctest::Approx(0.25));
    spec.scale = EffectScale::absolute;
    CHECK(effect_at(spec, &f, Vector::Zero(1), 0, 0.4) == doctest::Approx(0.1));
}

TEST_CASE("panel training data is pooled across years before the cut") {
    GenConfig g = demo_cohort_config(3, 400);
    const Panel p = generate_synthetic_cohort(g);
    const EffectData d = effect_training_data(p, 3);
    for (std::size_t k = 0; k < d.records.size(); ++k) {
        const auto& r = p.records()[d.records[k]];
        CHECK(r.year < 3);
        CHECK(r.onset_next.has_value());
        CHECK(d.X(static_cast<Eigen::Index>(k), d.X.cols() - 1) == r.year);
    }
}

}
