#include "prevcare/learners.hpp"

namespace prevcare {

using nlohmann::json;

std::string to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::gbdt: return "gbdt";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::lasso: return "lasso";
        case LearnerKind::ridge: return "ridge";
    }
    return "?";
}

LearnerKind parse_learner(const std::string& name) {
    if (name == "gbdt") return LearnerKind::gbdt;
    if (name == "random_forest") return LearnerKind::random_forest;
    if (name == "lasso") return LearnerKind::lasso;
    if (name == "ridge") return LearnerKind::ridge;
    throw ConfigError("unknown learner '" + name + "' (expected gbdt, random_forest, lasso or ridge)");
}

double predict_raw(const FittedModel& model, const Eigen::Ref<const Vector>& x) {
    return std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ForestModel>) {
                return logit(m.predict_proba(x));
            } else {
                return m.raw_score(x);
            }
        },
        model);
}

double predict_proba(const FittedModel& model, const Eigen::Ref<const Vector>& x) {
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

Vector predict_raw_rows(const FittedModel& model, const Matrix& X) {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_raw(model, X.row(i).transpose());
    return out;
}

LearnerParams default_params(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::gbdt: return GbdtParams{};
        case LearnerKind::random_forest: return ForestParams{};
        case LearnerKind::lasso: {
            LinearParams p;
            p.penalty = Penalty::l1;
            p.alpha = 1e-3;
            return p;
        }
        case LearnerKind::ridge: {
            LinearParams p;
            p.penalty = Penalty::l2;
            p.alpha = 1e-3;
            return p;
        }
    }
    return GbdtParams{};
}

FittedModel fit_learner(const Matrix& X, const Vector& y, const LearnerParams& params, std::uint64_t seed) {
    return std::visit(
        [&](const auto& p) -> FittedModel {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GbdtParams>) {
                return fit_gbdt(X, y, p, seed);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                return fit_random_forest(X, y, p, seed);
            } else {
                return fit_linear(X, y, p, seed);
            }
        },
        params);
}

namespace {

json vec_json(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vec_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string criterion_name(SplitCriterion c) {
    switch (c) {
        case SplitCriterion::variance: return "variance";
        case SplitCriterion::gini: return "gini";
        case SplitCriterion::entropy: return "entropy";
    }
    return "?";
}

SplitCriterion parse_criterion(const std::string& s) {
    if (s == "variance") return SplitCriterion::variance;
    if (s == "gini") return SplitCriterion::gini;
    if (s == "entropy") return SplitCriterion::entropy;
    throw ConfigError("unknown split criterion '" + s + "'");
}

std::string max_features_name(MaxFeatures m) {
    switch (m) {
        case MaxFeatures::sqrt: return "sqrt";
        case MaxFeatures::log2: return "log2";
        case MaxFeatures::all: return "all";
    }
    return "?";
}

MaxFeatures parse_max_features(const std::string& s) {
    if (s == "sqrt") return MaxFeatures::sqrt;
    if (s == "log2") return MaxFeatures::log2;
    if (s == "all") return MaxFeatures::all;
    throw ConfigError("unknown max_features '" + s + "'");
}

std::string class_weight_name(ClassWeight c) { return c == ClassWeight::balanced ? "balanced" : "none"; }

ClassWeight parse_class_weight(const std::string& s) {
    if (s == "balanced") return ClassWeight::balanced;
    if (s == "none") return ClassWeight::none;
    throw ConfigError("unknown class_weight '" + s + "'");
}

}  // namespace

json params_to_json(const LearnerParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GbdtParams>) {
                return {{"family", "gbdt"},
                        {"n_trees", p.n_trees},
                        {"n_leaves", p.n_leaves},
                        {"learning_rate", p.learning_rate},
                        {"min_child_samples", p.min_child_samples},
                        {"lambda_l1", p.lambda_l1},
                        {"lambda_l2", p.lambda_l2},
                        {"class_weight", class_weight_name(p.class_weight)},
                        {"max_depth", p.max_depth},
                        {"bin_sample_cap", p.bin_sample_cap}};
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                return {{"family", "random_forest"},
                        {"n_trees", p.n_trees},
                        {"min_samples_split", p.min_samples_split},
                        {"min_samples_leaf", p.min_samples_leaf},
                        {"max_depth", p.max_depth},
                        {"max_features", max_features_name(p.max_features)},
                        {"criterion", criterion_name(p.criterion)},
                        {"class_weight", class_weight_name(p.class_weight)},
                        {"bootstrap", p.bootstrap},
                        {"sample_fraction", p.sample_fraction}};
            } else {
                return {{"family", "linear"},
                        {"penalty", p.penalty == Penalty::l1 ? "l1" : "l2"},
                        {"alpha", p.alpha},
                        {"loss", p.loss == LinearLoss::logistic ? "logistic" : "squared"},
                        {"fit_intercept", p.fit_intercept},
                        {"standardize", p.standardize},
                        {"tol", p.tol},
                        {"max_iter", p.max_iter}};
            }
        },
        params);
}

LearnerParams params_from_json(const json& j) {
    const auto family = j.at("family").get<std::string>();
    if (family == "gbdt") {
        GbdtParams p;
        p.n_trees = j.at("n_trees").get<int>();
        p.n_leaves = j.at("n_leaves").get<int>();
        p.learning_rate = j.at("learning_rate").get<double>();
        p.min_child_samples = j.at("min_child_samples").get<int>();
        p.lambda_l1 = j.at("lambda_l1").get<double>();
        p.lambda_l2 = j.at("lambda_l2").get<double>();
        p.class_weight = parse_class_weight(j.at("class_weight").get<std::string>());
        p.max_depth = j.at("max_depth").get<int>();
        p.bin_sample_cap = j.at("bin_sample_cap").get<std::size_t>();
        return p;
    }
    if (family == "random_forest") {
        ForestParams p;
        p.n_trees = j.at("n_trees").get<int>();
        p.min_samples_split = j.at("min_samples_split").get<int>();
        p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
        p.max_depth = j.at("max_depth").get<int>();
        p.max_features = parse_max_features(j.at("max_features").get<std::string>());
        p.criterion = parse_criterion(j.at("criterion").get<std::string>());
        p.class_weight = parse_class_weight(j.at("class_weight").get<std::string>());
        p.bootstrap = j.at("bootstrap").get<bool>();
        p.sample_fraction = j.at("sample_fraction").get<double>();
        return p;
    }
    if (family == "linear") {
        LinearParams p;
        const auto penalty = j.at("penalty").get<std::string>();
        if (penalty != "l1" && penalty != "l2") throw ConfigError("unknown penalty '" + penalty + "'");
        p.penalty = penalty == "l1" ? Penalty::l1 : Penalty::l2;
        p.alpha = j.at("alpha").get<double>();
        const auto loss = j.at("loss").get<std::string>();
        if (loss != "logistic" && loss != "squared") throw ConfigError("unknown loss '" + loss + "'");
        p.loss = loss == "squared" ? LinearLoss::squared : LinearLoss::logistic;
        p.fit_intercept = j.at("fit_intercept").get<bool>();
        p.standardize = j.at("standardize").get<bool>();
        p.tol = j.at("tol").get<double>();
        p.max_iter = j.at("max_iter").get<int>();
        return p;
    }
    throw ConfigError("unknown learner family '" + family + "'");
}

json tree_to_json(const Tree& tree) {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;
    std::vector<double> weight;
    for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
        weight.push_back(n.weight);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right},     {"value", value},         {"weight", weight}};
}

Tree tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const auto weight = j.at("weight").get<std::vector<double>>();
    const auto n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
        weight.size() != n || n == 0) {
        throw IoError("tree document has inconsistent array lengths");
    }
    Tree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i], weight[i]};
        const bool leaf = feature[i] < 0;
        const auto ok = [n](int c) { return c > 0 && static_cast<std::size_t>(c) < n; };
        if (!leaf && (!ok(left[i]) || !ok(right[i]))) {
            throw IoError("tree document has an internal node with invalid children");
        }
    }
    return t;
}

json model_to_json(const FittedModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GbdtModel>) {
                j["kind"] = "gbdt";
                j["params"] = params_to_json(m.params);
                j["base_score"] = m.base_score;
                j["n_features"] = m.n_features;
                j["seed"] = m.seed;
                j["train_loss"] = m.train_loss;
                j["trees"] = json::array();
                for (const auto& t : m.trees) j["trees"].push_back(tree_to_json(t));
            } else if constexpr (std::is_same_v<M, ForestModel>) {
                j["kind"] = "random_forest";
                j["params"] = params_to_json(m.params);
                j["n_features"] = m.n_features;
                j["seed"] = m.seed;
                j["trees"] = json::array();
                for (const auto& t : m.trees) j["trees"].push_back(tree_to_json(t));
            } else {
                j["kind"] = "linear";
                j["params"] = params_to_json(m.params);
                j["weights"] = vec_json(m.weights);
                j["intercept"] = m.intercept;
                j["center"] = vec_json(m.center);
                j["scale"] = vec_json(m.scale);
            }
        },
        model);
    return j;
}

FittedModel model_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw IoError("unsupported model format_version");
        }
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "gbdt") {
            GbdtModel m;
            m.params = std::get<GbdtParams>(params_from_json(j.at("params")));
            m.base_score = j.at("base_score").get<double>();
            m.n_features = j.at("n_features").get<std::size_t>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.train_loss = j.at("train_loss").get<std::vector<double>>();
            for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
            return m;
        }
        if (kind == "random_forest") {
            ForestModel m;
            m.params = std::get<ForestParams>(params_from_json(j.at("params")));
            m.n_features = j.at("n_features").get<std::size_t>();
            m.seed = j.at("seed").get<std::uint64_t>();
            for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
            if (m.trees.empty()) throw IoError("forest document has no trees");
            return m;
        }
        if (kind == "linear") {
            LinearModel m;
            m.params = std::get<LinearParams>(params_from_json(j.at("params")));
            m.weights = vec_from(j.at("weights"));
            m.intercept = j.at("intercept").get<double>();
            m.center = vec_from(j.at("center"));
            m.scale = vec_from(j.at("scale"));
            return m;
        }
        throw IoError("unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed model document: ") + e.what());
    } catch (const std::bad_variant_access&) {
        throw IoError("model document params do not match its kind");
    }
}

}  // namespace prevcare
