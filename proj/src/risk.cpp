#include "prevcare/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace prevcare {

using nlohmann::json;

std::string to_string(FeatureView view) {
    switch (view) {
        case FeatureView::full: return "full";
        case FeatureView::framingham_only: return "framingham_only";
        case FeatureView::framingham_plus_age_hba1c: return "framingham_plus_age_hba1c";
    }
    return "?";
}

FeatureView parse_feature_view(const std::string& name) {
    if (name == "full") return FeatureView::full;
    if (name == "framingham_only") return FeatureView::framingham_only;
    if (name == "framingham_plus_age_hba1c") return FeatureView::framingham_plus_age_hba1c;
    throw ConfigError("unknown feature view '" + name + "'");
}

Vector design_row(const PatientRecord& r) {
    Vector x(r.features.size() + 1);
    x(0) = r.fasting_glucose;
    x.tail(r.features.size()) = r.features;
    return x;
}

std::vector<std::size_t> view_columns(const RoleMap& roles, std::size_t n_features, FeatureView view) {
    std::vector<std::size_t> cols;
    if (view == FeatureView::full) {
        cols.resize(n_features + 1);
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        return cols;
    }
    std::vector<std::string_view> needed = {roles::bmi,           roles::hdl,         roles::sex,
                                            roles::parental_history, roles::triglycerides,
                                            roles::systolic_bp,   roles::diastolic_bp, roles::bp_treatment};
    if (view == FeatureView::framingham_plus_age_hba1c) {
        needed.push_back(roles::age);
        needed.push_back(roles::hba1c);
    }
    cols.push_back(0);  // fasting glucose
    for (auto name : needed) {
        auto it = roles.find(std::string(name));
        if (it == roles.end()) {
            throw ConfigError("feature view '" + to_string(view) + "' needs the '" + std::string(name) +
                              "' role, which the panel does not map");
        }
        cols.push_back(it->second + 1);
    }
    return cols;
}

namespace {

Vector project(const Eigen::Ref<const Vector>& design, const std::vector<std::size_t>& cols) {
    Vector v(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) v(static_cast<Eigen::Index>(k)) = design(static_cast<Eigen::Index>(cols[k]));
    return v;
}

Matrix project_rows(const Matrix& design, const std::vector<std::size_t>& cols) {
    Matrix out(design.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = design.col(static_cast<Eigen::Index>(cols[k]));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Platt scaling

PlattCalibrator fit_platt(const Vector& s, const Vector& y) {
    if (s.size() != y.size() || s.size() == 0) throw DataError("fit_platt: scores and labels must align");
    const double pos = y.sum();
    if (pos <= 0.0 || pos >= static_cast<double>(y.size())) {
        throw DataError("fit_platt: labels must contain both classes");
    }
    const double n = static_cast<double>(s.size());
    auto loss = [&](double a, double b) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double z = a * s(i) + b;
            const double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            total += sp - y(i) * z;
        }
        return total / n;
    };
    PlattCalibrator c{0.0, logit(pos / n), 0};
    double f = loss(c.a, c.b);
    for (int it = 0; it < 200; ++it) {
        double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double p = sigmoid(c.a * s(i) + c.b);
            const double r = p - y(i);
            const double w = p * (1.0 - p);
            ga += r * s(i);
            gb += r;
            haa += w * s(i) * s(i);
            hab += w * s(i);
            hbb += w;
        }
        ga /= n;
        gb /= n;
        c.iterations = it;
        if (std::hypot(ga, gb) < 1e-8) break;
        haa = haa / n + 1e-12;
        hab /= n;
        hbb = hbb / n + 1e-12;
        const double det = haa * hbb - hab * hab;
        double da = (hbb * ga - hab * gb) / det;
        double db = (haa * gb - hab * ga) / det;
        double t = 1.0;
        double f_new = loss(c.a - da, c.b - db);
        while (f_new > f && t > 1e-10) {
            t *= 0.5;
            f_new = loss(c.a - t * da, c.b - t * db);
        }
        if (f_new > f) break;
        c.a -= t * da;
        c.b -= t * db;
        f = f_new;
    }
    return c;
}

// ---------------------------------------------------------------------------
// SMOTE

std::size_t smote_synthetic_count(std::size_t n_min, std::size_t n_maj, double ratio) {
    const double needed = std::ceil(ratio * static_cast<double>(n_maj) - static_cast<double>(n_min) - 1e-9);
    return needed > 0.0 ? static_cast<std::size_t>(needed) : 0;
}

SmoteResult smote_oversample(const Matrix& X, const Vector& y, int k, double ratio, std::uint64_t seed) {
    if (X.rows() != y.size()) throw DataError("smote: X and y row counts differ");
    if (k < 1) throw ConfigError("smote: k_neighbors must be >= 1");
    if (!(ratio >= 0.0)) throw ConfigError("smote: target_ratio must be >= 0");
    std::vector<Eigen::Index> pos;
    std::vector<Eigen::Index> neg;
    for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg).push_back(i);
    const bool pos_minor = pos.size() <= neg.size();
    const auto& minority = pos_minor ? pos : neg;
    const double minority_label = pos_minor ? 1.0 : 0.0;
    const auto& majority = pos_minor ? neg : pos;
    if (minority.size() < static_cast<std::size_t>(k) + 1) {
        throw DataError("smote: minority class has " + std::to_string(minority.size()) +
                        " rows, need at least k_neighbors + 1 = " + std::to_string(k + 1));
    }
    const std::size_t n_new = smote_synthetic_count(minority.size(), majority.size(), ratio);

    SmoteResult out;
    out.n_synthetic = n_new;
    out.X.resize(X.rows() + static_cast<Eigen::Index>(n_new), X.cols());
    out.y.resize(X.rows() + static_cast<Eigen::Index>(n_new));
    out.X.topRows(X.rows()) = X;
    out.y.head(X.rows()) = y;
    if (n_new == 0) return out;

    // k nearest minority neighbours by brute force.
    const auto m = minority.size();
    std::vector<std::vector<Eigen::Index>> neighbours(m);
    std::vector<std::pair<double, Eigen::Index>> dist;
    for (std::size_t a = 0; a < m; ++a) {
        dist.clear();
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            dist.emplace_back((X.row(minority[a]) - X.row(minority[b])).squaredNorm(), minority[b]);
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (int q = 0; q < k; ++q) neighbours[a].push_back(dist[static_cast<std::size_t>(q)].second);
    }

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick_base(0, m - 1);
    std::uniform_int_distribution<int> pick_nn(0, k - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    out.parents.reserve(n_new);
    for (std::size_t s = 0; s < n_new; ++s) {
        // Cycle through the minority so every point seeds roughly equally many samples.
        const std::size_t a = s < m ? s : pick_base(rng);
        const Eigen::Index base = minority[a];
        const Eigen::Index nn = neighbours[a][static_cast<std::size_t>(pick_nn(rng))];
        const double u = unif(rng);
        const auto row = X.rows() + static_cast<Eigen::Index>(s);
        out.X.row(row) = X.row(base) + u * (X.row(nn) - X.row(base));
        out.y(row) = minority_label;
        out.parents.push_back({base, nn});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter search

LearnerParams sample_params(LearnerKind kind, Rng& rng) {
    auto uint_in = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto real_in = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    switch (kind) {
        case LearnerKind::gbdt: {
            GbdtParams p;
            p.n_trees = uint_in(20, 200);
            p.n_leaves = uint_in(20, 150);
            p.learning_rate = real_in(0.01, 0.5);
            p.bin_sample_cap = static_cast<std::size_t>(uint_in(20000, 300000));
            p.min_child_samples = uint_in(20, 500);
            p.lambda_l1 = real_in(0.0, 1.0);
            p.lambda_l2 = real_in(0.0, 1.0);
            p.class_weight = uint_in(0, 1) ? ClassWeight::balanced : ClassWeight::none;
            return p;
        }
        case LearnerKind::random_forest: {
            ForestParams p;
            p.n_trees = uint_in(20, 200);
            p.min_samples_split = uint_in(2, 150);
            const int mf = uint_in(0, 2);
            p.max_features = mf == 0 ? MaxFeatures::sqrt : (mf == 1 ? MaxFeatures::log2 : MaxFeatures::all);
            p.criterion = uint_in(0, 1) ? SplitCriterion::entropy : SplitCriterion::gini;
            p.class_weight = uint_in(0, 1) ? ClassWeight::balanced : ClassWeight::none;
            return p;
        }
        case LearnerKind::lasso:
        case LearnerKind::ridge: {
            LinearParams p;
            p.penalty = kind == LearnerKind::lasso ? Penalty::l1 : Penalty::l2;
            // Log-uniform over the strength range.
            p.alpha = std::pow(10.0, real_in(-3.0, 4.0));
            return p;
        }
    }
    return GbdtParams{};
}

namespace {

bool params_match_kind(const LearnerParams& p, LearnerKind kind) {
    switch (kind) {
        case LearnerKind::gbdt: return std::holds_alternative<GbdtParams>(p);
        case LearnerKind::random_forest: return std::holds_alternative<ForestParams>(p);
        case LearnerKind::lasso:
            return std::holds_alternative<LinearParams>(p) && std::get<LinearParams>(p).penalty == Penalty::l1;
        case LearnerKind::ridge:
            return std::holds_alternative<LinearParams>(p) && std::get<LinearParams>(p).penalty == Penalty::l2;
    }
    return false;
}

struct FoldPlan {
    int n_folds = 0;
    std::vector<int> fold_of_row;
};

FoldPlan make_folds(const std::vector<int>& groups, int requested, std::uint64_t seed) {
    std::vector<int> unique = groups;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < 2) throw InsufficientDataError("risk model: need at least two patients to cross-validate");
    FoldPlan plan;
    plan.n_folds = std::min<int>(std::max(2, requested), static_cast<int>(unique.size()));
    Rng rng(seed);
    std::shuffle(unique.begin(), unique.end(), rng);
    std::vector<std::pair<int, int>> fold_of_group;
    for (std::size_t g = 0; g < unique.size(); ++g) {
        fold_of_group.emplace_back(unique[g], static_cast<int>(g % static_cast<std::size_t>(plan.n_folds)));
    }
    std::sort(fold_of_group.begin(), fold_of_group.end());
    plan.fold_of_row.resize(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        auto it = std::lower_bound(fold_of_group.begin(), fold_of_group.end(), std::make_pair(groups[i], -1));
        plan.fold_of_row[i] = it->second;
    }
    return plan;
}

Matrix take_rows(const Matrix& X, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
    return out;
}

Vector take(const Vector& v, const std::vector<Eigen::Index>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(rows[k]);
    return out;
}

// SMOTE when configured and feasible; shrinks k when the minority is small.
std::pair<Matrix, Vector> maybe_smote(const Matrix& X, const Vector& y, const SearchConfig& s, std::uint64_t seed) {
    if (!s.smote) return {X, y};
    const double pos = y.sum();
    const auto n_min = static_cast<std::size_t>(std::min(pos, static_cast<double>(y.size()) - pos));
    if (n_min < 2) return {X, y};
    const int k = std::min<int>(s.smote_k, static_cast<int>(n_min) - 1);
    auto res = smote_oversample(X, y, k, s.smote_ratio, seed);
    return {std::move(res.X), std::move(res.y)};
}

FittedModel fit_one(const Matrix& X, const Vector& y, const LearnerParams& p, const SearchConfig& s,
                    std::uint64_t smote_seed, std::uint64_t fit_seed) {
    const double pos = y.sum();
    if (pos <= 0.0 || pos >= static_cast<double>(y.size())) {
        throw InsufficientDataError("risk model: a training fold contains only one outcome class");
    }
    auto [Xs, ys] = maybe_smote(X, y, s, smote_seed);
    return fit_learner(Xs, ys, p, fit_seed);
}

struct CvOutcome {
    double log_loss = 0.0;
    Vector oof_raw;
};

CvOutcome cross_validate(const Matrix& X, const Vector& y, const FoldPlan& plan, const LearnerParams& p,
                         const SearchConfig& s, std::uint64_t seed, std::uint64_t trial) {
    CvOutcome out;
    out.oof_raw = Vector::Zero(y.size());
    for (int f = 0; f < plan.n_folds; ++f) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            (plan.fold_of_row[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        }
        if (test.empty()) continue;
        const auto model = fit_one(take_rows(X, train), take(y, train), p, s,
                                   derive_seed(seed, 3, static_cast<std::uint64_t>(f)),
                                   derive_seed(seed, 4, trial * 1000 + static_cast<std::uint64_t>(f)));
        for (auto i : test) out.oof_raw(i) = predict_raw(model, X.row(i).transpose());
    }
    Vector proba(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) proba(i) = sigmoid(std::clamp(out.oof_raw(i), -30.0, 30.0));
    out.log_loss = mean_log_loss(proba, y);
    return out;
}

}  // namespace

double brier_score(const Vector& p, const Vector& y) {
    if (p.size() != y.size() || p.size() == 0) throw DataError("brier_score: size mismatch");
    return (p - y).squaredNorm() / static_cast<double>(p.size());
}

RiskModel fit_risk_model(const Matrix& design, const Vector& y, const std::vector<int>& groups,
                         const std::vector<std::size_t>& columns, const RiskConfig& config, std::uint64_t seed) {
    if (design.rows() != y.size() || groups.size() != static_cast<std::size_t>(y.size())) {
        throw DataError("fit_risk_model: design, labels and groups must align");
    }
    const double pos = y.sum();
    if (y.size() == 0 || pos <= 0.0 || pos >= static_cast<double>(y.size())) {
        throw InsufficientDataError(
            "risk model: need labeled untreated records of both outcome classes (extend the warm-up window)");
    }
    if (config.search.n_trials < 0) throw ConfigError("search.n_trials must be >= 0");
    if (config.params && !params_match_kind(*config.params, config.learner)) {
        throw ConfigError("risk model params do not match learner '" + to_string(config.learner) + "'");
    }
    const Matrix X = project_rows(design, columns);
    const FoldPlan plan = make_folds(groups, config.search.n_folds, derive_seed(seed, 2));

    RiskModel rm;
    rm.learner = config.learner;
    rm.view = config.view;
    rm.columns = columns;
    rm.design_dim = static_cast<std::size_t>(design.cols());
    rm.n_train = static_cast<std::size_t>(y.size());

    Vector best_oof;
    if (config.search.n_trials == 0) {
        rm.params = config.params ? *config.params : default_params(config.learner);
        auto cv = cross_validate(X, y, plan, rm.params, config.search, seed, 0);
        rm.trials.push_back({rm.params, cv.log_loss});
        best_oof = std::move(cv.oof_raw);
    } else {
        Rng search_rng(derive_seed(seed, 1));
        double best = std::numeric_limits<double>::infinity();
        for (int t = 0; t < config.search.n_trials; ++t) {
            LearnerParams p = sample_params(config.learner, search_rng);
            auto cv = cross_validate(X, y, plan, p, config.search, seed, static_cast<std::uint64_t>(t) + 1);
            rm.trials.push_back({p, cv.log_loss});
            if (cv.log_loss < best) {
                best = cv.log_loss;
                rm.params = p;
                best_oof = std::move(cv.oof_raw);
            }
        }
    }

    rm.calibrator = fit_platt(best_oof, y);

    // Cross-fitted calibration check: each fold is calibrated by a sigmoid fit on the others.
    double brier_raw = 0.0;
    double brier_cal = 0.0;
    int counted = 0;
    for (int f = 0; f < plan.n_folds; ++f) {
        std::vector<Eigen::Index> in;
        std::vector<Eigen::Index> out;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            (plan.fold_of_row[static_cast<std::size_t>(i)] == f ? out : in).push_back(i);
        }
        if (out.empty()) continue;
        const Vector yin = take(y, in);
        if (yin.sum() <= 0.0 || yin.sum() >= static_cast<double>(yin.size())) continue;
        const auto cal = fit_platt(take(best_oof, in), yin);
        Vector p_raw(static_cast<Eigen::Index>(out.size()));
        Vector p_cal(static_cast<Eigen::Index>(out.size()));
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double s = best_oof(out[k]);
            p_raw(static_cast<Eigen::Index>(k)) = sigmoid(std::clamp(s, -30.0, 30.0));
            p_cal(static_cast<Eigen::Index>(k)) = cal(s);
        }
        const Vector yout = take(y, out);
        brier_raw += brier_score(p_raw, yout);
        brier_cal += brier_score(p_cal, yout);
        ++counted;
    }
    if (counted > 0) {
        rm.brier_uncalibrated = brier_raw / counted;
        rm.brier_calibrated = brier_cal / counted;
    }

    rm.model = fit_one(X, y, rm.params, config.search, derive_seed(seed, 5), derive_seed(seed, 6));
    return rm;
}

std::vector<std::size_t> risk_training_records(const Panel& panel, int before_year) {
    std::vector<std::size_t> rows;
    const auto& recs = panel.records();
    for (const auto& span : panel.patients()) {
        for (auto i = span.begin; i < span.end; ++i) {
            const auto& r = recs[i];
            if (r.treated) break;  // nothing from a patient once treatment has started
            if (r.year >= before_year) break;
            if (r.onset_next.has_value()) rows.push_back(i);
        }
    }
    return rows;
}

RiskModel train_risk_model(const Panel& panel, const RiskConfig& config, std::uint64_t seed, int before_year) {
    const auto rows = risk_training_records(panel, before_year);
    if (rows.empty()) {
        throw InsufficientDataError("risk model: no labeled untreated records before year " +
                                    std::to_string(before_year) + " (extend the warm-up window)");
    }
    const auto columns = view_columns(panel.roles(), panel.n_features(), config.view);
    Matrix design(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.n_features() + 1));
    Vector y(static_cast<Eigen::Index>(rows.size()));
    std::vector<int> groups(rows.size());
    // Patient ordinal as group id.
    std::vector<int> patient_of(panel.size());
    for (std::size_t p = 0; p < panel.patients().size(); ++p) {
        for (auto i = panel.patients()[p].begin; i < panel.patients()[p].end; ++i) patient_of[i] = static_cast<int>(p);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = panel.records()[rows[k]];
        design.row(static_cast<Eigen::Index>(k)) = design_row(r).transpose();
        y(static_cast<Eigen::Index>(k)) = *r.onset_next ? 1.0 : 0.0;
        groups[k] = patient_of[rows[k]];
    }
    RiskModel rm = fit_risk_model(design, y, groups, columns, config, seed);
    rm.trained_before_year = before_year;
    rm.training_records = rows;
    return rm;
}

double RiskModel::raw(const Eigen::Ref<const Vector>& design) const {
    if (static_cast<std::size_t>(design.size()) != design_dim) {
        throw DataError("risk model: expected design row of " + std::to_string(design_dim) + " values, got " +
                        std::to_string(design.size()));
    }
    return predict_raw(model, project(design, columns));
}

double RiskModel::predict(const Eigen::Ref<const Vector>& design) const {
    return calibrator(raw(design));
}

double predict_risk(const RiskModel& model, const Eigen::Ref<const Vector>& design) {
    return model.predict(design);
}

std::vector<CalibrationBin> calibration_curve(const Vector& p, const Vector& y, int n_bins) {
    if (n_bins < 2) throw ConfigError("calibration_curve: n_bins must be >= 2");
    if (p.size() != y.size()) throw DataError("calibration_curve: size mismatch");
    std::vector<double> sum_p(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<double> sum_y(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(n_bins), 0);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const auto b = static_cast<std::size_t>(std::clamp(static_cast<int>(p(i) * n_bins), 0, n_bins - 1));
        sum_p[b] += p(i);
        sum_y[b] += y(i);
        ++count[b];
    }
    std::vector<CalibrationBin> out;
    for (std::size_t b = 0; b < count.size(); ++b) {
        if (count[b] == 0) continue;
        const double c = static_cast<double>(count[b]);
        out.push_back({sum_p[b] / c, sum_y[b] / c, count[b]});
    }
    return out;
}

json risk_model_to_json(const RiskModel& m) {
    json trials = json::array();
    for (const auto& t : m.trials) trials.push_back({{"params", params_to_json(t.params)}, {"cv_log_loss", t.cv_log_loss}});
    return {{"format_version", kModelFormatVersion},
            {"learner", to_string(m.learner)},
            {"feature_view", to_string(m.view)},
            {"columns", m.columns},
            {"design_dim", m.design_dim},
            {"params", params_to_json(m.params)},
            {"model", model_to_json(m.model)},
            {"calibrator", {{"a", m.calibrator.a}, {"b", m.calibrator.b}}},
            {"search_trials", trials},
            {"brier_uncalibrated", m.brier_uncalibrated},
            {"brier_calibrated", m.brier_calibrated},
            {"n_train", m.n_train},
            {"trained_before_year", m.trained_before_year}};
}

RiskModel risk_model_from_json(const json& j) {
    try {
        RiskModel m;
        if (j.at("format_version").get<int>() != kModelFormatVersion) throw IoError("unsupported risk model version");
        m.learner = parse_learner(j.at("learner").get<std::string>());
        m.view = parse_feature_view(j.at("feature_view").get<std::string>());
        m.columns = j.at("columns").get<std::vector<std::size_t>>();
        m.design_dim = j.at("design_dim").get<std::size_t>();
        m.params = params_from_json(j.at("params"));
        m.model = model_from_json(j.at("model"));
        m.calibrator.a = j.at("calibrator").at("a").get<double>();
        m.calibrator.b = j.at("calibrator").at("b").get<double>();
        for (const auto& t : j.at("search_trials")) {
            m.trials.push_back({params_from_json(t.at("params")), t.at("cv_log_loss").get<double>()});
        }
        m.brier_uncalibrated = j.at("brier_uncalibrated").get<double>();
        m.brier_calibrated = j.at("brier_calibrated").get<double>();
        m.n_train = j.at("n_train").get<std::size_t>();
        m.trained_before_year = j.at("trained_before_year").get<int>();
        return m;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed risk model document: ") + e.what());
    }
}

}  // namespace prevcare
