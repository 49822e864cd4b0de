#include "prevcare/risk.hpp"

#include <doctest.h>

using namespace prevcare;

namespace {

struct Scored {
    Vector s;
    Vector y;
};

Scored log_odds_sample(int n, std::uint64_t seed, double sd = 2.0) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Scored out{Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
        out.s(i) = z(rng);
        out.y(i) = u(rng) < sigmoid(out.s(i)) ? 1.0 : 0.0;
    }
    return out;
}

// Residual of x against the line through a and b, plus the interpolation coefficient.
std::pair<double, double> segment_fit(const Vector& x, const Vector& a, const Vector& b) {
    const Vector d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return {(x - a).norm(), 0.0};
    const double u = (x - a).dot(d) / len2;
    return {(x - (a + u * d)).norm(), u};
}

RiskConfig quick_config(LearnerKind learner = LearnerKind::gbdt) {
    RiskConfig c;
    c.learner = learner;
    c.search.n_trials = 0;
    c.search.n_folds = 3;
    c.params = default_params(learner);
    if (auto* g = std::get_if<GbdtParams>(&*c.params)) {
        g->n_trees = 30;
        g->n_leaves = 7;
        g->min_child_samples = 40;
    }
    return c;
}

}  // namespace

TEST_SUITE("risk") {

TEST_CASE("smote: two minority points give points on their segment") {
    Matrix X(12, 2);
    Vector y = Vector::Zero(12);
    for (int i = 0; i < 12; ++i) X.row(i) << i, -i;
    X.row(0) << 1.0, 5.0;
    X.row(1) << 4.0, -1.0;
    y(0) = y(1) = 1.0;
    const SmoteResult r = smote_oversample(X, y, 1, 1.0, 7);
    CHECK(r.n_synthetic == 8);
    for (std::size_t s = 0; s < r.n_synthetic; ++s) {
        const Vector x = r.X.row(12 + static_cast<Eigen::Index>(s)).transpose();
        const auto [resid, u] = segment_fit(x, X.row(0).transpose(), X.row(1).transpose());
        CHECK(resid < 1e-12);
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
        CHECK(r.y(12 + static_cast<Eigen::Index>(s)) == 1.0);
    }
}

TEST_CASE("smote: counts and the segment property on random data") {
    Rng rng(3);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix X(1000, 4);
    Vector y = Vector::Zero(1000);
    for (int i = 0; i < 1000; ++i) {
        for (int j = 0; j < 4; ++j) X(i, j) = z(rng);
        if (i % 20 == 0) y(i) = 1.0;
    }
    REQUIRE(y.sum() == 50);
    const SmoteResult r = smote_oversample(X, y, 5, 0.5, 11);
    CHECK(r.y.sum() == 475);
    CHECK(r.n_synthetic == 425);
    CHECK(r.y.sum() / (1000 - 50) >= 0.5);
    for (std::size_t s = 0; s < r.n_synthetic; ++s) {
        const auto& par = r.parents[s];
        CHECK(y(par[0]) == 1.0);
        CHECK(y(par[1]) == 1.0);
        const auto [resid, u] = segment_fit(r.X.row(1000 + static_cast<Eigen::Index>(s)).transpose(),
                                            X.row(par[0]).transpose(), X.row(par[1]).transpose());
        CHECK(resid < 1e-9);
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
    }
    CHECK(smote_oversample(X, y, 5, 50.0 / 950.0, 11).n_synthetic == 0);
    CHECK(smote_synthetic_count(50, 950, 0.5) == 425);
}

TEST_CASE("smote: too few minority samples is an error") {
    Matrix X = Matrix::Random(20, 2);
    Vector y = Vector::Zero(20);
    y(0) = y(1) = 1.0;
    CHECK_THROWS_AS(smote_oversample(X, y, 5, 1.0, 1), DataError);
}

TEST_CASE("platt recovers identity on true log-odds") {
    const Scored d = log_odds_sample(20000, 5);
    const PlattCalibrator c = fit_platt(d.s, d.y);
    CHECK(std::abs(c.a - 1.0) < 0.05);
    CHECK(std::abs(c.b) < 0.05);
}

TEST_CASE("platt on uninformative scores returns the base rate") {
    Rng rng(9);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector s(20000), y(20000);
    for (int i = 0; i < 20000; ++i) {
        s(i) = z(rng);
        y(i) = u(rng) < 0.2 ? 1.0 : 0.0;
    }
    const PlattCalibrator c = fit_platt(s, y);
    CHECK(std::abs(c.a) < 0.05);
    CHECK(c(0.0) == doctest::Approx(y.mean()).epsilon(0.02));
}

TEST_CASE("platt is invariant to affine rescaling and monotone") {
    const Scored d = log_odds_sample(3000, 6);
    const PlattCalibrator c1 = fit_platt(d.s, d.y);
    const Vector s2 = (2.0 * d.s.array() + 3.0).matrix();
    const PlattCalibrator c2 = fit_platt(s2, d.y);
    for (int i = 0; i < 100; ++i) {
        CHECK(std::abs(c1(d.s(i)) - c2(s2(i))) < 1e-6);
    }
    REQUIRE(c1.a > 0.0);
    for (int i = 1; i < 100; ++i) {
        if (d.s(i) > d.s(i - 1)) CHECK(c1(d.s(i)) > c1(d.s(i - 1)));
    }
    CHECK_THROWS_AS(fit_platt(d.s, Vector::Zero(3000)), DataError);
}

TEST_CASE("calibration curve: binomial bounds and partitions") {
    Rng rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector p(20000), y(20000);
    for (int i = 0; i < 20000; ++i) {
        p(i) = u(rng);
        y(i) = u(rng) < p(i) ? 1.0 : 0.0;
    }
    for (const auto& b : calibration_curve(p, y, 10)) {
        const double sd = std::sqrt(b.mean_predicted * (1 - b.mean_predicted) / b.count);
        CHECK(std::abs(b.observed_rate - b.mean_predicted) <= 3.0 * sd + 0.005);
    }

    Vector half = Vector::Constant(100, 0.5);
    Vector bal = Vector::Zero(100);
    bal.head(50).setOnes();
    const auto single = calibration_curve(half, bal, 10);
    REQUIRE(single.size() == 1);
    CHECK(single[0].mean_predicted == 0.5);
    CHECK(single[0].observed_rate == 0.5);

    const Vector ten = Vector::LinSpaced(10, 0.03, 0.97);
    std::size_t total = 0;
    const auto bins = calibration_curve(ten, Vector::Zero(10), 10);
    CHECK(bins.size() <= 10);
    for (const auto& b : bins) total += b.count;
    CHECK(total == 10);
    CHECK_THROWS_AS(calibration_curve(ten, Vector::Zero(10), 1), ConfigError);
}

TEST_CASE("risk model approaches the oracle ranking on the convergence DGP") {
    const Panel train = generate_synthetic_cohort(convergence_dgp(5000, 31));
    const Panel test = generate_synthetic_cohort(convergence_dgp(20000, 32));
    RiskConfig cfg;
    cfg.learner = LearnerKind::ridge;
    cfg.search.n_trials = 0;
    cfg.search.n_folds = 5;
    cfg.search.smote = false;
    const RiskModel m = train_risk_model(train, cfg, 1);
    Vector pred(20000), oracle(20000), y(20000);
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        pred(k) = m.predict(test.records()[i]);
        oracle(k) = test.truth(i).untreated_risk;
        y(k) = *test.records()[i].onset_next ? 1.0 : 0.0;
    }
    const double auc_oracle = roc_auc(oracle, y);
    CHECK(roc_auc(pred, y) >= auc_oracle - 0.03);
    CHECK(pred.minCoeff() >= 0.0);
    CHECK(pred.maxCoeff() <= 1.0);
}

TEST_CASE("risk model on the demo cohort ranks well out of sample") {
    const Panel train = generate_synthetic_cohort(demo_cohort_config(41, 1500));
    const Panel test = generate_synthetic_cohort(demo_cohort_config(42, 1500));
    const RiskModel m = train_risk_model(train, quick_config(), 2);
    std::vector<double> pv, ov, yv;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& r = test.records()[i];
        if (r.treated || !r.onset_next) continue;
        pv.push_back(m.predict(r));
        ov.push_back(test.truth(i).untreated_risk);
        yv.push_back(*r.onset_next ? 1.0 : 0.0);
    }
    const auto as_vec = [](const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); };
    const double auc_model = roc_auc(as_vec(pv), as_vec(yv));
    const double auc_oracle = roc_auc(as_vec(ov), as_vec(yv));
    CHECK(auc_model > 0.6);
    CHECK(auc_model >= auc_oracle - 0.06);
}

TEST_CASE("training data excludes treated, unlabeled and future records") {
    GenConfig g = demo_cohort_config(5, 800);
    g.missed_followup_rate = 0.1;
    const Panel p = generate_synthetic_cohort(g);
    const RiskModel m = train_risk_model(p, quick_config(LearnerKind::lasso), 3, 4);
    REQUIRE_FALSE(m.training_records.empty());
    for (auto i : m.training_records) {
        const auto& r = p.records()[i];
        CHECK_FALSE(r.treated);
        CHECK(r.onset_next.has_value());
        CHECK(r.year < 4);
    }
    CHECK(m.training_records == risk_training_records(p, 4));
    CHECK(m.brier_calibrated <= m.brier_uncalibrated + 1e-12);
}

TEST_CASE("random search respects the budget and is deterministic") {
    const Panel p = generate_synthetic_cohort(demo_cohort_config(6, 600));
    RiskConfig cfg;
    cfg.learner = LearnerKind::lasso;
    cfg.search.n_trials = 1;
    cfg.search.n_folds = 3;
    const RiskModel a = train_risk_model(p, cfg, 4, 3);
    CHECK(a.trials.size() == 1);
    cfg.search.n_trials = 3;
    const RiskModel b = train_risk_model(p, cfg, 4, 3);
    const RiskModel c = train_risk_model(p, cfg, 4, 3);
    CHECK(b.trials.size() == 3);
    CHECK(risk_model_to_json(b).dump() == risk_model_to_json(c).dump());
}

TEST_CASE("feature views select the score inputs") {
    const Panel p = generate_synthetic_cohort(demo_cohort_config(7, 600));
    RiskConfig cfg = quick_config(LearnerKind::ridge);
    cfg.view = FeatureView::framingham_only;
    const RiskModel m1 = train_risk_model(p, cfg, 1, 3);
    CHECK(m1.columns.size() == 9);
    cfg.view = FeatureView::framingham_plus_age_hba1c;
    CHECK(train_risk_model(p, cfg, 1, 3).columns.size() == 11);
    CHECK(view_columns(p.roles(), p.n_features(), FeatureView::full).size() == p.n_features() + 1);
    CHECK_THROWS_AS(view_columns(RoleMap{}, 3, FeatureView::framingham_only), ConfigError);

    const RiskModel back = risk_model_from_json(nlohmann::json::parse(risk_model_to_json(m1).dump()));
    const Vector x = design_row(p.records()[10]);
    CHECK(back.predict(x) == doctest::Approx(m1.predict(x)).epsilon(1e-12));
    CHECK_THROWS_AS(m1.predict(Vector::Zero(3)), DataError);
}

TEST_CASE("calibrated brier does not exceed raw brier across learners") {
    const Panel p = generate_synthetic_cohort(demo_cohort_config(8, 1000));
    for (LearnerKind k : {LearnerKind::gbdt, LearnerKind::lasso}) {
        const RiskModel m = train_risk_model(p, quick_config(k), 5);
        CHECK(m.brier_calibrated <= m.brier_uncalibrated + 1e-12);
    }
}

TEST_CASE("no labeled untreated data is an insufficient-data error") {
    const Panel p = generate_synthetic_cohort(demo_cohort_config(9, 200));
    CHECK_THROWS_AS(train_risk_model(p, quick_config(), 1, 1), InsufficientDataError);
}

}
