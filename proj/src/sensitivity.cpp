#include "prevcare/sensitivity.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace prevcare {

Vector perturb_effects(const Vector& gammas, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    if (sigma == 0.0) return gammas;
    Rng rng(seed);
    std::normal_distribution<double> eps(0.0, sigma);
    Vector out(gammas.size());
    for (Eigen::Index i = 0; i < gammas.size(); ++i) out(i) = clamp01(gammas(i) + eps(rng));
    return out;
}

std::vector<NoiseRow> noise_robustness_study(const Panel& panel, const ScenarioConfig& config,
                                             const std::vector<double>& sigmas, ModelCache* cache) {
    if (sigmas.empty()) throw ConfigError("noise study needs at least one sigma");
    std::optional<ModelCache> own;
    if (!cache) {
        own.emplace(panel);
        cache = &*own;
    }
    std::vector<NoiseRow> rows;
    for (double s : sigmas) {
        if (!(s >= 0.0)) throw ConfigError("noise sigma must be >= 0");
        ScenarioConfig c = config;
        c.allocation_noise = s;
        const auto r = run_scenario(panel, c, cache);
        rows.push_back({s, r.prevented_onsets, r.prevented_bootstrap.sd, r.cost_savings, r.savings_bootstrap.sd});
    }
    return rows;
}

void write_noise_csv(const std::vector<NoiseRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "sigma,prevented_onsets,prevented_sd,cost_savings,savings_sd\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.sigma, r.prevented_onsets, r.prevented_sd,
                      r.cost_savings, r.savings_sd);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Convergence

RiskConfig ConvergenceConfig::default_risk() {
    RiskConfig r;
    r.learner = LearnerKind::ridge;
    r.search.n_trials = 0;
    r.search.n_folds = 5;
    r.search.smote = false;
    LinearParams lp;
    lp.penalty = Penalty::l2;
    lp.alpha = 1e-3;
    r.params = lp;
    return r;
}

namespace {

struct Scored {
    double expected = 0.0;
    double realized = 0.0;
};

Scored score_selection(const Panel& pop, const ScoreMap& risk, int k, double gamma, std::uint64_t seed) {
    ScoreMap g;
    for (const auto& [id, h] : risk) g.emplace_hint(g.end(), id, gamma);
    const auto sel = select_topk(risk, g, k, seed);
    Scored s;
    for (const auto& id : sel.chosen) {
        const auto idx = *pop.index_of(id, 1);
        s.expected += gamma * pop.truth(idx).untreated_risk;
        s.realized += gamma * (pop.records()[idx].onset_next.value_or(false) ? 1.0 : 0.0);
    }
    return s;
}

}  // namespace

ConvergenceCurve convergence_study(const ConvergenceConfig& c) {
    if (c.n_train.empty()) throw ConfigError("convergence study needs at least one training size");
    if (c.budget_k < 0 || static_cast<std::size_t>(c.budget_k) > c.population) {
        throw ConfigError("convergence budget must lie in [0, population]");
    }
    if (c.gamma < 0.0 || c.gamma > 1.0) throw ConfigError("gamma must lie in [0,1]");
    const std::size_t max_train = *std::max_element(c.n_train.begin(), c.n_train.end());
    if (*std::min_element(c.n_train.begin(), c.n_train.end()) < 10) {
        throw ConfigError("training sizes must be at least 10");
    }

    const Panel train = generate_synthetic_cohort(convergence_dgp(max_train, derive_seed(c.seed, 1)));
    const Panel pop = generate_synthetic_cohort(convergence_dgp(c.population, derive_seed(c.seed, 2)));
    const auto d = static_cast<Eigen::Index>(train.n_features());
    const std::uint64_t tie_seed = derive_seed(c.seed, 4);

    ConvergenceCurve curve;
    ScoreMap truth_risk;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        truth_risk.emplace(pop.records()[i].patient_id, pop.truth(i).untreated_risk);
    }
    const auto oracle = score_selection(pop, truth_risk, c.budget_k, c.gamma, tie_seed);
    curve.oracle = oracle.expected;
    curve.oracle_realized = oracle.realized;

    std::vector<std::size_t> columns(static_cast<std::size_t>(d));
    std::iota(columns.begin(), columns.end(), std::size_t{0});
    for (std::size_t n : c.n_train) {
        ScoreMap risk;
        if (c.oracle_learner) {
            risk = truth_risk;
        } else {
            const auto rows = static_cast<Eigen::Index>(n);
            Matrix X(rows, d);
            Vector y(rows);
            std::vector<int> groups(n);
            for (Eigen::Index i = 0; i < rows; ++i) {
                const auto& r = train.records()[static_cast<std::size_t>(i)];
                X.row(i) = r.features.transpose();
                y(i) = r.onset_next.value_or(false) ? 1.0 : 0.0;
                groups[static_cast<std::size_t>(i)] = static_cast<int>(i);
            }
            const auto model = fit_risk_model(X, y, groups, columns, c.risk, derive_seed(c.seed, 3));
            for (const auto& r : pop.records()) risk.emplace(r.patient_id, model.predict(Vector(r.features)));
        }
        const auto s = score_selection(pop, risk, c.budget_k, c.gamma, tie_seed);
        curve.points.push_back({n, s.expected, s.realized});
    }
    return curve;
}

void write_convergence_csv(const std::vector<ConvergenceCurve>& curves, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "replicate,n_train,prevented,prevented_realized,oracle,oracle_realized\n";
    char buf[256];
    for (std::size_t r = 0; r < curves.size(); ++r) {
        for (const auto& p : curves[r].points) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%.9g,%.9g,%.9g\n", r, p.n_train, p.prevented,
                          p.prevented_realized, curves[r].oracle, curves[r].oracle_realized);
            out << buf;
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Omitted-variable bias

OlsFit fit_ols(const Matrix& X, const Vector& y) {
    const auto n = X.rows();
    const auto p = X.cols() + 1;
    if (y.size() != n) throw DataError("fit_ols: size mismatch");
    if (n <= p) throw DataError("fit_ols: need more rows than coefficients");
    Matrix A(n, p);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    if (qr.rank() < p) throw DataError("fit_ols: design matrix is rank deficient");
    OlsFit f;
    f.coef = qr.solve(y);
    const Vector resid = y - A * f.coef;
    f.dof = static_cast<int>(n - p);
    f.sigma2 = resid.squaredNorm() / f.dof;
    // (A'A)^-1 = P R^-1 R^-T P'
    const Matrix R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
    const Matrix inv_perm = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    const Matrix cov = perm * inv_perm * perm.transpose();
    f.se = (cov.diagonal() * f.sigma2).cwiseSqrt();
    return f;
}

double partial_r2(const OlsFit& fit, Eigen::Index j) {
    const double t = fit.coef(j) / fit.se(j);
    return t * t / (t * t + fit.dof);
}

OvbResult ovb_sensitivity(const Vector& y, const Vector& d, const Matrix& X, Eigen::Index benchmark,
                          const std::vector<double>& multipliers) {
    if (benchmark < 0 || benchmark >= X.cols()) throw ConfigError("ovb: benchmark column out of range");
    if (d.size() != y.size() || X.rows() != y.size()) throw DataError("ovb: size mismatch");
    Matrix DX(X.rows(), X.cols() + 1);
    DX.col(0) = d;
    DX.rightCols(X.cols()) = X;
    const auto outcome = fit_ols(DX, y);
    const auto treatment = fit_ols(X, d);

    OvbResult res;
    res.estimate = outcome.coef(1);
    res.se = outcome.se(1);
    res.dof = outcome.dof;
    res.r2_treatment_benchmark = partial_r2(treatment, benchmark + 1);
    res.r2_outcome_benchmark = partial_r2(outcome, benchmark + 2);
    const double r2dx = res.r2_treatment_benchmark;
    const double r2yx = res.r2_outcome_benchmark;
    if (r2dx <= 0.0 || r2yx <= 0.0) {
        throw DataError("ovb: benchmark covariate has zero partial R^2, which gives no scale");
    }

    const double dof = outcome.dof;
    const boost::math::students_t dist(dof - 1.0);
    const double q = boost::math::quantile(dist, 0.975);
    for (double m : multipliers) {
        if (!(m >= 0.0)) throw ConfigError("ovb multipliers must be >= 0");
        OvbRow row;
        row.multiplier = m;
        row.r2_dz = m * r2dx / (1.0 - r2dx);
        if (row.r2_dz >= 1.0) {
            throw ConfigError("ovb: multiplier " + std::to_string(m) + " implies a treatment partial R^2 >= 1");
        }
        const double r2_zx = m * r2dx * r2dx / ((1.0 - m * r2dx) * (1.0 - r2dx));
        if (r2_zx >= 1.0) throw ConfigError("ovb: multiplier " + std::to_string(m) + " is too large");
        const double a = (std::sqrt(m) + std::sqrt(r2_zx)) / std::sqrt(1.0 - r2_zx);
        row.r2_yz = std::min(1.0, a * a * r2yx / (1.0 - r2yx));
        row.bias = std::sqrt(row.r2_yz * row.r2_dz / (1.0 - row.r2_dz)) * res.se * std::sqrt(dof);
        const double sign = res.estimate < 0.0 ? -1.0 : 1.0;
        row.estimate = sign * (std::abs(res.estimate) - row.bias);
        row.se = res.se * std::sqrt((1.0 - row.r2_yz) / (1.0 - row.r2_dz)) * std::sqrt(dof / (dof - 1.0));
        row.ci_low = row.estimate - q * row.se;
        row.ci_high = row.estimate + q * row.se;
        row.bound_low = res.estimate - row.bias - q * row.se;
        row.bound_high = res.estimate + row.bias + q * row.se;
        res.rows.push_back(row);
    }
    return res;
}

OvbResult ovb_sensitivity(const Panel& panel, const std::vector<std::string>& covariates,
                          const std::string& benchmark, const std::vector<double>& multipliers,
                          const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> cols;
    Eigen::Index bench = -1;
    for (const auto& name : covariates) {
        const auto c = panel.role(name);
        if (!c) throw ConfigError("ovb: covariate role '" + name + "' is not mapped");
        if (name == benchmark) bench = static_cast<Eigen::Index>(cols.size());
        cols.push_back(*c);
    }
    if (bench < 0) throw ConfigError("ovb: benchmark '" + benchmark + "' is not among the covariates");
    std::vector<std::size_t> use;
    if (rows.empty()) {
        use.resize(panel.size());
        std::iota(use.begin(), use.end(), std::size_t{0});
    } else {
        use = rows;
    }
    std::vector<std::size_t> labeled;
    for (auto i : use) {
        if (i >= panel.size()) throw DataError("ovb: record index out of range");
        if (panel.records()[i].onset_next) labeled.push_back(i);
    }
    const auto n = static_cast<Eigen::Index>(labeled.size());
    Matrix X(n, static_cast<Eigen::Index>(cols.size()));
    Vector y(n), d(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = panel.records()[labeled[static_cast<std::size_t>(r)]];
        for (std::size_t j = 0; j < cols.size(); ++j) {
            X(r, static_cast<Eigen::Index>(j)) = rec.features(static_cast<Eigen::Index>(cols[j]));
        }
        y(r) = *rec.onset_next ? 1.0 : 0.0;
        d(r) = rec.treated ? 1.0 : 0.0;
    }
    return ovb_sensitivity(y, d, X, bench, multipliers);
}

void write_ovb_csv(const std::vector<std::pair<std::string, OvbResult>>& groups, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "group,multiplier,r2_dz,r2_yz,bias,estimate,se,ci_low,ci_high,bound_low,bound_high\n";
    char buf[512];
    for (const auto& [group, res] : groups) {
        for (const auto& r : res.rows) {
            std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", group.c_str(),
                          r.multiplier, r.r2_dz, r.r2_yz, r.bias, r.estimate, r.se, r.ci_low, r.ci_high,
                          r.bound_low, r.bound_high);
            out << buf;
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Subgroups

Subgroups cate_subgroups(const Vector& cate, const Matrix& features, int n_groups, int min_samples_leaf) {
    if (n_groups < 2) throw ConfigError("cate_subgroups: n_groups must be >= 2");
    if (features.rows() != cate.size()) throw DataError("cate_subgroups: size mismatch");
    if (cate.size() == 0) throw DataError("cate_subgroups: no rows");
    const int max_depth = static_cast<int>(std::ceil(std::log2(static_cast<double>(n_groups))));

    struct Leaf {
        std::vector<Eigen::Index> rows;
        int depth = 0;
    };
    std::vector<Leaf> leaves{{std::vector<Eigen::Index>(static_cast<std::size_t>(cate.size())), 0}};
    std::iota(leaves[0].rows.begin(), leaves[0].rows.end(), Eigen::Index{0});
    const double scale = 1.0 + (cate.array() - cate.mean()).square().sum();

    while (static_cast<int>(leaves.size()) < n_groups) {
        int best_leaf = -1;
        SplitChoice best{-1, 0.0, 1e-12 * scale};
        for (std::size_t l = 0; l < leaves.size(); ++l) {
            const auto& leaf = leaves[l];
            if (leaf.depth >= max_depth || leaf.rows.size() < 2) continue;
            const auto m = static_cast<Eigen::Index>(leaf.rows.size());
            Matrix Xs(m, features.cols());
            Vector ys(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                Xs.row(i) = features.row(leaf.rows[static_cast<std::size_t>(i)]);
                ys(i) = cate(leaf.rows[static_cast<std::size_t>(i)]);
            }
            const auto s = best_split(Xs, ys, Vector::Ones(m), SplitCriterion::variance, min_samples_leaf);
            if (s && s->decrease > best.decrease) {
                best = *s;
                best_leaf = static_cast<int>(l);
            }
        }
        if (best_leaf < 0) break;
        Leaf left{{}, leaves[best_leaf].depth + 1};
        Leaf right{{}, leaves[best_leaf].depth + 1};
        for (auto i : leaves[best_leaf].rows) {
            (features(i, best.feature) <= best.threshold ? left : right).rows.push_back(i);
        }
        leaves[best_leaf] = std::move(left);
        leaves.insert(leaves.begin() + best_leaf + 1, std::move(right));
    }

    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t l = 0; l < leaves.size(); ++l) {
        double s = 0.0;
        for (auto i : leaves[l].rows) s += cate(i);
        order.emplace_back(s / static_cast<double>(leaves[l].rows.size()), l);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Subgroups g;
    g.labels.assign(static_cast<std::size_t>(cate.size()), -1);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& leaf = leaves[order[rank].second];
        for (auto i : leaf.rows) g.labels[static_cast<std::size_t>(i)] = static_cast<int>(rank);
        g.group_means.push_back(order[rank].first);
        g.group_sizes.push_back(leaf.rows.size());
    }
    if (g.n_groups() < n_groups) {
        g.warning = "only " + std::to_string(g.n_groups()) + " of " + std::to_string(n_groups) +
                    " groups could be formed from the effect estimates";
    }
    return g;
}

// ---------------------------------------------------------------------------
// Feature importance

std::string to_string(ImportanceMethod m) {
    return m == ImportanceMethod::permutation ? "permutation" : "shapley_sampling";
}

ImportanceMethod parse_importance_method(const std::string& s) {
    if (s == "permutation") return ImportanceMethod::permutation;
    if (s == "shapley_sampling") return ImportanceMethod::shapley_sampling;
    throw ConfigError("unknown importance method '" + s + "'");
}

Matrix sampled_shapley(const ScoreFunction& f, const Matrix& X, const Matrix& background, int n_permutations,
                       std::uint64_t seed) {
    if (n_permutations < 1) throw ConfigError("sampled_shapley: need at least one permutation");
    if (background.rows() == 0 || background.cols() != X.cols()) {
        throw DataError("sampled_shapley: background must be non-empty with matching columns");
    }
    const auto p = X.cols();
    Matrix phi = Matrix::Zero(X.rows(), p);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
    std::uniform_int_distribution<Eigen::Index> pick(0, background.rows() - 1);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        const Vector x = X.row(r).transpose();
        for (int s = 0; s < n_permutations; ++s) {
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            Vector z = background.row(pick(rng)).transpose();
            double prev = f(z);
            for (auto j : perm) {
                z(j) = x(j);
                const double cur = f(z);
                phi(r, j) += cur - prev;
                prev = cur;
            }
        }
    }
    return phi / static_cast<double>(n_permutations);
}

namespace {

int correlation_sign(const Vector& a, const Vector& b) {
    const double c = ((a.array() - a.mean()) * (b.array() - b.mean())).sum();
    const double tol = 1e-12 * (1.0 + std::sqrt((a.array() - a.mean()).square().sum() *
                                               (b.array() - b.mean()).square().sum()));
    return c > tol ? 1 : (c < -tol ? -1 : 0);
}

double mean_loss(const ScoreFunction& proba, const Matrix& X, const Vector& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) s += log_loss(y(i), proba(X.row(i).transpose()));
    return s / static_cast<double>(X.rows());
}

}  // namespace

std::vector<Importance> feature_importance(const ScoreFunction& raw, const ScoreFunction& proba,
                                           const Matrix& features, const Vector& labels,
                                           const std::vector<std::string>& names, ImportanceMethod method,
                                           std::uint64_t seed, const ImportanceOptions& opt) {
    const auto n = features.rows();
    const auto p = features.cols();
    if (n == 0) throw DataError("feature_importance: no data");
    if (labels.size() != n) throw DataError("feature_importance: size mismatch");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != p) {
        throw DataError("feature_importance: wrong number of names");
    }
    Vector output(n);
    for (Eigen::Index i = 0; i < n; ++i) output(i) = raw(features.row(i).transpose());

    std::vector<Importance> out(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        auto& imp = out[static_cast<std::size_t>(j)];
        imp.column = static_cast<std::size_t>(j);
        imp.name = names.empty() ? "x" + std::to_string(j) : names[static_cast<std::size_t>(j)];
        imp.sign = correlation_sign(features.col(j), output);
    }

    if (method == ImportanceMethod::permutation) {
        if (opt.permutation_repeats < 2) throw ConfigError("permutation importance needs >= 2 repeats");
        const double base = mean_loss(proba, features, labels);
        Matrix shuffled = features;
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < p; ++j) {
            std::vector<double> inc;
            for (int r = 0; r < opt.permutation_repeats; ++r) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(r)));
                std::iota(idx.begin(), idx.end(), Eigen::Index{0});
                std::shuffle(idx.begin(), idx.end(), rng);
                for (Eigen::Index i = 0; i < n; ++i) shuffled(i, j) = features(idx[static_cast<std::size_t>(i)], j);
                inc.push_back(mean_loss(proba, shuffled, labels) - base);
            }
            shuffled.col(j) = features.col(j);
            const double m = std::accumulate(inc.begin(), inc.end(), 0.0) / static_cast<double>(inc.size());
            double ss = 0.0;
            for (double v : inc) ss += (v - m) * (v - m);
            out[static_cast<std::size_t>(j)].importance = m;
            out[static_cast<std::size_t>(j)].sd = std::sqrt(ss / static_cast<double>(inc.size() - 1));
        }
    } else {
        Rng rng(derive_seed(seed, 0xE));
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto m = std::min<Eigen::Index>(n, std::max(1, opt.shapley_rows));
        Matrix rows(m, p);
        for (Eigen::Index i = 0; i < m; ++i) rows.row(i) = features.row(idx[static_cast<std::size_t>(i)]);
        const Matrix phi = sampled_shapley(raw, rows, features, opt.shapley_permutations, derive_seed(seed, 0xF));
        for (Eigen::Index j = 0; j < p; ++j) {
            const Vector a = phi.col(j).cwiseAbs();
            const double mean = a.mean();
            out[static_cast<std::size_t>(j)].importance = mean;
            out[static_cast<std::size_t>(j)].sd =
                m > 1 ? std::sqrt((a.array() - mean).square().sum() / static_cast<double>(m - 1)) : 0.0;
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Importance& a, const Importance& b) { return a.importance > b.importance; });
    return out;
}

std::vector<Importance> feature_importance(const RiskModel& model, const Matrix& design, const Vector& labels,
                                           const std::vector<std::string>& design_names, ImportanceMethod method,
                                           std::uint64_t seed, const ImportanceOptions& options) {
    if (static_cast<std::size_t>(design.cols()) != model.design_dim) {
        throw DataError("feature_importance: design width does not match the model");
    }
    const auto p = static_cast<Eigen::Index>(model.columns.size());
    Matrix sub(design.rows(), p);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto c = model.columns[static_cast<std::size_t>(j)];
        sub.col(j) = design.col(static_cast<Eigen::Index>(c));
        names.push_back(c < design_names.size() ? design_names[c] : "x" + std::to_string(c));
    }
    auto expand = [&model](const Vector& v) {
        Vector full = Vector::Zero(static_cast<Eigen::Index>(model.design_dim));
        for (std::size_t j = 0; j < model.columns.size(); ++j) {
            full(static_cast<Eigen::Index>(model.columns[j])) = v(static_cast<Eigen::Index>(j));
        }
        return full;
    };
    auto raw = [&](const Vector& v) { return model.raw(expand(v)); };
    auto proba = [&](const Vector& v) { return model.predict(expand(v)); };
    auto out = feature_importance(raw, proba, sub, labels, names, method, seed, options);
    for (auto& imp : out) imp.column = model.columns[imp.column];
    return out;
}

void write_importance_csv(const std::vector<Importance>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "rank,feature,column,importance,sd,sign\n";
    char buf[512];
    int rank = 1;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%s,%zu,%.9g,%.9g,%d\n", rank++, r.name.c_str(), r.column, r.importance,
                      r.sd, r.sign);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace prevcare
