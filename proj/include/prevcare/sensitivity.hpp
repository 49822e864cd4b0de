#pragma once

#include "prevcare/simulation.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace prevcare {

/// clip(gamma + N(0, sigma^2), 0, 1), one draw per entry in order.
Vector perturb_effects(const Vector& gammas, double sigma, std::uint64_t seed);

struct NoiseRow {
    double sigma = 0.0;
    double prevented_onsets = 0.0;
    double prevented_sd = 0.0;
    double cost_savings = 0.0;
    double savings_sd = 0.0;
};

/// Noise enters the allocation only; outcomes are scored with the unperturbed effects.
std::vector<NoiseRow> noise_robustness_study(const Panel& panel, const ScenarioConfig& config,
                                             const std::vector<double>& sigmas, ModelCache* cache = nullptr);

void write_noise_csv(const std::vector<NoiseRow>& rows, const std::string& path);

struct ConvergenceConfig {
    std::size_t population = 10000;
    int budget_k = 1000;
    std::vector<std::size_t> n_train{250, 500, 1000, 2000, 3000, 5000, 10000};
    double gamma = 0.31;
    RiskConfig risk = default_risk();
    /// Replace the learner by the true latent risk (upper bound check).
    bool oracle_learner = false;
    std::uint64_t seed = 1;

    static RiskConfig default_risk();
};

struct ConvergencePoint {
    std::size_t n_train = 0;
    /// gamma * sum of true onset probabilities over the selected patients.
    double prevented = 0.0;
    /// gamma * realized onsets among the selected patients.
    double prevented_realized = 0.0;
};

struct ConvergenceCurve {
    std::vector<ConvergencePoint> points;
    double oracle = 0.0;  // same metric under the allocation by true risk
    double oracle_realized = 0.0;
};

/// Training sets are nested prefixes of one generated sample, scored on a separate population.
ConvergenceCurve convergence_study(const ConvergenceConfig& config);

/// One row per (replicate, n_train).
void write_convergence_csv(const std::vector<ConvergenceCurve>& curves, const std::string& path);

struct OlsFit {
    Vector coef;  // intercept first
    Vector se;
    double sigma2 = 0.0;
    int dof = 0;
};

/// OLS of y on [1, X]. Throws DataError on rank deficiency.
OlsFit fit_ols(const Matrix& X, const Vector& y);

/// Partial R^2 of coefficient j from its t statistic: t^2 / (t^2 + dof).
double partial_r2(const OlsFit& fit, Eigen::Index coef_index);

struct OvbRow {
    double multiplier = 0.0;
    double r2_dz = 0.0;  // implied partial R^2 of the confounder with treatment
    double r2_yz = 0.0;  // ... and with the outcome
    double bias = 0.0;
    double estimate = 0.0;  // estimate moved toward zero by the bias bound
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    // Interval covering the effect whichever way the confounder pushes.
    double bound_low = 0.0;
    double bound_high = 0.0;
};

struct OvbResult {
    double estimate = 0.0;
    double se = 0.0;
    int dof = 0;
    double r2_treatment_benchmark = 0.0;
    double r2_outcome_benchmark = 0.0;
    std::vector<OvbRow> rows;
};

/// Regression of y on treatment d and covariates X; the benchmark is a column of X.
OvbResult ovb_sensitivity(const Vector& y, const Vector& d, const Matrix& X, Eigen::Index benchmark,
                          const std::vector<double>& multipliers);

inline const std::vector<std::string> kOvbCovariates{"age",         "sex",          "weight", "bmi",
                                                     "systolic_bp", "diastolic_bp", "height"};

/// On labeled panel records (optionally restricted to `rows`), with the covariates given by role.
OvbResult ovb_sensitivity(const Panel& panel, const std::vector<std::string>& covariates,
                          const std::string& benchmark, const std::vector<double>& multipliers,
                          const std::vector<std::size_t>& rows = {});

void write_ovb_csv(const std::vector<std::pair<std::string, OvbResult>>& groups, const std::string& path);

struct Subgroups {
    std::vector<int> labels;  // 0 = A (lowest mean effect), 1 = B, ...
    std::vector<double> group_means;
    std::vector<std::size_t> group_sizes;
    std::string warning;
    int n_groups() const { return static_cast<int>(group_means.size()); }
};

/// Regression tree of depth ceil(log2 n_groups) on the effect estimates, grown best-first to at
/// most n_groups leaves.
Subgroups cate_subgroups(const Vector& cate, const Matrix& features, int n_groups = 4, int min_samples_leaf = 1);

enum class ImportanceMethod { permutation, shapley_sampling };

std::string to_string(ImportanceMethod m);
ImportanceMethod parse_importance_method(const std::string& s);

struct Importance {
    std::size_t column = 0;
    std::string name;
    double importance = 0.0;
    double sd = 0.0;  // spread over shuffles (permutation) or rows (Shapley)
    int sign = 0;     // sign of corr(feature, model output)
};

struct ImportanceOptions {
    int permutation_repeats = 20;
    int shapley_rows = 200;          // rows explained
    int shapley_permutations = 100;  // sampled orderings per row
};

using ScoreFunction = std::function<double(const Vector&)>;

/// Monte Carlo Shapley values of `f` for each row of X against random background rows.
/// Returns rows x features.
Matrix sampled_shapley(const ScoreFunction& f, const Matrix& X, const Matrix& background, int n_permutations,
                       std::uint64_t seed);

/// Importance of every column of `features`. Permutation: mean increase of log-loss of `proba`;
/// Shapley: mean |phi| of `raw`.
std::vector<Importance> feature_importance(const ScoreFunction& raw, const ScoreFunction& proba,
                                           const Matrix& features, const Vector& labels,
                                           const std::vector<std::string>& names, ImportanceMethod method,
                                           std::uint64_t seed, const ImportanceOptions& options = {});

/// Importance of the risk model's input columns over design rows.
std::vector<Importance> feature_importance(const RiskModel& model, const Matrix& design, const Vector& labels,
                                           const std::vector<std::string>& design_names, ImportanceMethod method,
                                           std::uint64_t seed, const ImportanceOptions& options = {});

void write_importance_csv(const std::vector<Importance>& rows, const std::string& path);

}  // namespace prevcare
