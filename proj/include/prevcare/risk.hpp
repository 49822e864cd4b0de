#pragma once

#include "prevcare/cohort.hpp"
#include "prevcare/learners.hpp"

#include <array>
#include <climits>
#include <optional>
#include <string>
#include <vector>

namespace prevcare {

/// Which inputs the risk model sees.
/// framingham_only: the variables of the clinical score; the plus variant adds age and HbA1c.
enum class FeatureView { full, framingham_only, framingham_plus_age_hba1c };

std::string to_string(FeatureView view);
FeatureView parse_feature_view(const std::string& name);

/// Design row of a record: [fasting_glucose, features...].
Vector design_row(const PatientRecord& record);

/// Columns of the design row used by `view`. Throws ConfigError when a required role is unmapped.
std::vector<std::size_t> view_columns(const RoleMap& roles, std::size_t n_features, FeatureView view);

/// p = sigmoid(a * s + b) over raw score s.
struct PlattCalibrator {
    double a = 1.0;
    double b = 0.0;
    int iterations = 0;

    double operator()(double raw) const { return sigmoid(a * raw + b); }
};

PlattCalibrator fit_platt(const Vector& raw_scores, const Vector& labels);

struct SmoteResult {
    Matrix X;
    Vector y;
    std::size_t n_synthetic = 0;
    /// For synthetic row n_original + s: the two minority rows it interpolates.
    std::vector<std::array<Eigen::Index, 2>> parents;
};

/// Synthetic rows needed so that minority/majority >= target_ratio.
std::size_t smote_synthetic_count(std::size_t n_minority, std::size_t n_majority, double target_ratio);

SmoteResult smote_oversample(const Matrix& X, const Vector& y, int k_neighbors, double target_ratio,
                             std::uint64_t seed);

struct SearchConfig {
    int n_trials = 100;  // 0 fits the default hyperparameters without searching
    int n_folds = 10;
    bool smote = true;
    int smote_k = 5;
    double smote_ratio = 1.0;
};

struct RiskConfig {
    LearnerKind learner = LearnerKind::gbdt;
    FeatureView view = FeatureView::full;
    SearchConfig search;
    std::optional<LearnerParams> params;  // used instead of defaults when n_trials == 0
};

struct TrialResult {
    LearnerParams params;
    double cv_log_loss = 0.0;
};

/// Draws one hyperparameter setting from the tuning ranges of `kind`.
LearnerParams sample_params(LearnerKind kind, Rng& rng);

struct RiskModel {
    LearnerKind learner = LearnerKind::gbdt;
    FeatureView view = FeatureView::full;
    std::vector<std::size_t> columns;  // into the design row
    std::size_t design_dim = 0;
    LearnerParams params;
    FittedModel model;
    PlattCalibrator calibrator;
    std::vector<TrialResult> trials;
    // Cross-fitted Brier scores over the validation folds, before and after calibration.
    double brier_uncalibrated = 0.0;
    double brier_calibrated = 0.0;
    std::size_t n_train = 0;
    int trained_before_year = INT_MAX;
    std::vector<std::size_t> training_records;  // panel indices that were used

    /// Uncalibrated logit from a full design row.
    double raw(const Eigen::Ref<const Vector>& design) const;
    /// Calibrated onset probability from a full design row.
    double predict(const Eigen::Ref<const Vector>& design) const;
    double predict(const PatientRecord& record) const { return predict(design_row(record)); }
};

/// Records usable for training: untreated, labeled, year < before_year.
std::vector<std::size_t> risk_training_records(const Panel& panel, int before_year = INT_MAX);

RiskModel train_risk_model(const Panel& panel, const RiskConfig& config, std::uint64_t seed,
                           int before_year = INT_MAX);

/// Lower-level entry point on an explicit design matrix. `groups` keeps rows of one patient in
/// the same fold.
RiskModel fit_risk_model(const Matrix& design, const Vector& y, const std::vector<int>& groups,
                         const std::vector<std::size_t>& columns, const RiskConfig& config,
                         std::uint64_t seed);

double predict_risk(const RiskModel& model, const Eigen::Ref<const Vector>& design);

struct CalibrationBin {
    double mean_predicted = 0.0;
    double observed_rate = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins over [0,1]; empty bins are omitted.
std::vector<CalibrationBin> calibration_curve(const Vector& predicted, const Vector& labels, int n_bins);

double brier_score(const Vector& predicted, const Vector& labels);

nlohmann::json risk_model_to_json(const RiskModel& model);
RiskModel risk_model_from_json(const nlohmann::json& j);

}  // namespace prevcare
