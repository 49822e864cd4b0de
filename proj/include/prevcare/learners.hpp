#pragma once

#include "prevcare/gbdt.hpp"
#include "prevcare/linear.hpp"
#include "prevcare/random_forest.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <variant>

namespace prevcare {

enum class LearnerKind { gbdt, random_forest, lasso, ridge };

std::string to_string(LearnerKind kind);
LearnerKind parse_learner(const std::string& name);

using FittedModel = std::variant<GbdtModel, ForestModel, LinearModel>;

/// Uncalibrated score on the logit scale.
double predict_raw(const FittedModel& model, const Eigen::Ref<const Vector>& x);
/// Probability strictly inside (0,1).
double predict_proba(const FittedModel& model, const Eigen::Ref<const Vector>& x);
Vector predict_raw_rows(const FittedModel& model, const Matrix& X);

/// Hyperparameters of one learner family.
using LearnerParams = std::variant<GbdtParams, ForestParams, LinearParams>;

LearnerParams default_params(LearnerKind kind);
FittedModel fit_learner(const Matrix& X, const Vector& y, const LearnerParams& params, std::uint64_t seed);

// Versioned JSON documents for persistence.
inline constexpr int kModelFormatVersion = 1;

nlohmann::json params_to_json(const LearnerParams& params);
LearnerParams params_from_json(const nlohmann::json& j);
nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

}  // namespace prevcare
