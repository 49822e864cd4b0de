#pragma once

#include "prevcare/core.hpp"

namespace prevcare {

enum class Penalty { l1, l2 };
enum class LinearLoss { logistic, squared };

struct LinearParams {
    Penalty penalty = Penalty::l2;
    double alpha = 1.0;
    LinearLoss loss = LinearLoss::logistic;
    bool fit_intercept = true;
    bool standardize = true;  // penalize weights on z-scored columns
    double tol = 1e-6;
    int max_iter = 500;
};

/// Penalized generalized linear model.
/// Objective: mean loss + alpha/2 |w|^2 (l2) or alpha |w|_1 (l1); the intercept is unpenalized.
struct LinearModel {
    LinearParams params;
    Vector weights;  // on the (optionally standardized) inputs
    double intercept = 0.0;
    Vector center;
    Vector scale;
    int iterations = 0;
    double final_violation = 0.0;

    double raw_score(const Eigen::Ref<const Vector>& x) const;
    double predict_proba(const Eigen::Ref<const Vector>& x) const;
    /// Weights mapped back to the original feature scale.
    Vector original_weights() const;
    double original_intercept() const;
};

/// `seed` is accepted for interface symmetry; both solvers are deterministic.
LinearModel fit_linear(const Matrix& X, const Vector& y, const LinearParams& params,
                       std::uint64_t seed = 0, const Vector& sample_weight = Vector());

/// Value of the training objective at (w, b) on already-transformed inputs.
double linear_objective(const Matrix& Z, const Vector& y, const Vector& sample_weight,
                        const LinearParams& params, const Vector& w, double b);

}  // namespace prevcare
