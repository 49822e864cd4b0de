#pragma once

#include "prevcare/cohort.hpp"
#include "prevcare/tree.hpp"

#include <nlohmann/json.hpp>

#include <climits>
#include <optional>
#include <vector>

namespace prevcare {

struct CausalForestParams {
    int n_estimators = 10;
    int max_features = 10;
    int max_depth = 5;
    int min_samples_leaf = 100;
    int min_treated_per_leaf = 10;
    double subsample = 0.5;         // drawn without replacement per tree
    double split_fraction = 0.5;    // share of the subsample used to grow splits
};

/// Honest causal forest. Leaf values are risk reductions mean(y|control) - mean(y|treated)
/// estimated on rows disjoint from those that chose the splits.
struct CausalForest {
    CausalForestParams params;
    std::vector<Tree> trees;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    // Row indices per tree; kept so honesty can be audited.
    std::vector<std::vector<Eigen::Index>> split_rows;
    std::vector<std::vector<Eigen::Index>> estimate_rows;

    /// Average of per-tree leaf estimates, unclipped.
    double raw_cate(const Eigen::Ref<const Vector>& x) const;
    /// raw_cate clipped to [0,1].
    double estimate(const Eigen::Ref<const Vector>& x) const;
};

/// `t` holds 0/1 treatment flags.
CausalForest fit_causal_forest(const Matrix& X, const Vector& y, const Vector& t,
                               const CausalForestParams& params, std::uint64_t seed);

double estimate_cate(const CausalForest& forest, const Eigen::Ref<const Vector>& x);

/// Forest input for a record: [fasting_glucose, features..., year].
Vector effect_row(const PatientRecord& record);

struct EffectData {
    Matrix X;
    Vector y;
    Vector t;
    std::vector<std::size_t> records;
};

/// Labeled records with year < before_year, pooled across years.
EffectData effect_training_data(const Panel& panel, int before_year = INT_MAX);

CausalForest fit_causal_forest(const Panel& panel, const CausalForestParams& params, std::uint64_t seed,
                               int before_year = INT_MAX);

enum class EffectMode { forest, known };

/// How a forest estimate becomes the multiplier gamma: `absolute` uses the risk difference as is,
/// `relative` divides it by the patient's predicted untreated risk.
enum class EffectScale { absolute, relative };

struct EffectSpec {
    EffectMode mode = EffectMode::forest;
    double known_gamma = 0.58;
    bool decay = false;
    EffectScale scale = EffectScale::absolute;
};

void validate(const EffectSpec& spec);

/// gamma for one patient-year. `risk` is only read in forest mode with relative scale.
double effect_at(const EffectSpec& spec, const CausalForest* forest, const Eigen::Ref<const Vector>& x,
                 int years_since_start, double risk = 0.0);

nlohmann::json forest_to_json(const CausalForest& forest);
CausalForest forest_from_json(const nlohmann::json& j);

}  // namespace prevcare
