#pragma once

#include "prevcare/cohort.hpp"

#include <map>
#include <string>
#include <vector>

namespace prevcare {

using ScoreMap = std::map<PatientId, double>;

struct FraminghamInputs {
    double fasting_glucose_mgdl = 0.0;
    double bmi = 0.0;
    double hdl_mgdl = 0.0;
    bool female = false;
    bool parental_history = false;
    double triglycerides_mgdl = 0.0;
    double systolic = 0.0;
    double diastolic = 0.0;
    bool on_bp_treatment = false;
};

inline constexpr double kGlucoseMgdlPerMmol = 18.0;

/// Additive clinical diabetes score, 0..30.
int framingham_score(const FraminghamInputs& in);

/// Reads the score inputs from a record via panel roles (glucose converted from mmol/L).
FraminghamInputs framingham_inputs(const PatientRecord& record, const RoleMap& roles);

/// Result of a top-k style selection.
struct Selection {
    std::vector<PatientId> chosen;  // in rank order
    double cutoff = 0.0;            // score of the last chosen patient (psi)
    std::string warning;            // set when k exceeded the candidates
};

/// Highest k scores; ties broken by a seeded random key.
Selection threshold_policy(const ScoreMap& scores, int k, std::uint64_t tie_break_seed);

/// Highest k risk reductions gamma * h.
Selection select_topk(const ScoreMap& risks, const ScoreMap& gammas, int k, std::uint64_t tie_break_seed);

Selection risk_only_policy(const ScoreMap& risks, int k, std::uint64_t tie_break_seed);

/// Uniform sample of min(k, |eligible|) without replacement.
Selection random_policy(const std::vector<PatientId>& eligible, int k, std::uint64_t seed);

struct BruteForceResult {
    std::vector<std::size_t> chosen;
    double objective = 0.0;
};

/// Expected onsets sum_treated (1-gamma) h + sum_untreated h for a chosen subset.
double allocation_objective(const Vector& h, const Vector& gamma, const std::vector<std::size_t>& chosen);

/// Exhaustive search over all subsets of size <= k (at most 20 patients).
BruteForceResult brute_force_allocation(const Vector& h, const Vector& gamma, int k);

/// Per-year treatment sets under a budget.
struct AllocationPlan {
    int budget_per_year = 0;
    std::map<int, std::vector<PatientId>> treated;  // year -> patients with t = 1

    bool is_treated(const PatientId& id, int year) const;
};

void write_plan_csv(const AllocationPlan& plan, const std::string& path);

}  // namespace prevcare
