#pragma once

#include "prevcare/cohort.hpp"
#include "prevcare/econ.hpp"
#include "prevcare/effect.hpp"
#include "prevcare/policy.hpp"
#include "prevcare/risk.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace prevcare {

enum class PolicyKind { ours, clinical_framingham, naive_random, risk_only, sparse_I, sparse_II, linear };

std::string to_string(PolicyKind policy);
PolicyKind parse_policy(const std::string& name);

/// Expected: gamma-weighted prevention. Stochastic: each treated onset is averted
/// with probability gamma.
enum class OutcomeMode { expected, stochastic };

/// Source of the effects used to score outcomes (never the allocation itself).
/// automatic: panel ground truth when present, else the known effect, else a forest fit on the whole panel.
enum class AccountingEffect { automatic, truth, known, forest };

struct Seeds {
    std::uint64_t data = 1;
    std::uint64_t model = 2;
    std::uint64_t policy = 3;
    std::uint64_t bootstrap = 4;
};

struct ScenarioConfig {
    std::optional<GenConfig> synthetic;  // either a generated panel ...
    std::string panel_path;              // ... or a CSV file
    RoleMap roles;                       // column roles for CSV panels

    PolicyKind policy = PolicyKind::ours;
    int budget_k = 0;
    int warmup_years = 1;  // first allocation year is warmup_years + 1
    int last_year = 0;     // 0 = panel horizon
    bool retrain_each_year = true;

    EffectSpec effect;
    CausalForestParams forest;
    RiskConfig risk;  // learner and search used by `ours`; the ablations adjust view/learner
    LinearParams linear;  // hyperparameters of the `linear` ablation when not searched
    CostParams costs;
    Seeds seeds;

    OutcomeMode outcome = OutcomeMode::expected;
    AccountingEffect accounting = AccountingEffect::automatic;
    int bootstrap_replicates = 100;
    /// Gaussian noise on the effects used for allocation only (0 = none).
    double allocation_noise = 0.0;
};

void validate(const ScenarioConfig& config);

/// Fitted models shared across runs on the same panel (policies, budgets, noise levels).
class ModelCache {
public:
    explicit ModelCache(const Panel& panel) : panel_(&panel) {}

    const RiskModel& risk(const RiskConfig& config, std::uint64_t seed, int before_year);
    const CausalForest& forest(const CausalForestParams& params, std::uint64_t seed, int before_year);
    const Panel& panel() const { return *panel_; }

    std::size_t risk_fits() const { return risk_.size(); }

private:
    const Panel* panel_;
    std::map<std::string, std::unique_ptr<RiskModel>> risk_;
    std::map<std::string, std::unique_ptr<CausalForest>> forest_;
};

Panel load_scenario_panel(const ScenarioConfig& config);

/// Multi-year evaluation on an existing panel.
SimulationResult run_scenario(const Panel& panel, const ScenarioConfig& config, ModelCache* cache = nullptr,
                              AllocationPlan* plan = nullptr);

SimulationResult run_scenario(const ScenarioConfig& config);

struct SweepRow {
    int k = 0;
    PolicyKind policy = PolicyKind::ours;
    double prevented_onsets = 0.0;
    double prevented_sd = 0.0;
    double cost_savings = 0.0;
    double savings_sd = 0.0;
};

std::vector<SweepRow> budget_sweep(const Panel& panel, const ScenarioConfig& config, const std::vector<int>& k_values,
                                   ModelCache* cache = nullptr);

/// main, sparse I, sparse II, linear and risk-only with shared seeds.
std::vector<SweepRow> ablation_suite(const Panel& panel, const ScenarioConfig& config, ModelCache* cache = nullptr);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace prevcare
