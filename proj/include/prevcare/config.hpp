#pragma once

#include "prevcare/sensitivity.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace prevcare {

inline constexpr int kSchemaVersion = 1;

struct OvbStudyConfig {
    std::vector<std::string> covariates = kOvbCovariates;
    std::string benchmark = "age";
    std::vector<double> multipliers{0.0, 0.2, 0.5, 0.8};
    bool subgroups = true;  // also run per effect subgroup
    int n_groups = 4;
};

struct ImportanceStudyConfig {
    ImportanceMethod method = ImportanceMethod::permutation;
    ImportanceOptions options;
};

/// Everything a CLI run depends on besides the command line.
struct RunConfig {
    ScenarioConfig scenario;
    std::vector<int> sweep_k{1000, 5000, 10000};
    std::vector<double> noise_sigmas{0.0, 0.1, 0.5};
    ConvergenceConfig convergence;
    int convergence_replicates = 5;
    OvbStudyConfig ovb;
    ImportanceStudyConfig importance;
};

/// Seeds of all streams from one number.
Seeds seeds_from_master(std::uint64_t seed);

nlohmann::json gen_config_to_json(const GenConfig& config);
/// Accepts {"preset": "demo"|"convergence"|"custom", ...overrides}. Unknown keys are errors.
GenConfig gen_config_from_json(const nlohmann::json& j);

nlohmann::json risk_config_to_json(const RiskConfig& config);
RiskConfig risk_config_from_json(const nlohmann::json& j);
/// Overlays a partial risk section on a resolved one. Changing the learner drops inherited params.
RiskConfig risk_config_from_json_patch(const nlohmann::json& resolved, const nlohmann::json& patch,
                                       const std::string& path);

/// Fully resolved form: every field present, presets expanded.
nlohmann::json run_config_to_json(const RunConfig& config);
/// Partial input merged over defaults; "schema_version" is required.
RunConfig run_config_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
RunConfig load_run_config(const std::string& path);

}  // namespace prevcare
