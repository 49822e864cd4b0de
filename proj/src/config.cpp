#include "prevcare/config.hpp"

#include <filesystem>
#include <fstream>

namespace prevcare {

using json = nlohmann::json;

namespace {

bool compatible(const json& base, const json& v) {
    if (base.is_number_unsigned()) return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (base.is_number_integer()) return v.is_number_integer();
    if (base.is_number_float()) return v.is_number();
    return base.type() == v.type();
}

// Overlays `patch` on the fully populated `base`; keys missing from `base` are rejected.
void strict_merge(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("'" + path + "' must be an object");
    for (const auto& [key, value] : patch.items()) {
        const std::string where = path.empty() ? key : path + "." + key;
        auto it = base.find(key);
        if (it == base.end()) throw ConfigError("unknown config key '" + where + "'");
        if (it->is_object() && value.is_object()) {
            strict_merge(*it, value, where);
        } else if (!it->is_null() && !compatible(*it, value)) {
            if (it->is_number_unsigned() && value.is_number_integer()) {
                throw ConfigError("config key '" + where + "' must be non-negative");
            }
            throw ConfigError("config key '" + where + "' has type " + value.type_name() + ", expected " +
                              it->type_name());
        } else {
            *it = value;
        }
    }
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

json mat_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
    return rows;
}

Matrix mat_from(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return Matrix();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw ConfigError("matrix rows have different lengths");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> options, const char* what) {
    for (const auto& [name, value] : options) {
        if (s == name) return value;
    }
    throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

const char* name_of(OutcomeMode m) { return m == OutcomeMode::expected ? "expected" : "stochastic"; }

const char* name_of(AccountingEffect a) {
    switch (a) {
        case AccountingEffect::automatic: return "automatic";
        case AccountingEffect::truth: return "truth";
        case AccountingEffect::known: return "known";
        case AccountingEffect::forest: return "forest";
    }
    return "?";
}

json effect_json(const EffectSpec& e) {
    return {{"mode", e.mode == EffectMode::forest ? "forest" : "known"},
            {"known_gamma", e.known_gamma},
            {"decay", e.decay},
            {"scale", e.scale == EffectScale::relative ? "relative" : "absolute"}};
}

EffectSpec effect_from(const json& j) {
    EffectSpec e;
    e.mode = parse_enum<EffectMode>(j.at("mode").get<std::string>(),
                                    {{"forest", EffectMode::forest}, {"known", EffectMode::known}}, "effect mode");
    e.known_gamma = j.at("known_gamma").get<double>();
    e.decay = j.at("decay").get<bool>();
    e.scale = parse_enum<EffectScale>(j.at("scale").get<std::string>(),
                                      {{"relative", EffectScale::relative}, {"absolute", EffectScale::absolute}},
                                      "effect scale");
    return e;
}

json forest_json(const CausalForestParams& p) {
    return {{"n_estimators", p.n_estimators},     {"max_features", p.max_features},
            {"max_depth", p.max_depth},           {"min_samples_leaf", p.min_samples_leaf},
            {"min_treated_per_leaf", p.min_treated_per_leaf}, {"subsample", p.subsample},
            {"split_fraction", p.split_fraction}};
}

CausalForestParams forest_from(const json& j) {
    CausalForestParams p;
    p.n_estimators = j.at("n_estimators").get<int>();
    p.max_features = j.at("max_features").get<int>();
    p.max_depth = j.at("max_depth").get<int>();
    p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    p.min_treated_per_leaf = j.at("min_treated_per_leaf").get<int>();
    p.subsample = j.at("subsample").get<double>();
    p.split_fraction = j.at("split_fraction").get<double>();
    return p;
}

json costs_json(const CostParams& c) {
    return {{"c_prevent", c.c_prevent},
            {"base_cost_cap", c.base_cost_cap},
            {"comorbidity_costs", c.comorbidity_costs},
            {"comorbidity_roles", c.comorbidity_roles},
            {"life_expectancy", c.life_expectancy},
            {"min_extra_years", c.min_extra_years},
            {"max_extra_years", c.max_extra_years},
            {"fallback_age", c.fallback_age}};
}

CostParams costs_from(const json& j) {
    CostParams c;
    c.c_prevent = j.at("c_prevent").get<double>();
    c.base_cost_cap = j.at("base_cost_cap").get<double>();
    const auto costs = j.at("comorbidity_costs").get<std::vector<double>>();
    const auto roles = j.at("comorbidity_roles").get<std::vector<std::string>>();
    if (costs.size() != kComorbidities || roles.size() != kComorbidities) {
        throw ConfigError("comorbidity_costs and comorbidity_roles need " + std::to_string(kComorbidities) +
                          " entries");
    }
    std::copy(costs.begin(), costs.end(), c.comorbidity_costs.begin());
    std::copy(roles.begin(), roles.end(), c.comorbidity_roles.begin());
    c.life_expectancy = j.at("life_expectancy").get<double>();
    c.min_extra_years = j.at("min_extra_years").get<double>();
    c.max_extra_years = j.at("max_extra_years").get<double>();
    c.fallback_age = j.at("fallback_age").get<double>();
    return c;
}

json seeds_json(const Seeds& s) {
    return {{"data", s.data}, {"model", s.model}, {"policy", s.policy}, {"bootstrap", s.bootstrap}};
}

Seeds seeds_from(const json& j) {
    Seeds s;
    s.data = j.at("data").get<std::uint64_t>();
    s.model = j.at("model").get<std::uint64_t>();
    s.policy = j.at("policy").get<std::uint64_t>();
    s.bootstrap = j.at("bootstrap").get<std::uint64_t>();
    return s;
}

json scenario_json(const ScenarioConfig& c) {
    return {{"policy", to_string(c.policy)},
            {"budget_k", c.budget_k},
            {"warmup_years", c.warmup_years},
            {"last_year", c.last_year},
            {"retrain_each_year", c.retrain_each_year},
            {"effect", effect_json(c.effect)},
            {"forest", forest_json(c.forest)},
            {"risk", risk_config_to_json(c.risk)},
            {"linear", params_to_json(c.linear)},
            {"costs", costs_json(c.costs)},
            {"outcome", name_of(c.outcome)},
            {"accounting", name_of(c.accounting)},
            {"bootstrap_replicates", c.bootstrap_replicates},
            {"allocation_noise", c.allocation_noise}};
}

// `j` is already merged over defaults, except for the nested risk section.
void scenario_from(const json& j, ScenarioConfig& c) {
    c.policy = parse_policy(j.at("policy").get<std::string>());
    c.budget_k = j.at("budget_k").get<int>();
    c.warmup_years = j.at("warmup_years").get<int>();
    c.last_year = j.at("last_year").get<int>();
    c.retrain_each_year = j.at("retrain_each_year").get<bool>();
    c.effect = effect_from(j.at("effect"));
    c.forest = forest_from(j.at("forest"));
    const auto lin = params_from_json(j.at("linear"));
    if (!std::holds_alternative<LinearParams>(lin)) throw ConfigError("scenario.linear must be linear parameters");
    c.linear = std::get<LinearParams>(lin);
    c.costs = costs_from(j.at("costs"));
    c.outcome = parse_enum<OutcomeMode>(j.at("outcome").get<std::string>(),
                                        {{"expected", OutcomeMode::expected},
                                         {"stochastic", OutcomeMode::stochastic}},
                                        "outcome mode");
    c.accounting = parse_enum<AccountingEffect>(j.at("accounting").get<std::string>(),
                                                {{"automatic", AccountingEffect::automatic},
                                                 {"truth", AccountingEffect::truth},
                                                 {"known", AccountingEffect::known},
                                                 {"forest", AccountingEffect::forest}},
                                                "accounting effect");
    c.bootstrap_replicates = j.at("bootstrap_replicates").get<int>();
    c.allocation_noise = j.at("allocation_noise").get<double>();
}

// Merges a section that contains a "risk" object, which needs its own merge.
json merge_with_risk(json base, json patch, const std::string& path) {
    json risk_patch;
    if (patch.is_object() && patch.contains("risk")) {
        risk_patch = patch["risk"];
        patch.erase("risk");
    }
    strict_merge(base, patch, path);
    if (!risk_patch.is_null()) {
        base["risk"] = risk_config_to_json(risk_config_from_json_patch(base["risk"], risk_patch, path + ".risk"));
    }
    return base;
}

}  // namespace

Seeds seeds_from_master(std::uint64_t seed) {
    return {seed, derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
}

json gen_config_to_json(const GenConfig& c) {
    json bin = json::array();
    for (const auto& b : c.binary_features) {
        bin.push_back({{"name", b.name}, {"prevalence", b.prevalence}, {"risk_weight", b.risk_weight}});
    }
    json inter = json::array();
    for (const auto& it : c.interactions) {
        inter.push_back({{"first", it.first}, {"second", it.second}, {"weight", it.weight}});
    }
    return {{"preset", "custom"},
            {"n_patients", c.n_patients},
            {"horizon", c.horizon},
            {"feature_names", c.feature_names},
            {"feature_mean", vec_json(c.feature_mean)},
            {"feature_cov", mat_json(c.feature_cov)},
            {"risk_weights", vec_json(c.risk_weights)},
            {"risk_scale", c.risk_scale},
            {"risk_intercept", c.risk_intercept},
            {"onset_threshold", c.onset_threshold},
            {"noise_sd", c.noise_sd},
            {"true_effect", c.true_effect},
            {"effect_weights", vec_json(c.effect_weights)},
            {"treated_fraction", c.treated_fraction},
            {"confounding_strength", c.confounding_strength},
            {"binary_features", bin},
            {"interactions", inter},
            {"filler",
             {{"lab_tests", c.filler.lab_tests},
              {"disease_codes", c.filler.disease_codes},
              {"prescriptions", c.filler.prescriptions}}},
            {"persistence", c.persistence},
            {"death_rate", c.death_rate},
            {"missed_followup_rate", c.missed_followup_rate}};
}

GenConfig gen_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("cohort must be an object");
    const std::string preset = j.value("preset", std::string("custom"));
    GenConfig base;
    if (preset == "demo") {
        base = demo_cohort_config(0);
    } else if (preset == "convergence") {
        base = convergence_dgp(10000, 0);
    } else if (preset != "custom") {
        throw ConfigError("unknown cohort preset '" + preset + "'");
    }
    json full = gen_config_to_json(base);
    full["preset"] = preset;
    strict_merge(full, j, "cohort");

    GenConfig c;
    c.n_patients = full.at("n_patients").get<std::size_t>();
    c.horizon = full.at("horizon").get<int>();
    c.feature_names = full.at("feature_names").get<std::vector<std::string>>();
    c.feature_mean = vec_from(full.at("feature_mean"));
    c.feature_cov = mat_from(full.at("feature_cov"));
    c.risk_weights = vec_from(full.at("risk_weights"));
    c.risk_scale = full.at("risk_scale").get<double>();
    c.risk_intercept = full.at("risk_intercept").get<double>();
    c.onset_threshold = full.at("onset_threshold").get<double>();
    c.noise_sd = full.at("noise_sd").get<double>();
    c.true_effect = full.at("true_effect").get<double>();
    c.effect_weights = vec_from(full.at("effect_weights"));
    c.treated_fraction = full.at("treated_fraction").get<double>();
    c.confounding_strength = full.at("confounding_strength").get<double>();
    for (const auto& b : full.at("binary_features")) {
        json item{{"name", ""}, {"prevalence", 0.1}, {"risk_weight", 0.0}};
        strict_merge(item, b, "cohort.binary_features");
        c.binary_features.push_back({item.at("name").get<std::string>(), item.at("prevalence").get<double>(),
                                     item.at("risk_weight").get<double>()});
    }
    for (const auto& it : full.at("interactions")) {
        json item{{"first", 0u}, {"second", 0u}, {"weight", 0.0}};
        strict_merge(item, it, "cohort.interactions");
        c.interactions.push_back({item.at("first").get<std::size_t>(), item.at("second").get<std::size_t>(),
                                  item.at("weight").get<double>()});
    }
    const auto& f = full.at("filler");
    c.filler.lab_tests = f.at("lab_tests").get<std::size_t>();
    c.filler.disease_codes = f.at("disease_codes").get<std::size_t>();
    c.filler.prescriptions = f.at("prescriptions").get<std::size_t>();
    c.persistence = full.at("persistence").get<double>();
    c.death_rate = full.at("death_rate").get<double>();
    c.missed_followup_rate = full.at("missed_followup_rate").get<double>();
    validate(c);
    return c;
}

json risk_config_to_json(const RiskConfig& c) {
    return {{"learner", to_string(c.learner)},
            {"view", to_string(c.view)},
            {"search",
             {{"n_trials", c.search.n_trials},
              {"n_folds", c.search.n_folds},
              {"smote", c.search.smote},
              {"smote_k", c.search.smote_k},
              {"smote_ratio", c.search.smote_ratio}}},
            {"params", c.params ? params_to_json(*c.params) : json(nullptr)}};
}

RiskConfig risk_config_from_json_patch(const json& base_json, const json& patch, const std::string& path) {
    json base = base_json;
    json params_patch;
    json rest = patch;
    if (!rest.is_object()) throw ConfigError("'" + path + "' must be an object");
    if (rest.contains("params")) {
        params_patch = rest["params"];
        rest.erase("params");
    }
    // A learner change invalidates inherited parameters.
    if (rest.contains("learner") && rest["learner"] != base["learner"]) base["params"] = nullptr;
    const json inherited = base["params"];
    base.erase("params");
    strict_merge(base, rest, path);

    RiskConfig c;
    c.learner = parse_learner(base.at("learner").get<std::string>());
    c.view = parse_feature_view(base.at("view").get<std::string>());
    const auto& s = base.at("search");
    c.search.n_trials = s.at("n_trials").get<int>();
    c.search.n_folds = s.at("n_folds").get<int>();
    c.search.smote = s.at("smote").get<bool>();
    c.search.smote_k = s.at("smote_k").get<int>();
    c.search.smote_ratio = s.at("smote_ratio").get<double>();
    if (c.search.n_trials < 0) throw ConfigError(path + ".search.n_trials must be >= 0");
    if (c.search.n_folds < 2) throw ConfigError(path + ".search.n_folds must be >= 2");
    if (c.search.smote_k < 1 || !(c.search.smote_ratio > 0.0)) {
        throw ConfigError(path + ".search: smote_k must be >= 1 and smote_ratio > 0");
    }

    if (!params_patch.is_null() || !inherited.is_null()) {
        json full = inherited.is_null() ? params_to_json(default_params(c.learner)) : inherited;
        if (!params_patch.is_null()) strict_merge(full, params_patch, path + ".params");
        c.params = params_from_json(full);
        const bool family_ok = std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, GbdtParams>) return c.learner == LearnerKind::gbdt;
                else if constexpr (std::is_same_v<P, ForestParams>) return c.learner == LearnerKind::random_forest;
                else return c.learner == LearnerKind::lasso || c.learner == LearnerKind::ridge;
            },
            *c.params);
        if (!family_ok) throw ConfigError(path + ".params do not match learner '" + to_string(c.learner) + "'");
    }
    return c;
}

RiskConfig risk_config_from_json(const json& j) {
    return risk_config_from_json_patch(risk_config_to_json(RiskConfig{}), j, "risk");
}

json run_config_to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    const auto& s = c.scenario;
    if (s.synthetic) {
        j["cohort"] = gen_config_to_json(*s.synthetic);
    } else {
        j["panel"] = {{"path", s.panel_path}, {"roles", s.roles}};
    }
    j["seeds"] = seeds_json(s.seeds);
    j["scenario"] = scenario_json(s);
    j["sweep"] = {{"k", c.sweep_k}};
    j["noise"] = {{"sigmas", c.noise_sigmas}};
    j["convergence"] = {{"population", c.convergence.population},
                        {"budget_k", c.convergence.budget_k},
                        {"n_train", c.convergence.n_train},
                        {"gamma", c.convergence.gamma},
                        {"risk", risk_config_to_json(c.convergence.risk)},
                        {"oracle_learner", c.convergence.oracle_learner},
                        {"replicates", c.convergence_replicates}};
    j["ovb"] = {{"covariates", c.ovb.covariates},
                {"benchmark", c.ovb.benchmark},
                {"multipliers", c.ovb.multipliers},
                {"subgroups", c.ovb.subgroups},
                {"n_groups", c.ovb.n_groups}};
    j["importance"] = {{"method", to_string(c.importance.method)},
                       {"permutation_repeats", c.importance.options.permutation_repeats},
                       {"shapley_rows", c.importance.options.shapley_rows},
                       {"shapley_permutations", c.importance.options.shapley_permutations}};
    return j;
}

RunConfig run_config_from_json(const json& in) {
    try {
        if (!in.is_object()) throw ConfigError("config must be a JSON object");
        if (!in.contains("schema_version")) throw ConfigError("config needs \"schema_version\"");
        if (!in["schema_version"].is_number_integer() || in["schema_version"].get<int>() != kSchemaVersion) {
            throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
        }
        const bool has_cohort = in.contains("cohort");
        const bool has_panel = in.contains("panel");
        if (has_cohort == has_panel) throw ConfigError("config needs exactly one of \"cohort\" or \"panel\"");

        RunConfig defaults;
        defaults.scenario.synthetic = GenConfig{};
        json base = run_config_to_json(defaults);
        base.erase("cohort");
        json patch = in;
        patch.erase("cohort");
        patch.erase("panel");
        json scenario_patch = patch.value("scenario", json::object());
        json convergence_patch = patch.value("convergence", json::object());
        patch.erase("scenario");
        patch.erase("convergence");
        strict_merge(base, patch, "");
        base["scenario"] = merge_with_risk(base["scenario"], scenario_patch, "scenario");
        base["convergence"] = merge_with_risk(base["convergence"], convergence_patch, "convergence");

        RunConfig c;
        auto& s = c.scenario;
        s.seeds = seeds_from(base.at("seeds"));
        if (has_cohort) {
            s.synthetic = gen_config_from_json(in.at("cohort"));
            s.synthetic->seed = s.seeds.data;
        } else {
            json panel{{"path", ""}, {"roles", json::object()}};
            const auto& p = in.at("panel");
            if (!p.is_object()) throw ConfigError("'panel' must be an object");
            for (const auto& [key, value] : p.items()) {
                if (key != "path" && key != "roles") throw ConfigError("unknown config key 'panel." + key + "'");
                panel[key] = value;
            }
            s.panel_path = panel.at("path").get<std::string>();
            if (s.panel_path.empty()) throw ConfigError("panel.path must not be empty");
            s.roles = panel.at("roles").get<RoleMap>();
        }
        scenario_from(base.at("scenario"), s);
        s.risk = risk_config_from_json_patch(base["scenario"]["risk"], json::object(), "scenario.risk");

        c.sweep_k = base.at("sweep").at("k").get<std::vector<int>>();
        c.noise_sigmas = base.at("noise").at("sigmas").get<std::vector<double>>();
        const auto& cv = base.at("convergence");
        c.convergence.population = cv.at("population").get<std::size_t>();
        c.convergence.budget_k = cv.at("budget_k").get<int>();
        c.convergence.n_train = cv.at("n_train").get<std::vector<std::size_t>>();
        c.convergence.gamma = cv.at("gamma").get<double>();
        c.convergence.risk = risk_config_from_json_patch(cv.at("risk"), json::object(), "convergence.risk");
        c.convergence.oracle_learner = cv.at("oracle_learner").get<bool>();
        c.convergence.seed = s.seeds.data;
        c.convergence_replicates = cv.at("replicates").get<int>();
        if (c.convergence_replicates < 1) throw ConfigError("convergence.replicates must be >= 1");
        const auto& ov = base.at("ovb");
        c.ovb.covariates = ov.at("covariates").get<std::vector<std::string>>();
        c.ovb.benchmark = ov.at("benchmark").get<std::string>();
        c.ovb.multipliers = ov.at("multipliers").get<std::vector<double>>();
        c.ovb.subgroups = ov.at("subgroups").get<bool>();
        c.ovb.n_groups = ov.at("n_groups").get<int>();
        const auto& im = base.at("importance");
        c.importance.method = parse_importance_method(im.at("method").get<std::string>());
        c.importance.options.permutation_repeats = im.at("permutation_repeats").get<int>();
        c.importance.options.shapley_rows = im.at("shapley_rows").get<int>();
        c.importance.options.shapley_permutations = im.at("shapley_permutations").get<int>();
        validate(s);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    RunConfig c = run_config_from_json(read_json_file(path));
    if (!c.scenario.panel_path.empty()) {
        std::filesystem::path p(c.scenario.panel_path);
        if (p.is_relative()) p = std::filesystem::absolute(std::filesystem::path(path).parent_path() / p);
        c.scenario.panel_path = p.lexically_normal().string();
    }
    return c;
}

}  // namespace prevcare
