#include "prevcare/simulation.hpp"

#include "prevcare/sensitivity.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace prevcare {

std::string to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::ours: return "ours";
        case PolicyKind::clinical_framingham: return "clinical_framingham";
        case PolicyKind::naive_random: return "naive_random";
        case PolicyKind::risk_only: return "risk_only";
        case PolicyKind::sparse_I: return "sparse_I";
        case PolicyKind::sparse_II: return "sparse_II";
        case PolicyKind::linear: return "linear";
    }
    return "?";
}

PolicyKind parse_policy(const std::string& s) {
    for (auto p : {PolicyKind::ours, PolicyKind::clinical_framingham, PolicyKind::naive_random, PolicyKind::risk_only,
                   PolicyKind::sparse_I, PolicyKind::sparse_II, PolicyKind::linear}) {
        if (to_string(p) == s) return p;
    }
    throw ConfigError("unknown policy '" + s + "'");
}

void validate(const ScenarioConfig& c) {
    if (c.budget_k < 0) throw ConfigError("budget_k must be >= 0");
    if (c.warmup_years < 1) throw ConfigError("warmup_years must be >= 1 (the first year has no history)");
    if (c.last_year < 0) throw ConfigError("last_year must be >= 0");
    if (c.bootstrap_replicates < 2) throw ConfigError("bootstrap_replicates must be >= 2");
    if (c.allocation_noise < 0.0) throw ConfigError("allocation_noise must be >= 0");
    if (c.synthetic.has_value() == !c.panel_path.empty()) {
        throw ConfigError("exactly one of a synthetic cohort or a panel path must be given");
    }
    validate(c.effect);
    validate(c.costs);
    if (c.synthetic) validate(*c.synthetic);
}

namespace {

std::string risk_key(const RiskConfig& c, std::uint64_t seed, int before_year) {
    nlohmann::json j{{"learner", to_string(c.learner)},
                     {"view", to_string(c.view)},
                     {"trials", c.search.n_trials},
                     {"folds", c.search.n_folds},
                     {"smote", c.search.smote},
                     {"smote_k", c.search.smote_k},
                     {"smote_ratio", c.search.smote_ratio},
                     {"seed", seed},
                     {"before", before_year}};
    if (c.params) j["params"] = params_to_json(*c.params);
    return j.dump();
}

std::string forest_key(const CausalForestParams& p, std::uint64_t seed, int before_year) {
    return nlohmann::json{{"n", p.n_estimators},       {"mf", p.max_features},
                          {"depth", p.max_depth},      {"leaf", p.min_samples_leaf},
                          {"treated", p.min_treated_per_leaf}, {"sub", p.subsample},
                          {"split", p.split_fraction}, {"seed", seed},
                          {"before", before_year}}
        .dump();
}

}  // namespace

const RiskModel& ModelCache::risk(const RiskConfig& config, std::uint64_t seed, int before_year) {
    auto key = risk_key(config, seed, before_year);
    auto it = risk_.find(key);
    if (it == risk_.end()) {
        auto model = std::make_unique<RiskModel>(train_risk_model(*panel_, config, seed, before_year));
        it = risk_.emplace(std::move(key), std::move(model)).first;
    }
    return *it->second;
}

const CausalForest& ModelCache::forest(const CausalForestParams& params, std::uint64_t seed, int before_year) {
    auto key = forest_key(params, seed, before_year);
    auto it = forest_.find(key);
    if (it == forest_.end()) {
        auto f = std::make_unique<CausalForest>(fit_causal_forest(*panel_, params, seed, before_year));
        it = forest_.emplace(std::move(key), std::move(f)).first;
    }
    return *it->second;
}

Panel load_scenario_panel(const ScenarioConfig& c) {
    if (c.synthetic) return generate_synthetic_cohort(*c.synthetic);
    return load_panel(c.panel_path, c.roles);
}

namespace {

bool uses_risk_model(PolicyKind p) {
    return p != PolicyKind::clinical_framingham && p != PolicyKind::naive_random;
}

RiskConfig risk_config_for(const ScenarioConfig& c, PolicyKind p) {
    RiskConfig r = c.risk;
    switch (p) {
        case PolicyKind::sparse_I:
            r.view = FeatureView::framingham_only;
            break;
        case PolicyKind::sparse_II:
            r.view = FeatureView::framingham_plus_age_hba1c;
            break;
        case PolicyKind::linear: {
            r.learner = LearnerKind::lasso;
            LinearParams lp = c.linear;
            lp.penalty = Penalty::l1;
            r.params = lp;
            break;
        }
        default:
            break;
    }
    return r;
}

// Alive, not yet diagnosed and observed by `year`.
bool alive_at(const Panel& panel, const PatientSpan& span, int year) {
    bool seen = false;
    for (auto i = span.begin; i < span.end; ++i) {
        const auto& r = panel.records()[i];
        if (r.year > year) break;
        seen = true;
        if (r.year < year && (r.died || r.onset_next.value_or(false))) return false;
    }
    return seen;
}

}  // namespace

SimulationResult run_scenario(const Panel& panel, const ScenarioConfig& config, ModelCache* cache,
                              AllocationPlan* plan) {
    validate(config.effect);
    validate(config.costs);
    if (config.budget_k < 0) throw ConfigError("budget_k must be >= 0");
    std::optional<ModelCache> own_cache;
    if (cache == nullptr) {
        own_cache.emplace(panel);
        cache = &*own_cache;
    } else if (&cache->panel() != &panel) {
        throw ConfigError("model cache belongs to a different panel");
    }
    if (panel.empty()) throw InsufficientDataError("panel has no records");
    const int first = config.warmup_years + 1;
    const int last = config.last_year > 0 ? config.last_year : panel.horizon();
    if (first > last || last > panel.horizon()) {
        throw InsufficientDataError("no allocation years: warm-up of " + std::to_string(config.warmup_years) +
                                    " year(s) leaves nothing within horizon " + std::to_string(panel.horizon()) +
                                    " (lower warmup_years or extend the panel)");
    }

    const auto& roles = panel.roles();
    const auto& costs = config.costs;
    const PolicyKind policy = config.policy;
    const RiskConfig policy_risk = risk_config_for(config, policy);
    const bool needs_forest_for_alloc =
        config.effect.mode == EffectMode::forest && uses_risk_model(policy) && policy != PolicyKind::risk_only;

    AccountingEffect accounting = config.accounting;
    if (accounting == AccountingEffect::automatic) {
        if (panel.has_truth()) {
            accounting = AccountingEffect::truth;
        } else if (config.effect.mode == EffectMode::known) {
            accounting = AccountingEffect::known;
        } else {
            accounting = AccountingEffect::forest;
        }
    }
    if (accounting == AccountingEffect::truth && !panel.has_truth()) {
        throw ConfigError("accounting from ground truth needs a synthetic panel");
    }
    const CausalForest* accounting_forest = nullptr;
    if (accounting == AccountingEffect::forest) {
        accounting_forest = &cache->forest(config.forest, derive_seed(config.seeds.model, 999), INT_MAX);
    }
    EffectSpec known_spec = config.effect;
    known_spec.mode = EffectMode::known;

    std::map<PatientId, std::size_t> span_of;
    for (std::size_t p = 0; p < panel.patients().size(); ++p) span_of.emplace(panel.patients()[p].id, p);
    std::map<PatientId, int> policy_start;  // first policy-treated year

    SimulationResult result;
    result.n_years = last - first + 1;
    if (plan) {
        plan->budget_per_year = config.budget_k;
        plan->treated.clear();
    }

    for (int year = first; year <= last; ++year) {
        const int train_before = config.retrain_each_year ? year : first;
        const auto eligible = eligible_patients(panel, year);
        std::vector<PatientId> continuing;
        for (const auto& [id, start] : policy_start) {
            if (alive_at(panel, panel.patients()[span_of.at(id)], year)) continuing.push_back(id);
        }
        std::vector<PatientId> pool;
        for (const auto& id : eligible) {
            if (!policy_start.count(id)) pool.push_back(id);
        }
        const int capacity = std::max(0, config.budget_k - static_cast<int>(continuing.size()));

        auto record_of = [&](const PatientId& id) -> std::size_t {
            return *latest_record(panel, panel.patients()[span_of.at(id)], year);
        };

        // Risk under the policy's model (also needed for relative forest effects).
        ScoreMap risk;
        const RiskModel* rm = nullptr;
        if (uses_risk_model(policy)) {
            rm = &cache->risk(policy_risk, derive_seed(config.seeds.model, static_cast<std::uint64_t>(train_before)),
                              train_before);
            if (rm->trained_before_year > year) throw Error("risk model trained on future records");
            for (const auto& id : pool) risk.emplace_hint(risk.end(), id, rm->predict(panel.records()[record_of(id)]));
        }

        const std::uint64_t tie_seed = derive_seed(config.seeds.policy, static_cast<std::uint64_t>(year));
        Selection sel;
        switch (policy) {
            case PolicyKind::naive_random:
                sel = random_policy(pool, capacity, tie_seed);
                break;
            case PolicyKind::clinical_framingham: {
                ScoreMap scores;
                for (const auto& id : pool) {
                    const auto& rec = panel.records()[record_of(id)];
                    scores.emplace_hint(scores.end(), id, framingham_score(framingham_inputs(rec, roles)));
                }
                sel = threshold_policy(scores, capacity, tie_seed);
                break;
            }
            case PolicyKind::risk_only:
                sel = risk_only_policy(risk, capacity, tie_seed);
                break;
            default: {
                const CausalForest* forest = nullptr;
                if (needs_forest_for_alloc) {
                    forest = &cache->forest(config.forest,
                                            derive_seed(config.seeds.model, 100 + static_cast<std::uint64_t>(train_before)),
                                            train_before);
                }
                Vector g(static_cast<Eigen::Index>(pool.size()));
                Eigen::Index k = 0;
                for (const auto& id : pool) {
                    const auto& rec = panel.records()[record_of(id)];
                    g(k++) = effect_at(config.effect, forest, effect_row(rec), 0, risk.at(id));
                }
                if (config.allocation_noise > 0.0) {
                    g = perturb_effects(g, config.allocation_noise,
                                        derive_seed(config.seeds.policy, 11, static_cast<std::uint64_t>(year)));
                }
                ScoreMap gammas;
                k = 0;
                for (const auto& id : pool) gammas.emplace_hint(gammas.end(), id, g(k++));
                sel = select_topk(risk, gammas, capacity, tie_seed);
                break;
            }
        }
        for (const auto& id : sel.chosen) policy_start.emplace(id, year);

        // Accounting over everyone the policy could touch this year.
        std::vector<PatientId> scope = pool;
        scope.insert(scope.end(), continuing.begin(), continuing.end());
        std::sort(scope.begin(), scope.end());
        ScoreMap accounting_risk;
        if (accounting == AccountingEffect::forest && config.effect.scale == EffectScale::relative) {
            const auto& base = cache->risk(config.risk, derive_seed(config.seeds.model, static_cast<std::uint64_t>(train_before)),
                                           train_before);
            for (const auto& id : scope) accounting_risk[id] = base.predict(panel.records()[record_of(id)]);
        }
        Rng outcome_rng(derive_seed(config.seeds.policy, 7, static_cast<std::uint64_t>(year)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<PatientId> treated_now;
        for (const auto& id : scope) {
            const std::size_t ri = record_of(id);
            const auto& rec = panel.records()[ri];
            auto start = policy_start.find(id);
            YearRecord yr;
            yr.patient_id = id;
            yr.year = year;
            yr.treated = start != policy_start.end();
            if (rec.year == year) yr.onset_next = rec.onset_next;
            yr.age = record_age(rec, roles, costs);
            yr.comorbidity = record_comorbidities(rec, roles, costs);
            auto rit = risk.find(id);
            yr.risk = rit != risk.end() ? rit->second : 0.0;
            const int since = yr.treated ? year - start->second : 0;
            switch (accounting) {
                case AccountingEffect::truth:
                    yr.gamma = panel.truth(ri).effect;
                    break;
                case AccountingEffect::known:
                    yr.gamma = effect_at(known_spec, nullptr, effect_row(rec), since);
                    break;
                default: {
                    const double h = accounting_risk.count(id) ? accounting_risk.at(id) : 0.0;
                    yr.gamma = effect_at(config.effect, accounting_forest, effect_row(rec), since, h);
                    break;
                }
            }
            if (config.outcome == OutcomeMode::stochastic) {
                // Draw for everyone in scope so the stream does not depend on the allocation.
                const double u = unif(outcome_rng);
                yr.gamma = u < yr.gamma ? 1.0 : 0.0;
            }
            if (yr.treated) treated_now.push_back(id);
            result.records.push_back(std::move(yr));
        }
        if (static_cast<int>(treated_now.size()) > config.budget_k) {
            throw Error("budget violated in year " + std::to_string(year));
        }
        if (plan) plan->treated[year] = std::move(treated_now);
    }

    result.prevented_onsets = prevented_onsets(result.records, result.n_years);
    result.cost_savings = cost_savings(result.records, costs);
    if (!result.records.empty()) {
        const int L = result.n_years;
        result.prevented_bootstrap =
            bootstrap([L](const auto& r) { return prevented_onsets(r, L); }, result.records,
                      config.bootstrap_replicates, derive_seed(config.seeds.bootstrap, 1));
        result.savings_bootstrap = bootstrap([&costs](const auto& r) { return cost_savings(r, costs); },
                                             result.records, config.bootstrap_replicates,
                                             derive_seed(config.seeds.bootstrap, 2));
    }
    return result;
}

SimulationResult run_scenario(const ScenarioConfig& config) {
    validate(config);
    const Panel panel = load_scenario_panel(config);
    return run_scenario(panel, config);
}

std::vector<SweepRow> budget_sweep(const Panel& panel, const ScenarioConfig& config, const std::vector<int>& k_values,
                                   ModelCache* cache) {
    if (k_values.empty()) throw ConfigError("budget sweep needs at least one k");
    if (!std::is_sorted(k_values.begin(), k_values.end())) throw ConfigError("budget sweep k values must be sorted");
    std::optional<ModelCache> own;
    if (!cache) {
        own.emplace(panel);
        cache = &*own;
    }
    std::vector<SweepRow> rows;
    for (int k : k_values) {
        ScenarioConfig c = config;
        c.budget_k = k;
        const auto r = run_scenario(panel, c, cache);
        rows.push_back({k, c.policy, r.prevented_onsets, r.prevented_bootstrap.sd, r.cost_savings,
                        r.savings_bootstrap.sd});
    }
    return rows;
}

std::vector<SweepRow> ablation_suite(const Panel& panel, const ScenarioConfig& config, ModelCache* cache) {
    std::optional<ModelCache> own;
    if (!cache) {
        own.emplace(panel);
        cache = &*own;
    }
    std::vector<SweepRow> rows;
    for (auto p : {PolicyKind::ours, PolicyKind::sparse_I, PolicyKind::sparse_II, PolicyKind::linear,
                   PolicyKind::risk_only}) {
        ScenarioConfig c = config;
        c.policy = p;
        const auto r = run_scenario(panel, c, cache);
        rows.push_back({c.budget_k, p, r.prevented_onsets, r.prevented_bootstrap.sd, r.cost_savings,
                        r.savings_bootstrap.sd});
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "k,policy,prevented_onsets,prevented_sd,cost_savings,savings_sd\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.9g,%.9g,%.9g\n", r.k, to_string(r.policy).c_str(),
                      r.prevented_onsets, r.prevented_sd, r.cost_savings, r.savings_sd);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace prevcare
