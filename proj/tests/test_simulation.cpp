#include "prevcare/simulation.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace prevcare;
namespace fs = std::filesystem;

namespace {

ScenarioConfig fast_scenario(std::uint64_t seed, std::size_t n = 800) {
    ScenarioConfig c;
    c.synthetic = demo_cohort_config(seed, n);
    c.seeds = {seed, seed + 1, seed + 2, seed + 3};
    c.budget_k = static_cast<int>(n / 20);
    c.risk.learner = LearnerKind::ridge;
    c.risk.search.n_trials = 0;
    c.risk.search.n_folds = 3;
    c.risk.params = default_params(LearnerKind::ridge);
    c.bootstrap_replicates = 10;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("budget zero gives zero prevention and savings") {
    ScenarioConfig c = fast_scenario(1);
    c.budget_k = 0;
    const auto r = run_scenario(c);
    CHECK(r.prevented_onsets == 0.0);
    CHECK(r.cost_savings == 0.0);
    for (const auto& yr : r.records) CHECK_FALSE(yr.treated);
}

TEST_CASE("every policy respects the budget, persistence and eligibility") {
    const ScenarioConfig base = fast_scenario(2);
    const Panel panel = load_scenario_panel(base);
    ModelCache cache(panel);
    for (auto p : {PolicyKind::ours, PolicyKind::clinical_framingham, PolicyKind::naive_random, PolicyKind::risk_only,
                   PolicyKind::sparse_I, PolicyKind::sparse_II, PolicyKind::linear}) {
        CAPTURE(to_string(p));
        ScenarioConfig c = base;
        c.policy = p;
        AllocationPlan plan;
        const auto r = run_scenario(panel, c, &cache, &plan);
        std::map<int, int> per_year;
        std::map<PatientId, int> first_treated;
        for (const auto& yr : r.records) {
            if (!yr.treated) continue;
            ++per_year[yr.year];
            first_treated.emplace(yr.patient_id, yr.year);
        }
        for (const auto& [year, count] : per_year) CHECK(count <= c.budget_k);
        for (const auto& [year, ids] : plan.treated) CHECK(static_cast<int>(ids.size()) <= c.budget_k);

        // Once treated, treated in every later scored year; never after death.
        for (const auto& yr : r.records) {
            auto it = first_treated.find(yr.patient_id);
            if (it != first_treated.end() && yr.year > it->second) CHECK(yr.treated);
            if (yr.treated) {
                for (const auto& rec : panel.records()) {
                    if (rec.patient_id == yr.patient_id && rec.year < yr.year) CHECK_FALSE(rec.died);
                }
            }
        }
    }
}

TEST_CASE("risk models are fit only on earlier years") {
    const ScenarioConfig c = fast_scenario(3);
    const Panel panel = load_scenario_panel(c);
    ModelCache cache(panel);
    run_scenario(panel, c, &cache);
    const auto fits = cache.risk_fits();
    CHECK(fits == static_cast<std::size_t>(panel.horizon() - c.warmup_years));
    for (int year = c.warmup_years + 1; year <= panel.horizon(); ++year) {
        const auto& m = cache.risk(c.risk, derive_seed(c.seeds.model, static_cast<std::uint64_t>(year)), year);
        for (auto i : m.training_records) {
            CHECK(panel.records()[i].year < year);
            CHECK_FALSE(panel.records()[i].treated);
        }
    }
    CHECK(cache.risk_fits() == fits);
}

TEST_CASE("missed follow-up patients remain assignable") {
    ScenarioConfig c = fast_scenario(4);
    c.synthetic->missed_followup_rate = 0.3;
    c.policy = PolicyKind::naive_random;
    c.budget_k = 400;
    const Panel panel = load_scenario_panel(c);
    const auto r = run_scenario(panel, c);
    int treated_after_gap = 0;
    for (const auto& span : panel.patients()) {
        for (auto i = span.begin; i + 1 < span.end; ++i) {
            if (!panel.records()[i].onset_next && panel.records()[i + 1].year > panel.records()[i].year + 1) {
                for (const auto& yr : r.records) {
                    if (yr.patient_id == span.id && yr.year > panel.records()[i].year && yr.treated) ++treated_after_gap;
                }
            }
        }
    }
    CHECK(treated_after_gap > 0);
}

TEST_CASE("results are deterministic to the byte") {
    const ScenarioConfig c = fast_scenario(5);
    const auto dir = fs::temp_directory_path() / "prevcare_unit_sim";
    fs::create_directories(dir);
    write_records_csv(run_scenario(c), (dir / "a.csv").string());
    write_records_csv(run_scenario(c), (dir / "b.csv").string());
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("warm-up beyond the horizon is an insufficient-data error") {
    ScenarioConfig c = fast_scenario(6, 200);
    c.warmup_years = 4;
    try {
        run_scenario(c);
        FAIL("expected an error");
    } catch (const InsufficientDataError& e) {
        CHECK(std::string(e.what()).find("warm-up") != std::string::npos);
    }
    c.warmup_years = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("budget sweep: one row per k, non-decreasing prevention") {
    const ScenarioConfig c = fast_scenario(7);
    const Panel panel = load_scenario_panel(c);
    ModelCache cache(panel);
    const auto one = budget_sweep(panel, c, {40}, &cache);
    CHECK(one.size() == 1);
    const auto rows = budget_sweep(panel, c, {0, 10, 40, 80, 160}, &cache);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].prevented_onsets >= rows[i - 1].prevented_onsets);
    CHECK_THROWS_AS(budget_sweep(panel, c, {40, 10}, &cache), ConfigError);
    CHECK_THROWS_AS(budget_sweep(panel, c, {}, &cache), ConfigError);
}

TEST_CASE("per-patient savings peak at an interior budget when prevention is expensive") {
    ScenarioConfig c = fast_scenario(8);
    c.costs.c_prevent = 6000.0;
    const Panel panel = load_scenario_panel(c);
    ModelCache cache(panel);
    const std::vector<int> ks{0, 10, 20, 40, 80, 160, 320, 800};
    const auto rows = budget_sweep(panel, c, ks, &cache);
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) if (rows[i].cost_savings > rows[best].cost_savings) best = i;
    CHECK(best > 0);
    CHECK(best + 1 < rows.size());
}

TEST_CASE("ablation suite has the five model rows") {
    const ScenarioConfig c = fast_scenario(9);
    const Panel panel = load_scenario_panel(c);
    const auto rows = ablation_suite(panel, c);
    REQUIRE(rows.size() == 5);
    const std::vector<PolicyKind> expected{PolicyKind::ours, PolicyKind::sparse_I, PolicyKind::sparse_II,
                                           PolicyKind::linear, PolicyKind::risk_only};
    for (std::size_t i = 0; i < 5; ++i) CHECK(rows[i].policy == expected[i]);
}

TEST_CASE("anti-correlated risk and effect: ours beats risk-only") {
    double ours = 0.0, risk = 0.0;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        ScenarioConfig c = fast_scenario(20 + s, 2000);
        // Effect falls steeply with the main risk drivers.
        c.synthetic->effect_weights.setZero();
        c.synthetic->effect_weights(0) = -0.25;
        c.synthetic->effect_weights(6) = -0.25;
        c.synthetic->confounding_strength = 0.0;
        c.budget_k = 100;
        const Panel panel = load_scenario_panel(c);
        ModelCache cache(panel);
        c.policy = PolicyKind::ours;
        ours += run_scenario(panel, c, &cache).prevented_onsets;
        c.policy = PolicyKind::risk_only;
        risk += run_scenario(panel, c, &cache).prevented_onsets;
    }
    CHECK(ours > risk);
}

TEST_CASE("stochastic outcomes record realized prevention flags") {
    ScenarioConfig c = fast_scenario(10);
    c.outcome = OutcomeMode::stochastic;
    const auto r = run_scenario(c);
    for (const auto& yr : r.records) CHECK((yr.gamma == 0.0 || yr.gamma == 1.0));
    CHECK(parse_policy("sparse_II") == PolicyKind::sparse_II);
    CHECK_THROWS_AS(parse_policy("oracle"), ConfigError);
}

TEST_CASE("sweep CSV layout") {
    const auto dir = fs::temp_directory_path() / "prevcare_unit_sim";
    fs::create_directories(dir);
    write_sweep_csv({{5, PolicyKind::ours, 1.5, 0.25, -100.0, 3.0}}, (dir / "s.csv").string());
    CHECK(slurp(dir / "s.csv") == "k,policy,prevented_onsets,prevented_sd,cost_savings,savings_sd\n5,ours,1.5,0.25,-100,3\n");
}

}
