// prevcare command line: cohort generation, scenario runs, sweeps and sensitivity studies.

#include "prevcare/config.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace prevcare;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("hashing failed for " + path.string());
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

struct Invocation {
    std::string command;
    json args = json::object();
    json config;  // resolved
    RunConfig run;
};

// Records how to reproduce `files` (all inside `dir`).
void write_manifest(const fs::path& manifest_path, const Invocation& inv, const fs::path& dir,
                    const std::vector<std::string>& files) {
    json outputs = json::object();
    for (const auto& f : files) {
        outputs[f] = {{"bytes", fs::file_size(dir / f)}, {"sha256", sha256_file(dir / f)}};
    }
    json m{{"schema_version", kSchemaVersion}, {"tool", "prevcare"},   {"version", kVersion},
           {"command", inv.command},           {"args", inv.args},     {"config", inv.config},
           {"outputs", outputs}};
    write_text(manifest_path, m.dump(2) + "\n");
}

std::vector<std::string> design_names(const Panel& panel) {
    std::vector<std::string> names{"fasting_glucose"};
    std::vector<std::string> feat(panel.n_features());
    for (const auto& [name, col] : panel.roles()) {
        if (col < feat.size() && feat[col].empty()) feat[col] = name;
    }
    for (std::size_t j = 0; j < feat.size(); ++j) names.push_back(feat[j].empty() ? "f" + std::to_string(j) : feat[j]);
    return names;
}

// ---------------------------------------------------------------------------

std::vector<std::string> run_generate(const Invocation& inv, const fs::path& out_file) {
    const auto& s = inv.run.scenario;
    if (!s.synthetic) throw ConfigError("generate needs a \"cohort\" section");
    const Panel panel = generate_synthetic_cohort(*s.synthetic);
    write_panel(panel, out_file.string());

    std::size_t labeled = 0, onsets = 0;
    std::map<int, std::array<std::size_t, 4>> by_year;  // records, labeled, onsets, treated
    for (const auto& r : panel.records()) {
        auto& y = by_year[r.year];
        ++y[0];
        if (r.treated) ++y[3];
        if (r.onset_next) {
            ++labeled;
            ++y[1];
            if (*r.onset_next) {
                ++onsets;
                ++y[2];
            }
        }
    }
    std::printf("patients          %zu\n", panel.patients().size());
    std::printf("records           %zu\n", panel.size());
    std::printf("onset rate        %.4f (%zu of %zu labeled records)\n",
                labeled ? static_cast<double>(onsets) / static_cast<double>(labeled) : 0.0, onsets, labeled);
    std::printf("treated fraction  %.4f of patients\n",
                static_cast<double>(panel.treated_count()) / static_cast<double>(panel.patients().size()));
    std::printf("\n%-6s %9s %11s %12s\n", "year", "records", "onset_rate", "treated_frac");
    for (const auto& [year, v] : by_year) {
        std::printf("%-6d %9zu %11.4f %12.4f\n", year, v[0],
                    v[1] ? static_cast<double>(v[2]) / static_cast<double>(v[1]) : 0.0,
                    static_cast<double>(v[3]) / static_cast<double>(v[0]));
    }
    return {out_file.filename().string()};
}

json summary_json(const ScenarioConfig& s, const SimulationResult& r) {
    std::size_t treated = 0;
    for (const auto& rec : r.records) treated += rec.treated ? 1 : 0;
    return {{"policy", to_string(s.policy)},
            {"budget_k", s.budget_k},
            {"n_years", r.n_years},
            {"patient_years", r.records.size()},
            {"treated_patient_years", treated},
            {"prevented_onsets", r.prevented_onsets},
            {"prevented_onsets_sd", r.prevented_bootstrap.sd},
            {"cost_savings", r.cost_savings},
            {"cost_savings_sd", r.savings_bootstrap.sd}};
}

std::vector<std::string> run_simulate(const Invocation& inv, const fs::path& dir) {
    const auto& s = inv.run.scenario;
    const Panel panel = load_scenario_panel(s);
    AllocationPlan plan;
    const auto r = run_scenario(panel, s, nullptr, &plan);
    write_records_csv(r, (dir / "records.csv").string());
    write_plan_csv(plan, (dir / "plan.csv").string());
    write_text(dir / "summary.json", summary_json(s, r).dump(2) + "\n");
    std::printf("policy %s, k = %d: prevented onsets %.4f (sd %.4f), cost savings %.2f (sd %.2f)\n",
                to_string(s.policy).c_str(), s.budget_k, r.prevented_onsets, r.prevented_bootstrap.sd,
                r.cost_savings, r.savings_bootstrap.sd);
    return {"records.csv", "plan.csv", "summary.json"};
}

void print_sweep(const std::vector<SweepRow>& rows) {
    std::printf("%-8s %-20s %14s %10s %16s %12s\n", "k", "policy", "prevented", "sd", "savings", "sd");
    for (const auto& r : rows) {
        std::printf("%-8d %-20s %14.4f %10.4f %16.2f %12.2f\n", r.k, to_string(r.policy).c_str(), r.prevented_onsets,
                    r.prevented_sd, r.cost_savings, r.savings_sd);
    }
}

std::vector<std::string> run_sweep(const Invocation& inv, const fs::path& dir) {
    const Panel panel = load_scenario_panel(inv.run.scenario);
    const auto ks = inv.args.at("k").get<std::vector<int>>();
    const auto rows = budget_sweep(panel, inv.run.scenario, ks);
    write_sweep_csv(rows, (dir / "sweep.csv").string());
    print_sweep(rows);
    return {"sweep.csv"};
}

std::vector<std::string> run_ablation(const Invocation& inv, const fs::path& dir) {
    const Panel panel = load_scenario_panel(inv.run.scenario);
    const auto rows = ablation_suite(panel, inv.run.scenario);
    write_sweep_csv(rows, (dir / "ablation.csv").string());
    print_sweep(rows);
    return {"ablation.csv"};
}

std::vector<std::string> run_sensitivity(const Invocation& inv, const fs::path& dir) {
    const std::string study = inv.args.at("study").get<std::string>();
    const auto& cfg = inv.run;
    const auto& s = cfg.scenario;
    if (study == "noise") {
        const Panel panel = load_scenario_panel(s);
        const auto rows = noise_robustness_study(panel, s, cfg.noise_sigmas);
        write_noise_csv(rows, (dir / "noise.csv").string());
        for (const auto& r : rows) {
            std::printf("sigma %-6g prevented %.4f (sd %.4f) savings %.2f\n", r.sigma, r.prevented_onsets,
                        r.prevented_sd, r.cost_savings);
        }
        return {"noise.csv"};
    }
    if (study == "convergence") {
        std::vector<ConvergenceCurve> curves;
        for (int rep = 0; rep < cfg.convergence_replicates; ++rep) {
            ConvergenceConfig c = cfg.convergence;
            c.seed = derive_seed(cfg.convergence.seed, 100 + static_cast<std::uint64_t>(rep));
            curves.push_back(convergence_study(c));
        }
        write_convergence_csv(curves, (dir / "convergence.csv").string());
        for (std::size_t i = 0; i < curves[0].points.size(); ++i) {
            double p = 0.0, o = 0.0;
            for (const auto& c : curves) {
                p += c.points[i].prevented;
                o += c.oracle;
            }
            std::printf("n_train %-7zu prevented %.3f oracle %.3f ratio %.4f\n", curves[0].points[i].n_train,
                        p / static_cast<double>(curves.size()), o / static_cast<double>(curves.size()), p / o);
        }
        return {"convergence.csv"};
    }
    if (study == "ovb") {
        const Panel panel = load_scenario_panel(s);
        std::vector<std::pair<std::string, OvbResult>> groups;
        groups.emplace_back("all", ovb_sensitivity(panel, cfg.ovb.covariates, cfg.ovb.benchmark, cfg.ovb.multipliers));
        json notes = json::array();
        if (cfg.ovb.subgroups) {
            const auto forest = fit_causal_forest(panel, s.forest, derive_seed(s.seeds.model, 999));
            const auto data = effect_training_data(panel);
            Vector cate(data.X.rows());
            for (Eigen::Index i = 0; i < data.X.rows(); ++i) cate(i) = forest.raw_cate(data.X.row(i).transpose());
            const auto sub = cate_subgroups(cate, data.X, cfg.ovb.n_groups);
            if (!sub.warning.empty()) notes.push_back(sub.warning);
            for (int g = 0; g < sub.n_groups(); ++g) {
                std::vector<std::size_t> rows;
                for (std::size_t i = 0; i < sub.labels.size(); ++i) {
                    if (sub.labels[i] == g) rows.push_back(data.records[i]);
                }
                const std::string name(1, static_cast<char>('A' + g));
                try {
                    groups.emplace_back(name, ovb_sensitivity(panel, cfg.ovb.covariates, cfg.ovb.benchmark,
                                                              cfg.ovb.multipliers, rows));
                } catch (const DataError& e) {
                    notes.push_back("group " + name + ": " + e.what());
                }
            }
        }
        write_ovb_csv(groups, (dir / "ovb.csv").string());
        json summary = json::array();
        for (const auto& [name, r] : groups) {
            summary.push_back({{"group", name},
                               {"estimate", r.estimate},
                               {"se", r.se},
                               {"dof", r.dof},
                               {"r2_treatment_benchmark", r.r2_treatment_benchmark},
                               {"r2_outcome_benchmark", r.r2_outcome_benchmark}});
            std::printf("group %-4s estimate %+.5f (se %.5f)\n", name.c_str(), r.estimate, r.se);
        }
        write_text(dir / "ovb_summary.json", json{{"groups", summary}, {"notes", notes}}.dump(2) + "\n");
        for (const auto& n : notes) std::fprintf(stderr, "warning: %s\n", n.get<std::string>().c_str());
        return {"ovb.csv", "ovb_summary.json"};
    }
    if (study == "importance") {
        const Panel panel = load_scenario_panel(s);
        const auto model = train_risk_model(panel, s.risk, derive_seed(s.seeds.model, 0));
        const auto n = static_cast<Eigen::Index>(model.training_records.size());
        Matrix design(n, static_cast<Eigen::Index>(model.design_dim));
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& r = panel.records()[model.training_records[static_cast<std::size_t>(i)]];
            design.row(i) = design_row(r).transpose();
            y(i) = r.onset_next.value_or(false) ? 1.0 : 0.0;
        }
        const auto imp = feature_importance(model, design, y, design_names(panel), cfg.importance.method,
                                            derive_seed(s.seeds.model, 7), cfg.importance.options);
        write_importance_csv(imp, (dir / "importance.csv").string());
        for (std::size_t i = 0; i < std::min<std::size_t>(10, imp.size()); ++i) {
            std::printf("%2zu. %-28s %+d %.6f\n", i + 1, imp[i].name.c_str(), imp[i].sign, imp[i].importance);
        }
        return {"importance.csv"};
    }
    throw ConfigError("unknown study '" + study + "' (expected noise, convergence, ovb or importance)");
}

// Runs a resolved invocation into `out` (a directory, or the panel path for generate).
void execute(const Invocation& inv, const fs::path& out) {
    if (inv.command == "generate") {
        if (out.has_parent_path()) ensure_dir(out.parent_path());
        const auto files = run_generate(inv, out);
        const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
        write_manifest(fs::path(out.string() + ".manifest.json"), inv, dir, files);
        return;
    }
    ensure_dir(out);
    std::vector<std::string> files;
    if (inv.command == "simulate") {
        files = run_simulate(inv, out);
    } else if (inv.command == "sweep") {
        files = run_sweep(inv, out);
    } else if (inv.command == "ablation") {
        files = run_ablation(inv, out);
    } else if (inv.command == "sensitivity") {
        files = run_sensitivity(inv, out);
    } else {
        throw ConfigError("unknown command '" + inv.command + "'");
    }
    write_manifest(out / "manifest.json", inv, out, files);
}

Invocation prepare(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed) {
    Invocation inv;
    inv.command = command;
    inv.run = load_run_config(config_path);
    if (seed) {
        inv.run.scenario.seeds = seeds_from_master(*seed);
        if (inv.run.scenario.synthetic) inv.run.scenario.synthetic->seed = inv.run.scenario.seeds.data;
        inv.run.convergence.seed = inv.run.scenario.seeds.data;
    }
    inv.config = run_config_to_json(inv.run);
    return inv;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const DataError*>(&e)) return 4;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budget-constrained preventive care allocation: cohorts, scenarios and sensitivity studies"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::vector<int> ks;
    std::string study;
    std::string manifest_path;

    auto common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config) sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_path, "output location")->required();
        sub->add_option("--seed", seed, "master seed overriding the config seeds");
        sub->add_option("--threads", threads, "worker cap (runs are deterministic for any value)")
            ->check(CLI::PositiveNumber);
    };
    auto* gen = app.add_subcommand("generate", "write a synthetic panel CSV");
    common(gen, true);
    auto* sim = app.add_subcommand("simulate", "run one allocation scenario");
    common(sim, true);
    auto* sweep = app.add_subcommand("sweep", "run the scenario for several budgets");
    common(sweep, true);
    sweep->add_option("--k", ks, "budgets, comma separated")->delimiter(',');
    auto* abl = app.add_subcommand("ablation", "compare model specifications at the configured budget");
    common(abl, true);
    auto* sens = app.add_subcommand("sensitivity", "run a robustness study");
    common(sens, true);
    sens->add_option("--study", study, "noise | convergence | ovb | importance")->required();
    auto* rerun = app.add_subcommand("rerun", "repeat the run recorded in a manifest");
    rerun->add_option("--manifest", manifest_path, "manifest.json written by an earlier run")->required();
    rerun->add_option("--out", out_path, "output location")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Invocation inv;
        if (rerun->parsed()) {
            const json m = read_json_file(manifest_path);
            if (!m.is_object() || !m.contains("command") || !m.contains("config") || !m.contains("args")) {
                throw ConfigError("'" + manifest_path + "' is not a prevcare manifest");
            }
            inv.command = m.at("command").get<std::string>();
            inv.args = m.at("args");
            inv.run = run_config_from_json(m.at("config"));
            inv.config = run_config_to_json(inv.run);
            fs::path out = out_path;
            if (inv.command == "generate") {
                const auto outputs = m.at("outputs");
                if (outputs.size() != 1) throw ConfigError("generate manifest must list one output");
                out = out / outputs.begin().key();
            }
            execute(inv, out);
            return 0;
        }
        const std::string command = app.get_subcommands().front()->get_name();
        inv = prepare(command, config_path, seed);
        if (command == "sweep") inv.args["k"] = ks.empty() ? inv.run.sweep_k : ks;
        if (command == "sensitivity") inv.args["study"] = study;
        execute(inv, out_path);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "prevcare: %s\n", e.what());
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "prevcare: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "prevcare: unexpected error: %s\n", e.what());
        return 1;
    }
}
