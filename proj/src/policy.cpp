#include "prevcare/policy.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <fstream>
#include <numeric>

namespace prevcare {

int framingham_score(const FraminghamInputs& in) {
    int score = 0;
    if (in.fasting_glucose_mgdl >= 100.0 && in.fasting_glucose_mgdl < 126.0) score += 10;
    if (in.bmi >= 30.0) {
        score += 5;
    } else if (in.bmi >= 25.0) {
        score += 2;
    }
    if (in.hdl_mgdl < (in.female ? 50.0 : 40.0)) score += 5;
    if (in.parental_history) score += 3;
    if (in.triglycerides_mgdl >= 150.0) score += 3;
    if (in.systolic >= 130.0 || in.diastolic >= 85.0 || in.on_bp_treatment) score += 2;
    return score;
}

FraminghamInputs framingham_inputs(const PatientRecord& r, const RoleMap& roles) {
    auto get = [&](std::string_view name) {
        auto it = roles.find(std::string(name));
        if (it == roles.end()) {
            throw ConfigError("clinical score needs the '" + std::string(name) + "' role");
        }
        return r.features(static_cast<Eigen::Index>(it->second));
    };
    FraminghamInputs in;
    in.fasting_glucose_mgdl = r.fasting_glucose * kGlucoseMgdlPerMmol;
    in.bmi = get(roles::bmi);
    in.hdl_mgdl = get(roles::hdl);
    in.female = get(roles::sex) > 0.5;
    in.parental_history = get(roles::parental_history) > 0.5;
    in.triglycerides_mgdl = get(roles::triglycerides);
    in.systolic = get(roles::systolic_bp);
    in.diastolic = get(roles::diastolic_bp);
    in.on_bp_treatment = get(roles::bp_treatment) > 0.5;
    return in;
}

namespace {

Selection top_k(const ScoreMap& scores, int k, std::uint64_t seed) {
    if (k < 0) throw ConfigError("budget k must be >= 0");
    struct Entry {
        const PatientId* id;
        double score;
        std::uint64_t key;
    };
    Rng rng(seed);
    std::vector<Entry> entries;
    entries.reserve(scores.size());
    for (const auto& [id, s] : scores) entries.push_back({&id, s, rng()});
    Selection sel;
    auto take = static_cast<std::size_t>(k);
    if (take > entries.size()) {
        sel.warning = "budget " + std::to_string(k) + " exceeds the " + std::to_string(entries.size()) +
                      " eligible patients; selecting all";
        take = entries.size();
    }
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(take), entries.end(),
                      [](const Entry& a, const Entry& b) {
                          return a.score != b.score ? a.score > b.score : a.key < b.key;
                      });
    for (std::size_t i = 0; i < take; ++i) sel.chosen.push_back(*entries[i].id);
    if (take > 0) sel.cutoff = entries[take - 1].score;
    return sel;
}

}  // namespace

Selection threshold_policy(const ScoreMap& scores, int k, std::uint64_t seed) { return top_k(scores, k, seed); }

Selection select_topk(const ScoreMap& risks, const ScoreMap& gammas, int k, std::uint64_t seed) {
    if (risks.size() != gammas.size()) throw DataError("select_topk: risks and gammas have different patients");
    ScoreMap reduction;
    auto g = gammas.begin();
    for (const auto& [id, h] : risks) {
        if (g->first != id) throw DataError("select_topk: patient '" + id + "' has no gamma");
        reduction.emplace_hint(reduction.end(), id, g->second * h);
        ++g;
    }
    return top_k(reduction, k, seed);
}

Selection risk_only_policy(const ScoreMap& risks, int k, std::uint64_t seed) { return top_k(risks, k, seed); }

Selection random_policy(const std::vector<PatientId>& eligible, int k, std::uint64_t seed) {
    if (k < 0) throw ConfigError("budget k must be >= 0");
    std::vector<PatientId> pool = eligible;
    std::sort(pool.begin(), pool.end());
    Rng rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    Selection sel;
    pool.resize(std::min(pool.size(), static_cast<std::size_t>(k)));
    sel.chosen = std::move(pool);
    return sel;
}

double allocation_objective(const Vector& h, const Vector& gamma, const std::vector<std::size_t>& chosen) {
    double obj = h.sum();
    for (auto i : chosen) obj -= gamma(static_cast<Eigen::Index>(i)) * h(static_cast<Eigen::Index>(i));
    return obj;
}

BruteForceResult brute_force_allocation(const Vector& h, const Vector& gamma, int k) {
    const auto n = h.size();
    if (gamma.size() != n) throw DataError("brute_force_allocation: size mismatch");
    if (n > 20) throw DataError("brute_force_allocation: at most 20 patients (got " + std::to_string(n) + ")");
    if (k < 0) throw ConfigError("budget k must be >= 0");
    BruteForceResult best;
    best.objective = std::numeric_limits<double>::infinity();
    const std::uint32_t limit = 1u << n;
    std::vector<std::size_t> chosen;
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        if (std::popcount(mask) > k) continue;
        chosen.clear();
        // Treated and untreated terms summed separately, exactly as the objective is written.
        double treated = 0.0;
        double untreated = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                chosen.push_back(static_cast<std::size_t>(i));
                treated += (1.0 - gamma(i)) * h(i);
            } else {
                untreated += h(i);
            }
        }
        const double obj = treated + untreated;
        if (obj < best.objective) {
            best.objective = obj;
            best.chosen = chosen;
        }
    }
    return best;
}

bool AllocationPlan::is_treated(const PatientId& id, int year) const {
    auto it = treated.find(year);
    return it != treated.end() && std::binary_search(it->second.begin(), it->second.end(), id);
}

void write_plan_csv(const AllocationPlan& plan, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "patient_id,year,treated\n";
    for (const auto& [year, ids] : plan.treated) {
        for (const auto& id : ids) out << id << ',' << year << ",1\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace prevcare
