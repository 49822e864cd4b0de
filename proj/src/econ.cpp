#include "prevcare/econ.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

namespace prevcare {

void validate(const CostParams& p) {
    if (p.c_prevent < 0 || p.base_cost_cap < 0 || p.life_expectancy < 0 || p.min_extra_years < 0 ||
        p.max_extra_years < 0) {
        throw ConfigError("cost parameters must be non-negative");
    }
    for (double c : p.comorbidity_costs) {
        if (c < 0) throw ConfigError("comorbidity costs must be non-negative");
    }
    if (p.min_extra_years > p.max_extra_years) throw ConfigError("min_extra_years exceeds max_extra_years");
}

double base_cost(double age, const CostParams& p) {
    if (age < 0.0) throw DataError("base_cost: negative age");
    return p.base_cost_cap / (1.0 + std::exp(-age / 10.0));
}

double diabetes_cost(double age, const ComorbidityFlags& flags, const CostParams& p) {
    double c = base_cost(age, p);
    for (std::size_t k = 0; k < kComorbidities; ++k) {
        if (flags[k]) c += p.comorbidity_costs[k];
    }
    return c;
}

double remaining_years(double age, const CostParams& p) {
    return std::clamp(p.life_expectancy - age, p.min_extra_years, p.max_extra_years);
}

double expected_cost_treated(double y, double gamma, double c_diab, const CostParams& p) {
    return y * (1.0 - gamma) * c_diab + p.c_prevent;
}

double expected_cost_untreated(double y, double c_diab) { return y * c_diab; }

double record_age(const PatientRecord& r, const RoleMap& roles, const CostParams& p) {
    auto it = roles.find(std::string(roles::age));
    if (it == roles.end()) return p.fallback_age;
    return std::max(0.0, r.features(static_cast<Eigen::Index>(it->second)));
}

ComorbidityFlags record_comorbidities(const PatientRecord& r, const RoleMap& roles, const CostParams& p) {
    ComorbidityFlags flags{};
    for (std::size_t k = 0; k < kComorbidities; ++k) {
        auto it = roles.find(p.comorbidity_roles[k]);
        flags[k] = it != roles.end() && r.features(static_cast<Eigen::Index>(it->second)) > 0.5;
    }
    return flags;
}

double prevented_onsets(const std::vector<YearRecord>& records, int n_years) {
    if (n_years <= 0) throw DataError("prevented_onsets: the number of years L must be positive");
    double total = 0.0;
    for (const auto& r : records) {
        if (r.treated && r.onset_next.value_or(false)) total += r.gamma;
    }
    return total / static_cast<double>(n_years);
}

double record_savings(const YearRecord& r, const CostParams& p) {
    if (!r.treated) return 0.0;
    const double y = r.onset_next.value_or(false) ? 1.0 : 0.0;
    const double c_diab = diabetes_cost(r.age, r.comorbidity, p) * remaining_years(r.age, p);
    const double untreated = expected_cost_untreated(y, c_diab);
    const double treated = expected_cost_treated(y, r.gamma, c_diab, p);
    return untreated - treated;
}

double cost_savings(const std::vector<YearRecord>& records, const CostParams& p) {
    double no_treatment = 0.0;
    double allocation = 0.0;
    for (const auto& r : records) {
        const double y = r.onset_next.value_or(false) ? 1.0 : 0.0;
        const double c_diab = diabetes_cost(r.age, r.comorbidity, p) * remaining_years(r.age, p);
        const double c_nt = expected_cost_untreated(y, c_diab);
        no_treatment += c_nt;
        allocation += r.treated ? expected_cost_treated(y, r.gamma, c_diab, p) : c_nt;
    }
    return no_treatment - allocation;
}

BootstrapStats bootstrap(const Metric& metric, const std::vector<YearRecord>& records, int B, std::uint64_t seed) {
    if (B < 2) throw ConfigError("bootstrap: need at least 2 replicates");
    if (records.empty()) throw DataError("bootstrap: empty result");
    std::map<PatientId, std::vector<std::size_t>> by_patient;
    for (std::size_t i = 0; i < records.size(); ++i) by_patient[records[i].patient_id].push_back(i);
    std::vector<const std::vector<std::size_t>*> groups;
    groups.reserve(by_patient.size());
    for (const auto& [id, rows] : by_patient) groups.push_back(&rows);

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(B));
    std::vector<YearRecord> sample;
    for (int b = 0; b < B; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        std::uniform_int_distribution<std::size_t> pick(0, groups.size() - 1);
        sample.clear();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (auto i : *groups[pick(rng)]) sample.push_back(records[i]);
        }
        values.push_back(metric(sample));
    }
    BootstrapStats s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(B);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(B - 1));
    return s;
}

double extrapolate_population(double saving, double population) {
    if (saving < 0.0 || population < 0.0) throw DataError("extrapolate_population: inputs must be non-negative");
    return saving * population;
}

void write_records_csv(const SimulationResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "patient_id,year,treated,onset_next,gamma,age,risk,dx_flags\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (const auto& r : result.records) {
        std::string flags;
        for (bool f : r.comorbidity) flags.push_back(f ? '1' : '0');
        out << r.patient_id << ',' << r.year << ',' << (r.treated ? 1 : 0) << ','
            << (r.onset_next ? (*r.onset_next ? "1" : "0") : "") << ',' << num(r.gamma) << ',' << num(r.age)
            << ',' << num(r.risk) << ',' << flags << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace prevcare
