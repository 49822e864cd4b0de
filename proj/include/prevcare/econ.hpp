#pragma once

#include "prevcare/cohort.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace prevcare {

inline constexpr std::size_t kComorbidities = 5;
using ComorbidityFlags = std::array<bool, kComorbidities>;

struct CostParams {
    double c_prevent = 1380.0;  // per treated patient-year
    double base_cost_cap = 15000.0;
    // acute MI, intracerebral hemorrhage, acquired hypothyroidism, angina pectoris, heart failure
    std::array<double, kComorbidities> comorbidity_costs{5000.0, 5000.0, 5000.0, 15000.0, 15000.0};
    std::array<std::string, kComorbidities> comorbidity_roles{
        "dx_acute_mi", "dx_intracerebral_hemorrhage", "dx_hypothyroidism", "dx_angina", "dx_heart_failure"};
    double life_expectancy = 75.0;
    double min_extra_years = 3.0;
    double max_extra_years = 10.0;
    double fallback_age = 50.0;  // when the panel has no age column
};

void validate(const CostParams& params);

/// C0 = cap / (1 + exp(-age/10)).
double base_cost(double age, const CostParams& params);
double diabetes_cost(double age, const ComorbidityFlags& flags, const CostParams& params);
/// clamp(life_expectancy - age, min_extra_years, max_extra_years)
double remaining_years(double age, const CostParams& params);

/// y (1 - gamma) C_diab + c_prevent
double expected_cost_treated(double y, double gamma, double c_diab, const CostParams& params);
/// y C_diab
double expected_cost_untreated(double y, double c_diab);

/// Age and comorbidity flags of a record, via panel roles.
double record_age(const PatientRecord& record, const RoleMap& roles, const CostParams& params);
ComorbidityFlags record_comorbidities(const PatientRecord& record, const RoleMap& roles, const CostParams& params);

/// One evaluated patient-year.
struct YearRecord {
    PatientId patient_id;
    int year = 0;
    bool treated = false;
    std::optional<bool> onset_next;
    /// Effect applied in the accounting. In stochastic outcome mode this is the realized
    /// 0/1 prevention indicator instead of the expected effect.
    double gamma = 0.0;
    double age = 0.0;
    ComorbidityFlags comorbidity{};
    double risk = 0.0;  // predicted untreated risk at allocation time (0 if not scored)
};

struct BootstrapStats {
    double mean = 0.0;
    double sd = 0.0;
};

struct SimulationResult {
    std::vector<YearRecord> records;
    int n_years = 0;  // L
    double prevented_onsets = 0.0;
    double cost_savings = 0.0;
    BootstrapStats prevented_bootstrap;
    BootstrapStats savings_bootstrap;
};

/// (1/L) sum gamma t y; absent labels contribute 0.
double prevented_onsets(const std::vector<YearRecord>& records, int n_years);

/// Savings of one record relative to no treatment: t (y gamma C_diab R - c_prevent).
double record_savings(const YearRecord& record, const CostParams& params);

/// Cost without treatment minus cost of the allocation, costs extended by remaining years.
double cost_savings(const std::vector<YearRecord>& records, const CostParams& params);

using Metric = std::function<double(const std::vector<YearRecord>&)>;

/// Resamples patients (all their records together) with replacement.
BootstrapStats bootstrap(const Metric& metric, const std::vector<YearRecord>& records, int replicates,
                         std::uint64_t seed);

double extrapolate_population(double per_patient_annual_saving, double population);

void write_records_csv(const SimulationResult& result, const std::string& path);

}  // namespace prevcare
