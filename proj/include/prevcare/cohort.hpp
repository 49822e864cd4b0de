#pragma once

#include "prevcare/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prevcare {

using PatientId = std::string;

/// One patient-year observation.
struct PatientRecord {
    PatientId patient_id;
    int year = 1;
    Vector features;
    bool treated = false;
    std::optional<bool> onset_next;  // absent when the follow-up was missed
    bool died = false;
    double fasting_glucose = 0.0;  // mmol/L
};

/// Ground truth known only for synthetic panels.
struct RecordTruth {
    double untreated_risk = 0.0;  // P(onset next year | x, untreated)
    double effect = 0.0;          // relative risk reduction if treated
};

/// Maps semantic roles ("age", "bmi", "dx_angina", ...) to feature columns.
using RoleMap = std::map<std::string, std::size_t>;

namespace roles {
inline constexpr std::string_view age = "age";
inline constexpr std::string_view sex = "sex";  // 0 = male, 1 = female
inline constexpr std::string_view height = "height";
inline constexpr std::string_view weight = "weight";
inline constexpr std::string_view bmi = "bmi";
inline constexpr std::string_view systolic_bp = "systolic_bp";
inline constexpr std::string_view diastolic_bp = "diastolic_bp";
inline constexpr std::string_view hba1c = "hba1c";
inline constexpr std::string_view hdl = "hdl";
inline constexpr std::string_view triglycerides = "triglycerides";
inline constexpr std::string_view parental_history = "parental_history";
inline constexpr std::string_view bp_treatment = "bp_treatment";
}  // namespace roles

/// Contiguous block of records belonging to one patient, ordered by year.
struct PatientSpan {
    PatientId id;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Immutable longitudinal panel, records sorted by (patient_id, year).
class Panel {
public:
    Panel() = default;
    explicit Panel(std::vector<PatientRecord> records, RoleMap roles = {},
                   std::vector<RecordTruth> truth = {});

    const std::vector<PatientRecord>& records() const { return records_; }
    const std::vector<PatientSpan>& patients() const { return patients_; }
    const RoleMap& roles() const { return roles_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::size_t n_features() const { return n_features_; }
    int horizon() const { return horizon_; }
    /// Number of patients with at least one treated record.
    std::size_t treated_count() const { return treated_count_; }

    std::optional<std::size_t> role(std::string_view name) const;
    std::optional<std::size_t> index_of(const PatientId& id, int year) const;
    const PatientRecord* find(const PatientId& id, int year) const;

    bool has_truth() const { return !truth_.empty(); }
    const RecordTruth& truth(std::size_t record_index) const { return truth_.at(record_index); }
    const std::vector<RecordTruth>& truth() const { return truth_; }

private:
    std::vector<PatientRecord> records_;
    std::vector<RecordTruth> truth_;
    std::vector<PatientSpan> patients_;
    std::map<PatientId, std::size_t> patient_lookup_;
    RoleMap roles_;
    std::size_t n_features_ = 0;
    int horizon_ = 0;
    std::size_t treated_count_ = 0;
};

/// A named binary feature drawn independently of the Gaussian block.
struct BinaryFeature {
    std::string name;
    double prevalence = 0.1;
    double risk_weight = 0.0;
};

/// Pairwise term w * z_i * z_j of standardized Gaussian features added to the risk index.
struct RiskInteraction {
    std::size_t first = 0;
    std::size_t second = 0;
    double weight = 0.0;
};

/// Counts of uninformative filler columns per feature group.
struct FillerBlocks {
    std::size_t lab_tests = 0;       // Gaussian
    std::size_t disease_codes = 0;   // Bernoulli(0.1)
    std::size_t prescriptions = 0;   // Bernoulli(0.1)
};

struct GenConfig {
    std::size_t n_patients = 1000;
    int horizon = 1;
    Vector feature_mean;
    Matrix feature_cov;
    Vector risk_weights;
    double risk_scale = 100.0;
    double risk_intercept = 0.0;
    double onset_threshold = 0.7;
    double noise_sd = 1.0;
    double true_effect = 0.31;
    double treated_fraction = 0.0;
    double confounding_strength = 0.0;
    std::uint64_t seed = 1;

    std::vector<std::string> feature_names;  // defaults to f0, f1, ...
    std::vector<BinaryFeature> binary_features;
    std::vector<RiskInteraction> interactions;
    Vector effect_weights;  // per standardized Gaussian feature; empty = constant effect
    FillerBlocks filler;
    double persistence = 1.0;  // AR(1) coefficient of the Gaussian block between years
    double death_rate = 0.0;
    double missed_followup_rate = 0.0;
};

/// Three-variable convergence cohort (age, height, BMI).
GenConfig convergence_dgp(std::size_t n_patients, std::uint64_t seed);

/// Multi-year demo cohort with heterogeneous effects and the Framingham variables.
GenConfig demo_cohort_config(std::uint64_t seed, std::size_t n_patients = 3000);

void validate(const GenConfig& config);

Panel generate_synthetic_cohort(const GenConfig& config);

/// Latent risk sigmoid((w'x + interactions) / scale + intercept) for a full feature row.
double latent_risk(const GenConfig& config, const Vector& features);

/// P(latent + eps >= threshold), eps ~ N(0, noise_sd^2).
double onset_probability(const GenConfig& config, double latent);

/// Treatment assignment probabilities sigmoid(a + b z) with `a` bisected so the mean
/// equals `target_fraction`; z are standardized latent risks.
Vector assignment_probabilities(const Vector& latent, double target_fraction, double strength);

/// Column layout of the panel CSV (roles are carried separately).
Panel load_panel(const std::string& path, const RoleMap& roles = {});
void write_panel(const Panel& panel, const std::string& path);

/// Glucose above this value (mmol/L) marks a diabetes onset.
inline constexpr double kDiabetesGlucose = 6.9;

Panel label_transition(const Panel& panel);

/// Patients alive, prediabetic and never treated as of `year`.
std::vector<PatientId> eligible_patients(const Panel& panel, int year);

/// Most recent record of `span` with year <= `year`, if any.
std::optional<std::size_t> latest_record(const Panel& panel, const PatientSpan& span, int year);

}  // namespace prevcare
