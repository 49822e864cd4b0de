#include "prevcare/cohort.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace prevcare {

Panel::Panel(std::vector<PatientRecord> records, RoleMap roles, std::vector<RecordTruth> truth)
    : records_(std::move(records)), truth_(std::move(truth)), roles_(std::move(roles)) {
    if (!truth_.empty() && truth_.size() != records_.size()) {
        throw DataError("panel truth must align with records");
    }
    // Sort by (patient, year) carrying truth along.
    std::vector<std::size_t> order(records_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = records_[a];
        const auto& rb = records_[b];
        return ra.patient_id != rb.patient_id ? ra.patient_id < rb.patient_id : ra.year < rb.year;
    });
    std::vector<PatientRecord> sorted;
    sorted.reserve(records_.size());
    std::vector<RecordTruth> sorted_truth;
    sorted_truth.reserve(truth_.size());
    for (auto i : order) {
        sorted.push_back(std::move(records_[i]));
        if (!truth_.empty()) {
            sorted_truth.push_back(truth_[i]);
        }
    }
    records_ = std::move(sorted);
    truth_ = std::move(sorted_truth);

    if (!records_.empty()) {
        n_features_ = static_cast<std::size_t>(records_.front().features.size());
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.year < 1) {
            throw DataError("record for patient '" + r.patient_id + "' has year < 1");
        }
        if (static_cast<std::size_t>(r.features.size()) != n_features_) {
            throw DataError("record for patient '" + r.patient_id + "' year " +
                            std::to_string(r.year) + " has " + std::to_string(r.features.size()) +
                            " features, expected " + std::to_string(n_features_));
        }
        horizon_ = std::max(horizon_, r.year);
        if (patients_.empty() || patients_.back().id != r.patient_id) {
            patients_.push_back({r.patient_id, i, i + 1});
        } else {
            const auto& prev = records_[i - 1];
            if (prev.year == r.year) {
                throw DataError("duplicate record for patient '" + r.patient_id + "' year " +
                                std::to_string(r.year));
            }
            if (prev.died) {
                throw DataError("patient '" + r.patient_id + "' has records after death");
            }
            patients_.back().end = i + 1;
        }
    }
    for (std::size_t p = 0; p < patients_.size(); ++p) {
        const auto& span = patients_[p];
        patient_lookup_.emplace(span.id, p);
        for (auto i = span.begin; i < span.end; ++i) {
            if (records_[i].treated) {
                ++treated_count_;
                break;
            }
        }
    }
    for (const auto& [name, column] : roles_) {
        if (!records_.empty() && column >= n_features_) {
            throw DataError("role '" + name + "' points past the feature columns");
        }
    }
}

std::optional<std::size_t> Panel::role(std::string_view name) const {
    auto it = roles_.find(std::string(name));
    if (it == roles_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::size_t> Panel::index_of(const PatientId& id, int year) const {
    auto it = patient_lookup_.find(id);
    if (it == patient_lookup_.end()) {
        return std::nullopt;
    }
    const auto& span = patients_[it->second];
    for (auto i = span.begin; i < span.end; ++i) {
        if (records_[i].year == year) {
            return i;
        }
    }
    return std::nullopt;
}

const PatientRecord* Panel::find(const PatientId& id, int year) const {
    auto idx = index_of(id, year);
    return idx ? &records_[*idx] : nullptr;
}

// ---------------------------------------------------------------------------
// Synthetic generation

GenConfig convergence_dgp(std::size_t n_patients, std::uint64_t seed) {
    GenConfig c;
    c.n_patients = n_patients;
    c.horizon = 1;
    c.feature_mean = Vector(3);
    c.feature_mean << 50.0, 170.0, 27.0;
    c.feature_cov = Matrix(3, 3);
    c.feature_cov << 20, 0, 5,
                     0, 50, 5,
                     5, 5, 5;
    c.risk_weights = Vector(3);
    c.risk_weights << 0.5, 0.1, 0.2;
    c.risk_scale = 100.0;
    c.onset_threshold = 0.7;
    c.noise_sd = 1.0;
    c.true_effect = 0.31;
    c.treated_fraction = 0.0;
    c.seed = seed;
    c.feature_names = {"age", "height", "bmi"};
    return c;
}

GenConfig demo_cohort_config(std::uint64_t seed, std::size_t n_patients) {
    struct Var {
        const char* name;
        double mean;
        double sd;
        double risk;    // weight per standard deviation
        double effect;  // effect shift per standard deviation
    };
    const Var vars[] = {
        {"age", 50.0, 12.0, 0.50, -0.30},
        {"bmi", 29.0, 5.5, 0.60, 0.15},
        {"height", 170.0, 9.0, 0.0, 0.0},
        {"weight", 84.0, 16.0, 0.0, 0.0},
        {"systolic_bp", 123.0, 17.0, 0.15, 0.0},
        {"diastolic_bp", 77.0, 12.0, 0.0, 0.0},
        {"hba1c", 5.6, 0.36, 0.70, 0.0},
        {"hdl", 50.0, 12.0, -0.25, 0.0},
        {"triglycerides", 150.0, 60.0, 0.20, 0.0},
    };
    constexpr std::size_t d = std::size(vars);
    Matrix corr = Matrix::Identity(d, d);
    auto set = [&](std::size_t i, std::size_t j, double r) { corr(i, j) = corr(j, i) = r; };
    set(1, 3, 0.7);   // bmi-weight
    set(2, 3, 0.4);   // height-weight
    set(0, 4, 0.3);   // age-systolic
    set(1, 4, 0.2);   // bmi-systolic
    set(4, 5, 0.6);   // systolic-diastolic
    set(1, 6, 0.2);   // bmi-hba1c
    set(0, 6, 0.15);  // age-hba1c
    set(1, 7, -0.3);  // bmi-hdl
    set(1, 8, 0.3);   // bmi-triglycerides
    set(7, 8, -0.4);  // hdl-triglycerides

    GenConfig c;
    c.n_patients = n_patients;
    c.horizon = 4;
    c.feature_mean = Vector(d);
    c.feature_cov = Matrix(d, d);
    c.risk_weights = Vector(d);
    c.effect_weights = Vector(d);
    double centered = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        c.feature_names.emplace_back(vars[i].name);
        c.feature_mean(i) = vars[i].mean;
        c.risk_weights(i) = vars[i].risk / vars[i].sd;
        c.effect_weights(i) = vars[i].effect;
        centered += c.risk_weights(i) * vars[i].mean;
        for (std::size_t j = 0; j < d; ++j) {
            c.feature_cov(i, j) = corr(i, j) * vars[i].sd * vars[j].sd;
        }
    }
    c.risk_scale = 1.0;
    c.risk_intercept = -centered - 1.0;
    c.interactions = {{1, 6, 0.5}};
    c.onset_threshold = 0.5;
    c.noise_sd = 0.2;
    c.true_effect = 0.4;
    c.treated_fraction = 0.5;
    c.confounding_strength = 0.5;
    c.binary_features = {
        {"sex", 0.51, 0.0},
        {"parental_history", 0.30, 0.4},
        {"bp_treatment", 0.25, 0.2},
        {"dx_acute_mi", 0.03, 0.2},
        {"dx_intracerebral_hemorrhage", 0.01, 0.2},
        {"dx_hypothyroidism", 0.05, 0.2},
        {"dx_angina", 0.04, 0.2},
        {"dx_heart_failure", 0.03, 0.2},
    };
    c.filler = {4, 3, 3};
    c.persistence = 0.9;
    c.death_rate = 0.01;
    c.missed_followup_rate = 0.05;
    c.seed = seed;
    return c;
}

namespace {

Matrix psd_factor(const Matrix& cov) {
    if (!cov.isApprox(cov.transpose(), 1e-12)) {
        throw ConfigError("feature covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector& lambda = eig.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda.size() > 0 && lambda.minCoeff() < -1e-10 * scale) {
        std::ostringstream msg;
        msg << "feature covariance is not positive semi-definite (smallest eigenvalue "
            << lambda.minCoeff() << ")";
        throw ConfigError(msg.str());
    }
    return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::size_t gaussian_dim(const GenConfig& c) { return static_cast<std::size_t>(c.feature_mean.size()); }

std::size_t total_dim(const GenConfig& c) {
    return gaussian_dim(c) + c.binary_features.size() + c.filler.lab_tests +
           c.filler.disease_codes + c.filler.prescriptions;
}

}  // namespace

void validate(const GenConfig& c) {
    const auto d = c.feature_mean.size();
    if (c.feature_cov.rows() != d || c.feature_cov.cols() != d) {
        throw ConfigError("feature_cov must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (c.risk_weights.size() != d) {
        throw ConfigError("risk_weights must have " + std::to_string(d) + " entries");
    }
    if (c.effect_weights.size() != 0 && c.effect_weights.size() != d) {
        throw ConfigError("effect_weights must be empty or have " + std::to_string(d) + " entries");
    }
    if (!c.feature_names.empty() && c.feature_names.size() != static_cast<std::size_t>(d)) {
        throw ConfigError("feature_names must have " + std::to_string(d) + " entries");
    }
    if (!(c.onset_threshold > 0.0 && c.onset_threshold < 1.0)) {
        throw ConfigError("onset_threshold must lie in (0,1)");
    }
    if (!(c.true_effect >= 0.0 && c.true_effect <= 1.0)) {
        throw ConfigError("true_effect must lie in [0,1]");
    }
    if (!(c.treated_fraction >= 0.0 && c.treated_fraction <= 1.0)) {
        throw ConfigError("treated_fraction must lie in [0,1]");
    }
    if (c.noise_sd < 0.0 || c.risk_scale == 0.0) {
        throw ConfigError("noise_sd must be >= 0 and risk_scale non-zero");
    }
    if (c.horizon < 1) {
        throw ConfigError("horizon must be >= 1");
    }
    if (c.persistence < 0.0 || c.persistence > 1.0) {
        throw ConfigError("persistence must lie in [0,1]");
    }
    if (c.death_rate < 0.0 || c.death_rate > 1.0 || c.missed_followup_rate < 0.0 ||
        c.missed_followup_rate > 1.0) {
        throw ConfigError("death_rate and missed_followup_rate must lie in [0,1]");
    }
    for (const auto& it : c.interactions) {
        if (it.first >= static_cast<std::size_t>(d) || it.second >= static_cast<std::size_t>(d)) {
            throw ConfigError("interaction index out of range");
        }
    }
    for (const auto& b : c.binary_features) {
        if (b.prevalence < 0.0 || b.prevalence > 1.0) {
            throw ConfigError("binary feature '" + b.name + "' prevalence outside [0,1]");
        }
    }
    psd_factor(c.feature_cov);
}

double latent_risk(const GenConfig& c, const Vector& x) {
    const auto d = c.feature_mean.size();
    double index = c.risk_weights.dot(x.head(d));
    for (std::size_t b = 0; b < c.binary_features.size(); ++b) {
        index += c.binary_features[b].risk_weight * x(d + static_cast<Eigen::Index>(b));
    }
    for (const auto& it : c.interactions) {
        const auto i = static_cast<Eigen::Index>(it.first);
        const auto j = static_cast<Eigen::Index>(it.second);
        const double zi = (x(i) - c.feature_mean(i)) / std::sqrt(c.feature_cov(i, i));
        const double zj = (x(j) - c.feature_mean(j)) / std::sqrt(c.feature_cov(j, j));
        index += it.weight * zi * zj;
    }
    return sigmoid(index / c.risk_scale + c.risk_intercept);
}

double onset_probability(const GenConfig& c, double latent) {
    if (c.noise_sd == 0.0) {
        return latent >= c.onset_threshold ? 1.0 : 0.0;
    }
    return 1.0 - normal_cdf((c.onset_threshold - latent) / c.noise_sd);
}

Vector assignment_probabilities(const Vector& latent, double target, double strength) {
    const auto n = latent.size();
    if (n == 0) {
        return Vector();
    }
    if (target <= 0.0) {
        return Vector::Zero(n);
    }
    if (target >= 1.0) {
        return Vector::Ones(n);
    }
    const double mean = latent.mean();
    const double sd = std::sqrt((latent.array() - mean).square().mean());
    const Vector z = sd > 0.0 ? Vector((latent.array() - mean) / sd) : Vector::Zero(n);
    auto probs = [&](double a) {
        return Vector((a + strength * z.array()).unaryExpr([](double v) { return sigmoid(v); }));
    };
    double lo = -60.0;
    double hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (probs(mid).mean() < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return probs(0.5 * (lo + hi));
}

Panel generate_synthetic_cohort(const GenConfig& c) {
    validate(c);
    const auto d = static_cast<Eigen::Index>(gaussian_dim(c));
    const auto nb = static_cast<Eigen::Index>(c.binary_features.size());
    const auto dim = static_cast<Eigen::Index>(total_dim(c));
    const Matrix factor = psd_factor(c.feature_cov);
    const auto n = c.n_patients;

    Rng rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_gauss = [&]() {
        Vector z(d);
        for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
        return Vector(factor * z);
    };

    RoleMap role_map;
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto name = c.feature_names.empty() ? "f" + std::to_string(j)
                                                  : c.feature_names[static_cast<std::size_t>(j)];
        role_map[name] = static_cast<std::size_t>(j);
    }
    for (Eigen::Index b = 0; b < nb; ++b) {
        role_map[c.binary_features[static_cast<std::size_t>(b)].name] = static_cast<std::size_t>(d + b);
    }
    const auto age_col = [&]() -> std::optional<Eigen::Index> {
        auto it = role_map.find(std::string(roles::age));
        if (it == role_map.end() || it->second >= static_cast<std::size_t>(d)) return std::nullopt;
        return static_cast<Eigen::Index>(it->second);
    }();

    // Baseline rows for everyone first; assignment depends on the cohort-wide risk distribution.
    std::vector<Vector> rows(n);
    Vector baseline_latent(static_cast<Eigen::Index>(n));
    const Eigen::Index lab_begin = d + nb;
    const auto n_lab = static_cast<Eigen::Index>(c.filler.lab_tests);
    const auto n_bin_fill = static_cast<Eigen::Index>(c.filler.disease_codes + c.filler.prescriptions);
    for (std::size_t i = 0; i < n; ++i) {
        Vector x(dim);
        x.head(d) = c.feature_mean + draw_gauss();
        for (Eigen::Index b = 0; b < nb; ++b) {
            x(d + b) = unif(rng) < c.binary_features[static_cast<std::size_t>(b)].prevalence ? 1.0 : 0.0;
        }
        for (Eigen::Index j = 0; j < n_lab; ++j) x(lab_begin + j) = normal(rng);
        for (Eigen::Index j = 0; j < n_bin_fill; ++j) x(lab_begin + n_lab + j) = unif(rng) < 0.1 ? 1.0 : 0.0;
        baseline_latent(static_cast<Eigen::Index>(i)) = latent_risk(c, x);
        rows[i] = std::move(x);
    }
    const Vector assign = assignment_probabilities(baseline_latent, c.treated_fraction, c.confounding_strength);
    const double latent_mean = n > 0 ? baseline_latent.mean() : 0.0;
    const double latent_sd =
        n > 1 ? std::sqrt((baseline_latent.array() - latent_mean).square().mean()) : 0.0;

    std::vector<PatientRecord> records;
    std::vector<RecordTruth> truth;
    records.reserve(n * static_cast<std::size_t>(c.horizon));
    truth.reserve(records.capacity());
    const double rho = c.persistence;
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const int width = std::max<int>(6, static_cast<int>(std::to_string(n).size()));

    for (std::size_t i = 0; i < n; ++i) {
        std::string digits = std::to_string(i + 1);
        const PatientId id = "P" + std::string(width - std::min<std::size_t>(width, digits.size()), '0') + digits;
        const bool ever_treated = unif(rng) < assign(static_cast<Eigen::Index>(i));
        std::uniform_int_distribution<int> start_dist(1, c.horizon);
        const int treat_start = ever_treated ? start_dist(rng) : c.horizon + 1;
        Vector x = rows[i];
        int year = 1;
        while (year <= c.horizon) {
            const double latent = latent_risk(c, x);
            const double risk = onset_probability(c, latent);
            double effect = c.true_effect;
            if (c.effect_weights.size() == d) {
                const Vector z = ((x.head(d) - c.feature_mean).array() /
                                  c.feature_cov.diagonal().array().sqrt()).matrix();
                effect = clamp01(c.true_effect + c.effect_weights.dot(z));
            }
            PatientRecord rec;
            rec.patient_id = id;
            rec.year = year;
            rec.features = x;
            rec.treated = year >= treat_start;
            const double zr = latent_sd > 0.0 ? (latent - latent_mean) / latent_sd : 0.0;
            rec.fasting_glucose = 6.1 + 0.8 * normal_cdf(0.6 * zr + 0.8 * normal(rng));

            const bool dies = unif(rng) < c.death_rate;
            bool onset = false;
            bool stop = false;
            if (dies) {
                rec.died = true;
                stop = true;
            } else {
                onset = latent + c.noise_sd * normal(rng) >= c.onset_threshold;
                if (onset && rec.treated && unif(rng) < effect) {
                    onset = false;
                }
                rec.onset_next = onset;
                stop = onset;
            }
            int step = 1;
            if (!stop && year < c.horizon && unif(rng) < c.missed_followup_rate) {
                rec.onset_next.reset();
                step = 2;
            }
            records.push_back(std::move(rec));
            truth.push_back({risk, effect});
            if (stop) {
                break;
            }
            for (int s = 0; s < step; ++s) {
                Vector next = x;
                next.head(d) = c.feature_mean + rho * (x.head(d) - c.feature_mean) + innovation * draw_gauss();
                if (age_col) {
                    next(*age_col) = x(*age_col) + 1.0;
                }
                for (Eigen::Index j = 0; j < n_lab; ++j) next(lab_begin + j) = normal(rng);
                x = std::move(next);
            }
            year += step;
        }
    }
    return Panel(std::move(records), std::move(role_map), std::move(truth));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

const char* const kFixedColumns[] = {"patient_id", "year", "treated", "died", "onset_next",
                                     "fasting_glucose"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

[[noreturn]] void bad_cell(std::size_t line, const std::string& column, const std::string& what) {
    throw IoError("line " + std::to_string(line) + ", column '" + column + "': " + what);
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
    if (s.empty()) bad_cell(line, column, "empty value");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        bad_cell(line, column, "cannot parse '" + s + "' as a number");
    }
    if (used != s.size()) bad_cell(line, column, "cannot parse '" + s + "' as a number");
    return v;
}

bool parse_flag(const std::string& s, std::size_t line, const std::string& column) {
    if (s == "0") return false;
    if (s == "1") return true;
    bad_cell(line, column, "expected 0 or 1, got '" + s + "'");
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void append_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out += buf;
}

}  // namespace

Panel load_panel(const std::string& path, const RoleMap& roles) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open panel file '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("panel file '" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    constexpr std::size_t n_fixed = std::size(kFixedColumns);
    if (header.size() < n_fixed) {
        throw IoError("panel header has too few columns");
    }
    for (std::size_t j = 0; j < n_fixed; ++j) {
        if (header[j] != kFixedColumns[j]) {
            throw IoError("panel header column " + std::to_string(j + 1) + " must be '" +
                          kFixedColumns[j] + "', got '" + header[j] + "'");
        }
    }
    const auto n_features = static_cast<Eigen::Index>(header.size() - n_fixed);

    std::vector<PatientRecord> records;
    std::set<std::pair<PatientId, int>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw IoError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
        }
        PatientRecord r;
        r.patient_id = cells[0];
        if (r.patient_id.empty()) bad_cell(line_no, header[0], "empty patient id");
        const double year = parse_double(cells[1], line_no, header[1]);
        if (year != std::floor(year) || year < 1) bad_cell(line_no, header[1], "year must be an integer >= 1");
        r.year = static_cast<int>(year);
        r.treated = parse_flag(cells[2], line_no, header[2]);
        r.died = parse_flag(cells[3], line_no, header[3]);
        if (!cells[4].empty()) {
            r.onset_next = parse_flag(cells[4], line_no, header[4]);
        }
        r.fasting_glucose = parse_double(cells[5], line_no, header[5]);
        r.features.resize(n_features);
        for (Eigen::Index j = 0; j < n_features; ++j) {
            const auto col = n_fixed + static_cast<std::size_t>(j);
            r.features(j) = parse_double(cells[col], line_no, header[col]);
        }
        if (!seen.emplace(r.patient_id, r.year).second) {
            throw DataError("line " + std::to_string(line_no) + ": duplicate key (patient '" +
                            r.patient_id + "', year " + std::to_string(r.year) + ")");
        }
        records.push_back(std::move(r));
    }
    RoleMap role_map = roles;
    if (role_map.empty()) {
        // Feature columns are addressable by their header names.
        for (std::size_t j = n_fixed; j < header.size(); ++j) role_map.emplace(header[j], j - n_fixed);
    }
    for (const auto& [name, col] : role_map) {
        if (col >= static_cast<std::size_t>(n_features)) {
            throw ConfigError("role '" + name + "' points past the last feature column");
        }
    }
    return Panel(std::move(records), std::move(role_map));
}

void write_panel(const Panel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write panel file '" + path + "'");
    }
    std::string buf;
    for (std::size_t j = 0; j < std::size(kFixedColumns); ++j) {
        if (j) buf += ',';
        buf += kFixedColumns[j];
    }
    std::vector<std::string> names(panel.n_features());
    for (const auto& [name, col] : panel.roles()) {
        if (col < names.size() && names[col].empty()) names[col] = name;
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        buf += ',';
        buf += names[j].empty() ? "f" + std::to_string(j) : quote_if_needed(names[j]);
    }
    buf += '\n';
    for (const auto& r : panel.records()) {
        buf += quote_if_needed(r.patient_id);
        buf += ',' + std::to_string(r.year);
        buf += r.treated ? ",1" : ",0";
        buf += r.died ? ",1" : ",0";
        buf += ',';
        if (r.onset_next) buf += *r.onset_next ? '1' : '0';
        buf += ',';
        append_number(buf, r.fasting_glucose);
        for (Eigen::Index j = 0; j < r.features.size(); ++j) {
            buf += ',';
            append_number(buf, r.features(j));
        }
        buf += '\n';
    }
    out << buf;
    if (!out) {
        throw IoError("failed writing panel file '" + path + "'");
    }
}

// ---------------------------------------------------------------------------

Panel label_transition(const Panel& panel) {
    std::vector<PatientRecord> records = panel.records();
    for (const auto& span : panel.patients()) {
        for (auto i = span.begin; i < span.end; ++i) {
            auto& r = records[i];
            if (i + 1 < span.end && records[i + 1].year == r.year + 1) {
                r.onset_next = records[i + 1].fasting_glucose > kDiabetesGlucose;
            } else {
                r.onset_next.reset();
            }
        }
    }
    return Panel(std::move(records), panel.roles(), panel.truth());
}

std::optional<std::size_t> latest_record(const Panel& panel, const PatientSpan& span, int year) {
    std::optional<std::size_t> best;
    for (auto i = span.begin; i < span.end; ++i) {
        if (panel.records()[i].year <= year) {
            best = i;
        } else {
            break;
        }
    }
    return best;
}

std::vector<PatientId> eligible_patients(const Panel& panel, int year) {
    if (panel.empty()) {
        return {};
    }
    if (year < 1 || year > panel.horizon()) {
        throw DataError("year " + std::to_string(year) + " outside panel horizon [1, " +
                        std::to_string(panel.horizon()) + "]");
    }
    std::vector<PatientId> out;
    for (const auto& span : panel.patients()) {
        bool ok = false;
        for (auto i = span.begin; i < span.end; ++i) {
            const auto& r = panel.records()[i];
            if (r.year > year) break;
            ok = true;
            if (r.treated) {
                ok = false;
                break;
            }
            if (r.year < year && (r.died || r.onset_next.value_or(false))) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(span.id);
    }
    return out;
}

}  // namespace prevcare
