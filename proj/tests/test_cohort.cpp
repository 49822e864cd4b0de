#include "prevcare/cohort.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace prevcare;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "prevcare_unit_cohort";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

PatientRecord rec(const std::string& id, int year, double glucose, bool died = false) {
    PatientRecord r;
    r.patient_id = id;
    r.year = year;
    r.features = Vector::Zero(1);
    r.fasting_glucose = glucose;
    r.died = died;
    return r;
}

// P(sigmoid(u) + eps >= t) with u ~ N(m, s^2), eps ~ N(0, 1), by trapezoidal quadrature over u.
double analytic_onset_rate(double m, double s, double t) {
    const int n = 4000;
    const double lo = m - 9 * s;
    const double hi = m + 9 * s;
    const double h = (hi - lo) / n;
    const double pi = std::acos(-1.0);
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = lo + i * h;
        const double dens = std::exp(-0.5 * (u - m) * (u - m) / (s * s)) / (s * std::sqrt(2 * pi));
        const double latent = 1.0 / (1.0 + std::exp(-u));
        const double tail = 0.5 * std::erfc((t - latent) / std::sqrt(2.0));
        total += (i == 0 || i == n ? 0.5 : 1.0) * dens * tail;
    }
    return total * h;
}

}  // namespace

TEST_SUITE("cohort") {

TEST_CASE("convergence DGP: moments and untreated onset rate") {
    const GenConfig c = convergence_dgp(100000, 17);
    const Panel p = generate_synthetic_cohort(c);
    REQUIRE(p.size() == 100000);
    CHECK(p.n_features() == 3);
    CHECK(p.treated_count() == 0);

    Vector mean = Vector::Zero(3);
    double onsets = 0.0;
    for (const auto& r : p.records()) {
        mean += r.features;
        onsets += r.onset_next.value() ? 1.0 : 0.0;
    }
    mean /= 100000.0;
    CHECK(mean(0) == doctest::Approx(50.0).epsilon(0.002));
    CHECK(mean(1) == doctest::Approx(170.0).epsilon(0.001));
    CHECK(mean(2) == doctest::Approx(27.0).epsilon(0.002));

    Vector w(3);
    w << 0.5, 0.1, 0.2;
    Matrix S(3, 3);
    S << 20, 0, 5, 0, 50, 5, 5, 5, 5;
    Vector mu(3);
    mu << 50, 170, 27;
    const double m = w.dot(mu) / 100.0;
    const double s = std::sqrt(w.dot(S * w)) / 100.0;
    const double expected = analytic_onset_rate(m, s, 0.7);
    CHECK(std::abs(onsets / 100000.0 - expected) <= 0.01);
}

TEST_CASE("zero weights and zero noise give no onsets") {
    GenConfig c = convergence_dgp(2000, 3);
    c.risk_weights.setZero();
    c.noise_sd = 0.0;
    const Panel p = generate_synthetic_cohort(c);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(latent_risk(c, p.records()[i].features) == doctest::Approx(0.5));
        CHECK_FALSE(p.records()[i].onset_next.value());
    }
}

TEST_CASE("generation is deterministic to the byte") {
    const GenConfig c = demo_cohort_config(9, 300);
    write_panel(generate_synthetic_cohort(c), scratch("a.csv").string());
    write_panel(generate_synthetic_cohort(c), scratch("b.csv").string());
    CHECK(slurp(scratch("a.csv")) == slurp(scratch("b.csv")));
    GenConfig other = c;
    other.seed = 10;
    write_panel(generate_synthetic_cohort(other), scratch("c.csv").string());
    CHECK(slurp(scratch("a.csv")) != slurp(scratch("c.csv")));
}

TEST_CASE("randomized assignment hits the treated fraction within 3 sigma") {
    GenConfig c = convergence_dgp(20000, 5);
    c.treated_fraction = 0.3;
    c.confounding_strength = 0.0;
    const Panel p = generate_synthetic_cohort(c);
    const double frac = static_cast<double>(p.treated_count()) / 20000.0;
    CHECK(std::abs(frac - 0.3) <= 3.0 * std::sqrt(0.3 * 0.7 / 20000.0));
}

TEST_CASE("confounding tilts treatment toward high risk") {
    GenConfig c = convergence_dgp(20000, 6);
    c.treated_fraction = 0.3;
    c.confounding_strength = 1.5;
    const Panel p = generate_synthetic_cohort(c);
    double treated_risk = 0.0, untreated_risk = 0.0, nt = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = p.truth(i).untreated_risk;
        if (p.records()[i].treated) {
            treated_risk += r;
            nt += 1.0;
        } else {
            untreated_risk += r;
        }
    }
    CHECK(treated_risk / nt > untreated_risk / (p.size() - nt));
    const Vector probs = assignment_probabilities(Vector::LinSpaced(100, 0.1, 0.9), 0.3, 2.0);
    CHECK(probs.mean() == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("invalid generator configurations are rejected") {
    GenConfig c = convergence_dgp(10, 1);
    c.feature_cov(0, 0) = -1.0;
    CHECK_THROWS_AS(generate_synthetic_cohort(c), ConfigError);
    c = convergence_dgp(10, 1);
    c.risk_weights = Vector::Ones(2);
    CHECK_THROWS_AS(generate_synthetic_cohort(c), ConfigError);
    c = convergence_dgp(10, 1);
    c.true_effect = 1.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("CSV round trip keeps absent labels and bytes") {
    GenConfig c = demo_cohort_config(4, 200);
    c.missed_followup_rate = 0.2;
    const Panel p = generate_synthetic_cohort(c);
    const bool any_absent = std::any_of(p.records().begin(), p.records().end(),
                                        [](const PatientRecord& r) { return !r.onset_next; });
    REQUIRE(any_absent);
    write_panel(p, scratch("rt1.csv").string());
    const Panel q = load_panel(scratch("rt1.csv").string());
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(q.records()[i].onset_next.has_value() == p.records()[i].onset_next.has_value());
    }
    CHECK(q.role("age") == p.role("age"));
    write_panel(q, scratch("rt2.csv").string());
    CHECK(slurp(scratch("rt1.csv")) == slurp(scratch("rt2.csv")));
}

TEST_CASE("small CSV files: smoke, duplicates, bad cells") {
    const std::string header = "patient_id,year,treated,died,onset_next,fasting_glucose,f0\n";
    write_text(scratch("ok.csv"), header + "A,1,0,0,0,6.2,1\nA,2,0,0,,6.3,2\nB,1,1,0,1,6.5,3\n");
    const Panel p = load_panel(scratch("ok.csv").string());
    CHECK(p.size() == 3);
    CHECK_FALSE(p.find("A", 2)->onset_next.has_value());
    CHECK(p.horizon() == 2);
    CHECK(p.treated_count() == 1);

    write_text(scratch("dup.csv"), header + "A,1,0,0,0,6.2,1\nA,1,0,0,0,6.3,2\n");
    CHECK_THROWS_AS(load_panel(scratch("dup.csv").string()), DataError);

    write_text(scratch("bad.csv"), header + "A,1,0,0,0,6.2,1\nB,1,0,0,0,oops,2\n");
    try {
        load_panel(scratch("bad.csv").string());
        FAIL("expected a parse error");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("fasting_glucose") != std::string::npos);
    }
    CHECK_THROWS_AS(load_panel(scratch("missing.csv").string()), IoError);
}

TEST_CASE("label transition from next-year glucose") {
    std::vector<PatientRecord> rs{rec("A", 1, 6.5), rec("A", 2, 7.2), rec("B", 1, 6.5), rec("B", 2, 6.5),
                                  rec("C", 1, 6.5)};
    const Panel labeled = label_transition(Panel(rs));
    CHECK(labeled.find("A", 1)->onset_next == true);
    CHECK(labeled.find("B", 1)->onset_next == false);
    CHECK_FALSE(labeled.find("C", 1)->onset_next.has_value());
    CHECK_FALSE(labeled.find("A", 2)->onset_next.has_value());

    const Panel twice = label_transition(labeled);
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        CHECK(twice.records()[i].onset_next == labeled.records()[i].onset_next);
    }
}

TEST_CASE("eligibility: death excludes, missed follow-up does not") {
    auto a1 = rec("A", 1, 6.2);
    a1.onset_next = false;
    auto a2 = rec("A", 2, 6.2, true);
    auto b1 = rec("B", 1, 6.2);
    auto b2 = rec("B", 2, 6.2);  // label absent: missed follow-up
    auto b3 = rec("B", 3, 6.2);
    auto c1 = rec("C", 1, 6.2);
    c1.onset_next = false;
    auto c2 = rec("C", 2, 6.2);
    c2.treated = true;
    auto c3 = rec("C", 3, 6.2);
    c3.treated = true;
    const Panel p({a1, a2, b1, b2, b3, c1, c2, c3});
    const auto e3 = eligible_patients(p, 3);
    CHECK(e3 == std::vector<PatientId>{"B"});
    const auto e1 = eligible_patients(p, 1);
    CHECK(e1 == std::vector<PatientId>{"A", "B", "C"});
    CHECK(eligible_patients(Panel(), 1).empty());
    CHECK_THROWS_AS(eligible_patients(p, 9), DataError);
}

TEST_CASE("panel invariants are enforced") {
    CHECK_THROWS_AS(Panel({rec("A", 1, 6.2, true), rec("A", 2, 6.2)}), DataError);
    CHECK_THROWS_AS(Panel({rec("A", 1, 6.2), rec("A", 1, 6.3)}), DataError);
}

}
