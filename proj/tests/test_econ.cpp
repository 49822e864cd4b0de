#include "prevcare/econ.hpp"

#include <doctest.h>

using namespace prevcare;

namespace {

YearRecord yr(const std::string& id, int year, bool treated, std::optional<bool> y, double gamma, double age = 50.0) {
    YearRecord r;
    r.patient_id = id;
    r.year = year;
    r.treated = treated;
    r.onset_next = y;
    r.gamma = gamma;
    r.age = age;
    return r;
}

std::vector<YearRecord> random_records(std::uint64_t seed, int n_patients, int years) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<YearRecord> out;
    for (int p = 0; p < n_patients; ++p) {
        const double age = 30 + 50 * u(rng);
        for (int l = 1; l <= years; ++l) {
            auto r = yr("q" + std::to_string(p), l, u(rng) < 0.3, u(rng) < 0.2, 0.1 + 0.5 * u(rng), age + l);
            if (u(rng) < 0.05) r.onset_next.reset();
            for (auto& f : r.comorbidity) f = u(rng) < 0.1;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("econ") {

TEST_CASE("base and diabetes costs") {
    const CostParams p;
    CHECK(base_cost(0, p) == 7500.0);
    CHECK(std::abs(base_cost(75, p) - 14991.71) < 0.01);
    CHECK(base_cost(75, p) == doctest::Approx(15000.0 / (1.0 + std::exp(-7.5))).epsilon(1e-15));
    CHECK(base_cost(50, p) < base_cost(60, p));
    CHECK(base_cost(120, p) < 15000.0);
    CHECK_THROWS_AS(base_cost(-1, p), DataError);

    ComorbidityFlags none{};
    CHECK(diabetes_cost(0, none, p) == 7500.0);
    ComorbidityFlags heart{false, false, false, true, true};
    CHECK(diabetes_cost(0, heart, p) == 37500.0);
    ComorbidityFlags all{true, true, true, true, true};
    CHECK(diabetes_cost(0, all, p) == 52500.0);
}

TEST_CASE("per-patient expected costs") {
    const CostParams p;
    CHECK(expected_cost_treated(1, 1, 12345.0, p) == 1380.0);
    CHECK(expected_cost_treated(0, 0.4, 12345.0, p) == 1380.0);
    CHECK(std::abs(expected_cost_treated(1, 0.31, 20000, p) - 15180.0) < 1e-9);
    CHECK(expected_cost_untreated(0, 20000) == 0.0);
    CHECK(expected_cost_untreated(1, 20000) == 20000.0);
    for (double y : {0.0, 1.0}) {
        for (double c : {0.0, 999.0, 52500.0}) {
            CHECK(expected_cost_treated(y, 0.0, c, p) == doctest::Approx(expected_cost_untreated(y, c) + p.c_prevent));
        }
    }
}

TEST_CASE("remaining years clamp to [3, 10]") {
    const CostParams p;
    CHECK(remaining_years(70, p) == 5.0);
    CHECK(remaining_years(20, p) == 10.0);
    CHECK(remaining_years(74, p) == 3.0);
    for (double age = 0; age <= 120; age += 0.5) {
        CHECK(remaining_years(age, p) >= 3.0);
        CHECK(remaining_years(age, p) <= 10.0);
    }
}

TEST_CASE("prevented onsets: hand sums") {
    CHECK(prevented_onsets({yr("a", 1, true, true, 0.5)}, 1) == 0.5);
    CHECK(prevented_onsets({yr("a", 1, false, true, 0.5), yr("b", 1, false, false, 0.9)}, 1) == 0.0);
    CHECK(std::abs(prevented_onsets({yr("a", 1, true, true, 0.4), yr("b", 2, true, true, 0.6)}, 2) - 0.5) < 1e-9);
    CHECK(prevented_onsets({yr("a", 1, true, std::nullopt, 0.7)}, 1) == 0.0);
    CHECK_THROWS_AS(prevented_onsets({}, 0), DataError);
}

TEST_CASE("prevented onsets are linear in gamma") {
    auto rs = random_records(3, 40, 3);
    const double base = prevented_onsets(rs, 3);
    for (auto& r : rs) r.gamma *= 1.5;  // max gamma stays below 1
    CHECK(prevented_onsets(rs, 3) == doctest::Approx(1.5 * base).epsilon(1e-12));
}

TEST_CASE("cost savings: hand cases") {
    CostParams p;
    std::vector<YearRecord> spend{yr("a", 1, true, false, 0.3), yr("b", 1, true, false, 0.8),
                                  yr("c", 2, false, true, 0.5)};
    CHECK(std::abs(cost_savings(spend, p) - (-2 * 1380.0)) < 1e-9);
    CHECK(cost_savings({yr("a", 1, false, true, 0.5), yr("b", 1, false, false, 0.5)}, p) == 0.0);

    p.base_cost_cap = 20000.0 * (1.0 + std::exp(-7.0));
    REQUIRE(std::abs(diabetes_cost(70, ComorbidityFlags{}, p) - 20000.0) < 1e-9);
    CHECK(std::abs(cost_savings({yr("a", 1, true, true, 1.0, 70)}, p) - 98620.0) < 1e-9);
}

TEST_CASE("cost savings decompose per patient") {
    const CostParams p;
    const auto rs = random_records(5, 60, 4);
    double sum = 0.0;
    for (const auto& r : rs) sum += record_savings(r, p);
    CHECK(std::abs(sum - cost_savings(rs, p)) <= 1e-9 * std::max(1.0, std::abs(sum)));
}

TEST_CASE("bootstrap") {
    const auto rs = random_records(7, 80, 3);
    const auto constant = bootstrap([](const std::vector<YearRecord>&) { return 4.0; }, rs, 50, 1);
    CHECK(constant.sd == 0.0);
    CHECK(constant.mean == 4.0);

    const Metric prevented = [](const std::vector<YearRecord>& r) { return prevented_onsets(r, 3); };
    const auto a = bootstrap(prevented, rs, 100, 9);
    const auto b = bootstrap(prevented, rs, 100, 9);
    CHECK(a.sd > 0.0);
    CHECK(a.mean == b.mean);
    CHECK(a.sd == b.sd);
    CHECK(std::abs(a.mean - prevented(rs)) <= 3.0 * a.sd / std::sqrt(100.0));

    // Whole patients are resampled: per-replicate record counts are multiples of 3.
    std::size_t seen = 0;
    bootstrap([&](const std::vector<YearRecord>& r) { seen = r.size(); CHECK(r.size() % 3 == 0); return 0.0; }, rs, 5, 2);
    CHECK(seen == rs.size());
    CHECK_THROWS_AS(bootstrap(prevented, {}, 10, 1), DataError);
    CHECK_THROWS_AS(bootstrap(prevented, rs, 1, 1), ConfigError);
}

TEST_CASE("population extrapolation") {
    CHECK(extrapolate_population(12.50, 88e6) == doctest::Approx(1.1e9).epsilon(1e-12));
    CHECK(std::abs(extrapolate_population(10.38, 88e6) - 9.13e8) / 9.13e8 < 1e-3);
    CHECK(extrapolate_population(0.0, 1e9) == 0.0);
    CHECK_THROWS_AS(extrapolate_population(-1.0, 10), DataError);
}

TEST_CASE("cost parameter validation") {
    CostParams p;
    p.min_extra_years = 11;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = CostParams{};
    p.c_prevent = -1;
    CHECK_THROWS_AS(validate(p), ConfigError);
}

}
