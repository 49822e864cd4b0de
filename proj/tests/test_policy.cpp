#include "prevcare/policy.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace prevcare;
namespace pt = prevcare::testing;

namespace {

FraminghamInputs healthy() {
    FraminghamInputs in;
    in.fasting_glucose_mgdl = 90;
    in.bmi = 22;
    in.hdl_mgdl = 60;
    in.triglycerides_mgdl = 100;
    in.systolic = 115;
    in.diastolic = 75;
    return in;
}

struct Instance {
    Vector h;
    Vector g;
    ScoreMap hm;
    ScoreMap gm;
    std::vector<PatientId> ids;
};

Instance random_instance(Rng& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance in{Vector(n), Vector(n), {}, {}, {}};
    for (int i = 0; i < n; ++i) {
        in.h(i) = u(rng);
        in.g(i) = u(rng);
        const PatientId id = "p" + std::to_string(10 + i);
        in.ids.push_back(id);
        in.hm[id] = in.h(i);
        in.gm[id] = in.g(i);
    }
    return in;
}

unsigned mask_of(const Instance& in, const std::vector<PatientId>& chosen) {
    unsigned m = 0;
    for (const auto& id : chosen) {
        const auto pos = std::find(in.ids.begin(), in.ids.end(), id) - in.ids.begin();
        m |= 1u << pos;
    }
    return m;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("clinical score: worked example and toggles") {
    FraminghamInputs in;
    in.fasting_glucose_mgdl = 110;
    in.bmi = 31;
    in.hdl_mgdl = 55;
    in.female = true;
    in.parental_history = true;
    in.triglycerides_mgdl = 160;
    in.systolic = 135;
    in.diastolic = 80;
    CHECK(framingham_score(in) == 23);

    CHECK(framingham_score(healthy()) == 0);
    auto bmi27 = healthy();
    bmi27.bmi = 27;
    CHECK(framingham_score(bmi27) == 2);

    struct Toggle {
        const char* name;
        void (*apply)(FraminghamInputs&);
        int points;
    };
    const Toggle toggles[] = {
        {"glucose", [](FraminghamInputs& x) { x.fasting_glucose_mgdl = 100; }, 10},
        {"overweight", [](FraminghamInputs& x) { x.bmi = 25.0; }, 2},
        {"obese", [](FraminghamInputs& x) { x.bmi = 30.0; }, 5},
        {"low hdl male", [](FraminghamInputs& x) { x.hdl_mgdl = 39; }, 5},
        {"low hdl female", [](FraminghamInputs& x) { x.female = true; x.hdl_mgdl = 49; }, 5},
        {"parents", [](FraminghamInputs& x) { x.parental_history = true; }, 3},
        {"triglycerides", [](FraminghamInputs& x) { x.triglycerides_mgdl = 150; }, 3},
        {"systolic", [](FraminghamInputs& x) { x.systolic = 130; }, 2},
        {"diastolic", [](FraminghamInputs& x) { x.diastolic = 85; }, 2},
        {"bp treatment", [](FraminghamInputs& x) { x.on_bp_treatment = true; }, 2},
    };
    for (const auto& t : toggles) {
        auto x = healthy();
        t.apply(x);
        CAPTURE(t.name);
        CHECK(framingham_score(x) == t.points);
    }
    auto edge = healthy();
    edge.fasting_glucose_mgdl = 126;
    CHECK(framingham_score(edge) == 0);
    edge = healthy();
    edge.female = true;
    edge.hdl_mgdl = 45;
    CHECK(framingham_score(edge) == 5);
}

TEST_CASE("clinical score stays within 0..30") {
    Rng rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int max_seen = 0;
    for (int i = 0; i < 2000; ++i) {
        FraminghamInputs x;
        x.fasting_glucose_mgdl = 80 + 60 * u(rng);
        x.bmi = 18 + 20 * u(rng);
        x.hdl_mgdl = 30 + 40 * u(rng);
        x.female = u(rng) < 0.5;
        x.parental_history = u(rng) < 0.5;
        x.triglycerides_mgdl = 80 + 150 * u(rng);
        x.systolic = 100 + 50 * u(rng);
        x.diastolic = 60 + 40 * u(rng);
        x.on_bp_treatment = u(rng) < 0.3;
        const int s = framingham_score(x);
        CHECK(s >= 0);
        CHECK(s <= 30);
        max_seen = std::max(max_seen, s);
    }
    CHECK(max_seen <= 30);
}

TEST_CASE("threshold policy picks the highest scores") {
    const ScoreMap s{{"A", 23}, {"B", 5}, {"C", 10}};
    auto sel = threshold_policy(s, 2, 1);
    std::set<PatientId> got(sel.chosen.begin(), sel.chosen.end());
    CHECK(got == std::set<PatientId>{"A", "C"});
    CHECK(sel.cutoff == 10);
    CHECK(threshold_policy(s, 0, 1).chosen.empty());

    const ScoreMap flat{{"A", 1}, {"B", 1}, {"C", 1}, {"D", 1}};
    CHECK(threshold_policy(flat, 1, 5).chosen == threshold_policy(flat, 1, 5).chosen);
    std::set<PatientId> picks;
    for (std::uint64_t seed = 0; seed < 40; ++seed) picks.insert(threshold_policy(flat, 1, seed).chosen.front());
    CHECK(picks.size() > 1);

    const auto over = threshold_policy(s, 5, 1);
    CHECK(over.chosen.size() == 3);
    CHECK_FALSE(over.warning.empty());
    CHECK_THROWS_AS(threshold_policy(s, -1, 1), ConfigError);
}

TEST_CASE("select_topk: worked example") {
    const ScoreMap h{{"A", 0.9}, {"B", 0.5}, {"C", 0.2}};
    const ScoreMap g{{"A", 0.1}, {"B", 0.5}, {"C", 0.9}};
    CHECK(select_topk(h, g, 1, 3).chosen == std::vector<PatientId>{"B"});
    CHECK(select_topk(h, g, 3, 3).chosen.size() == 3);

    Vector hv(3), gv(3);
    hv << 0.9, 0.5, 0.2;
    gv << 0.1, 0.5, 0.9;
    const auto bf = brute_force_allocation(hv, gv, 1);
    CHECK(bf.chosen == std::vector<std::size_t>{1});
    CHECK(bf.objective == doctest::Approx(1.35).epsilon(1e-14));
    CHECK(brute_force_allocation(hv, gv, 0).objective == doctest::Approx(hv.sum()));
    CHECK_THROWS_AS(brute_force_allocation(Vector::Zero(21), Vector::Zero(21), 2), DataError);
    CHECK_THROWS_AS(select_topk(h, ScoreMap{{"A", 0.1}, {"B", 0.5}, {"D", 0.9}}, 1, 1), DataError);
}

TEST_CASE("select_topk objective equals enumeration on random instances") {
    Rng rng(99);
    std::uniform_int_distribution<int> size(1, 12);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = size(rng);
        const int k = std::uniform_int_distribution<int>(0, std::min(4, n))(rng);
        const Instance in = random_instance(rng, n);
        const unsigned picked = mask_of(in, select_topk(in.hm, in.gm, k, rep).chosen);
        double best = 1e300;
        pt::for_each_subset(n, k, [&](unsigned m) { best = std::min(best, pt::expected_onsets(in.h, in.g, m)); });
        CHECK(std::abs(pt::expected_onsets(in.h, in.g, picked) - best) <= 1e-12);
        CHECK(std::abs(brute_force_allocation(in.h, in.g, k).objective - best) <= 1e-12);

        // Every chosen reduction dominates every excluded one.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if ((picked >> i & 1u) && !(picked >> j & 1u)) CHECK(in.g(i) * in.h(i) >= in.g(j) * in.h(j));
            }
        }
    }
}

TEST_CASE("scaling all reductions keeps the selection") {
    Rng rng(4);
    for (int rep = 0; rep < 30; ++rep) {
        Instance in = random_instance(rng, 10);
        ScoreMap scaled = in.gm;
        for (auto& [id, v] : scaled) v *= 0.37;
        const auto a = select_topk(in.hm, in.gm, 3, 8).chosen;
        const auto b = select_topk(in.hm, scaled, 3, 8).chosen;
        CHECK(std::set<PatientId>(a.begin(), a.end()) == std::set<PatientId>(b.begin(), b.end()));
    }
}

TEST_CASE("constant gamma reduces to risk ordering") {
    Rng rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        Instance in = random_instance(rng, 10);
        for (auto& [id, v] : in.gm) v = 0.4;
        const auto a = select_topk(in.hm, in.gm, 4, 2).chosen;
        const auto b = risk_only_policy(in.hm, 4, 2).chosen;
        CHECK(std::set<PatientId>(a.begin(), a.end()) == std::set<PatientId>(b.begin(), b.end()));

        // Sort oracle.
        std::vector<std::pair<double, PatientId>> order;
        for (const auto& [id, h] : in.hm) order.push_back({h, id});
        std::sort(order.rbegin(), order.rend());
        std::set<PatientId> expected;
        for (int i = 0; i < 4; ++i) expected.insert(order[i].second);
        CHECK(std::set<PatientId>(b.begin(), b.end()) == expected);
    }
}

TEST_CASE("random policy") {
    const std::vector<PatientId> pool{"a", "b", "c", "d", "e"};
    CHECK(random_policy(pool, 5, 1).chosen.size() == 5);
    CHECK(random_policy(pool, 9, 1).chosen.size() == 5);
    CHECK(random_policy(pool, 0, 1).chosen.empty());
    CHECK(random_policy(pool, 2, 7).chosen == random_policy(pool, 2, 7).chosen);
    const auto sel = random_policy(pool, 3, 11).chosen;
    CHECK(std::set<PatientId>(sel.begin(), sel.end()).size() == 3);
}

TEST_CASE("onset-minimizing set minimizes cost when prevention pays") {
    Rng rng(6);
    std::uniform_real_distribution<double> cost(20000, 200000);
    int checked = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 1 + rep % 12;
        const int k = rep % 5;
        const Instance in = random_instance(rng, n);
        const double c_diab = cost(rng);
        bool premise = true;
        for (int i = 0; i < n; ++i) premise = premise && c_diab * in.g(i) * in.h(i) >= 1380.0;
        if (!premise) continue;
        ++checked;
        const unsigned picked = mask_of(in, select_topk(in.hm, in.gm, k, 1).chosen);
        double best = 1e300;
        pt::for_each_subset(n, k, [&](unsigned m) { best = std::min(best, pt::expected_cost(in.h, in.g, c_diab, 1380.0, m)); });
        CHECK(pt::expected_cost(in.h, in.g, c_diab, 1380.0, picked) <= best + 1e-9 * best);
    }
    CHECK(checked > 10);
}

}
