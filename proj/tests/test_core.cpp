#include "prevcare/core.hpp"

#include <doctest.h>

#include <set>

using namespace prevcare;

namespace {

// Counts concordant pairs directly.
double pair_count_auc(const Vector& s, const Vector& y) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (y(i) < 0.5) continue;
        for (Eigen::Index j = 0; j < s.size(); ++j) {
            if (y(j) > 0.5) continue;
            den += 1.0;
            if (s(i) > s(j)) num += 1.0;
            else if (s(i) == s(j)) num += 0.5;
        }
    }
    return num / den;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("auc matches pair counting, ties included") {
    Rng rng(5);
    std::uniform_int_distribution<int> level(0, 6);
    std::bernoulli_distribution coin(0.4);
    for (int rep = 0; rep < 20; ++rep) {
        Vector s(60), y(60);
        for (int i = 0; i < 60; ++i) {
            s(i) = level(rng);
            y(i) = coin(rng) ? 1.0 : 0.0;
        }
        y(0) = 1.0;
        y(1) = 0.0;
        CHECK(roc_auc(s, y) == doctest::Approx(pair_count_auc(s, y)).epsilon(1e-12));
    }
}

TEST_CASE("auc needs both classes") {
    Vector s = Vector::LinSpaced(4, 0, 1);
    CHECK_THROWS_AS(roc_auc(s, Vector::Ones(4)), DataError);
}

TEST_CASE("derived seeds differ per stream and are stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(42, s));
    CHECK(seen.size() == 50);
    CHECK(derive_seed(42, 3) == derive_seed(42, 3));
    CHECK(derive_seed(42, 3, 1) == derive_seed(derive_seed(42, 3), 1));
}

TEST_CASE("sigmoid and logit invert each other, no overflow at extremes") {
    for (double z : {-30.0, -2.5, 0.0, 1.0, 12.0}) {
        CHECK(logit(sigmoid(z)) == doctest::Approx(z).epsilon(1e-9));
    }
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(log_loss(0.0, 1.0) < 40.0);
}

}
