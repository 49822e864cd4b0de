#pragma once

// Small data generators shared by the unit tests and the acceptance runner.

#include "prevcare/core.hpp"

#include <bit>
#include <functional>

namespace prevcare::testing {

struct EffectSample {
    Matrix X;
    Vector y;
    Vector t;
    Vector tau;  // true risk reduction per row
};

/// Randomized binary-outcome trial: P(y=1 | x, t=0) = 0.55 + 0.1 tanh(x0), P(y=1 | x, t=1) = that
/// minus tau(x). Five standard-normal features.
inline EffectSample randomized_trial(int n, const std::function<double(const Vector&)>& tau, std::uint64_t seed,
                                     int n_features = 5) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EffectSample s{Matrix(n, n_features), Vector(n), Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n_features; ++j) s.X(i, j) = z(rng);
        const Vector x = s.X.row(i).transpose();
        s.tau(i) = tau(x);
        s.t(i) = u(rng) < 0.5 ? 1.0 : 0.0;
        const double base = 0.55 + 0.1 * std::tanh(x(0));
        const double p = s.t(i) > 0.5 ? base - s.tau(i) : base;
        s.y(i) = u(rng) < p ? 1.0 : 0.0;
    }
    return s;
}

/// Calls f(mask) for every subset of {0..n-1} with at most k members.
template <typename F>
void for_each_subset(int n, int k, F&& f) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) <= k) f(mask);
    }
}

/// Expected onsets of treating `mask`: sum over treated (1-g)h plus untreated h.
inline double expected_onsets(const Vector& h, const Vector& g, unsigned mask) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) total += (mask >> i & 1u) ? (1.0 - g(i)) * h(i) : h(i);
    return total;
}

/// Expected payer cost of treating `mask` for one year.
inline double expected_cost(const Vector& h, const Vector& g, double c_diab, double c_prevent, unsigned mask) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        total += (mask >> i & 1u) ? c_diab * (1.0 - g(i)) * h(i) + c_prevent : c_diab * h(i);
    }
    return total;
}

struct Regression {
    Vector y;
    Vector d;
    Matrix X;  // observed covariates, benchmark in column 0
};

// y = tau d + x0 + 0.5 x1 + s z + e,  d = 0.6 x0 + 0.6 s z + u. The confounder z is omitted; with
// strength s <= 1 it is no stronger than the benchmark x0.
inline Regression omitted_confounder(int n, double tau, std::uint64_t seed, double strength = 1.0) {
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Regression r{Vector(n), Vector(n), Matrix(n, 2)};
    for (int i = 0; i < n; ++i) {
        const double x0 = g(rng), x1 = g(rng), z = g(rng);
        r.X(i, 0) = x0;
        r.X(i, 1) = x1;
        r.d(i) = 0.6 * x0 + 0.6 * strength * z + g(rng);
        r.y(i) = tau * r.d(i) + x0 + 0.5 * x1 + strength * z + g(rng);
    }
    return r;
}

}  // namespace prevcare::testing
