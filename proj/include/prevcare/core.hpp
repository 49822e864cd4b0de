#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace prevcare {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexVector = Eigen::VectorXi;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Rng = std::mt19937_64;

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written or parsed (exit code 3).
class IoError : public Error {
public:
    using Error::Error;
};

/// Input data violates a precondition of an operation.
class DataError : public Error {
public:
    using Error::Error;
};

/// Not enough historical data to fit a model (exit code 4).
class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub) {
    return derive_seed(derive_seed(seed, stream), sub);
}

template <typename T>
T sigmoid(T z) {
    if (z >= T(0)) {
        return T(1) / (T(1) + std::exp(-z));
    }
    const T e = std::exp(z);
    return e / (T(1) + e);
}

template <typename T>
T logit(T p) {
    return std::log(p) - std::log1p(-p);
}

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
    return z.unaryExpr([](typename Derived::Scalar v) { return sigmoid(v); });
}

/// Binary cross-entropy of probability `p` for label `y`, clamped away from log(0).
template <typename T>
T log_loss(T p, T y) {
    constexpr T eps = T(1e-15);
    p = std::min(std::max(p, eps), T(1) - eps);
    return -(y * std::log(p) + (T(1) - y) * std::log1p(-p));
}

/// Mean binary cross-entropy over two aligned vectors.
template <typename DerivedP, typename DerivedY>
typename DerivedP::Scalar mean_log_loss(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedY>& y) {
    using T = typename DerivedP::Scalar;
    T total = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        total += log_loss<T>(p(i), static_cast<T>(y(i)));
    }
    return p.size() > 0 ? total / static_cast<T>(p.size()) : T(0);
}

template <typename T>
T clamp01(T v) {
    return std::min(std::max(v, T(0)), T(1));
}

/// Standard normal CDF.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Area under the ROC curve (Mann-Whitney, ties counted one half).
double roc_auc(const Vector& scores, const Vector& labels);

}  // namespace prevcare
