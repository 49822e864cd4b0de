#include "prevcare/linear.hpp"

#include <algorithm>

namespace prevcare {

double LinearModel::raw_score(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != weights.size()) {
        throw DataError("linear: expected " + std::to_string(weights.size()) + " features, got " +
                        std::to_string(x.size()));
    }
    return intercept + weights.dot(((x - center).array() / scale.array()).matrix());
}

double LinearModel::predict_proba(const Eigen::Ref<const Vector>& x) const {
    return sigmoid(std::clamp(raw_score(x), -30.0, 30.0));
}

Vector LinearModel::original_weights() const {
    return (weights.array() / scale.array()).matrix();
}

double LinearModel::original_intercept() const {
    return intercept - original_weights().dot(center);
}

namespace {

// Per-row loss derivatives at linear predictor eta.
struct Derivs {
    Vector grad;  // dl/deta
    Vector curv;  // d2l/deta2
};

Derivs derivatives(const Vector& eta, const Vector& y, LinearLoss loss) {
    Derivs d{Vector(eta.size()), Vector(eta.size())};
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (loss == LinearLoss::logistic) {
            const double p = sigmoid(eta(i));
            d.grad(i) = p - y(i);
            d.curv(i) = std::max(p * (1.0 - p), 1e-12);
        } else {
            d.grad(i) = eta(i) - y(i);
            d.curv(i) = 1.0;
        }
    }
    return d;
}

double row_loss(double eta, double y, LinearLoss loss) {
    if (loss == LinearLoss::squared) return 0.5 * (eta - y) * (eta - y);
    const double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    return softplus - y * eta;
}

double penalty_value(const Vector& w, const LinearParams& p) {
    return p.penalty == Penalty::l2 ? 0.5 * p.alpha * w.squaredNorm() : p.alpha * w.lpNorm<1>();
}

// Largest violation of the first-order optimality conditions.
double violation(const Vector& gw, double gb, const Vector& w, const LinearParams& p) {
    double v = p.fit_intercept ? std::abs(gb) : 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        double vj;
        if (p.penalty == Penalty::l2) {
            vj = std::abs(gw(j) + p.alpha * w(j));
        } else if (w(j) != 0.0) {
            vj = std::abs(gw(j) + p.alpha * (w(j) > 0 ? 1.0 : -1.0));
        } else {
            vj = std::max(0.0, std::abs(gw(j)) - p.alpha);
        }
        v = std::max(v, vj);
    }
    return v;
}

double soft(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

double linear_objective(const Matrix& Z, const Vector& y, const Vector& sw, const LinearParams& p,
                        const Vector& w, double b) {
    const Vector eta = (Z * w).array() + b;
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) total += sw(i) * row_loss(eta(i), y(i), p.loss);
    return total / sw.sum() + penalty_value(w, p);
}

LinearModel fit_linear(const Matrix& X, const Vector& y, const LinearParams& params, std::uint64_t,
                       const Vector& sample_weight) {
    if (!(params.alpha > 0.0)) throw ConfigError("fit_linear: alpha must be > 0");
    if (X.rows() != y.size()) throw DataError("fit_linear: X and y row counts differ");
    if (X.rows() == 0) throw DataError("fit_linear: no rows");
    if (!X.allFinite() || !y.allFinite()) throw DataError("fit_linear: non-finite inputs");
    const auto n = X.rows();
    const auto d = X.cols();
    Vector sw = sample_weight.size() == 0 ? Vector::Ones(n) : sample_weight;
    if (sw.size() != n || (sw.array() < 0.0).any() || sw.sum() <= 0.0) {
        throw DataError("fit_linear: invalid sample weights");
    }
    const double wsum = sw.sum();

    LinearModel m;
    m.params = params;
    m.center = Vector::Zero(d);
    m.scale = Vector::Ones(d);
    if (params.standardize) {
        m.center = (X.transpose() * sw) / wsum;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double var = (sw.array() * (X.col(j).array() - m.center(j)).square()).sum() / wsum;
            m.scale(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
    }
    const Matrix Z = (X.rowwise() - m.center.transpose()).array().rowwise() / m.scale.transpose().array();
    Vector w = Vector::Zero(d);
    double b = 0.0;
    if (params.fit_intercept) {
        const double ybar = sw.dot(y) / wsum;
        if (params.loss == LinearLoss::squared) {
            b = ybar;
        } else if (ybar > 0.0 && ybar < 1.0) {
            b = logit(ybar);
        }
    }
    const Vector nw = sw / wsum;  // normalized row weights

    double obj = linear_objective(Z, y, sw, params, w, b);
    for (int it = 0; it < params.max_iter; ++it) {
        const Vector eta = (Z * w).array() + b;
        const Derivs dv = derivatives(eta, y, params.loss);
        const Vector r = nw.cwiseProduct(dv.grad);
        const Vector gw = Z.transpose() * r;
        const double gb = r.sum();
        m.final_violation = violation(gw, gb, w, params);
        m.iterations = it;
        if (m.final_violation < params.tol) break;

        const Vector s = nw.cwiseProduct(dv.curv);
        Vector w_new = w;
        double b_new = b;
        if (params.penalty == Penalty::l2) {
            // Full Newton step on [w; b].
            const Eigen::Index k = d + (params.fit_intercept ? 1 : 0);
            Matrix H = Matrix::Zero(k, k);
            Vector g(k);
            H.topLeftCorner(d, d) = Z.transpose() * s.asDiagonal() * Z;
            H.topLeftCorner(d, d).diagonal().array() += params.alpha;
            g.head(d) = gw + params.alpha * w;
            if (params.fit_intercept) {
                const Vector zs = Z.transpose() * s;
                H.block(0, d, d, 1) = zs;
                H.block(d, 0, 1, d) = zs.transpose();
                H(d, d) = s.sum();
                g(d) = gb;
            }
            const Vector step = H.ldlt().solve(g);
            w_new = w - step.head(d);
            if (params.fit_intercept) b_new = b - step(d);
        } else {
            // Coordinate descent on the local quadratic model (proximal Newton).
            Vector resid = Vector::Zero(n);  // change in eta relative to current point
            Vector colnorm(d);
            for (Eigen::Index j = 0; j < d; ++j) colnorm(j) = s.dot(Z.col(j).cwiseAbs2());
            for (int sweep = 0; sweep < 100; ++sweep) {
                double max_delta = 0.0;
                if (params.fit_intercept) {
                    const double gq = r.sum() + s.dot(resid);
                    const double delta = -gq / s.sum();
                    b_new += delta;
                    resid.array() += delta;
                    max_delta = std::max(max_delta, std::abs(delta));
                }
                for (Eigen::Index j = 0; j < d; ++j) {
                    if (colnorm(j) <= 0.0) continue;
                    const double gq = Z.col(j).dot(r + s.cwiseProduct(resid));
                    const double target = soft(colnorm(j) * w_new(j) - gq, params.alpha) / colnorm(j);
                    const double delta = target - w_new(j);
                    if (delta != 0.0) {
                        w_new(j) = target;
                        resid += delta * Z.col(j);
                        max_delta = std::max(max_delta, std::abs(delta));
                    }
                }
                if (max_delta < 1e-10) break;
            }
        }
        // Backtracking on the full objective.
        double t = 1.0;
        Vector w_try = w_new;
        double b_try = b_new;
        double obj_try = linear_objective(Z, y, sw, params, w_try, b_try);
        for (int ls = 0; ls < 50 && obj_try > obj + 1e-15 * std::abs(obj); ++ls) {
            t *= 0.5;
            w_try = w + t * (w_new - w);
            b_try = b + t * (b_new - b);
            obj_try = linear_objective(Z, y, sw, params, w_try, b_try);
        }
        if (obj_try > obj + 1e-15 * std::abs(obj)) break;
        w = w_try;
        b = b_try;
        obj = obj_try;
    }
    m.weights = w;
    m.intercept = b;
    return m;
}

}  // namespace prevcare
