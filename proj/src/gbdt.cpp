#include "prevcare/gbdt.hpp"

#include <algorithm>
#include <numeric>

namespace prevcare {

Vector class_weights(const Vector& y, ClassWeight mode) {
    const auto n = y.size();
    Vector w = Vector::Ones(n);
    if (mode == ClassWeight::balanced && n > 0) {
        const double pos = y.sum();
        const double neg = static_cast<double>(n) - pos;
        if (pos > 0.0 && neg > 0.0) {
            const double wp = static_cast<double>(n) / (2.0 * pos);
            const double wn = static_cast<double>(n) / (2.0 * neg);
            for (Eigen::Index i = 0; i < n; ++i) w(i) = y(i) > 0.5 ? wp : wn;
        }
    }
    return w;
}

double GbdtModel::raw_score(const Eigen::Ref<const Vector>& x) const {
    if (static_cast<std::size_t>(x.size()) != n_features) {
        throw DataError("gbdt: expected " + std::to_string(n_features) + " features, got " +
                        std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return base_score + params.learning_rate * sum;
}

double GbdtModel::predict_proba(const Eigen::Ref<const Vector>& x) const {
    return sigmoid(std::clamp(raw_score(x), -30.0, 30.0));
}

namespace {

double soft_threshold(double g, double l1) {
    if (g > l1) return g - l1;
    if (g < -l1) return g + l1;
    return 0.0;
}

struct Leaf {
    int node = 0;
    int begin = 0;
    int end = 0;
    int depth = 0;
    double G = 0.0;
    double H = 0.0;
    // best split
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    int n_left = 0;
};

class TreeGrower {
public:
    TreeGrower(const Matrix& X, const GbdtParams& p, const Vector& g, const Vector& h,
               std::vector<int>& order, int m)
        : X_(X), p_(p), g_(g), h_(h), order_(order), m_(m), d_(static_cast<int>(X.cols())),
          goes_left_(static_cast<std::size_t>(X.rows()), 0), buffer_(static_cast<std::size_t>(m)) {}

    Tree grow() {
        Tree tree;
        Leaf root;
        root.end = m_;
        for (int pos = 0; pos < m_; ++pos) {
            const int i = order_[static_cast<std::size_t>(pos)];
            root.G += g_(i);
            root.H += h_(i);
        }
        tree.nodes.push_back({});
        tree.nodes[0].weight = m_;
        find_split(root);
        std::vector<Leaf> leaves{root};

        while (static_cast<int>(leaves.size()) < p_.n_leaves) {
            auto best = std::max_element(leaves.begin(), leaves.end(),
                                         [](const Leaf& a, const Leaf& b) { return a.gain < b.gain; });
            if (best->feature < 0 || best->gain <= 1e-12) break;
            Leaf parent = *best;
            leaves.erase(best);

            const int split_at = parent.begin + parent.n_left;
            const std::size_t fbase = static_cast<std::size_t>(parent.feature) * m_;
            for (int pos = parent.begin; pos < parent.end; ++pos) {
                goes_left_[order_[fbase + pos]] = pos < split_at ? 1 : 0;
            }
            for (int f = 0; f < d_; ++f) {
                if (f != parent.feature) partition(static_cast<std::size_t>(f) * m_, parent.begin, parent.end);
            }
            Leaf left;
            Leaf right;
            left.begin = parent.begin;
            left.end = split_at;
            right.begin = split_at;
            right.end = parent.end;
            left.depth = right.depth = parent.depth + 1;
            for (int pos = left.begin; pos < left.end; ++pos) {
                const int i = order_[fbase + pos];
                left.G += g_(i);
                left.H += h_(i);
            }
            right.G = parent.G - left.G;
            right.H = parent.H - left.H;

            left.node = static_cast<int>(tree.nodes.size());
            right.node = left.node + 1;
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            tree.nodes[left.node].weight = left.end - left.begin;
            tree.nodes[right.node].weight = right.end - right.begin;
            auto& pn = tree.nodes[parent.node];
            pn.feature = parent.feature;
            pn.threshold = parent.threshold;
            pn.left = left.node;
            pn.right = right.node;

            find_split(left);
            find_split(right);
            leaves.push_back(left);
            leaves.push_back(right);
        }
        for (const auto& leaf : leaves) {
            tree.nodes[leaf.node].value = -soft_threshold(leaf.G, p_.lambda_l1) / (leaf.H + p_.lambda_l2);
        }
        return tree;
    }

private:
    double score(double G, double H) const {
        const double t = soft_threshold(G, p_.lambda_l1);
        return t * t / (H + p_.lambda_l2);
    }

    void find_split(Leaf& leaf) const {
        leaf.feature = -1;
        leaf.gain = 0.0;
        const int count = leaf.end - leaf.begin;
        if (count < 2 * p_.min_child_samples) return;
        if (p_.max_depth >= 0 && leaf.depth >= p_.max_depth) return;
        const double parent = score(leaf.G, leaf.H);
        for (int f = 0; f < d_; ++f) {
            const std::size_t base = static_cast<std::size_t>(f) * m_;
            double GL = 0.0;
            double HL = 0.0;
            for (int pos = leaf.begin; pos + 1 < leaf.end; ++pos) {
                const int i = order_[base + pos];
                GL += g_(i);
                HL += h_(i);
                const int n_left = pos - leaf.begin + 1;
                if (n_left < p_.min_child_samples) continue;
                if (count - n_left < p_.min_child_samples) break;
                const double xv = X_(i, f);
                const double xn = X_(order_[base + pos + 1], f);
                if (!(xv < xn)) continue;
                const double gain = score(GL, HL) + score(leaf.G - GL, leaf.H - HL) - parent;
                if (gain > leaf.gain) {
                    leaf.gain = gain;
                    leaf.feature = f;
                    leaf.threshold = 0.5 * (xv + xn);
                    leaf.n_left = n_left;
                }
            }
        }
    }

    void partition(std::size_t base, int begin, int end) {
        int write = begin;
        int spill = 0;
        for (int pos = begin; pos < end; ++pos) {
            const int i = order_[base + pos];
            if (goes_left_[i]) {
                order_[base + write++] = i;
            } else {
                buffer_[spill++] = i;
            }
        }
        std::copy(buffer_.begin(), buffer_.begin() + spill, order_.begin() + base + write);
    }

    const Matrix& X_;
    const GbdtParams& p_;
    const Vector& g_;
    const Vector& h_;
    std::vector<int>& order_;
    int m_;
    int d_;
    std::vector<char> goes_left_;
    std::vector<int> buffer_;
};

double weighted_loss(const Vector& raw, const Vector& y, const Vector& w) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        // log(1 + e^z) - y z, evaluated stably
        const double z = raw(i);
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        total += w(i) * (softplus - y(i) * z);
    }
    return total / w.sum();
}

}  // namespace

GbdtModel fit_gbdt(const Matrix& X, const Vector& y, const GbdtParams& params, std::uint64_t seed) {
    const auto n = X.rows();
    const auto d = X.cols();
    if (y.size() != n) {
        throw DataError("fit_gbdt: X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
    }
    if (n < std::max(1, params.min_child_samples)) {
        throw DataError("fit_gbdt: need at least min_child_samples rows");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw DataError("fit_gbdt: non-finite inputs");
    }
    const double positives = y.sum();
    if (positives <= 0.0 || positives >= static_cast<double>(n)) {
        throw DataError("fit_gbdt: labels are all identical; use a prior-only model instead");
    }
    if (params.n_trees < 0 || params.n_leaves < 2 || params.learning_rate <= 0.0) {
        throw ConfigError("fit_gbdt: invalid parameters");
    }

    GbdtModel model;
    model.params = params;
    model.n_features = static_cast<std::size_t>(d);
    model.seed = seed;
    const Vector w = class_weights(y, params.class_weight);
    const double wpos = w.dot(y);
    const double wneg = w.sum() - wpos;
    model.base_score = std::log(wpos / wneg);

    std::vector<int> presorted(static_cast<std::size_t>(n * d));
    for (Eigen::Index f = 0; f < d; ++f) {
        auto first = presorted.begin() + f * n;
        std::iota(first, first + n, 0);
        std::stable_sort(first, first + n, [&](int a, int b) { return X(a, f) < X(b, f); });
    }

    Vector raw = Vector::Constant(n, model.base_score);
    double loss = weighted_loss(raw, y, w);
    model.train_loss.push_back(loss);
    Vector g(n);
    Vector h(n);
    std::vector<int> order;
    std::vector<char> member;

    for (int t = 0; t < params.n_trees; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(raw(i));
            g(i) = w(i) * (p - y(i));
            h(i) = std::max(w(i) * p * (1.0 - p), 1e-16);
        }
        int m = static_cast<int>(n);
        if (params.bin_sample_cap > 0 && static_cast<std::size_t>(n) > params.bin_sample_cap) {
            m = static_cast<int>(params.bin_sample_cap);
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
            std::vector<int> all(static_cast<std::size_t>(n));
            std::iota(all.begin(), all.end(), 0);
            std::shuffle(all.begin(), all.end(), rng);
            member.assign(static_cast<std::size_t>(n), 0);
            for (int k = 0; k < m; ++k) member[all[k]] = 1;
            order.clear();
            order.reserve(static_cast<std::size_t>(m) * d);
            for (Eigen::Index f = 0; f < d; ++f) {
                for (Eigen::Index pos = 0; pos < n; ++pos) {
                    const int i = presorted[f * n + pos];
                    if (member[i]) order.push_back(i);
                }
            }
        } else {
            order = presorted;
        }
        TreeGrower grower(X, params, g, h, order, m);
        Tree tree = grower.grow();

        // Backtrack on the shrinkage factor so the training loss never increases.
        Vector step(n);
        for (Eigen::Index i = 0; i < n; ++i) step(i) = params.learning_rate * tree.predict(X.row(i).transpose());
        double factor = 1.0;
        double next_loss = weighted_loss(raw + step, y, w);
        int halvings = 0;
        while (next_loss > loss && halvings < 40) {
            factor *= 0.5;
            ++halvings;
            next_loss = weighted_loss(raw + factor * step, y, w);
        }
        if (next_loss > loss) {
            factor = 0.0;
            next_loss = loss;
        }
        if (factor != 1.0) {
            for (auto& node : tree.nodes) node.value *= factor;
        }
        raw += factor * step;
        loss = next_loss;
        model.train_loss.push_back(loss);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace prevcare
