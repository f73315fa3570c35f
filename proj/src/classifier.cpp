#include "leafid/classifier.hpp"

#include "leafid/error.hpp"
#include "leafid/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

namespace leafid {

void SvmConfig::validate() const {
    if (!(C > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    if (!(kkt_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "kkt_tolerance must be positive");
    if (max_passes < 0) throw Error(ErrorCode::InvalidArgument, "max_passes must be >= 0");
}

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
    if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in length");
    double d2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

std::vector<double> balanced_weights(std::span<const int> labels, int num_classes) {
    std::vector<std::size_t> counts(num_classes, 0);
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw Error(ErrorCode::InvalidArgument, "label out of range");
        ++counts[l];
    }
    std::vector<double> w(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        if (counts[c] == 0) throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no samples");
        w[c] = static_cast<double>(labels.size()) / (static_cast<double>(num_classes) * counts[c]);
    }
    return w;
}

namespace {

std::span<const double> row_span(const Matrix& m, Eigen::Index r, std::vector<double>& buf) {
    buf.resize(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) buf[c] = m(r, c);
    return buf;
}

// Kernel rows over the training set: the whole Gram matrix when it fits the
// budget, otherwise an LRU cache of rows.
class KernelRows {
public:
    KernelRows(const Matrix& x, double gamma, std::size_t budget_bytes)
        : x_(x.transpose()), gamma_(gamma), n_(x.rows()), norms_(x_.colwise().squaredNorm().transpose()) {
        const std::size_t row_bytes = sizeof(double) * static_cast<std::size_t>(n_);
        capacity_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(row_bytes, 1));
        if (capacity_ >= static_cast<std::size_t>(n_)) {
            full_.resize(n_, n_);
            for (Eigen::Index i = 0; i < n_; ++i) compute(i, full_.col(i).data());
        }
    }

    // The returned pointer stays valid until two further distinct rows are requested.
    const double* row(Eigen::Index i) {
        if (full_.size()) return full_.col(i).data();
        if (auto it = index_.find(i); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second.data();
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        lru_.emplace_front(i, std::vector<double>(n_));
        compute(i, lru_.front().second.data());
        index_[i] = lru_.begin();
        return lru_.front().second.data();
    }

    double diag(Eigen::Index) const { return 1.0; }

private:
    void compute(Eigen::Index i, double* out) const {
        for (Eigen::Index j = 0; j < n_; ++j) {
            const double d2 = std::max(0.0, norms_(i) + norms_(j) - 2.0 * x_.col(i).dot(x_.col(j)));
            out[j] = i == j ? 1.0 : std::exp(-gamma_ * d2);
        }
    }

    Matrix x_;  // samples as columns
    double gamma_;
    Eigen::Index n_;
    Vector norms_;
    std::size_t capacity_;
    Matrix full_;
    std::list<std::pair<Eigen::Index, std::vector<double>>> lru_;
    std::unordered_map<Eigen::Index, std::list<std::pair<Eigen::Index, std::vector<double>>>::iterator> index_;
};

constexpr double kTau = 1e-12;

}  // namespace

double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha, double gamma) {
    const Eigen::Index n = x.rows();
    double lin = 0.0, quad = 0.0;
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < n; ++i) {
        lin += alpha[i];
        if (alpha[i] == 0.0) continue;
        const auto xi = row_span(x, i, a);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (alpha[j] == 0.0) continue;
            quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf_kernel(xi, row_span(x, j, b), gamma);
        }
    }
    return lin - 0.5 * quad;
}

BinarySvm train_binary(const Matrix& x, std::span<const int> y, const SvmConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = x.rows();
    if (static_cast<Eigen::Index>(y.size()) != n) throw Error(ErrorCode::DimensionMismatch, "label count differs");
    std::vector<int> cls(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i] != 1 && y[i] != -1) throw Error(ErrorCode::InvalidArgument, "binary labels must be +1 or -1");
        cls[i] = y[i] > 0 ? 0 : 1;
    }
    const auto w = cfg.balanced ? balanced_weights(cls, 2) : std::vector<double>{1.0, 1.0};
    std::vector<double> upper(n);
    for (Eigen::Index i = 0; i < n; ++i) upper[i] = cfg.C * w[cls[i]];

    KernelRows kernel(x, cfg.gamma, cfg.cache_bytes);
    std::vector<double> alpha(n, 0.0), grad(n, -1.0);
    auto at_upper = [&](Eigen::Index t) { return alpha[t] >= upper[t]; };
    auto at_lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };

    const long passes = cfg.max_passes > 0 ? cfg.max_passes : 10 * static_cast<long>(n);
    const long max_iter = passes * static_cast<long>(n);
    BinarySvm svm;
    svm.converged = false;
    long iter = 0;
    while (iter < max_iter) {
        // Maximal violating index i, then j by second-order gain.
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (!at_upper(t) && -grad[t] >= gmax) gmax = -grad[t], i = t;
            } else if (!at_lower(t) && grad[t] >= gmax) {
                gmax = grad[t], i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        double best_gain = std::numeric_limits<double>::infinity();
        const double* ki = i >= 0 ? kernel.row(i) : nullptr;
        for (Eigen::Index t = 0; t < n; ++t) {
            double grad_diff;
            if (y[t] == 1) {
                if (at_lower(t)) continue;
                gmax2 = std::max(gmax2, grad[t]);
                grad_diff = gmax + grad[t];
            } else {
                if (at_upper(t)) continue;
                gmax2 = std::max(gmax2, -grad[t]);
                grad_diff = gmax - grad[t];
            }
            if (ki && grad_diff > 0) {
                const double quad = kernel.diag(i) + kernel.diag(t) - 2.0 * ki[t];
                const double gain = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
                if (gain <= best_gain) best_gain = gain, j = t;
            }
        }
        if (gmax + gmax2 < cfg.kkt_tolerance || j < 0) {
            svm.converged = true;
            break;
        }
        ++iter;

        ki = kernel.row(i);
        const double* kj = kernel.row(j);
        const double qij = y[i] * y[j] * ki[j];
        const double old_i = alpha[i], old_j = alpha[j];
        const double ci = upper[i], cj = upper[j];
        if (y[i] != y[j]) {
            double quad = kernel.diag(i) + kernel.diag(j) + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
            } else if (alpha[i] < 0) {
                alpha[i] = 0, alpha[j] = -diff;
            }
            if (diff > ci - cj) {
                if (alpha[i] > ci) alpha[i] = ci, alpha[j] = ci - diff;
            } else if (alpha[j] > cj) {
                alpha[j] = cj, alpha[i] = cj + diff;
            }
        } else {
            double quad = kernel.diag(i) + kernel.diag(j) - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > ci) {
                if (alpha[i] > ci) alpha[i] = ci, alpha[j] = sum - ci;
            } else if (alpha[j] < 0) {
                alpha[j] = 0, alpha[i] = sum;
            }
            if (sum > cj) {
                if (alpha[j] > cj) alpha[j] = cj, alpha[i] = sum - cj;
            } else if (alpha[i] < 0) {
                alpha[i] = 0, alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_i, daj = alpha[j] - old_j;
        for (Eigen::Index t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
    }
    svm.iterations = iter;

    // Bias: mean of y_i * grad_i over free vectors, else midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    long free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (at_upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (at_lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free;
            sum_free += yg;
        }
    }
    const double rho = free > 0 ? sum_free / free : (ub + lb) / 2;
    svm.bias = -rho;

    double obj = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
    svm.dual_objective = -0.5 * obj;

    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha[t] > 0.0) {
            svm.support.push_back(t);
            svm.coef.push_back(alpha[t] * y[t]);
        }
    svm.alpha = std::move(alpha);
    return svm;
}

double decision_value(const BinarySvm& m, const Matrix& samples, std::span<const double> x, double gamma) {
    if (static_cast<Eigen::Index>(x.size()) != samples.cols())
        throw Error(ErrorCode::DimensionMismatch, "input dimension differs from the model");
    double f = m.bias;
    std::vector<double> buf;
    for (std::size_t s = 0; s < m.support.size(); ++s)
        f += m.coef[s] * rbf_kernel(row_span(samples, m.support[s], buf), x, gamma);
    return f;
}

std::vector<double> OvoSvm::decision_values(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != dim())
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(dim()) + " inputs, got " + std::to_string(x.size()));
    std::vector<double> kx(support_pool.rows());
    std::vector<double> buf;
    for (Eigen::Index r = 0; r < support_pool.rows(); ++r) kx[r] = rbf_kernel(row_span(support_pool, r, buf), x, gamma);
    std::vector<double> out;
    out.reserve(machines.size());
    for (const auto& m : machines) {
        double f = m.bias;
        for (std::size_t s = 0; s < m.support.size(); ++s) f += m.coef[s] * kx[m.support[s]];
        out.push_back(f);
    }
    return out;
}

OvoSvm train_ovo(const Matrix& x, std::span<const int> labels, const SvmConfig& cfg) {
    cfg.validate();
    if (static_cast<Eigen::Index>(labels.size()) != x.rows())
        throw Error(ErrorCode::DimensionMismatch, "label count differs from sample count");
    if (labels.empty()) throw Error(ErrorCode::TooFewSamples, "no training samples");
    const int m = *std::max_element(labels.begin(), labels.end()) + 1;
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "one-vs-one needs at least two classes");
    balanced_weights(labels, m);  // rejects empty classes

    std::vector<std::vector<Eigen::Index>> members(m);
    for (Eigen::Index i = 0; i < x.rows(); ++i) members[labels[i]].push_back(i);

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);

    std::vector<BinarySvm> machines(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t p) {
        const auto [a, b] = pairs[p];
        std::vector<Eigen::Index> rows = members[a];
        rows.insert(rows.end(), members[b].begin(), members[b].end());
        Matrix sub(static_cast<Eigen::Index>(rows.size()), x.cols());
        std::vector<int> y(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            sub.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
            y[r] = labels[rows[r]] == a ? 1 : -1;
        }
        BinarySvm svm = train_binary(sub, y, cfg);
        svm.positive_class = a;
        svm.negative_class = b;
        for (auto& s : svm.support) s = rows[s];
        svm.alpha.clear();
        machines[p] = std::move(svm);
    });

    // Collect the training rows referenced by any machine into a shared pool.
    std::vector<Eigen::Index> pool_of(x.rows(), -1);
    std::vector<Eigen::Index> used;
    for (const auto& svm : machines)
        for (auto s : svm.support)
            if (pool_of[s] < 0) {
                pool_of[s] = 0;
                used.push_back(s);
            }
    std::sort(used.begin(), used.end());
    OvoSvm model;
    model.num_classes = m;
    model.gamma = cfg.gamma;
    model.support_pool.resize(static_cast<Eigen::Index>(used.size()), x.cols());
    for (std::size_t k = 0; k < used.size(); ++k) {
        pool_of[used[k]] = static_cast<Eigen::Index>(k);
        model.support_pool.row(static_cast<Eigen::Index>(k)) = x.row(used[k]);
    }
    for (auto& svm : machines)
        for (auto& s : svm.support) s = pool_of[s];
    model.machines = std::move(machines);
    return model;
}

std::vector<RankedClass> predict_topn(const OvoSvm& model, std::span<const double> x, int n) {
    if (n < 1 || n > model.num_classes)
        throw Error(ErrorCode::InvalidArgument, "top-n must lie in 1.." + std::to_string(model.num_classes));
    const auto f = model.decision_values(x);
    std::vector<RankedClass> ranking(model.num_classes);
    for (int c = 0; c < model.num_classes; ++c) ranking[c].label = c;
    for (std::size_t k = 0; k < model.machines.size(); ++k) {
        const auto& m = model.machines[k];
        ++ranking[f[k] > 0 ? m.positive_class : m.negative_class].votes;
        ranking[m.positive_class].margin_sum += f[k];
        ranking[m.negative_class].margin_sum -= f[k];
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedClass& a, const RankedClass& b) {
        if (a.votes != b.votes) return a.votes > b.votes;
        if (a.margin_sum != b.margin_sum) return a.margin_sum > b.margin_sum;
        return a.label < b.label;
    });
    ranking.resize(n);
    return ranking;
}

}  // namespace leafid
