#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "wavebank/sparse.hpp"

namespace wavebank {

// Dense tensor node.  Leaves (parameters) persist across tapes; everything
// else is created by tape primitives.
struct Tensor {
    Mat value;
    Mat grad;
    bool requires_grad = false;

    Tensor(Mat v, bool req) : value(std::move(v)), requires_grad(req) {
        grad = Mat::Zero(value.rows(), value.cols());
    }

    bool is_scalar() const { return value.rows() == 1 && value.cols() == 1; }
    void zero_grad() { grad.setZero(); }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_leaf(Mat v, bool requires_grad = false) {
    return std::make_shared<Tensor>(std::move(v), requires_grad);
}

inline TensorPtr make_scalar(double v, bool requires_grad = false) {
    Mat m(1, 1);
    m(0, 0) = v;
    return make_leaf(std::move(m), requires_grad);
}

// Records primitive applications in topological order; backward() replays
// exact vector-Jacobian products in reverse.  One tape per forward pass.
class Tape {
  public:
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
        if (a->value.cols() != b->value.rows())
            throw std::invalid_argument("matmul: shape mismatch");
        auto out = node(a->value * b->value, a, b);
        record([a, b, out] {
            a->grad += out->grad * b->value.transpose();
            b->grad += a->value.transpose() * out->grad;
        });
        return out;
    }

    // X -> S * X with constant sparse S; gradient flows through S^T only.
    TensorPtr spmm_const(const SparseMatrix& s, const TensorPtr& x) {
        if (s.n_cols != static_cast<std::size_t>(x->value.rows()))
            throw std::invalid_argument("spmm_const: shape mismatch");
        auto out = node(spmm(s, x->value), x, nullptr);
        const SparseMatrix* sp = &s;  // views outlive the tape by contract
        record([sp, x, out] { x->grad += spmm_transpose(*sp, out->grad); });
        return out;
    }

    // Row-broadcast bias: X (n x d) + b (1 x d).
    TensorPtr add_bias(const TensorPtr& x, const TensorPtr& b) {
        if (b->value.rows() != 1 || b->value.cols() != x->value.cols())
            throw std::invalid_argument("add_bias: bias must be 1 x cols(X)");
        Mat v = x->value;
        v.rowwise() += b->value.row(0);
        auto out = node(std::move(v), x, b);
        record([x, b, out] {
            x->grad += out->grad;
            b->grad += out->grad.colwise().sum();
        });
        return out;
    }

    TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
        if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
            throw std::invalid_argument("add: shape mismatch");
        auto out = node(a->value + b->value, a, b);
        record([a, b, out] {
            a->grad += out->grad;
            b->grad += out->grad;
        });
        return out;
    }

    TensorPtr scale(const TensorPtr& x, double c) {
        auto out = node(c * x->value, x, nullptr);
        record([x, out, c] { x->grad += c * out->grad; });
        return out;
    }

    // PReLU with a single learnable scalar slope.  Zero inputs take the
    // positive branch; the slope gradient accumulates x*g over the
    // negative side.
    TensorPtr prelu(const TensorPtr& x, const TensorPtr& slope) {
        if (!slope->is_scalar())
            throw std::invalid_argument("prelu: slope must be a scalar parameter");
        double s = slope->value(0, 0);
        Mat v = x->value.unaryExpr([s](double t) { return t >= 0.0 ? t : s * t; });
        auto out = node(std::move(v), x, slope);
        record([x, slope, out, s] {
            for (Eigen::Index i = 0; i < x->value.rows(); ++i)
                for (Eigen::Index j = 0; j < x->value.cols(); ++j) {
                    double t = x->value(i, j), g = out->grad(i, j);
                    x->grad(i, j) += (t >= 0.0 ? 1.0 : s) * g;
                    if (t < 0.0) slope->grad(0, 0) += t * g;
                }
        });
        return out;
    }

    TensorPtr sigmoid(const TensorPtr& x) {
        Mat v = x->value.unaryExpr(
            [](double t) { return 1.0 / (1.0 + std::exp(-t)); });
        auto out = node(std::move(v), x, nullptr);
        record([x, out] {
            x->grad.array() +=
                out->grad.array() * out->value.array() * (1.0 - out->value.array());
        });
        return out;
    }

    // Column-wise mean over rows: (n x d) -> (1 x d).
    TensorPtr row_mean(const TensorPtr& x) {
        if (x->value.rows() < 1)
            throw std::invalid_argument("row_mean: empty input");
        double inv_n = 1.0 / static_cast<double>(x->value.rows());
        auto out = node(x->value.colwise().mean(), x, nullptr);
        record([x, out, inv_n] {
            x->grad.rowwise() += inv_n * out->grad.row(0);
        });
        return out;
    }

    TensorPtr transpose(const TensorPtr& x) {
        auto out = node(x->value.transpose(), x, nullptr);
        record([x, out] { x->grad += out->grad.transpose(); });
        return out;
    }

    // Sum over all entries of per-entry binary cross-entropy against a
    // constant target, with sigmoid applied to the logits.  Probabilities
    // are clamped to [1e-7, 1-1e-7]; the backward uses sigma(s) - t, exact
    // whenever the clamp is inactive.
    TensorPtr bce_logits_sum(const TensorPtr& scores, double target) {
        constexpr double kEps = 1e-7;
        double total = 0.0;
        for (Eigen::Index i = 0; i < scores->value.rows(); ++i)
            for (Eigen::Index j = 0; j < scores->value.cols(); ++j) {
                double p = 1.0 / (1.0 + std::exp(-scores->value(i, j)));
                p = std::min(1.0 - kEps, std::max(kEps, p));
                total -= target * std::log(p) + (1.0 - target) * std::log(1.0 - p);
            }
        Mat v(1, 1);
        v(0, 0) = total;
        auto out = node(std::move(v), scores, nullptr);
        record([scores, out, target] {
            double g = out->grad(0, 0);
            for (Eigen::Index i = 0; i < scores->value.rows(); ++i)
                for (Eigen::Index j = 0; j < scores->value.cols(); ++j) {
                    double p = 1.0 / (1.0 + std::exp(-scores->value(i, j)));
                    scores->grad(i, j) += g * (p - target);
                }
        });
        return out;
    }

    // Mean of a list of scalar tensors.
    TensorPtr scalar_mean(const std::vector<TensorPtr>& terms) {
        if (terms.empty()) throw std::invalid_argument("scalar_mean: empty list");
        double total = 0.0;
        for (const auto& t : terms) {
            if (!t->is_scalar())
                throw std::invalid_argument("scalar_mean: non-scalar term");
            total += t->value(0, 0);
        }
        double inv = 1.0 / static_cast<double>(terms.size());
        Mat v(1, 1);
        v(0, 0) = total * inv;
        bool req = false;
        for (const auto& t : terms) req = req || t->requires_grad;
        auto out = std::make_shared<Tensor>(std::move(v), req);
        intermediates_.push_back(out);
        auto held = terms;
        record([held, out, inv] {
            for (const auto& t : held) t->grad(0, 0) += inv * out->grad(0, 0);
        });
        return out;
    }

    // Reverse traversal; gradients accumulate (+=), so the caller zeroes
    // parameter grads before each backward.
    void backward(const TensorPtr& loss) {
        if (!loss->is_scalar())
            throw std::logic_error("backward: loss must be a scalar");
        if (consumed_)
            throw std::logic_error("backward: tape already consumed");
        consumed_ = true;
        loss->grad(0, 0) = 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    std::size_t size() const { return ops_.size(); }

  private:
    TensorPtr node(Mat v, const TensorPtr& a, const TensorPtr& b) {
        bool req = (a && a->requires_grad) || (b && b->requires_grad);
        auto t = std::make_shared<Tensor>(std::move(v), req);
        intermediates_.push_back(t);
        return t;
    }

    void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

    std::vector<std::function<void()>> ops_;
    std::vector<TensorPtr> intermediates_;
    bool consumed_ = false;
};

// Bias-corrected Adam over a fixed parameter list.
struct AdamState {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    std::vector<Mat> m1, m2;

    explicit AdamState(const std::vector<TensorPtr>& params, double learning_rate = 0.001)
        : lr(learning_rate) {
        for (const auto& p : params) {
            m1.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
            m2.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
        }
    }
};

inline void adam_step(std::vector<TensorPtr>& params, AdamState& state) {
    if (params.size() != state.m1.size())
        throw std::invalid_argument("adam_step: parameter count mismatch");
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Mat& g = params[i]->grad;
        if (!g.allFinite())
            throw std::runtime_error("adam_step: non-finite gradient");
        state.m1[i] = state.beta1 * state.m1[i] + (1.0 - state.beta1) * g;
        state.m2[i].array() =
            state.beta2 * state.m2[i].array() + (1.0 - state.beta2) * g.array().square();
        Mat mhat = state.m1[i] / bc1;
        Mat vhat = state.m2[i] / bc2;
        params[i]->value.array() -=
            state.lr * mhat.array() / (vhat.array().sqrt() + state.eps);
    }
}

// Max relative error between analytic and central-difference gradients.
// `loss_fn` must rebuild the forward pass, run backward, and return the
// loss value with parameter grads freshly populated.
inline double grad_check(const std::function<double()>& loss_fn,
                         const std::vector<TensorPtr>& params, double h = 1e-5) {
    double base = loss_fn();
    if (!std::isfinite(base)) throw std::runtime_error("grad_check: non-finite loss");
    std::vector<Mat> analytic;
    for (const auto& p : params) analytic.push_back(p->grad);

    double max_err = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Mat& v = params[k]->value;
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) {
                double orig = v(i, j);
                v(i, j) = orig + h;
                double fp = loss_fn();
                v(i, j) = orig - h;
                double fm = loss_fn();
                v(i, j) = orig;
                if (!std::isfinite(fp) || !std::isfinite(fm))
                    throw std::runtime_error("grad_check: non-finite loss");
                double numeric = (fp - fm) / (2.0 * h);
                double a = analytic[k](i, j);
                double err = std::abs(a - numeric) /
                             std::max({1.0, std::abs(a), std::abs(numeric)});
                max_err = std::max(max_err, err);
            }
    }
    loss_fn();  // restore gradients at the unperturbed point
    return max_err;
}

// Glorot-style uniform init in [-s, s], s = sqrt(6 / (fan_in + fan_out)).
inline Mat glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
            m(i, j) = s * (2.0 * u - 1.0);
        }
    return m;
}

}  // namespace wavebank
