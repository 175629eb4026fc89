#pragma once

// Minimal dense-tensor core with reverse-mode differentiation and Adam.
// Tensors are row-major doubles; matmul is delegated to Eigen. The tape
// records backward closures in forward order and replays them in reverse.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "evload/rng.hpp"

namespace evload::nn {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool needs_grad = false;
    std::string name;  // non-empty for named parameters

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

using NodePtr = std::shared_ptr<Node>;

struct Tensor {
    NodePtr node;

    Tensor() = default;
    explicit Tensor(NodePtr n) : node(std::move(n)) {}

    const Shape& shape() const { return node->shape; }
    std::size_t numel() const { return node->value.size(); }
    std::vector<double>& data() { return node->value; }
    const std::vector<double>& data() const { return node->value; }
    double scalar() const {
        if (numel() != 1) throw std::runtime_error("tensor is not scalar");
        return node->value[0];
    }
};

inline Tensor make_tensor(Shape shape, bool needs_grad = false, std::string name = {}) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value.assign(shape_numel(n->shape), 0.0);
    n->needs_grad = needs_grad;
    n->name = std::move(name);
    return Tensor(n);
}

inline Tensor make_tensor(Shape shape, std::vector<double> values, bool needs_grad = false) {
    if (values.size() != shape_numel(shape)) throw std::runtime_error("shape/data mismatch");
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->needs_grad = needs_grad;
    return Tensor(n);
}

class Tape {
public:
    void record(std::function<void()> backward) {
        entries_.push_back(std::move(backward));
    }

    void backward(const Tensor& loss) {
        if (loss.numel() != 1) throw std::runtime_error("backward: loss must be scalar");
        loss.node->ensure_grad();
        loss.node->grad[0] = 1.0;
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    }

    void clear() { entries_.clear(); }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<std::function<void()>> entries_;
};

// Active tape for op recording; null while running inference.
inline Tape*& active_tape() {
    static Tape* tape = nullptr;
    return tape;
}

struct TapeScope {
    explicit TapeScope(Tape& t) { active_tape() = &t; }
    ~TapeScope() { active_tape() = nullptr; }
};

inline void check_finite(const Tensor& t, const char* op) {
    for (double v : t.data())
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("non-finite value after op ") + op);
}

namespace detail {

inline bool any_needs_grad(std::initializer_list<const Tensor*> ts) {
    for (const Tensor* t : ts)
        if (t->node->needs_grad) return true;
    return false;
}

inline void mark_result(Tensor& out, std::initializer_list<const Tensor*> inputs) {
    out.node->needs_grad = any_needs_grad(inputs);
}

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using CMapM = Eigen::Map<const EMat>;

}  // namespace detail

// --- primitives ------------------------------------------------------------

// A:[..., m, k] x B:[k, n] or B:[..., k, n] with identical leading dims.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() < 2 || sb.size() < 2) throw std::runtime_error("matmul: rank < 2");
    int m = sa[sa.size() - 2], k = sa[sa.size() - 1];
    int kb = sb[sb.size() - 2], n = sb[sb.size() - 1];
    if (k != kb) throw std::runtime_error("matmul: inner dimension mismatch");
    std::size_t batch = 1;
    for (std::size_t i = 0; i + 2 < sa.size(); ++i) batch *= sa[i];
    bool shared_b = sb.size() == 2;
    if (!shared_b) {
        if (sb.size() != sa.size()) throw std::runtime_error("matmul: rank mismatch");
        for (std::size_t i = 0; i + 2 < sa.size(); ++i)
            if (sa[i] != sb[i]) throw std::runtime_error("matmul: batch dims mismatch");
    }
    Shape so(sa.begin(), sa.end() - 2);
    so.push_back(m);
    so.push_back(n);
    Tensor out = make_tensor(so);
    for (std::size_t bi = 0; bi < batch; ++bi) {
        detail::CMapM A(a.data().data() + bi * m * k, m, k);
        detail::CMapM B(b.data().data() + (shared_b ? 0 : bi * k * n), k, n);
        detail::MapM C(out.data().data() + bi * m * n, m, n);
        C.noalias() = A * B;
    }
    check_finite(out, "matmul");
    detail::mark_result(out, {&a, &b});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, bn = b.node, on = out.node;
        active_tape()->record([an, bn, on, m, k, n, batch, shared_b]() {
            if (an->needs_grad) an->ensure_grad();
            if (bn->needs_grad) bn->ensure_grad();
            for (std::size_t bi = 0; bi < batch; ++bi) {
                detail::CMapM G(on->grad.data() + bi * m * n, m, n);
                if (an->needs_grad) {
                    detail::CMapM B(bn->value.data() + (shared_b ? 0 : bi * k * n), k, n);
                    detail::MapM dA(an->grad.data() + bi * m * k, m, k);
                    dA.noalias() += G * B.transpose();
                }
                if (bn->needs_grad) {
                    detail::CMapM A(an->value.data() + bi * m * k, m, k);
                    detail::MapM dB(bn->grad.data() + (shared_b ? 0 : bi * k * n), k, n);
                    dB.noalias() += A.transpose() * G;
                }
            }
        });
    }
    return out;
}

// Same shape, or b broadcast over the last dimension (bias add).
inline Tensor add(const Tensor& a, const Tensor& b) {
    bool bias = b.shape().size() == 1 && b.shape()[0] == a.shape().back() &&
                a.shape().size() > 1;
    if (!bias && a.shape() != b.shape()) throw std::runtime_error("add: shape mismatch");
    Tensor out = make_tensor(a.shape());
    std::size_t n = a.numel(), bn_sz = b.numel();
    for (std::size_t i = 0; i < n; ++i)
        out.data()[i] = a.data()[i] + b.data()[i % (bias ? bn_sz : n)];
    check_finite(out, "add");
    detail::mark_result(out, {&a, &b});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, bn = b.node, on = out.node;
        active_tape()->record([an, bn, on, n, bn_sz, bias]() {
            if (an->needs_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < n; ++i) an->grad[i] += on->grad[i];
            }
            if (bn->needs_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    bn->grad[i % (bias ? bn_sz : n)] += on->grad[i];
            }
        });
    }
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw std::runtime_error("sub: shape mismatch");
    Tensor out = make_tensor(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    check_finite(out, "sub");
    detail::mark_result(out, {&a, &b});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, bn = b.node, on = out.node;
        active_tape()->record([an, bn, on]() {
            if (an->needs_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            }
            if (bn->needs_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] -= on->grad[i];
            }
        });
    }
    return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw std::runtime_error("mul: shape mismatch");
    Tensor out = make_tensor(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    check_finite(out, "mul");
    detail::mark_result(out, {&a, &b});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, bn = b.node, on = out.node;
        active_tape()->record([an, bn, on]() {
            if (an->needs_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < on->grad.size(); ++i)
                    an->grad[i] += on->grad[i] * bn->value[i];
            }
            if (bn->needs_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < on->grad.size(); ++i)
                    bn->grad[i] += on->grad[i] * an->value[i];
            }
        });
    }
    return out;
}

inline Tensor scale(const Tensor& a, double s) {
    Tensor out = make_tensor(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * s;
    check_finite(out, "scale");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, s]() {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * s;
        });
    }
    return out;
}

namespace detail {

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& a, const char* name, Fwd fwd, Bwd dydx) {
    Tensor out = make_tensor(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = fwd(a.data()[i]);
    check_finite(out, name);
    mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, dydx]() {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * dydx(an->value[i], on->value[i]);
        });
    }
    return out;
}

}  // namespace detail

inline Tensor sigmoid(const Tensor& a) {
    return detail::unary_op(
        a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh_op(const Tensor& a) {
    return detail::unary_op(
        a, "tanh", [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

inline Tensor relu(const Tensor& a) {
    return detail::unary_op(
        a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

// Softmax over the last axis.
inline Tensor softmax(const Tensor& a) {
    const int n = a.shape().back();
    const std::size_t rows = a.numel() / n;
    Tensor out = make_tensor(a.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = a.data().data() + r * n;
        double* y = out.data().data() + r * n;
        double mx = x[0];
        for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += (y[i] = std::exp(x[i] - mx));
        for (int i = 0; i < n; ++i) y[i] /= sum;
    }
    check_finite(out, "softmax");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, n, rows]() {
            an->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = on->value.data() + r * n;
                const double* g = on->grad.data() + r * n;
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += g[i] * y[i];
                double* dx = an->grad.data() + r * n;
                for (int i = 0; i < n; ++i) dx[i] += y[i] * (g[i] - dot);
            }
        });
    }
    return out;
}

// Layer normalization over the last axis, no affine parameters.
inline Tensor layer_norm(const Tensor& a, double eps = 1e-5) {
    const int n = a.shape().back();
    const std::size_t rows = a.numel() / n;
    Tensor out = make_tensor(a.shape());
    std::vector<double> inv_std(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = a.data().data() + r * n;
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += x[i];
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
        var /= n;
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        double* y = out.data().data() + r * n;
        for (int i = 0; i < n; ++i) y[i] = (x[i] - mean) * is;
    }
    check_finite(out, "layer_norm");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, n, rows, inv_std = std::move(inv_std)]() {
            an->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = on->value.data() + r * n;
                const double* g = on->grad.data() + r * n;
                double gsum = 0.0, gysum = 0.0;
                for (int i = 0; i < n; ++i) {
                    gsum += g[i];
                    gysum += g[i] * y[i];
                }
                double* dx = an->grad.data() + r * n;
                for (int i = 0; i < n; ++i)
                    dx[i] += inv_std[r] * (g[i] - gsum / n - y[i] * gysum / n);
            }
        });
    }
    return out;
}

// Inverted dropout: scales surviving units by 1/(1-rate) at train time so
// inference is the identity.
inline Tensor dropout(const Tensor& a, double rate, bool train, RngStream& rng) {
    if (!train || rate <= 0.0) return a;
    Tensor out = make_tensor(a.shape());
    const double keep = 1.0 - rate;
    auto mask = std::make_shared<std::vector<double>>(a.numel());
    for (std::size_t i = 0; i < a.numel(); ++i) {
        (*mask)[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
        out.data()[i] = a.data()[i] * (*mask)[i];
    }
    check_finite(out, "dropout");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, mask]() {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * (*mask)[i];
        });
    }
    return out;
}

// Concatenate along the last axis.
inline Tensor concat(const Tensor& a, const Tensor& b) {
    Shape sa = a.shape(), sb = b.shape();
    if (sa.size() != sb.size()) throw std::runtime_error("concat: rank mismatch");
    for (std::size_t i = 0; i + 1 < sa.size(); ++i)
        if (sa[i] != sb[i]) throw std::runtime_error("concat: leading dims mismatch");
    int na = sa.back(), nb = sb.back();
    Shape so = sa;
    so.back() = na + nb;
    Tensor out = make_tensor(so);
    std::size_t rows = a.numel() / na;
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(a.data().data() + r * na, na, out.data().data() + r * (na + nb));
        std::copy_n(b.data().data() + r * nb, nb, out.data().data() + r * (na + nb) + na);
    }
    detail::mark_result(out, {&a, &b});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, bn = b.node, on = out.node;
        active_tape()->record([an, bn, on, na, nb, rows]() {
            for (std::size_t r = 0; r < rows; ++r) {
                if (an->needs_grad) {
                    an->ensure_grad();
                    for (int i = 0; i < na; ++i)
                        an->grad[r * na + i] += on->grad[r * (na + nb) + i];
                }
                if (bn->needs_grad) {
                    bn->ensure_grad();
                    for (int i = 0; i < nb; ++i)
                        bn->grad[r * nb + i] += on->grad[r * (na + nb) + na + i];
                }
            }
        });
    }
    return out;
}

// Slice [from, to) of the last axis.
inline Tensor slice(const Tensor& a, int from, int to) {
    int n = a.shape().back();
    if (from < 0 || to > n || from >= to) throw std::runtime_error("slice: bad range");
    Shape so = a.shape();
    so.back() = to - from;
    Tensor out = make_tensor(so);
    std::size_t rows = a.numel() / n;
    int w = to - from;
    for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(a.data().data() + r * n + from, w, out.data().data() + r * w);
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, n, from, w, rows]() {
            an->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r)
                for (int i = 0; i < w; ++i)
                    an->grad[r * n + from + i] += on->grad[r * w + i];
        });
    }
    return out;
}

// Transpose the last two axes.
inline Tensor transpose(const Tensor& a) {
    const Shape& s = a.shape();
    if (s.size() < 2) throw std::runtime_error("transpose: rank < 2");
    int m = s[s.size() - 2], n = s[s.size() - 1];
    Shape so = s;
    std::swap(so[so.size() - 2], so[so.size() - 1]);
    Tensor out = make_tensor(so);
    std::size_t batch = a.numel() / (static_cast<std::size_t>(m) * n);
    for (std::size_t b = 0; b < batch; ++b)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                out.data()[b * m * n + j * m + i] = a.data()[b * m * n + i * n + j];
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, m, n, batch]() {
            an->ensure_grad();
            for (std::size_t b = 0; b < batch; ++b)
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        an->grad[b * m * n + i * n + j] += on->grad[b * m * n + j * m + i];
        });
    }
    return out;
}

// Reshape with identical element count; gradients pass through.
inline Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) throw std::runtime_error("reshape: numel mismatch");
    Tensor out = make_tensor(std::move(shape), a.data());
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on]() {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        });
    }
    return out;
}

// Mean over a single axis.
inline Tensor reduce_mean(const Tensor& a, int axis) {
    const Shape& s = a.shape();
    if (axis < 0 || axis >= static_cast<int>(s.size()))
        throw std::runtime_error("reduce_mean: bad axis");
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    int n = s[axis];
    Shape so;
    for (int i = 0; i < static_cast<int>(s.size()); ++i)
        if (i != axis) so.push_back(s[i]);
    if (so.empty()) so.push_back(1);
    Tensor out = make_tensor(so);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t in = 0; in < inner; ++in) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += a.data()[(o * n + i) * inner + in];
            out.data()[o * inner + in] = sum / n;
        }
    check_finite(out, "reduce_mean");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on, outer, inner, n]() {
            an->ensure_grad();
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t in = 0; in < inner; ++in) {
                    double g = on->grad[o * inner + in] / n;
                    for (int i = 0; i < n; ++i)
                        an->grad[(o * n + i) * inner + in] += g;
                }
        });
    }
    return out;
}

inline Tensor mean_all(const Tensor& a) {
    Tensor out = make_tensor({1});
    double sum = 0.0;
    for (double v : a.data()) sum += v;
    out.data()[0] = sum / static_cast<double>(a.numel());
    check_finite(out, "mean_all");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on]() {
            an->ensure_grad();
            double g = on->grad[0] / static_cast<double>(an->value.size());
            for (double& v : an->grad) v += g;
        });
    }
    return out;
}

inline Tensor sum_all(const Tensor& a) {
    Tensor out = make_tensor({1});
    double sum = 0.0;
    for (double v : a.data()) sum += v;
    out.data()[0] = sum;
    check_finite(out, "sum_all");
    detail::mark_result(out, {&a});
    if (out.node->needs_grad && active_tape()) {
        auto an = a.node, on = out.node;
        active_tape()->record([an, on]() {
            an->ensure_grad();
            for (double& v : an->grad) v += on->grad[0];
        });
    }
    return out;
}

inline Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    Tensor d = sub(pred, target);
    return mean_all(mul(d, d));
}

// --- parameters & optimizer ------------------------------------------------

struct ParamSet {
    std::vector<Tensor> params;

    Tensor add(std::string name, Shape shape) {
        Tensor t = make_tensor(std::move(shape), true, std::move(name));
        params.push_back(t);
        return t;
    }

    void zero_grad() {
        for (auto& p : params) p.node->grad.assign(p.numel(), 0.0);
    }

    std::vector<double> snapshot() const {
        std::vector<double> out;
        for (const auto& p : params)
            out.insert(out.end(), p.data().begin(), p.data().end());
        return out;
    }

    void restore(const std::vector<double>& flat) {
        std::size_t off = 0;
        for (auto& p : params) {
            std::copy_n(flat.begin() + off, p.numel(), p.data().begin());
            off += p.numel();
        }
    }

    void save(std::ostream& os) const {
        os << params.size() << "\n";
        for (const auto& p : params) {
            os << p.node->name << " " << p.shape().size();
            for (int d : p.shape()) os << " " << d;
            os.precision(17);
            for (double v : p.data()) os << " " << v;
            os << "\n";
        }
    }

    void load(std::istream& is) {
        std::size_t n;
        is >> n;
        if (n != params.size()) throw std::runtime_error("checkpoint: parameter count mismatch");
        for (auto& p : params) {
            std::string name;
            std::size_t rank;
            is >> name >> rank;
            Shape shape(rank);
            for (auto& d : shape) is >> d;
            if (name != p.node->name || shape != p.shape())
                throw std::runtime_error("checkpoint: parameter mismatch at " + name);
            for (double& v : p.data()) is >> v;
        }
    }
};

// Glorot-uniform init for a matrix of shape [fan_in, fan_out].
inline void glorot_init(Tensor& t, RngStream& rng) {
    const Shape& s = t.shape();
    int fan_in = s.size() >= 2 ? s[s.size() - 2] : s[0];
    int fan_out = s.back();
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.data()) v = rng.uniform(-limit, limit);
}

class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

    void step(ParamSet& ps) {
        if (m_.empty()) {
            for (auto& p : ps.params) {
                m_.emplace_back(p.numel(), 0.0);
                v_.emplace_back(p.numel(), 0.0);
            }
        }
        ++t_;
        double bc1 = 1.0 - std::pow(b1_, t_);
        double bc2 = 1.0 - std::pow(b2_, t_);
        for (std::size_t i = 0; i < ps.params.size(); ++i) {
            auto& p = ps.params[i];
            p.node->ensure_grad();
            for (std::size_t j = 0; j < p.numel(); ++j) {
                double g = p.node->grad[j];
                m_[i][j] = b1_ * m_[i][j] + (1.0 - b1_) * g;
                v_[i][j] = b2_ * v_[i][j] + (1.0 - b2_) * g * g;
                double mhat = m_[i][j] / bc1;
                double vhat = v_[i][j] / bc2;
                p.data()[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    std::int64_t steps() const { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    std::int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace evload::nn
