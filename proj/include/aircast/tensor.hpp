#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aircast/rng.hpp"

namespace aircast::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

// Dense row-major tensor of 64-bit reals. The gradient buffer is allocated
// lazily and always matches the value shape once present.
struct Tensor {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;

    Tensor() = default;

    Tensor(Shape s, double fill, bool rg = false)
        : shape(std::move(s)), data(shape_numel(shape), fill), requires_grad(rg) {}

    Tensor(Shape s, std::vector<double> values, bool rg = false)
        : shape(std::move(s)), data(std::move(values)), requires_grad(rg) {
        if (data.size() != shape_numel(shape))
            throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                        " does not match shape " + shape_str(shape));
    }

    static Tensor zeros(Shape s, bool rg = false) { return Tensor(std::move(s), 0.0, rg); }

    static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }

    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

    bool has_grad() const { return grad.size() == data.size(); }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_tensor(Tensor t) { return std::make_shared<Tensor>(std::move(t)); }

// Ordered record of executed operations. Each entry is the backward rule of
// one op; replaying them in reverse propagates gradients from a scalar loss
// to every requires_grad tensor that contributed to it. Execution order is
// already topological, so no sorting is needed.
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }

    void record(std::function<void()> backward_rule) {
        if (recording_) ops_.push_back(std::move(backward_rule));
    }

    std::size_t size() const { return ops_.size(); }

    void clear() { ops_.clear(); }

    // Seeds d(loss)/d(loss) = 1 and runs every recorded rule in reverse.
    // Gradients accumulate additively across multiple uses of a tensor.
    void backward(const TensorPtr& loss) {
        if (loss->numel() != 1)
            throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                        shape_str(loss->shape));
        loss->ensure_grad();
        loss->grad[0] = 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

private:
    bool recording_;
    std::vector<std::function<void()>> ops_;
};

namespace detail {

inline TensorPtr result(Shape shape, bool requires_grad) {
    auto t = std::make_shared<Tensor>(std::move(shape), 0.0, requires_grad);
    return t;
}

// An op's backward rule is skipped when no downstream consumer deposited a
// gradient (dead branch of the graph).
inline bool no_upstream(const TensorPtr& out) { return !out->has_grad(); }

inline void check_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape)
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
}

// True when b broadcasts over the last axis of a (bias-vector case).
inline bool is_lastaxis_vector(const TensorPtr& a, const TensorPtr& b) {
    return b->rank() == 1 && a->rank() >= 1 && b->shape[0] == a->shape.back();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Binary pointwise ops. Shapes must match exactly, or the right operand may
// be a vector broadcast over the last axis of the left operand.
// ---------------------------------------------------------------------------

inline TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    const bool bcast = detail::is_lastaxis_vector(a, b) && a->shape != b->shape;
    if (!bcast) detail::check_same_shape("add", a, b);
    auto out = detail::result(a->shape, a->requires_grad || b->requires_grad);
    const std::size_t n = a->numel(), w = bcast ? b->shape[0] : 0;
    for (std::size_t i = 0; i < n; ++i) out->data[i] = a->data[i] + (bcast ? b->data[i % w] : b->data[i]);
    if (out->requires_grad)
        tape.record([a, b, out, bcast, w] {
            if (detail::no_upstream(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    b->grad[bcast ? i % w : i] += out->grad[i];
            }
        });
    return out;
}

inline TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    const bool bcast = detail::is_lastaxis_vector(a, b) && a->shape != b->shape;
    if (!bcast) detail::check_same_shape("sub", a, b);
    auto out = detail::result(a->shape, a->requires_grad || b->requires_grad);
    const std::size_t n = a->numel(), w = bcast ? b->shape[0] : 0;
    for (std::size_t i = 0; i < n; ++i) out->data[i] = a->data[i] - (bcast ? b->data[i % w] : b->data[i]);
    if (out->requires_grad)
        tape.record([a, b, out, bcast, w] {
            if (detail::no_upstream(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    b->grad[bcast ? i % w : i] -= out->grad[i];
            }
        });
    return out;
}

inline TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    const bool bcast = detail::is_lastaxis_vector(a, b) && a->shape != b->shape;
    if (!bcast) detail::check_same_shape("mul", a, b);
    auto out = detail::result(a->shape, a->requires_grad || b->requires_grad);
    const std::size_t n = a->numel(), w = bcast ? b->shape[0] : 0;
    for (std::size_t i = 0; i < n; ++i) out->data[i] = a->data[i] * (bcast ? b->data[i % w] : b->data[i]);
    if (out->requires_grad)
        tape.record([a, b, out, bcast, w] {
            if (detail::no_upstream(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    a->grad[i] += out->grad[i] * (bcast ? b->data[i % w] : b->data[i]);
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    b->grad[bcast ? i % w : i] += out->grad[i] * a->data[i];
            }
        });
    return out;
}

// ---------------------------------------------------------------------------
// Unary pointwise ops.
// ---------------------------------------------------------------------------

inline TensorPtr sigmoid(Tape& tape, const TensorPtr& a) {
    auto out = detail::result(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = 1.0 / (1.0 + std::exp(-a->data[i]));
    if (out->requires_grad)
        tape.record([a, out] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                double s = out->data[i];
                a->grad[i] += out->grad[i] * s * (1.0 - s);
            }
        });
    return out;
}

inline TensorPtr tanh_op(Tape& tape, const TensorPtr& a) {
    auto out = detail::result(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = std::tanh(a->data[i]);
    if (out->requires_grad)
        tape.record([a, out] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                double y = out->data[i];
                a->grad[i] += out->grad[i] * (1.0 - y * y);
            }
        });
    return out;
}

// |x| with subgradient 0 at x = 0.
inline TensorPtr abs_op(Tape& tape, const TensorPtr& a) {
    auto out = detail::result(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = std::fabs(a->data[i]);
    if (out->requires_grad)
        tape.record([a, out] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                double x = a->data[i];
                double sign = (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
                a->grad[i] += out->grad[i] * sign;
            }
        });
    return out;
}

// 1/sqrt(x); d/dx = -0.5 * y^3.
inline TensorPtr rsqrt(Tape& tape, const TensorPtr& a) {
    auto out = detail::result(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = 1.0 / std::sqrt(a->data[i]);
    if (out->requires_grad)
        tape.record([a, out] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                double y = out->data[i];
                a->grad[i] += out->grad[i] * (-0.5) * y * y * y;
            }
        });
    return out;
}

inline TensorPtr mul_scalar(Tape& tape, const TensorPtr& a, double s) {
    auto out = detail::result(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] * s;
    if (out->requires_grad)
        tape.record([a, out, s] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i] * s;
        });
    return out;
}

inline TensorPtr add_scalar(Tape& tape, const TensorPtr& a, double s) {
    auto out = detail::result(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] + s;
    if (out->requires_grad)
        tape.record([a, out] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
        });
    return out;
}

// ---------------------------------------------------------------------------
// Matrix ops (rank-2 only).
// ---------------------------------------------------------------------------

inline TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->rank() != 2 || b->rank() != 2 || a->shape[1] != b->shape[0])
        throw std::invalid_argument("matmul: shape mismatch " + shape_str(a->shape) + " * " +
                                    shape_str(b->shape));
    const std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
    auto out = detail::result({m, n}, a->requires_grad || b->requires_grad);
    const double* pa = a->data.data();
    const double* pb = b->data.data();
    double* pc = out->data.data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * n;
            double* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    if (out->requires_grad)
        tape.record([a, b, out, m, k, n] {
            if (detail::no_upstream(out)) return;
            const double* dc = out->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                // dA += dC * B^T
                double* da = a->grad.data();
                const double* pb2 = b->data.data();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double g = dc[i * n + j];
                        const double* bcol = pb2 + j;
                        for (std::size_t p = 0; p < k; ++p) da[i * k + p] += g * bcol[p * n];
                    }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                // dB += A^T * dC
                double* db = b->grad.data();
                const double* pa2 = a->data.data();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        const double av = pa2[i * k + p];
                        const double* dcrow = dc + i * n;
                        double* dbrow = db + p * n;
                        for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
                    }
            }
        });
    return out;
}

// Same data, new shape; element count must be unchanged.
inline TensorPtr reshape(Tape& tape, const TensorPtr& a, Shape new_shape) {
    if (shape_numel(new_shape) != a->numel())
        throw std::invalid_argument("reshape: cannot view " + shape_str(a->shape) + " as " +
                                    shape_str(new_shape));
    auto out = detail::result(std::move(new_shape), a->requires_grad);
    out->data = a->data;
    if (out->requires_grad)
        tape.record([a, out] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < a->numel(); ++i) a->grad[i] += out->grad[i];
        });
    return out;
}

inline TensorPtr transpose(Tape& tape, const TensorPtr& a) {
    if (a->rank() != 2)
        throw std::invalid_argument("transpose: rank-2 tensor required, got " +
                                    shape_str(a->shape));
    const std::size_t m = a->shape[0], n = a->shape[1];
    auto out = detail::result({n, m}, a->requires_grad);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out->data[j * m + i] = a->data[i * n + j];
    if (out->requires_grad)
        tape.record([a, out, m, n] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) a->grad[i * n + j] += out->grad[j * m + i];
        });
    return out;
}

// Column block x[:, start:start+len] of a rank-2 tensor.
inline TensorPtr slice_cols(Tape& tape, const TensorPtr& a, std::size_t start, std::size_t len) {
    if (a->rank() != 2 || start + len > a->shape[1])
        throw std::invalid_argument("slice_cols: invalid range on " + shape_str(a->shape));
    const std::size_t rows = a->shape[0], cols = a->shape[1];
    auto out = detail::result({rows, len}, a->requires_grad);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < len; ++j) out->data[i * len + j] = a->data[i * cols + start + j];
    if (out->requires_grad)
        tape.record([a, out, rows, cols, start, len] {
            if (detail::no_upstream(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < len; ++j)
                    a->grad[i * cols + start + j] += out->grad[i * len + j];
        });
    return out;
}

// Horizontal concatenation of rank-2 tensors with equal row counts.
inline TensorPtr concat_cols(Tape& tape, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no operands");
    const std::size_t rows = parts[0]->shape[0];
    std::size_t total = 0;
    bool rg = false;
    for (const auto& p : parts) {
        if (p->rank() != 2 || p->shape[0] != rows)
            throw std::invalid_argument("concat_cols: incompatible shape " + shape_str(p->shape));
        total += p->shape[1];
        rg = rg || p->requires_grad;
    }
    auto out = detail::result({rows, total}, rg);
    std::size_t off = 0;
    for (const auto& p : parts) {
        const std::size_t w = p->shape[1];
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < w; ++j) out->data[i * total + off + j] = p->data[i * w + j];
        off += w;
    }
    if (rg)
        tape.record([parts, out, rows, total] {
            if (detail::no_upstream(out)) return;
            std::size_t off2 = 0;
            for (const auto& p : parts) {
                const std::size_t w = p->shape[1];
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (std::size_t i = 0; i < rows; ++i)
                        for (std::size_t j = 0; j < w; ++j)
                            p->grad[i * w + j] += out->grad[i * total + off2 + j];
                }
                off2 += w;
            }
        });
    return out;
}

// ---------------------------------------------------------------------------
// Sequence ops on rank-3 [B, T, D] tensors.
// ---------------------------------------------------------------------------

// x[:, t, :] as a [B, D] matrix.
inline TensorPtr slice_step(Tape& tape, const TensorPtr& x, std::size_t t) {
    if (x->rank() != 3 || t >= x->shape[1])
        throw std::invalid_argument("slice_step: invalid step on " + shape_str(x->shape));
    const std::size_t b = x->shape[0], seq = x->shape[1], d = x->shape[2];
    auto out = detail::result({b, d}, x->requires_grad);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < d; ++j) out->data[i * d + j] = x->data[(i * seq + t) * d + j];
    if (out->requires_grad)
        tape.record([x, out, b, seq, d, t] {
            if (detail::no_upstream(out)) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    x->grad[(i * seq + t) * d + j] += out->grad[i * d + j];
        });
    return out;
}

// Stacks T step matrices [B, D] into a [B, T, D] sequence.
inline TensorPtr stack_steps(Tape& tape, const std::vector<TensorPtr>& steps) {
    if (steps.empty()) throw std::invalid_argument("stack_steps: no operands");
    const std::size_t b = steps[0]->shape[0], d = steps[0]->shape[1], seq = steps.size();
    bool rg = false;
    for (const auto& s : steps) {
        if (s->rank() != 2 || s->shape[0] != b || s->shape[1] != d)
            throw std::invalid_argument("stack_steps: incompatible shape " + shape_str(s->shape));
        rg = rg || s->requires_grad;
    }
    auto out = detail::result({b, seq, d}, rg);
    for (std::size_t t = 0; t < seq; ++t)
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < d; ++j)
                out->data[(i * seq + t) * d + j] = steps[t]->data[i * d + j];
    if (rg)
        tape.record([steps, out, b, seq, d] {
            if (detail::no_upstream(out)) return;
            for (std::size_t t = 0; t < seq; ++t) {
                if (!steps[t]->requires_grad) continue;
                steps[t]->ensure_grad();
                for (std::size_t i = 0; i < b; ++i)
                    for (std::size_t j = 0; j < d; ++j)
                        steps[t]->grad[i * d + j] += out->grad[(i * seq + t) * d + j];
            }
        });
    return out;
}

// ---------------------------------------------------------------------------
// Reductions and softmax.
// ---------------------------------------------------------------------------

// Arithmetic mean over the given axes (all axes when empty is not allowed;
// pass every axis explicitly or use reduce_mean_all).
inline TensorPtr reduce_mean(Tape& tape, const TensorPtr& x, const std::vector<std::size_t>& axes) {
    if (x->numel() == 0) throw std::invalid_argument("reduce_mean: empty reduction");
    std::vector<bool> reduced(x->rank(), false);
    for (std::size_t ax : axes) {
        if (ax >= x->rank()) throw std::invalid_argument("reduce_mean: axis out of range");
        if (reduced[ax]) throw std::invalid_argument("reduce_mean: duplicate axis");
        reduced[ax] = true;
    }
    Shape out_shape;
    std::size_t count = 1;
    for (std::size_t i = 0; i < x->rank(); ++i) {
        if (reduced[i])
            count *= x->shape[i];
        else
            out_shape.push_back(x->shape[i]);
    }
    if (count == 0) throw std::invalid_argument("reduce_mean: empty reduction");
    auto out = detail::result(out_shape, x->requires_grad);

    // strides of the input and the flattened output index for each element
    std::vector<std::size_t> stride(x->rank(), 1);
    for (std::size_t i = x->rank(); i-- > 1;) stride[i - 1] = stride[i] * x->shape[i];
    auto out_index = [reduced, stride, shape = x->shape](std::size_t flat) {
        std::size_t oi = 0;
        for (std::size_t ax2 = 0; ax2 < shape.size(); ++ax2) {
            std::size_t coord = (flat / stride[ax2]) % shape[ax2];
            if (!reduced[ax2]) oi = oi * shape[ax2] + coord;
        }
        return oi;
    };

    for (std::size_t i = 0; i < x->numel(); ++i) out->data[out_index(i)] += x->data[i];
    const double inv = 1.0 / static_cast<double>(count);
    for (double& v : out->data) v *= inv;

    if (out->requires_grad)
        tape.record([x, out, out_index, inv] {
            if (detail::no_upstream(out)) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < x->numel(); ++i)
                x->grad[i] += out->grad[out_index(i)] * inv;
        });
    return out;
}

// Mean over every element, yielding a rank-0 scalar.
inline TensorPtr reduce_mean_all(Tape& tape, const TensorPtr& x) {
    std::vector<std::size_t> axes(x->rank());
    for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
    return reduce_mean(tape, x, axes);
}

// Sum over every element, yielding a rank-0 scalar. Backward distributes the
// upstream gradient unchanged to every element.
inline TensorPtr reduce_sum_all(Tape& tape, const TensorPtr& x) {
    if (x->numel() == 0) throw std::invalid_argument("reduce_sum_all: empty reduction");
    auto out = detail::result(Shape{}, x->requires_grad);
    double acc = 0.0;
    for (double v : x->data) acc += v;
    out->data[0] = acc;
    if (out->requires_grad)
        tape.record([x, out] {
            if (detail::no_upstream(out)) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += out->grad[0];
        });
    return out;
}

// Numerically stable softmax along one axis: exp(x - max) / sum(exp(x - max)).
inline TensorPtr softmax_axis(Tape& tape, const TensorPtr& x, std::size_t axis) {
    if (axis >= x->rank()) throw std::invalid_argument("softmax_axis: axis out of range");
    const std::size_t n = x->shape[axis];
    std::size_t inner = 1, outer = 1;
    for (std::size_t i = axis + 1; i < x->rank(); ++i) inner *= x->shape[i];
    for (std::size_t i = 0; i < axis; ++i) outer *= x->shape[i];
    auto out = detail::result(x->shape, x->requires_grad);

    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double mx = x->data[base];
            for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x->data[base + i * inner]);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double e = std::exp(x->data[base + i * inner] - mx);
                out->data[base + i * inner] = e;
                sum += e;
            }
            for (std::size_t i = 0; i < n; ++i) out->data[base + i * inner] /= sum;
        }

    if (out->requires_grad)
        tape.record([x, out, n, inner, outer] {
            if (detail::no_upstream(out)) return;
            x->ensure_grad();
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * n * inner + in;
                    double dot = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        dot += out->grad[base + i * inner] * out->data[base + i * inner];
                    for (std::size_t i = 0; i < n; ++i) {
                        const std::size_t idx = base + i * inner;
                        x->grad[idx] += out->data[idx] * (out->grad[idx] - dot);
                    }
                }
        });
    return out;
}

// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
// The mask is drawn from `rng` at execution time and captured for backward.
inline TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
    if (p == 0.0) return x;
    auto mask = std::make_shared<std::vector<double>>(x->numel());
    const double scale = 1.0 / (1.0 - p);
    auto out = detail::result(x->shape, x->requires_grad);
    for (std::size_t i = 0; i < x->numel(); ++i) {
        (*mask)[i] = (rng.uniform() < p) ? 0.0 : scale;
        out->data[i] = x->data[i] * (*mask)[i];
    }
    if (out->requires_grad)
        tape.record([x, out, mask] {
            if (detail::no_upstream(out)) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                x->grad[i] += out->grad[i] * (*mask)[i];
        });
    return out;
}

}  // namespace aircast::ad
