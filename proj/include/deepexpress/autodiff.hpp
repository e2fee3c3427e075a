#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace dx {

/**
 * A named trainable tensor. Gradients accumulate across backward passes
 * until zero_grad() is called, so one parameter can appear on many tapes
 * (or several times on one) and the contributions simply add up.
 */
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

    void zero_grad() { grad.fill(0.0); }
};

enum class Op {
    input,
    constant,
    param,
    add,
    sub,
    mul,
    add_bias,
    matmul,
    tanh,
    sigmoid,
    relu,
    softmax,
    concat,
    slice,
    select_row,
    reshape,
    sum,
    scale,
    abs
};

inline const char* op_name(Op op) {
    switch (op) {
        case Op::input: return "input";
        case Op::constant: return "constant";
        case Op::param: return "param";
        case Op::add: return "add";
        case Op::sub: return "sub";
        case Op::mul: return "mul";
        case Op::add_bias: return "add_bias";
        case Op::matmul: return "matmul";
        case Op::tanh: return "tanh";
        case Op::sigmoid: return "sigmoid";
        case Op::relu: return "relu";
        case Op::softmax: return "softmax";
        case Op::concat: return "concat";
        case Op::slice: return "slice";
        case Op::select_row: return "select_row";
        case Op::reshape: return "reshape";
        case Op::sum: return "sum";
        case Op::scale: return "scale";
        case Op::abs: return "abs";
    }
    return "?";
}

class Tape;

/** Handle to one node on a tape. Cheap to copy; invalid until assigned. */
class Value {
public:
    Value() = default;
    Value(Tape* tape, int index) : tape_(tape), index_(index) {}

    bool valid() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int index() const { return index_; }

    const Tensor& value() const;
    const Tensor& grad() const;

private:
    Tape* tape_ = nullptr;
    int index_ = -1;
};

namespace detail {

struct MatmulDims {
    std::size_t p, q, r;
    Shape out;
};

// matmul accepts [pxq]x[qxr], [pxq]x[q], [q]x[qxr] and [q]x[q] (dot -> [1]).
inline MatmulDims resolve_matmul(const Shape& a, const Shape& b) {
    auto fail = [&]() -> MatmulDims {
        throw ShapeError("matmul: incompatible shapes " + shape_string(a) + " vs " +
                         shape_string(b));
    };
    if (a.size() == 2 && b.size() == 2)
        return a[1] == b[0] ? MatmulDims{a[0], a[1], b[1], Shape{a[0], b[1]}} : fail();
    if (a.size() == 2 && b.size() == 1)
        return a[1] == b[0] ? MatmulDims{a[0], a[1], 1, Shape{a[0]}} : fail();
    if (a.size() == 1 && b.size() == 2)
        return a[0] == b[0] ? MatmulDims{1, a[0], b[1], Shape{b[1]}} : fail();
    if (a.size() == 1 && b.size() == 1)
        return a[0] == b[0] ? MatmulDims{1, a[0], 1, Shape{1}} : fail();
    return fail();
}

}  // namespace detail

/**
 * Record-and-replay computation tape. Every op appends a node holding its
 * forward value; backward() walks the nodes in reverse and accumulates
 * vector-Jacobian products. Recording the same ops over the same inputs
 * yields bitwise-identical values and gradients: evaluation order is fixed
 * by construction and nothing here is threaded or reassociated.
 *
 * Non-finite results are treated as bugs, not data, and every op throws
 * ValueError the moment it produces one.
 */
class Tape {
public:
    // Nodes live in a deque so Tensor references handed out by value_of()
    // stay valid while the tape grows.
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    std::size_t size() const { return nodes_.size(); }

    const Tensor& value_of(int index) const { return nodes_[static_cast<std::size_t>(index)].value; }

    const Tensor& grad_of(int index) const {
        Node& n = const_cast<Node&>(nodes_[static_cast<std::size_t>(index)]);
        if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
        return n.grad;
    }

    // ---- leaves ------------------------------------------------------

    Value input(Tensor v) { return leaf(Op::input, std::move(v), nullptr); }

    Value constant(Tensor v) { return leaf(Op::constant, std::move(v), nullptr); }

    Value constant(double v) { return leaf(Op::constant, Tensor::scalar(v), nullptr); }

    Value param(Parameter& p) { return leaf(Op::param, p.value, &p); }

    // ---- elementwise -------------------------------------------------

    Value add(Value a, Value b) { return binary_same(Op::add, a, b); }
    Value sub(Value a, Value b) { return binary_same(Op::sub, a, b); }
    Value mul(Value a, Value b) { return binary_same(Op::mul, a, b); }

    // x:[pxq] (or [q]) plus bias b:[q], broadcast over rows. The only
    // broadcast in the whole op set.
    Value add_bias(Value x, Value bias) {
        check_tape(x), check_tape(bias);
        const Tensor& xv = val(x);
        const Tensor& bv = val(bias);
        if (bv.rank() != 1)
            throw ShapeError("add_bias: bias must be rank 1, got " + shape_string(bv.shape()));
        std::size_t q = bv.shape()[0];
        bool ok = (xv.rank() == 2 && xv.cols() == q) || (xv.rank() == 1 && xv.shape()[0] == q);
        if (!ok)
            throw ShapeError("add_bias: " + shape_string(xv.shape()) + " vs bias " +
                             shape_string(bv.shape()));
        Tensor out = xv;
        std::size_t rows = xv.size() / q;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < q; ++j) out[i * q + j] += bv[j];
        Node n(Op::add_bias, std::move(out));
        n.parents = {x.index(), bias.index()};
        return push(std::move(n));
    }

    Value matmul(Value a, Value b) {
        check_tape(a), check_tape(b);
        const Tensor& av = val(a);
        const Tensor& bv = val(b);
        auto dims = detail::resolve_matmul(av.shape(), bv.shape());
        Tensor out(dims.out);
        for (std::size_t i = 0; i < dims.p; ++i)
            for (std::size_t k = 0; k < dims.q; ++k) {
                double aik = av[i * dims.q + k];
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < dims.r; ++j)
                    out[i * dims.r + j] += aik * bv[k * dims.r + j];
            }
        Node n(Op::matmul, std::move(out));
        n.parents = {a.index(), b.index()};
        n.p = dims.p, n.q = dims.q, n.r = dims.r;
        return push(std::move(n));
    }

    Value tanh(Value x) {
        return unary(Op::tanh, x, [](double v) { return std::tanh(v); });
    }

    Value sigmoid(Value x) {
        return unary(Op::sigmoid, x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    }

    Value relu(Value x) {
        return unary(Op::relu, x, [](double v) { return v > 0.0 ? v : 0.0; });
    }

    Value abs(Value x) {
        return unary(Op::abs, x, [](double v) { return std::fabs(v); });
    }

    // Max-shifted, so huge scores do not overflow.
    Value softmax(Value x) {
        check_tape(x);
        const Tensor& xv = val(x);
        if (xv.rank() != 1 || xv.size() == 0)
            throw ShapeError("softmax: need a non-empty rank-1 tensor, got " +
                             shape_string(xv.shape()));
        double m = xv[0];
        for (std::size_t i = 1; i < xv.size(); ++i) m = std::max(m, xv[i]);
        Tensor out(xv.shape());
        double z = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            out[i] = std::exp(xv[i] - m);
            z += out[i];
        }
        for (std::size_t i = 0; i < xv.size(); ++i) out[i] /= z;
        Node n(Op::softmax, std::move(out));
        n.parents = {x.index()};
        return push(std::move(n));
    }

    // ---- structure ---------------------------------------------------

    Value concat(const std::vector<Value>& parts, std::size_t axis = 0) {
        if (parts.empty()) throw ShapeError("concat: no parts");
        for (const Value& v : parts) check_tape(v);
        const Tensor& first = val(parts[0]);
        std::size_t rank = first.rank();
        if (rank != 1 && rank != 2)
            throw ShapeError("concat: parts must be rank 1 or 2, got " +
                             shape_string(first.shape()));
        if (axis >= rank)
            throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for rank " +
                             std::to_string(rank));
        std::size_t along = 0;
        std::size_t other = rank == 2 ? first.shape()[1 - axis] : 0;
        for (const Value& v : parts) {
            const Tensor& t = val(v);
            if (t.rank() != rank)
                throw ShapeError("concat: mixed ranks " + shape_string(first.shape()) + " vs " +
                                 shape_string(t.shape()));
            if (rank == 2 && t.shape()[1 - axis] != other)
                throw ShapeError("concat: off-axis mismatch " + shape_string(first.shape()) +
                                 " vs " + shape_string(t.shape()));
            along += t.shape()[axis];
        }
        Shape out_shape = rank == 1 ? Shape{along}
                                    : (axis == 0 ? Shape{along, other} : Shape{other, along});
        Tensor out(out_shape);
        if (rank == 1 || axis == 0) {
            std::size_t pos = 0;
            for (const Value& v : parts) {
                const Tensor& t = val(v);
                for (std::size_t i = 0; i < t.size(); ++i) out[pos + i] = t[i];
                pos += t.size();
            }
        } else {
            std::size_t col0 = 0;
            for (const Value& v : parts) {
                const Tensor& t = val(v);
                for (std::size_t i = 0; i < t.rows(); ++i)
                    for (std::size_t j = 0; j < t.cols(); ++j) out.at(i, col0 + j) = t.at(i, j);
                col0 += t.cols();
            }
        }
        Node n(Op::concat, std::move(out));
        n.parents.reserve(parts.size());
        for (const Value& v : parts) n.parents.push_back(v.index());
        n.axis = axis;
        return push(std::move(n));
    }

    Value slice(Value x, std::size_t offset, std::size_t length) {
        check_tape(x);
        const Tensor& xv = val(x);
        if (xv.rank() != 1)
            throw ShapeError("slice: need rank 1, got " + shape_string(xv.shape()));
        if (length == 0 || offset + length > xv.size())
            throw ShapeError("slice: [" + std::to_string(offset) + ", " +
                             std::to_string(offset + length) + ") out of range for " +
                             shape_string(xv.shape()));
        Tensor out({length});
        for (std::size_t i = 0; i < length; ++i) out[i] = xv[offset + i];
        Node n(Op::slice, std::move(out));
        n.parents = {x.index()};
        n.offset = offset;
        return push(std::move(n));
    }

    Value select_row(Value m, std::size_t row) {
        check_tape(m);
        const Tensor& mv = val(m);
        if (mv.rank() != 2)
            throw ShapeError("select_row: need rank 2, got " + shape_string(mv.shape()));
        if (row >= mv.rows())
            throw ShapeError("select_row: row " + std::to_string(row) + " out of range for " +
                             shape_string(mv.shape()));
        Tensor out({mv.cols()});
        for (std::size_t j = 0; j < mv.cols(); ++j) out[j] = mv.at(row, j);
        Node n(Op::select_row, std::move(out));
        n.parents = {m.index()};
        n.offset = row;
        return push(std::move(n));
    }

    Value reshape(Value x, Shape shape) {
        check_tape(x);
        const Tensor& xv = val(x);
        if (shape_numel(shape) != xv.size())
            throw ShapeError("reshape: " + shape_string(xv.shape()) + " to " +
                             shape_string(shape) + " changes element count");
        Tensor out(std::move(shape), xv.data());
        Node n(Op::reshape, std::move(out));
        n.parents = {x.index()};
        return push(std::move(n));
    }

    Value sum(Value x) {
        check_tape(x);
        const Tensor& xv = val(x);
        double s = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i];
        Node n(Op::sum, Tensor::scalar(s));
        n.parents = {x.index()};
        return push(std::move(n));
    }

    Value scale(Value x, double c) {
        check_tape(x);
        if (!std::isfinite(c)) throw ValueError("scale: factor is not finite");
        const Tensor& xv = val(x);
        Tensor out = xv;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
        Node n(Op::scale, std::move(out));
        n.parents = {x.index()};
        n.alpha = c;
        return push(std::move(n));
    }

    // ---- reverse pass ------------------------------------------------

    /**
     * Accumulates d(loss)/d(node) into every touched node's grad, and into
     * the bound Parameter for param leaves. Calling backward twice doubles
     * the gradients; zero out Parameter grads between steps.
     */
    void backward(Value loss) {
        check_tape(loss);
        const Tensor& lv = val(loss);
        if (lv.size() != 1)
            throw ShapeError("backward: loss must be a scalar, got " + shape_string(lv.shape()));
        std::vector<Tensor> bar(nodes_.size());
        bar[static_cast<std::size_t>(loss.index())] = Tensor::ones(lv.shape());
        for (int i = loss.index(); i >= 0; --i) {
            Tensor& g = bar[static_cast<std::size_t>(i)];
            if (g.empty()) continue;
            propagate(static_cast<std::size_t>(i), g, bar);
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (bar[i].empty()) continue;
            Node& n = nodes_[i];
            if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
            n.grad.add_(bar[i]);
            if (n.op == Op::param && n.bound) n.bound->grad.add_(bar[i]);
        }
    }

    // Drops per-node gradient accumulators (bound Parameter grads are the
    // parameters' business).
    void zero_grad() {
        for (Node& n : nodes_) n.grad = Tensor();
    }

    // Distinct parameters bound to this tape, in first-bind order.
    std::vector<Parameter*> bound_parameters() const {
        std::vector<Parameter*> out;
        for (const Node& n : nodes_)
            if (n.op == Op::param && n.bound) {
                bool seen = false;
                for (Parameter* p : out)
                    if (p == n.bound) {
                        seen = true;
                        break;
                    }
                if (!seen) out.push_back(n.bound);
            }
        return out;
    }

private:
    struct Node {
        Node(Op o, Tensor v) : op(o), value(std::move(v)) {}
        Op op;
        std::vector<int> parents;
        Tensor value;
        Tensor grad;
        Parameter* bound = nullptr;
        std::size_t p = 0, q = 0, r = 0;  // matmul
        std::size_t axis = 0;             // concat
        std::size_t offset = 0;           // slice / select_row
        double alpha = 0.0;               // scale
    };

    Value leaf(Op op, Tensor v, Parameter* p) {
        Node n(op, std::move(v));
        n.bound = p;
        return push(std::move(n));
    }

    template <class F>
    Value unary(Op op, Value x, F&& f) {
        check_tape(x);
        const Tensor& xv = val(x);
        Tensor out(xv.shape());
        for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
        Node n(op, std::move(out));
        n.parents = {x.index()};
        return push(std::move(n));
    }

    Value binary_same(Op op, Value a, Value b) {
        check_tape(a), check_tape(b);
        const Tensor& av = val(a);
        const Tensor& bv = val(b);
        if (!av.same_shape(bv))
            throw ShapeError(std::string(op_name(op)) + ": shape mismatch " +
                             shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
        Tensor out(av.shape());
        switch (op) {
            case Op::add:
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
                break;
            case Op::sub:
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
                break;
            case Op::mul:
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
                break;
            default: throw Error("binary_same: bad op");
        }
        Node n(op, std::move(out));
        n.parents = {a.index(), b.index()};
        return push(std::move(n));
    }

    Value push(Node n) {
        if (!n.value.all_finite())
            throw ValueError(std::string("non-finite value produced by ") + op_name(n.op) +
                             " at node " + std::to_string(nodes_.size()));
        nodes_.push_back(std::move(n));
        return Value(this, static_cast<int>(nodes_.size()) - 1);
    }

    const Tensor& val(Value v) const { return nodes_[static_cast<std::size_t>(v.index())].value; }

    void check_tape(Value v) const {
        if (!v.valid() || v.tape() != this)
            throw Error("value does not belong to this tape");
    }

    static Tensor& ensure(std::vector<Tensor>& bar, int idx, const Shape& shape) {
        Tensor& t = bar[static_cast<std::size_t>(idx)];
        if (t.empty()) t = Tensor::zeros(shape);
        return t;
    }

    void propagate(std::size_t i, const Tensor& g, std::vector<Tensor>& bar) {
        Node& n = nodes_[i];
        switch (n.op) {
            case Op::input:
            case Op::constant:
            case Op::param: break;
            case Op::add: {
                ensure(bar, n.parents[0], n.value.shape()).add_(g);
                ensure(bar, n.parents[1], n.value.shape()).add_(g);
                break;
            }
            case Op::sub: {
                ensure(bar, n.parents[0], n.value.shape()).add_(g);
                Tensor& db = ensure(bar, n.parents[1], n.value.shape());
                for (std::size_t k = 0; k < g.size(); ++k) db[k] -= g[k];
                break;
            }
            case Op::mul: {
                const Tensor& a = value_of(n.parents[0]);
                const Tensor& b = value_of(n.parents[1]);
                Tensor& da = ensure(bar, n.parents[0], a.shape());
                Tensor& db = ensure(bar, n.parents[1], b.shape());
                for (std::size_t k = 0; k < g.size(); ++k) {
                    da[k] += g[k] * b[k];
                    db[k] += g[k] * a[k];
                }
                break;
            }
            case Op::add_bias: {
                const Tensor& x = value_of(n.parents[0]);
                const Tensor& b = value_of(n.parents[1]);
                ensure(bar, n.parents[0], x.shape()).add_(g);
                Tensor& db = ensure(bar, n.parents[1], b.shape());
                std::size_t q = b.shape()[0];
                std::size_t rows = x.size() / q;
                for (std::size_t row = 0; row < rows; ++row)
                    for (std::size_t j = 0; j < q; ++j) db[j] += g[row * q + j];
                break;
            }
            case Op::matmul: {
                const Tensor& a = value_of(n.parents[0]);
                const Tensor& b = value_of(n.parents[1]);
                Tensor& da = ensure(bar, n.parents[0], a.shape());
                Tensor& db = ensure(bar, n.parents[1], b.shape());
                // dA = g * B^T, dB = A^T * g over the logical (p, q, r) dims.
                for (std::size_t ii = 0; ii < n.p; ++ii)
                    for (std::size_t j = 0; j < n.r; ++j) {
                        double gij = g[ii * n.r + j];
                        if (gij == 0.0) continue;
                        for (std::size_t k = 0; k < n.q; ++k) {
                            da[ii * n.q + k] += gij * b[k * n.r + j];
                            db[k * n.r + j] += a[ii * n.q + k] * gij;
                        }
                    }
                break;
            }
            case Op::tanh: {
                Tensor& dx = ensure(bar, n.parents[0], n.value.shape());
                for (std::size_t k = 0; k < g.size(); ++k) {
                    double y = n.value[k];
                    dx[k] += g[k] * (1.0 - y * y);
                }
                break;
            }
            case Op::sigmoid: {
                Tensor& dx = ensure(bar, n.parents[0], n.value.shape());
                for (std::size_t k = 0; k < g.size(); ++k) {
                    double y = n.value[k];
                    dx[k] += g[k] * y * (1.0 - y);
                }
                break;
            }
            case Op::relu: {
                const Tensor& x = value_of(n.parents[0]);
                Tensor& dx = ensure(bar, n.parents[0], x.shape());
                for (std::size_t k = 0; k < g.size(); ++k)
                    if (x[k] > 0.0) dx[k] += g[k];
                break;
            }
            case Op::abs: {
                const Tensor& x = value_of(n.parents[0]);
                Tensor& dx = ensure(bar, n.parents[0], x.shape());
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (x[k] > 0.0) dx[k] += g[k];
                    else if (x[k] < 0.0) dx[k] -= g[k];
                }
                break;
            }
            case Op::softmax: {
                const Tensor& y = n.value;
                Tensor& dx = ensure(bar, n.parents[0], y.shape());
                double dot = 0.0;
                for (std::size_t k = 0; k < y.size(); ++k) dot += g[k] * y[k];
                for (std::size_t k = 0; k < y.size(); ++k) dx[k] += y[k] * (g[k] - dot);
                break;
            }
            case Op::concat: {
                std::size_t rank = n.value.rank();
                if (rank == 1 || n.axis == 0) {
                    std::size_t pos = 0;
                    for (int parent : n.parents) {
                        const Tensor& pv = value_of(parent);
                        Tensor& dp = ensure(bar, parent, pv.shape());
                        for (std::size_t k = 0; k < pv.size(); ++k) dp[k] += g[pos + k];
                        pos += pv.size();
                    }
                } else {
                    std::size_t col0 = 0;
                    for (int parent : n.parents) {
                        const Tensor& pv = value_of(parent);
                        Tensor& dp = ensure(bar, parent, pv.shape());
                        for (std::size_t ii = 0; ii < pv.rows(); ++ii)
                            for (std::size_t j = 0; j < pv.cols(); ++j)
                                dp[ii * pv.cols() + j] += g[ii * n.value.cols() + col0 + j];
                        col0 += pv.cols();
                    }
                }
                break;
            }
            case Op::slice: {
                const Tensor& x = value_of(n.parents[0]);
                Tensor& dx = ensure(bar, n.parents[0], x.shape());
                for (std::size_t k = 0; k < g.size(); ++k) dx[n.offset + k] += g[k];
                break;
            }
            case Op::select_row: {
                const Tensor& m = value_of(n.parents[0]);
                Tensor& dm = ensure(bar, n.parents[0], m.shape());
                for (std::size_t j = 0; j < g.size(); ++j) dm[n.offset * m.cols() + j] += g[j];
                break;
            }
            case Op::reshape: {
                const Tensor& x = value_of(n.parents[0]);
                Tensor& dx = ensure(bar, n.parents[0], x.shape());
                for (std::size_t k = 0; k < g.size(); ++k) dx[k] += g[k];
                break;
            }
            case Op::sum: {
                const Tensor& x = value_of(n.parents[0]);
                Tensor& dx = ensure(bar, n.parents[0], x.shape());
                for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += g[0];
                break;
            }
            case Op::scale: {
                const Tensor& x = value_of(n.parents[0]);
                Tensor& dx = ensure(bar, n.parents[0], x.shape());
                for (std::size_t k = 0; k < g.size(); ++k) dx[k] += n.alpha * g[k];
                break;
            }
        }
    }

    std::deque<Node> nodes_;
};

inline const Tensor& Value::value() const { return tape_->value_of(index_); }
inline const Tensor& Value::grad() const { return tape_->grad_of(index_); }

inline Value operator+(Value a, Value b) { return a.tape()->add(a, b); }
inline Value operator-(Value a, Value b) { return a.tape()->sub(a, b); }
inline Value operator*(Value a, Value b) { return a.tape()->mul(a, b); }

// ---- gradient checking ------------------------------------------------

/**
 * Central-difference check of d f / d x for a scalar-valued builder
 * f(tape, x). Returns the worst relative error over all coordinates, with
 * the denominator floored at 1e-8 so near-zero gradients do not blow up
 * the ratio.
 */
template <class F>
double finite_diff_check(F&& f, const Tensor& x, double eps) {
    if (!(eps > 0.0)) throw ValueError("finite_diff_check: eps must be positive");
    Tape tape;
    Value in = tape.input(x);
    Value out = f(tape, in);
    if (out.value().size() != 1)
        throw ShapeError("finite_diff_check: f must return a scalar, got " +
                         shape_string(out.value().shape()));
    tape.backward(out);
    Tensor analytic = in.grad();

    auto eval = [&](const Tensor& point) {
        Tape t;
        Value v = f(t, t.input(point));
        return v.value()[0];
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor plus = x, minus = x;
        plus[i] += eps;
        minus[i] -= eps;
        double numeric = (eval(plus) - eval(minus)) / (2.0 * eps);
        double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
    return worst;
}

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

/**
 * Same check in parameter space: build_loss(tape) must bind the given
 * parameters via tape.param(...) and return a scalar loss. Used to vet
 * whole models end to end.
 *
 * `floor` is the smallest denominator the relative error is measured
 * against. Deep compositions evaluate the loss through thousands of
 * rounded fp64 ops, so the central difference itself carries ~1e-11 of
 * noise; against the default 1e-8 floor that noise would read as 1e-3
 * "error" on parameters whose true gradient is zero. Model-scale checks
 * pass a floor of 1e-6, which still bounds those coordinates absolutely
 * at floor·tolerance.
 */
template <class F>
GradCheckReport finite_diff_params(const std::vector<Parameter*>& params, F&& build_loss,
                                   double eps, double floor = 1e-8) {
    if (!(eps > 0.0)) throw ValueError("finite_diff_params: eps must be positive");
    if (!(floor > 0.0)) throw ValueError("finite_diff_params: floor must be positive");
    for (Parameter* p : params) p->zero_grad();
    {
        Tape tape;
        Value loss = build_loss(tape);
        if (loss.value().size() != 1)
            throw ShapeError("finite_diff_params: loss must be a scalar");
        tape.backward(loss);
    }
    auto eval = [&]() {
        Tape tape;
        Value loss = build_loss(tape);
        return loss.value()[0];
    };

    GradCheckReport report;
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            double keep = p->value[i];
            p->value[i] = keep + eps;
            double fp = eval();
            p->value[i] = keep - eps;
            double fm = eval();
            p->value[i] = keep;
            double numeric = (fp - fm) / (2.0 * eps);
            double analytic = p->grad[i];
            double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
            double rel = std::fabs(analytic - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p->name;
                report.worst_index = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace dx
