// Copyright 2026 The sipd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIPD_EXPR_HPP
#define SIPD_EXPR_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sipd/dual.hpp"
#include "sipd/interval.hpp"

namespace sipd {

using Vec = std::vector<double>;
using Matrix = Eigen::MatrixXd;

enum class VarKind : std::uint8_t { X, Y, P };

inline char kind_letter(VarKind k) { return k == VarKind::X ? 'x' : (k == VarKind::Y ? 'y' : 'p'); }

enum class Op : std::uint8_t {
    Const,
    Var,
    Neg,
    Exp,
    Log,
    Sqrt,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Clamp,      // mid(lo, a, hi)
    SoftClamp,  // smooth clamp with range (lo, hi) and sharpness t
};

/// One node of an expression; children always precede their parent.
struct Node {
    Op op = Op::Const;
    VarKind kind = VarKind::X;
    int index = 0;  // 1-based variable index
    int a = -1;
    int b = -1;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double t = 0.0;
};

/**
 * Immutable expression tree stored in post order.
 *
 * Copies share the node array. Every node has exactly one parent, so the array
 * doubles as an evaluation tape and as a tree for backward propagation.
 */
class Expr {
public:
    Expr() : Expr(0.0) {}
    Expr(double c)  // NOLINT(google-explicit-constructor)
    {
        Node n;
        n.op = Op::Const;
        n.value = c;
        nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{n});
    }

    static Expr constant(double c) { return Expr(c); }

    static Expr var(VarKind kind, int index)
    {
        if (index < 1) throw std::invalid_argument("variable index must be positive");
        Node n;
        n.op = Op::Var;
        n.kind = kind;
        n.index = index;
        return Expr(std::vector<Node>{n});
    }
    static Expr x(int i) { return var(VarKind::X, i); }
    static Expr y(int i) { return var(VarKind::Y, i); }
    static Expr p(int i) { return var(VarKind::P, i); }

    static Expr unary(Op op, const Expr& a, double lo = 0.0, double hi = 0.0, double t = 0.0)
    {
        std::vector<Node> v = *a.nodes_;
        Node n;
        n.op = op;
        n.a = static_cast<int>(v.size()) - 1;
        n.lo = lo;
        n.hi = hi;
        n.t = t;
        v.push_back(n);
        return Expr(std::move(v));
    }

    static Expr binary(Op op, const Expr& a, const Expr& b)
    {
        std::vector<Node> v;
        v.reserve(a.size() + b.size() + 1);
        v.insert(v.end(), a.nodes_->begin(), a.nodes_->end());
        const int off = static_cast<int>(v.size());
        for (Node n : *b.nodes_) {
            if (n.a >= 0) n.a += off;
            if (n.b >= 0) n.b += off;
            v.push_back(n);
        }
        Node n;
        n.op = op;
        n.a = off - 1;
        n.b = static_cast<int>(v.size()) - 1;
        v.push_back(n);
        return Expr(std::move(v));
    }

    [[nodiscard]] const std::vector<Node>& nodes() const { return *nodes_; }
    [[nodiscard]] std::size_t size() const { return nodes_->size(); }
    [[nodiscard]] const Node& root() const { return nodes_->back(); }
    [[nodiscard]] int root_index() const { return static_cast<int>(nodes_->size()) - 1; }

    [[nodiscard]] bool is_constant() const { return root().op == Op::Const; }

    /// Largest index of the given variable kind, 0 when absent.
    [[nodiscard]] int max_index(VarKind kind) const
    {
        int m = 0;
        for (const Node& n : *nodes_) {
            if (n.op == Op::Var && n.kind == kind) m = std::max(m, n.index);
        }
        return m;
    }

    /// Structural equality.
    [[nodiscard]] bool same_as(const Expr& o) const
    {
        if (size() != o.size()) return false;
        for (std::size_t i = 0; i < size(); ++i) {
            const Node& m = (*nodes_)[i];
            const Node& n = (*o.nodes_)[i];
            if (m.op != n.op || m.a != n.a || m.b != n.b) return false;
            if (m.op == Op::Const && !(m.value == n.value)) return false;
            if (m.op == Op::Var && (m.kind != n.kind || m.index != n.index)) return false;
            if ((m.op == Op::Clamp || m.op == Op::SoftClamp) && (m.lo != n.lo || m.hi != n.hi || m.t != n.t))
                return false;
        }
        return true;
    }

private:
    explicit Expr(std::vector<Node> v) : nodes_(std::make_shared<const std::vector<Node>>(std::move(v))) {}

    std::shared_ptr<const std::vector<Node>> nodes_;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
inline Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }
inline Expr exp(const Expr& a) { return Expr::unary(Op::Exp, a); }
inline Expr log(const Expr& a) { return Expr::unary(Op::Log, a); }
inline Expr sqrt(const Expr& a) { return Expr::unary(Op::Sqrt, a); }
inline Expr abs(const Expr& a) { return Expr::unary(Op::Abs, a); }
inline Expr pow(const Expr& a, const Expr& b) { return Expr::binary(Op::Pow, a, b); }
inline Expr clamp(const Expr& a, double lo, double hi) { return Expr::unary(Op::Clamp, a, lo, hi); }
inline Expr softclamp(const Expr& a, double lo, double hi, double t)
{
    return Expr::unary(Op::SoftClamp, a, lo, hi, t);
}

/// Variable values for one evaluation, indexed 1-based through the span.
template <typename T>
struct Env {
    std::span<const T> x;
    std::span<const T> y;
    std::span<const T> p;

    [[nodiscard]] const T& get(VarKind k, int index) const
    {
        const std::span<const T>& s = k == VarKind::X ? x : (k == VarKind::Y ? y : p);
        if (index < 1 || static_cast<std::size_t>(index) > s.size()) {
            throw std::out_of_range(std::string("unassigned variable ") + kind_letter(k) + std::to_string(index));
        }
        return s[static_cast<std::size_t>(index) - 1];
    }
};

namespace detail {

inline std::optional<int> integer_exponent(const Node& n)
{
    if (n.op != Op::Const) return std::nullopt;
    const double v = n.value;
    if (std::nearbyint(v) == v && std::abs(v) <= 64.0) return static_cast<int>(v);
    return std::nullopt;
}

template <typename T>
T apply_pow(const T& base, const Node& expnode, const T& expo)
{
    if (auto n = integer_exponent(expnode)) return math::ipow(base, *n);
    // Non-integer exponents require a positive base.
    return math::exp(expo * math::log(base));
}

}  // namespace detail

/// Evaluates every node; `vals[i]` receives node i's value.
template <typename T>
void evaluate_all(const Expr& e, const Env<T>& env, std::vector<T>& vals)
{
    const auto& nodes = e.nodes();
    vals.clear();
    vals.reserve(nodes.size());
    for (const Node& n : nodes) {
        switch (n.op) {
        case Op::Const: vals.emplace_back(T(n.value)); break;
        case Op::Var: vals.push_back(env.get(n.kind, n.index)); break;
        case Op::Neg: vals.push_back(-vals[n.a]); break;
        case Op::Exp: vals.push_back(math::exp(vals[n.a])); break;
        case Op::Log: vals.push_back(math::log(vals[n.a])); break;
        case Op::Sqrt: vals.push_back(math::sqrt(vals[n.a])); break;
        case Op::Abs: vals.push_back(math::abs(vals[n.a])); break;
        case Op::Add: vals.push_back(vals[n.a] + vals[n.b]); break;
        case Op::Sub: vals.push_back(vals[n.a] - vals[n.b]); break;
        case Op::Mul: vals.push_back(vals[n.a] * vals[n.b]); break;
        case Op::Div: vals.push_back(math::div(vals[n.a], vals[n.b])); break;
        case Op::Pow: vals.push_back(detail::apply_pow(vals[n.a], nodes[n.b], vals[n.b])); break;
        case Op::Clamp: vals.push_back(math::clamp(vals[n.a], n.lo, n.hi)); break;
        case Op::SoftClamp: vals.push_back(math::softclamp(vals[n.a], n.lo, n.hi, n.t)); break;
        }
    }
}

template <typename T>
T evaluate(const Expr& e, const Env<T>& env)
{
    std::vector<T> vals;
    evaluate_all(e, env, vals);
    return vals.back();
}

/// Real evaluation; throws DomainError on log/sqrt/division domain violations.
inline double eval(const Expr& e, std::span<const double> x, std::span<const double> y = {},
                   std::span<const double> p = {})
{
    return evaluate<double>(e, Env<double>{x, y, p});
}

/// Natural interval extension over the boxes.
inline Interval eval_interval(const Expr& e, std::span<const Interval> x, std::span<const Interval> y = {},
                              std::span<const Interval> p = {})
{
    return evaluate<Interval>(e, Env<Interval>{x, y, p});
}

/// Reference to a single variable, used to pick differentiation seeds.
struct VarRef {
    VarKind kind = VarKind::X;
    int index = 1;
};

inline std::vector<VarRef> vars_of(VarKind kind, int count)
{
    std::vector<VarRef> r;
    for (int i = 1; i <= count; ++i) r.push_back({kind, i});
    return r;
}

/// Point assignment for all three variable kinds.
struct Point3 {
    std::span<const double> x;
    std::span<const double> y;
    std::span<const double> p;
};

namespace detail {

inline std::size_t kind_size(const Point3& at, VarKind k)
{
    return k == VarKind::X ? at.x.size() : (k == VarKind::Y ? at.y.size() : at.p.size());
}

// Lifts a point assignment to scalar type S, seeding the listed variables.
template <typename S, typename Seeder>
void lift(const Point3& at, const std::vector<VarRef>& seeds, Seeder seeder, std::vector<S>& xs,
          std::vector<S>& ys, std::vector<S>& ps)
{
    auto fill = [&](VarKind k, std::span<const double> src, std::vector<S>& out) {
        out.clear();
        for (std::size_t i = 0; i < src.size(); ++i) {
            int slot = -1;
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                if (seeds[s].kind == k && seeds[s].index == static_cast<int>(i) + 1) slot = static_cast<int>(s);
            }
            out.push_back(seeder(src[i], slot));
        }
    };
    fill(VarKind::X, at.x, xs);
    fill(VarKind::Y, at.y, ys);
    fill(VarKind::P, at.p, ps);
}

}  // namespace detail

/// Value and first partials with respect to an arbitrary variable list.
inline DualVec grad_dual(const Expr& e, const std::vector<VarRef>& wrt, const Point3& at)
{
    const std::size_t n = wrt.size();
    std::vector<DualVec> xs, ys, ps;
    detail::lift<DualVec>(
        at, wrt,
        [n](double v, int slot) { return slot < 0 ? DualVec(v) : DualVec::seed(v, n, static_cast<std::size_t>(slot)); },
        xs, ys, ps);
    DualVec r = evaluate<DualVec>(e, Env<DualVec>{xs, ys, ps});
    r.d.resize(n, 0.0);
    return r;
}

inline Vec grad(const Expr& e, const std::vector<VarRef>& wrt, const Point3& at) { return grad_dual(e, wrt, at).d; }

/// Gradient with respect to all variables of one kind present in the assignment.
inline Vec grad(const Expr& e, VarKind wrt, const Point3& at)
{
    return grad(e, vars_of(wrt, static_cast<int>(detail::kind_size(at, wrt))), at);
}

/// Value, gradient and Hessian at once.
struct Taylor2 {
    double value = 0.0;
    Vec grad;
    Matrix hess;
};

/// Second-order expansion with respect to an arbitrary variable list (nested duals).
inline Taylor2 taylor2(const Expr& e, const std::vector<VarRef>& wrt, const Point3& at)
{
    using D2 = Dual<DualVec>;
    const std::size_t n = wrt.size();
    std::vector<D2> xs, ys, ps;
    detail::lift<D2>(
        at, wrt,
        [n](double v, int slot) {
            if (slot < 0) return D2(v);
            const auto s = static_cast<std::size_t>(slot);
            return D2::seed(DualVec::seed(v, n, s), n, s);
        },
        xs, ys, ps);
    const D2 r = evaluate<D2>(e, Env<D2>{xs, ys, ps});
    Taylor2 t;
    t.value = r.v.v;
    t.grad.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) t.grad[i] = r.v.partial(i);
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix h = Matrix::Zero(ni, ni);
    for (std::size_t i = 0; i < n; ++i) {
        const DualVec di = r.partial(i);
        for (std::size_t j = 0; j < n; ++j) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = di.partial(j);
    }
    // Symmetrize away round-off differences between the two seeding orders.
    t.hess = 0.5 * (h + h.transpose());
    return t;
}

inline Matrix hess(const Expr& e, const std::vector<VarRef>& wrt, const Point3& at) { return taylor2(e, wrt, at).hess; }

inline Matrix hess(const Expr& e, VarKind wrt, const Point3& at)
{
    return hess(e, vars_of(wrt, static_cast<int>(detail::kind_size(at, wrt))), at);
}

/// Interval value and interval gradient over boxes (for mean-value forms).
inline Dual<Interval> grad_interval(const Expr& e, const std::vector<VarRef>& wrt, std::span<const Interval> x,
                                    std::span<const Interval> y = {}, std::span<const Interval> p = {})
{
    using DI = Dual<Interval>;
    const std::size_t n = wrt.size();
    auto fill = [&](VarKind k, std::span<const Interval> src) {
        std::vector<DI> out;
        for (std::size_t i = 0; i < src.size(); ++i) {
            int slot = -1;
            for (std::size_t s = 0; s < n; ++s) {
                if (wrt[s].kind == k && wrt[s].index == static_cast<int>(i) + 1) slot = static_cast<int>(s);
            }
            out.push_back(slot < 0 ? DI(src[i], {}) : DI::seed(src[i], n, static_cast<std::size_t>(slot)));
        }
        return out;
    };
    const auto xs = fill(VarKind::X, x);
    const auto ys = fill(VarKind::Y, y);
    const auto ps = fill(VarKind::P, p);
    DI r = evaluate<DI>(e, Env<DI>{xs, ys, ps});
    r.d.resize(n, Interval(0.0));
    return r;
}

/**
 * Replaces variables of one kind. `f(index)` returns the replacement, or
 * nullopt to keep the variable.
 */
inline Expr substitute(const Expr& e, VarKind kind, const std::function<std::optional<Expr>(int)>& f)
{
    const auto& nodes = e.nodes();
    std::vector<Expr> built;
    built.reserve(nodes.size());
    for (const Node& n : nodes) {
        switch (n.op) {
        case Op::Const: built.emplace_back(n.value); break;
        case Op::Var: {
            std::optional<Expr> r;
            if (n.kind == kind) r = f(n.index);
            built.push_back(r ? *r : Expr::var(n.kind, n.index));
            break;
        }
        case Op::Neg:
        case Op::Exp:
        case Op::Log:
        case Op::Sqrt:
        case Op::Abs:
        case Op::Clamp:
        case Op::SoftClamp: built.push_back(Expr::unary(n.op, built[n.a], n.lo, n.hi, n.t)); break;
        default: built.push_back(Expr::binary(n.op, built[n.a], built[n.b])); break;
        }
    }
    return built.back();
}

/// Binds every variable of `kind` to the given constants.
inline Expr bind_values(const Expr& e, VarKind kind, std::span<const double> values)
{
    return substitute(e, kind, [&](int i) -> std::optional<Expr> {
        if (static_cast<std::size_t>(i) > values.size()) throw std::out_of_range("bind: index out of range");
        return Expr(values[static_cast<std::size_t>(i) - 1]);
    });
}

/// Renames one variable kind to another (indices kept).
inline Expr rename(const Expr& e, VarKind from, VarKind to)
{
    return substitute(e, from, [to](int i) -> std::optional<Expr> { return Expr::var(to, i); });
}

/// Swaps the roles of two variable kinds.
inline Expr swap_kinds(const Expr& e, VarKind a, VarKind b)
{
    // Route through P-free renaming in two passes using a sentinel offset.
    constexpr int kShift = 1 << 20;
    Expr t = substitute(e, a, [&](int i) -> std::optional<Expr> { return Expr::var(b, i + kShift); });
    t = substitute(t, b, [&](int i) -> std::optional<Expr> {
        return i > kShift ? Expr::var(b, i - kShift) : Expr::var(a, i);
    });
    return t;
}

// ---------------------------------------------------------------------------
// Printing. Output follows the parser grammar so that parse(print(e)) rebuilds
// the same tree for any parsed expression.

namespace detail {

inline std::string format_number(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

// Precedence levels: 1 sum, 2 product, 3 unary minus, 4 power, 5 atom.
inline std::pair<std::string, int> print_node(const std::vector<Node>& nodes, int i)
{
    const Node& n = nodes[static_cast<std::size_t>(i)];
    auto wrap = [&](int child, int min_level) {
        auto [s, lvl] = print_node(nodes, child);
        return lvl < min_level ? "(" + s + ")" : s;
    };
    switch (n.op) {
    case Op::Const: {
        if (std::signbit(n.value)) return {"-" + format_number(-n.value), 3};
        return {format_number(n.value), 5};
    }
    case Op::Var: return {std::string(1, kind_letter(n.kind)) + std::to_string(n.index), 5};
    case Op::Neg: return {"-" + wrap(n.a, 4), 3};
    case Op::Exp: return {"exp(" + print_node(nodes, n.a).first + ")", 5};
    case Op::Log: return {"log(" + print_node(nodes, n.a).first + ")", 5};
    case Op::Sqrt: return {"sqrt(" + print_node(nodes, n.a).first + ")", 5};
    case Op::Abs: return {"abs(" + print_node(nodes, n.a).first + ")", 5};
    case Op::Add: return {wrap(n.a, 1) + " + " + wrap(n.b, 2), 1};
    case Op::Sub: return {wrap(n.a, 1) + " - " + wrap(n.b, 2), 1};
    case Op::Mul: return {wrap(n.a, 2) + "*" + wrap(n.b, 3), 2};
    case Op::Div: return {wrap(n.a, 2) + "/" + wrap(n.b, 3), 2};
    case Op::Pow: return {wrap(n.a, 5) + "^" + wrap(n.b, 3), 4};
    case Op::Clamp:
        return {"mid(" + format_number(n.lo) + ", " + print_node(nodes, n.a).first + ", " + format_number(n.hi) + ")",
                5};
    case Op::SoftClamp:
        return {"smid(" + format_number(n.lo) + ", " + print_node(nodes, n.a).first + ", " + format_number(n.hi) +
                    ", " + format_number(n.t) + ")",
                5};
    }
    return {"?", 5};
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::print_node(e.nodes(), e.root_index()).first; }

}  // namespace sipd

#endif  // SIPD_EXPR_HPP
