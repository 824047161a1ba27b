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

#ifndef SIPD_DUAL_HPP
#define SIPD_DUAL_HPP

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "sipd/interval.hpp"

namespace sipd {

/**
 * Forward-mode dual number with a dynamic number of partials.
 *
 * The scalar type may itself be a dual (second derivatives via nesting) or an
 * Interval (derivative enclosures for mean-value forms). An empty partial
 * vector means "all partials are zero", so constants stay allocation-free.
 */
template <typename T>
struct Dual {
    T v{};
    std::vector<T> d;

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
    Dual(T value, std::vector<T> partials) : v(std::move(value)), d(std::move(partials)) {}

    static Dual seed(T value, std::size_t n, std::size_t i)
    {
        std::vector<T> p(n, T(0.0));
        p[i] = T(1.0);
        return Dual(std::move(value), std::move(p));
    }

    [[nodiscard]] T partial(std::size_t i) const { return i < d.size() ? d[i] : T(0.0); }
};

using DualVec = Dual<double>;

namespace detail {

template <typename T, typename F>
std::vector<T> combine(const std::vector<T>& a, const std::vector<T>& b, F f)
{
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<T> r;
    r.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.push_back(f(i < a.size() ? a[i] : T(0.0), i < b.size() ? b[i] : T(0.0)));
    }
    return r;
}

template <typename T, typename S>
std::vector<T> scale(const std::vector<T>& a, const S& s)
{
    std::vector<T> r;
    r.reserve(a.size());
    for (const auto& x : a) r.push_back(x * s);
    return r;
}

}  // namespace detail

template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b)
{
    return {a.v + b.v, detail::combine(a.d, b.d, [](const T& x, const T& y) { return x + y; })};
}

template <typename T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b)
{
    return {a.v - b.v, detail::combine(a.d, b.d, [](const T& x, const T& y) { return x - y; })};
}

template <typename T>
Dual<T> operator-(const Dual<T>& a)
{
    return {-a.v, detail::scale(a.d, T(-1.0))};
}

template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b)
{
    const T& av = a.v;
    const T& bv = b.v;
    return {a.v * b.v, detail::combine(a.d, b.d, [&](const T& x, const T& y) { return x * bv + av * y; })};
}

// Scalar functions over double, Interval and Dual<T>. The double overloads
// report domain errors instead of producing NaN.
namespace math {

inline double div(double a, double b)
{
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}
inline double exp(double a) { return std::exp(a); }
inline double log(double a)
{
    if (!(a > 0.0)) throw DomainError("log of a nonpositive value");
    return std::log(a);
}
inline double sqrt(double a)
{
    if (a < 0.0) throw DomainError("sqrt of a negative value");
    return std::sqrt(a);
}
inline double abs(double a) { return std::abs(a); }
inline double sgn(double a) { return sipd::sgn(a); }
inline double ipow(double a, int n)
{
    if (n < 0 && a == 0.0) throw DomainError("negative power of zero");
    return sipd::ipow(a, n);
}
inline double clamp(double a, double lo, double hi) { return sipd::clamp(a, lo, hi); }
inline double clamp_slope(double a, double lo, double hi) { return sipd::clamp_slope(a, lo, hi); }

// Smooth two-sided clamp lo + sp(v - lo) - sp(v - hi) with sp(u) = log(1 + e^{tu}) / t.
// Its range is exactly the open interval (lo, hi) and it tends to mid(lo, v, hi) as t grows.
inline double softplus(double u, double t)
{
    const double z = t * u;
    return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / t;
}
inline double sigmoid(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}
inline double softclamp(double a, double lo, double hi, double t)
{
    return lo + softplus(a - lo, t) - softplus(a - hi, t);
}
inline double softclamp_slope(double a, double lo, double hi, double t)
{
    return sigmoid(t * (a - lo)) - sigmoid(t * (a - hi));
}
inline double softclamp_curv(double a, double lo, double hi, double t)
{
    const double s1 = sigmoid(t * (a - lo));
    const double s2 = sigmoid(t * (a - hi));
    return t * (s1 * (1.0 - s1) - s2 * (1.0 - s2));
}

inline Interval div(const Interval& a, const Interval& b) { return a / b; }
inline Interval exp(const Interval& a) { return sipd::exp(a); }
inline Interval log(const Interval& a) { return sipd::log(a); }
inline Interval sqrt(const Interval& a) { return sipd::sqrt(a); }
inline Interval abs(const Interval& a) { return sipd::abs(a); }
inline Interval sgn(const Interval& a) { return sipd::sgn(a); }
inline Interval ipow(const Interval& a, int n) { return sipd::ipow(a, n); }
inline Interval clamp(const Interval& a, double lo, double hi) { return sipd::clamp(a, lo, hi); }
inline Interval clamp_slope(const Interval& a, double lo, double hi) { return sipd::clamp_slope(a, lo, hi); }
inline Interval softclamp(const Interval& a, double lo, double hi, double t)
{
    return {softclamp(a.lo, lo, hi, t), softclamp(a.hi, lo, hi, t)};
}
// The slope is unimodal with its peak at the box centre.
inline Interval softclamp_slope(const Interval& a, double lo, double hi, double t)
{
    const double sa = softclamp_slope(a.lo, lo, hi, t);
    const double sb = softclamp_slope(a.hi, lo, hi, t);
    const double c = std::clamp(0.5 * (lo + hi), a.lo, a.hi);
    return {std::min(sa, sb), softclamp_slope(c, lo, hi, t)};
}

template <typename T> Dual<T> div(const Dual<T>& a, const Dual<T>& b);
template <typename T> Dual<T> exp(const Dual<T>& a);
template <typename T> Dual<T> log(const Dual<T>& a);
template <typename T> Dual<T> sqrt(const Dual<T>& a);
template <typename T> Dual<T> abs(const Dual<T>& a);
template <typename T> Dual<T> sgn(const Dual<T>& a);
template <typename T> Dual<T> ipow(const Dual<T>& a, int n);
template <typename T> Dual<T> clamp(const Dual<T>& a, double lo, double hi);
template <typename T> Dual<T> clamp_slope(const Dual<T>& a, double lo, double hi);
template <typename T> Dual<T> softclamp(const Dual<T>& a, double lo, double hi, double t);
template <typename T> Dual<T> softclamp_slope(const Dual<T>& a, double lo, double hi, double t);

template <typename T>
Dual<T> chain(const Dual<T>& a, T value, const T& slope)
{
    return {std::move(value), detail::scale(a.d, slope)};
}

template <typename T>
Dual<T> div(const Dual<T>& a, const Dual<T>& b)
{
    const T q = math::div(a.v, b.v);
    const T& bv = b.v;
    return {q, detail::combine(a.d, b.d, [&](const T& x, const T& y) { return math::div(x - q * y, bv); })};
}

template <typename T>
Dual<T> exp(const Dual<T>& a)
{
    T e = math::exp(a.v);
    return chain(a, e, e);
}

template <typename T>
Dual<T> log(const Dual<T>& a)
{
    return chain(a, math::log(a.v), math::div(T(1.0), a.v));
}

template <typename T>
Dual<T> sqrt(const Dual<T>& a)
{
    T s = math::sqrt(a.v);
    return chain(a, s, math::div(T(0.5), s));
}

template <typename T>
Dual<T> abs(const Dual<T>& a)
{
    return chain(a, math::abs(a.v), math::sgn(a.v));
}

template <typename T>
Dual<T> sgn(const Dual<T>& a)
{
    return {math::sgn(a.v), {}};
}

template <typename T>
Dual<T> ipow(const Dual<T>& a, int n)
{
    if (n == 0) return {T(1.0), {}};
    return chain(a, math::ipow(a.v, n), T(static_cast<double>(n)) * math::ipow(a.v, n - 1));
}

template <typename T>
Dual<T> clamp(const Dual<T>& a, double lo, double hi)
{
    return chain(a, math::clamp(a.v, lo, hi), math::clamp_slope(a.v, lo, hi));
}

template <typename T>
Dual<T> clamp_slope(const Dual<T>& a, double lo, double hi)
{
    return {math::clamp_slope(a.v, lo, hi), {}};
}

template <typename T>
Dual<T> softclamp(const Dual<T>& a, double lo, double hi, double t)
{
    return chain(a, math::softclamp(a.v, lo, hi, t), math::softclamp_slope(a.v, lo, hi, t));
}

template <typename T>
Dual<T> softclamp_slope(const Dual<T>& a, double lo, double hi, double t)
{
    if constexpr (std::is_same_v<T, double>) {
        return chain(a, math::softclamp_slope(a.v, lo, hi, t), math::softclamp_curv(a.v, lo, hi, t));
    } else {
        // Third derivatives are never requested; curvature enclosure is not needed.
        return {math::softclamp_slope(a.v, lo, hi, t), {}};
    }
}

}  // namespace math

}  // namespace sipd

#endif  // SIPD_DUAL_HPP
