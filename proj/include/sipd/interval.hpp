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

#ifndef SIPD_INTERVAL_HPP
#define SIPD_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sipd {

/// Thrown when an operation is undefined at a point (or over a whole interval).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval [lo, hi] with natural-extension arithmetic.
// NOTE: endpoints are not outward rounded; enclosures are exact up to
// floating-point truncation, which is far below every tolerance used here.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr Interval() = default;
    constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
    constexpr Interval(double l, double h) : lo(l), hi(h) {}

    static constexpr Interval entire() { return {-kInf, kInf}; }

    [[nodiscard]] double width() const { return hi - lo; }
    [[nodiscard]] double mid() const
    {
        if (std::isinf(lo) || std::isinf(hi)) {
            if (std::isinf(lo) && std::isinf(hi)) return 0.0;
            return std::isinf(lo) ? hi : lo;
        }
        return 0.5 * (lo + hi);
    }
    [[nodiscard]] bool contains(double v) const { return lo <= v && v <= hi; }
    [[nodiscard]] bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    [[nodiscard]] bool empty() const { return !(lo <= hi); }
    [[nodiscard]] double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
};

inline bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }

inline std::ostream& operator<<(std::ostream& os, const Interval& a)
{
    return os << '[' << a.lo << ", " << a.hi << ']';
}

inline Interval hull(const Interval& a, const Interval& b)
{
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

/// Intersection; the result may be empty (lo > hi).
inline Interval intersect(const Interval& a, const Interval& b)
{
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

namespace detail {
// 0 * inf is taken as 0 for endpoint products.
inline double emul(double a, double b)
{
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}
}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b)
{
    using detail::emul;
    const double p1 = emul(a.lo, b.lo);
    const double p2 = emul(a.lo, b.hi);
    const double p3 = emul(a.hi, b.lo);
    const double p4 = emul(a.hi, b.hi);
    return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval operator/(const Interval& a, const Interval& b)
{
    if (b.lo == 0.0 && b.hi == 0.0) throw DomainError("interval division by [0, 0]");
    if (b.lo > 0.0 || b.hi < 0.0) {
        const Interval inv{1.0 / b.hi, 1.0 / b.lo};
        return a * inv;
    }
    if (a.lo == 0.0 && a.hi == 0.0) return {0.0, 0.0};
    return Interval::entire();
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }
inline Interval& operator/=(Interval& a, const Interval& b) { return a = a / b; }

inline Interval exp(const Interval& a) { return {std::exp(a.lo), std::exp(a.hi)}; }

inline Interval log(const Interval& a)
{
    if (a.hi <= 0.0) throw DomainError("log of a nonpositive interval");
    return {a.lo <= 0.0 ? -kInf : std::log(a.lo), std::log(a.hi)};
}

inline Interval sqrt(const Interval& a)
{
    if (a.hi < 0.0) throw DomainError("sqrt of a negative interval");
    return {a.lo <= 0.0 ? 0.0 : std::sqrt(a.lo), std::sqrt(a.hi)};
}

inline Interval abs(const Interval& a)
{
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return -a;
    return {0.0, std::max(-a.lo, a.hi)};
}

/// Sharp integer power (even powers of a zero-straddling interval start at 0).
inline Interval ipow(const Interval& a, int n)
{
    if (n == 0) return {1.0, 1.0};
    if (n < 0) return Interval{1.0} / ipow(a, -n);
    const double l = std::pow(a.lo, n);
    const double h = std::pow(a.hi, n);
    if (n % 2 == 1) return {l, h};
    if (a.lo >= 0.0) return {l, h};
    if (a.hi <= 0.0) return {h, l};
    return {0.0, std::max(l, h)};
}

/// Derivative enclosure of |v|; [-1, 1] whenever the interval touches 0.
inline Interval sgn(const Interval& a)
{
    if (a.lo > 0.0) return {1.0, 1.0};
    if (a.hi < 0.0) return {-1.0, -1.0};
    return {-1.0, 1.0};
}

/// Componentwise clamp mid(lo, v, hi); monotone, so endpoints map to endpoints.
inline Interval clamp(const Interval& a, double lo, double hi)
{
    return {std::clamp(a.lo, lo, hi), std::clamp(a.hi, lo, hi)};
}

inline Interval clamp_slope(const Interval& a, double lo, double hi)
{
    if (a.lo > lo && a.hi < hi) return {1.0, 1.0};
    if (a.hi < lo || a.lo > hi) return {0.0, 0.0};
    return {0.0, 1.0};
}

// Scalar counterparts used by the generic evaluator.
inline double ipow(double a, int n)
{
    if (n < 0) return 1.0 / ipow(a, -n);
    double r = 1.0;
    double b = a;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

/// Sign with the one-sided convention sgn(0) = 0 (derivative of |v| at 0).
inline double sgn(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); }

inline double clamp(double a, double lo, double hi) { return std::clamp(a, lo, hi); }

inline double clamp_slope(double a, double lo, double hi) { return (a > lo && a < hi) ? 1.0 : 0.0; }

}  // namespace sipd

#endif  // SIPD_INTERVAL_HPP
