#pragma once

#include "babel17/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

namespace babel17 {

// A real is a closed interval [lo; hi] of binary64 numbers, lo <= hi, no NaNs.
// Arithmetic encloses the pointwise image; inexact operations widen each bound
// outward by one ulp instead of using directed rounding modes.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double a, double b) : lo(a), hi(b) {}

    static Interval point(double v) { return {v, v}; }
    bool is_point() const { return lo == hi; }

    // [min(a1,b1); max(a2,b2)], the two-expression display form.
    static Interval join(const Interval& a, const Interval& b) {
        return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
};

namespace iv_detail {

inline double down(double x) {
    if (std::isinf(x)) return x;
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

inline double up(double x) {
    if (std::isinf(x)) return x;
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}

// Directed bounds from round-to-nearest results. The rounding error's sign
// (TwoSum for +, fma residual for * and /) tells whether the computed value
// already bounds the exact one; only then is a one-ulp step needed.

inline double add_bound(double x, double y, bool want_lower) {
    double s = x + y;
    if (std::isnan(s)) return want_lower ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
    if (std::isinf(s)) return s;
    double yv = s - x;
    double xv = s - yv;
    double err = (x - xv) + (y - yv); // exact value is s + err
    if (err == 0.0) return s;
    if (want_lower) return err > 0.0 ? s : down(s);
    return err < 0.0 ? s : up(s);
}

inline double mul_bound(double x, double y, bool want_lower) {
    if ((x == 0.0 && std::isinf(y)) || (y == 0.0 && std::isinf(x))) return 0.0;
    double p = x * y;
    if (std::isnan(p)) return want_lower ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
    if (std::isinf(p)) return p;
    double err = std::fma(x, y, -p); // exact value is p + err
    if (err == 0.0) return p;
    if (want_lower) return err > 0.0 ? p : down(p);
    return err < 0.0 ? p : up(p);
}

inline double div_bound(double x, double y, bool want_lower) {
    double q = x / y;
    if (std::isnan(q)) return want_lower ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
    if (std::isinf(q)) return q;
    double rem = std::fma(-q, y, x); // exact quotient is q + rem/y
    if (rem == 0.0) return q;
    bool exact_above = (rem > 0.0) == (y > 0.0);
    if (want_lower) return exact_above ? q : down(q);
    return exact_above ? up(q) : q;
}

template <typename F> inline double fold_min(const Interval& a, const Interval& b, F f) {
    return std::min(std::min(f(a.lo, b.lo), f(a.lo, b.hi)), std::min(f(a.hi, b.lo), f(a.hi, b.hi)));
}
template <typename F> inline double fold_max(const Interval& a, const Interval& b, F f) {
    return std::max(std::max(f(a.lo, b.lo), f(a.lo, b.hi)), std::max(f(a.hi, b.lo), f(a.hi, b.hi)));
}

inline Interval widen(double lo, double hi) {
    if (std::isnan(lo)) lo = -std::numeric_limits<double>::infinity();
    if (std::isnan(hi)) hi = std::numeric_limits<double>::infinity();
    return {down(lo), up(hi)};
}

} // namespace iv_detail

inline Interval iv_add(const Interval& a, const Interval& b) {
    using namespace iv_detail;
    return {add_bound(a.lo, b.lo, true), add_bound(a.hi, b.hi, false)};
}

inline Interval iv_sub(const Interval& a, const Interval& b) {
    using namespace iv_detail;
    return {add_bound(a.lo, -b.hi, true), add_bound(a.hi, -b.lo, false)};
}

inline Interval iv_neg(const Interval& a) { return {-a.hi, -a.lo}; } // exact

inline Interval iv_mul(const Interval& a, const Interval& b) {
    using namespace iv_detail;
    double lo = fold_min(a, b, [](double x, double y) { return mul_bound(x, y, true); });
    double hi = fold_max(a, b, [](double x, double y) { return mul_bound(x, y, false); });
    return {lo, hi};
}

// Division by an interval containing zero is a domain error (caller raises).
inline std::optional<Interval> iv_div(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) return std::nullopt;
    using namespace iv_detail;
    double lo = fold_min(a, b, [](double x, double y) { return div_bound(x, y, true); });
    double hi = fold_max(a, b, [](double x, double y) { return div_bound(x, y, false); });
    return Interval{lo, hi};
}

// x^n for integer n, via interval square-and-multiply (keeps exact powers
// exact); even powers are intersected with [0, inf).
inline std::optional<Interval> iv_pow_int(const Interval& x, long n) {
    if (n == 0) return Interval::point(1.0);
    if (n < 0) {
        auto base = iv_pow_int(x, -n);
        if (!base) return std::nullopt;
        return iv_div(Interval::point(1.0), *base);
    }
    Interval acc = Interval::point(1.0);
    Interval sq = x;
    long e = n;
    while (e > 0) {
        if (e & 1) acc = iv_mul(acc, sq);
        e >>= 1;
        if (e) sq = iv_mul(sq, sq);
    }
    if (n % 2 == 0 && acc.lo < 0.0) acc.lo = 0.0;
    return acc;
}

// General power. Integer-point exponents use case analysis; otherwise the
// base must be strictly positive (corner extrema are then exact for the
// monotone-in-each-argument pow).
inline std::optional<Interval> iv_pow(const Interval& x, const Interval& y) {
    if (y.is_point() && std::isfinite(y.lo) && y.lo == std::trunc(y.lo) && std::abs(y.lo) < 1e15)
        return iv_pow_int(x, static_cast<long>(y.lo));
    if (x.lo <= 0.0) return std::nullopt;
    using namespace iv_detail;
    double mn = fold_min(x, y, [](double b, double e) { return std::pow(b, e); });
    double mx = fold_max(x, y, [](double b, double e) { return std::pow(b, e); });
    return widen(mn, mx);
}

// The section-18 order: [a1;a2] <= [b1;b2]  iff  a2 < b1 or (a1 = b1 and a2 = b2).
// Returns -1/0/+1 or nullopt for unrelated.
inline std::optional<int> iv_compare(const Interval& a, const Interval& b) {
    if (a.lo == b.lo && a.hi == b.hi) return 0;
    if (a.hi < b.lo) return -1;
    if (b.hi < a.lo) return 1;
    return std::nullopt;
}

// Conversions. real -> int truncates the midpoint toward zero (explicit
// conversion); the automatic direction accepts integral points only.
inline std::optional<Int> iv_to_int_explicit(const Interval& r) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) return std::nullopt;
    double mid = r.lo / 2.0 + r.hi / 2.0;
    return Int::from_double_trunc(mid);
}

inline std::optional<Int> iv_to_int_auto(const Interval& r) {
    if (!r.is_point() || !std::isfinite(r.lo)) return std::nullopt;
    if (r.lo != std::trunc(r.lo)) return std::nullopt;
    return Int::from_double_trunc(r.lo);
}

inline std::optional<Interval> int_to_iv(const Int& n) {
    double lo, hi;
    if (!n.double_bracket(lo, hi)) return std::nullopt;
    return Interval{lo, hi};
}

// Shortest decimal that round-trips through binary64.
inline std::string render_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream os;
        os.precision(prec);
        os << v;
        std::string s = os.str();
        if (std::stod(s) == v) {
            if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
                s.find("inf") == std::string::npos && s.find('n') == std::string::npos)
                s += ".0";
            return s;
        }
    }
    return std::to_string(v);
}

inline std::string render_interval(const Interval& r) {
    if (r.is_point()) return render_double(r.lo);
    return "[" + render_double(r.lo) + "; " + render_double(r.hi) + "]";
}

} // namespace babel17
