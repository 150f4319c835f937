#pragma once

#include <cmath>
#include <cstdint>
#include <gmpxx.h>
#include <limits>
#include <optional>
#include <string>

namespace babel17 {

// Arbitrary-size integer. Wraps mpz; all language-visible semantics
// (Euclidean division, radix parsing, double brackets) live here.
class Int {
public:
    Int() = default;
    Int(long v) : z_(v) {}
    explicit Int(const mpz_class& z) : z_(z) {}

    // Parses a literal in one of the four notations: decimal, 0x.., 0b.., 0o..
    // The input must already be syntactically valid (lexer's job).
    static Int parse_literal(const std::string& text) {
        if (text.size() > 2 && text[0] == '0') {
            char tag = text[1];
            std::string digits = text.substr(2);
            if (tag == 'x' || tag == 'X') return Int(mpz_class(digits, 16));
            if (tag == 'b' || tag == 'B') return Int(mpz_class(digits, 2));
            if (tag == 'o' || tag == 'O') return Int(mpz_class(digits, 8));
        }
        return Int(mpz_class(text, 10));
    }

    static std::optional<Int> parse_decimal(const std::string& text) {
        if (text.empty()) return std::nullopt;
        std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
        if (i == text.size()) return std::nullopt;
        for (std::size_t k = i; k < text.size(); ++k)
            if (text[k] < '0' || text[k] > '9') return std::nullopt;
        mpz_class z(text, 10);
        return Int(z);
    }

    Int operator+(const Int& o) const { return Int(mpz_class(z_ + o.z_)); }
    Int operator-(const Int& o) const { return Int(mpz_class(z_ - o.z_)); }
    Int operator*(const Int& o) const { return Int(mpz_class(z_ * o.z_)); }
    Int operator-() const { return Int(mpz_class(-z_)); }

    // Euclidean division: n = d*q + r with 0 <= r < |d|. Divisor must be nonzero.
    Int div_euclid(const Int& d) const {
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), z_.get_mpz_t(), d.z_.get_mpz_t());
        if (sgn(d.z_) < 0) {
            mpz_class r;
            mpz_fdiv_r(r.get_mpz_t(), z_.get_mpz_t(), d.z_.get_mpz_t());
            if (r != 0) q += 1;
        }
        return Int(q);
    }

    Int mod_euclid(const Int& d) const {
        mpz_class r;
        mpz_mod(r.get_mpz_t(), z_.get_mpz_t(), d.z_.get_mpz_t()); // always nonnegative
        return Int(r);
    }

    // n^e for e >= 0; caller rejects negative exponents.
    Int pow(unsigned long e) const {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), z_.get_mpz_t(), e);
        return Int(r);
    }

    int cmp(const Int& o) const { return ::cmp(z_, o.z_) < 0 ? -1 : (::cmp(z_, o.z_) > 0 ? 1 : 0); }
    bool operator==(const Int& o) const { return z_ == o.z_; }
    bool operator<(const Int& o) const { return z_ < o.z_; }

    bool is_zero() const { return z_ == 0; }
    int sign() const { return sgn(z_); }

    bool fits_slong() const { return z_.fits_slong_p(); }
    long to_slong() const { return z_.get_si(); }
    bool fits_ulong() const { return z_.fits_ulong_p(); }
    unsigned long to_ulong() const { return z_.get_ui(); }

    std::string to_string() const { return z_.get_str(10); }
    std::string to_string_base(int base) const { return z_.get_str(base); }

    // Tightest double bracket around the exact value: lo = greatest double <= n,
    // hi = least double >= n. Fails when |n| exceeds the binary64 range.
    bool double_bracket(double& lo, double& hi) const {
        if (mpz_sizeinbase(z_.get_mpz_t(), 2) > 1024) return false;
        double d = z_.get_d(); // truncated toward zero
        if (std::isinf(d)) return false;
        mpz_class back(d);
        if (back == z_) {
            lo = hi = d;
            return true;
        }
        if (back < z_) {
            lo = d;
            hi = std::nextafter(d, std::numeric_limits<double>::infinity());
        } else {
            hi = d;
            lo = std::nextafter(d, -std::numeric_limits<double>::infinity());
        }
        return true;
    }

    // Truncates a finite double toward zero.
    static Int from_double_trunc(double d) { return Int(mpz_class(std::trunc(d))); }

    const mpz_class& raw() const { return z_; }

private:
    mpz_class z_;
};

} // namespace babel17
