#include "test_util.hpp"

#include <random>

using namespace babel17;
using namespace b17test;

namespace {

std::mt19937_64 rng(20260808);

double rand_double(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

Interval rand_interval() {
    double a = rand_double(-100, 100);
    double b = rand_double(-100, 100);
    return {std::min(a, b), std::max(a, b)};
}

double sample_inside(const Interval& x) { return rand_double(x.lo, x.hi); }

} // namespace

TEST_CASE("interval display takes min and max of the bounds") {
    CHECK(eval_str("[1.5; 1.5]") == "1.5");
    CHECK(eval_str("[2.0; 1.0]") == "[1.0; 2.0]");
    CHECK(eval_str("1.5") == "1.5");
    // int literals inside the bracket form do not auto-convert
    CHECK(is_error("[1; 2.0]", "DomainError"));
    CHECK(is_error("[\"a\"; 2.0]", "DomainError"));
}

TEST_CASE("enclosure: sampled points stay inside for every operation") {
    const int per_op = 10000;
    int escapes = 0;
    for (int i = 0; i < per_op; ++i) {
        Interval x = rand_interval();
        Interval y = rand_interval();
        double px = sample_inside(x);
        double py = sample_inside(y);

        Interval s = iv_add(x, y);
        if (!(px + py >= s.lo && px + py <= s.hi)) ++escapes;

        Interval d = iv_sub(x, y);
        if (!(px - py >= d.lo && px - py <= d.hi)) ++escapes;

        Interval m = iv_mul(x, y);
        if (!(px * py >= m.lo && px * py <= m.hi)) ++escapes;

        if (y.lo > 0 || y.hi < 0) {
            auto q = iv_div(x, y);
            REQUIRE(q.has_value());
            if (!(px / py >= q->lo && px / py <= q->hi)) ++escapes;
        }

        Interval n = iv_neg(x);
        if (!(-px >= n.lo && -px <= n.hi)) ++escapes;
    }
    CHECK(escapes == 0);
}

TEST_CASE("enclosure: integer powers") {
    int escapes = 0;
    for (int i = 0; i < 10000; ++i) {
        Interval x = rand_interval();
        long n = static_cast<long>(rng() % 7) - 3;
        if (n < 0 && x.lo <= 0 && x.hi >= 0) continue;
        auto p = iv_pow_int(x, n);
        if (!p) continue;
        double px = sample_inside(x);
        if (n < 0 && px == 0.0) continue;
        double v = std::pow(px, static_cast<double>(n));
        if (!(v >= p->lo && v <= p->hi)) ++escapes;
    }
    CHECK(escapes == 0);
}

TEST_CASE("the section 18 order on a 5x5 grid matches the formula") {
    std::vector<Interval> grid;
    const double pts[5] = {-1, 0, 1, 2, 3};
    for (double a : pts)
        for (double b : pts)
            if (a <= b) grid.push_back({a, b});
    for (const auto& x : grid) {
        for (const auto& y : grid) {
            bool le = x.hi < y.lo || (x.lo == y.lo && x.hi == y.hi); // the formula, directly
            bool ge = y.hi < x.lo || (x.lo == y.lo && x.hi == y.hi);
            auto c = iv_compare(x, y);
            if (le && ge) {
                REQUIRE(c.has_value());
                CHECK(*c == 0);
            } else if (le) {
                REQUIRE(c.has_value());
                CHECK(*c < 0);
            } else if (ge) {
                REQUIRE(c.has_value());
                CHECK(*c > 0);
            } else {
                CHECK_FALSE(c.has_value());
            }
        }
    }
}

TEST_CASE("order on reals is a partial order") {
    std::vector<Interval> xs;
    for (int i = 0; i < 40; ++i) xs.push_back(rand_interval());
    for (const auto& a : xs) {
        auto c = iv_compare(a, a);
        REQUIRE(c.has_value());
        CHECK(*c == 0);
    }
    for (const auto& a : xs)
        for (const auto& b : xs) {
            auto ab = iv_compare(a, b);
            auto ba = iv_compare(b, a);
            if (ab && ba) CHECK(*ab == -*ba);
        }
    for (const auto& a : xs)
        for (const auto& b : xs)
            for (const auto& c : xs) {
                auto ab = iv_compare(a, b);
                auto bc = iv_compare(b, c);
                auto ac = iv_compare(a, c);
                if (ab && bc && *ab <= 0 && *bc <= 0 && !(a.lo == c.lo && a.hi == c.hi)) {
                    if (*ab == 0 || *bc == 0) continue; // equality cases collapse
                    REQUIRE(ac.has_value());
                    CHECK(*ac <= 0);
                }
            }
}

TEST_CASE("division by an interval containing zero is a domain error") {
    CHECK_FALSE(iv_div({1, 2}, {-1, 1}).has_value());
    CHECK(is_error("1.0 / 0.0", "DomainError"));
    CHECK(eval_str("1.0 / 2.0") == "0.5");
}

TEST_CASE("real to int conversions") {
    CHECK(eval_str("5.1 :> int") == "5");
    CHECK(eval_str("0.0 :> int") == "0");
    CHECK(eval_str("-5.1 :> int") == "-5"); // truncation toward zero
    // the automatic direction accepts integral points only
    CHECK(eval_str("5 == 5.0") == "true");
    CHECK(eval_str("5 == 5.1") == "false");
    CHECK(eval_str("5 < 5.1") == "true");
}

TEST_CASE("int to real conversions") {
    CHECK(eval_str("(5 :> real) == 5.0") == "true");
    CHECK(is_error("(5 ^ 1000) :> real", "DomainError"));
    Int big(mpz_class("9007199254740993")); // 2^53 + 1
    double lo, hi;
    REQUIRE(big.double_bracket(lo, hi));
    CHECK(lo < hi);
    CHECK(lo == 9007199254740992.0);
    CHECK(mpz_class(lo) < big.raw());
    CHECK(mpz_class(hi) > big.raw());
}

TEST_CASE("point intervals embed small integers faithfully") {
    for (long a = -60; a <= 60; a += 7)
        for (long b = -60; b <= 60; b += 11) {
            auto ia = int_to_iv(Int(a));
            auto ib = int_to_iv(Int(b));
            REQUIRE(ia);
            REQUIRE(ib);
            auto c = iv_compare(*ia, *ib);
            REQUIRE(c.has_value());
            CHECK(*c == (a < b ? -1 : (a == b ? 0 : 1)));
        }
}

TEST_CASE("interval arithmetic through the language") {
    CHECK(same_value("1.5 * 2.0", "3.0"));
    CHECK(same_value("-(1.5)", "-1.5")); // negation keeps points exact
    CHECK(same_value("2.0 ^ 3.0", "8.0"));
    CHECK(is_error("(-2.0) ^ 0.5", "DomainError"));
    CHECK(eval_str("[1.0; 2.0] < [3.0; 4.0]") == "true");
}

TEST_CASE("real rendering uses the interval form") {
    CHECK(eval_str("[1.0; 2.0]") == "[1.0; 2.0]");
    CHECK(eval_str("150E-1") == "15.0");
    CHECK(eval_str("1.5E+1") == "15.0");
}
