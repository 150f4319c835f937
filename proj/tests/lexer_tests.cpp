#include "babel17/lexer.hpp"

#include <catch2/catch.hpp>
#include <random>

using namespace babel17;

static std::vector<Token> lex(const std::string& src) { return tokenize(src); }

static std::vector<Token> significant(const std::string& src) {
    std::vector<Token> out;
    for (auto& t : lex(src))
        if (t.kind != Tok::Newline && t.kind != Tok::Eof) out.push_back(t);
    return out;
}

TEST_CASE("integer notations denote the same value") {
    auto toks = significant("15 0xF 0b1111 0o17");
    REQUIRE(toks.size() == 4);
    for (auto& t : toks) {
        CHECK(t.kind == Tok::IntLit);
        CHECK(t.int_value == Int(15));
    }
}

TEST_CASE("radix independence for random 64-bit values") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        unsigned long long n = rng();
        Int v(mpz_class(std::to_string(n)));
        std::string dec = v.to_string_base(10);
        std::string hex = "0x" + v.to_string_base(16);
        std::string bin = "0b" + v.to_string_base(2);
        std::string oct = "0o" + v.to_string_base(8);
        for (const auto& text : {dec, hex, bin, oct}) {
            auto toks = significant(text);
            REQUIRE(toks.size() == 1);
            CHECK(toks[0].int_value == v);
        }
    }
}

TEST_CASE("real literal forms") {
    auto toks = significant("15.0 1.5E1 1.5E+1 150E-1 15e0");
    REQUIRE(toks.size() == 5);
    for (auto& t : toks) {
        CHECK(t.kind == Tok::RealLit);
        CHECK(t.real_value == 15.0);
    }
}

TEST_CASE("dot after integer is a message send, not a real") {
    auto toks = significant("3.plus_ 5");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].kind == Tok::IntLit);
    CHECK(toks[1].is_sym("."));
    CHECK(toks[2].text == "plus_");
}

TEST_CASE("string escapes") {
    auto toks = significant("\"\\u000A\"");
    REQUIRE(toks.size() == 1);
    REQUIRE(toks[0].kind == Tok::StringLit);
    CHECK(toks[0].str_value == std::u32string{U'\n'});

    CHECK(decode_string_literal("\\\"") == std::u32string{U'"'});
    CHECK(decode_string_literal("hello world").size() == 11);
    CHECK(decode_string_literal("\\U0000000A") == std::u32string{U'\n'});
    CHECK(decode_string_literal("\\\\") == std::u32string{U'\\'});
}

TEST_CASE("string errors") {
    CHECK_THROWS_AS(lex("\"abc"), StaticError);
    CHECK_THROWS_AS(lex("\"a\nb\""), StaticError);
    CHECK_THROWS_AS(lex("\"\\q\""), StaticError);
    CHECK_THROWS_AS(lex("\"\\uD800\""), StaticError); // surrogate
    CHECK_THROWS_AS(lex("\"\\U00110000\""), StaticError);
}

TEST_CASE("constructors are case-insensitive") {
    auto toks = significant("Begin BEGIN");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].kind == Tok::Constructor);
    CHECK(toks[1].kind == Tok::Constructor);
    CHECK(toks[0].text == toks[1].text);
}

TEST_CASE("identifier case folding") {
    auto a = significant("foo");
    auto b = significant("fOO");
    CHECK(a[0].kind == Tok::Identifier);
    CHECK(a[0].text == b[0].text);
}

TEST_CASE("empty input lexes to eof only") {
    auto toks = lex("");
    REQUIRE(toks.size() == 1);
    CHECK(toks[0].kind == Tok::Eof);
}

TEST_CASE("mis-capitalized keywords are errors") {
    CHECK_THROWS_AS(lex("bEGIN"), StaticError);
    CHECK_THROWS_AS(lex("tRue"), StaticError);
}

TEST_CASE("Val is a constructor, not a keyword error") {
    auto toks = significant("Val");
    REQUIRE(toks.size() == 1);
    CHECK(toks[0].kind == Tok::Constructor);
    CHECK(toks[0].text == "val");
}

TEST_CASE("keywords must be lower-case") {
    auto toks = significant("begin end val");
    CHECK(toks[0].is_kw("begin"));
    CHECK(toks[1].is_kw("end"));
    CHECK(toks[2].is_kw("val"));
}

TEST_CASE("comments produce no tokens") {
    CHECK(significant("## a line comment").empty());
    CHECK(significant("#( nested #( inner )# outer )#").empty());
    auto toks = significant("1 #( two )# 3");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].int_value == Int(1));
    CHECK(toks[1].int_value == Int(3));
    CHECK_THROWS_AS(lex("#( open"), StaticError);
}

TEST_CASE("pragma markers") {
    auto toks = significant("#assert 1");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].kind == Tok::Pragma);
    CHECK(toks[0].text == "assert");
    CHECK_THROWS_AS(lex("#bogus 1"), StaticError);
}

TEST_CASE("unicode operators carry their ascii form") {
    auto toks = significant("a ≤ b ≥ c ≡ d ≢ e → f ⇒ g … h");
    std::vector<std::string> syms;
    for (auto& t : toks)
        if (t.kind == Tok::Symbol) syms.push_back(t.text);
    CHECK(syms == std::vector<std::string>{"<=", ">=", "==", "<>", "->", "=>", "..."});
}

TEST_CASE("newlines separate statements but not broken expressions") {
    // newline after an infix symbol is suppressed
    auto toks = lex("1 +\n2");
    bool has_newline = false;
    for (auto& t : toks) has_newline |= t.kind == Tok::Newline;
    CHECK_FALSE(has_newline);

    // newline between statements is kept
    toks = lex("val x = 1\nval y = 2");
    has_newline = false;
    for (auto& t : toks) has_newline |= t.kind == Tok::Newline;
    CHECK(has_newline);
}

TEST_CASE("no token spans a newline") {
    auto toks = lex("val xy = \"ab\"\nval z = 3");
    for (auto& t : toks) {
        if (t.kind == Tok::Newline || t.kind == Tok::Eof) continue;
        CHECK(t.raw.find('\n') == std::string::npos);
    }
}

TEST_CASE("token round-trip: re-lexing raw gives the same token") {
    const std::string src = "val x1 = 0xFF + foo.bar_ (1, \"s\\n\") :: [] ≤ 2.5e3 #assert Cons";
    for (auto& t : lex(src)) {
        if (t.kind == Tok::Newline || t.kind == Tok::Eof) continue;
        auto again = significant(t.raw);
        REQUIRE(again.size() == 1);
        CHECK(again[0].kind == t.kind);
        CHECK(again[0].text == t.text);
        if (t.kind == Tok::IntLit) CHECK(again[0].int_value == t.int_value);
        if (t.kind == Tok::RealLit) CHECK(again[0].real_value == t.real_value);
        if (t.kind == Tok::StringLit) CHECK(again[0].str_value == t.str_value);
    }
}

TEST_CASE("positions are 1-based and count code points") {
    auto toks = significant("αβ x");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].pos.line == 1);
    CHECK(toks[0].pos.column == 1);
    CHECK(toks[1].pos.column == 4); // two greek letters + space
}

TEST_CASE("invalid utf8 is rejected") {
    std::string bad = "val x = \"";
    bad.push_back(static_cast<char>(0xC0)); // overlong start
    bad.push_back(static_cast<char>(0xAF));
    bad += "\"";
    CHECK_THROWS_AS(lex(bad), StaticError);
}

TEST_CASE("malformed numeric literals") {
    CHECK_THROWS_AS(lex("0x"), StaticError);
    CHECK_THROWS_AS(lex("1.5e"), StaticError);
    CHECK_THROWS_AS(lex("12abc"), StaticError);
    CHECK_THROWS_AS(lex("0b2"), StaticError);
}

TEST_CASE("underscore starts nothing but the wildcard") {
    auto toks = significant("_");
    CHECK(toks[0].is_sym("_"));
    CHECK_THROWS_AS(lex("_foo"), StaticError);
}
