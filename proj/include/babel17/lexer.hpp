#pragma once

#include "babel17/token.hpp"
#include "babel17/unicode.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace babel17 {

namespace lex_detail {

// Longest-match symbol table. Must stay sorted by decreasing length.
inline const std::vector<std::string>& symbols() {
    static const std::vector<std::string> syms = {
        "...", "++=", "=++", "--=", "=--", "**=", "=**", "//=", "=//",
        "==",  "<>",  "<=",  ">=",  "++",  "--",  "**",  "//",  "::",
        "->",  "=>",  ":>",  "+=",  "=+",  "-=",  "=-",  "*=",  "=*",
        "/=",  "=/",  "^=",  "=^",
        "=",   "<",   ">",   "+",   "-",   "*",   "/",   "^",   ";",
        "|",   "&",   "!",   ",",   "?",   "(",   ")",   "[",   "]",
        "{",   "}",   ".",   ":",   "~",   "_",
    };
    return syms;
}

inline const char* unicode_symbol(char32_t cp) {
    switch (cp) {
    case 0x2261: return "==";
    case 0x2262: return "<>";
    case 0x2264: return "<=";
    case 0x2265: return ">=";
    case 0x2237: return "::";
    case 0x2192: return "->";
    case 0x21D2: return "=>";
    case 0x2026: return "...";
    default: return nullptr;
    }
}

inline bool keyword_cannot_end_statement(const std::string& kw) {
    static const std::unordered_set<std::string> set = {
        "then", "else", "elseif", "do",     "in",         "case",  "try",    "catch",
        "with", "and",  "or",     "xor",    "not",        "div",   "mod",    "to",
        "downto", "exception",    "lazy",   "concurrent", "force", "typeof", "random",
        "choose", "native",       "min",    "max",        "lens",
    };
    return set.count(kw) > 0;
}

} // namespace lex_detail

class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    // Lexes the whole input. Throws StaticError on the first problem.
    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments(out);
            if (at_end()) break;
            SourcePos start = pos();
            char32_t c = peek_cp();
            if (c == U'\n' || c == U'\r') {
                consume_newline();
                if (suppress_newline(out)) continue;
                out.push_back(make(Tok::Newline, start, "\n"));
                continue;
            }
            if (uni::is_ascii_digit(c)) {
                lex_number(out, start);
                continue;
            }
            if (uni::is_letter(c)) {
                lex_word(out, start);
                continue;
            }
            if (c == U'"') {
                lex_string(out, start);
                continue;
            }
            if (c == U'_') {
                advance_cp();
                if (!at_end() && uni::is_word_char(peek_cp()))
                    fail(start, "identifiers may not start with an underscore");
                out.push_back(make(Tok::Symbol, start, "_"));
                continue;
            }
            if (const char* eq = lex_detail::unicode_symbol(c)) {
                advance_cp();
                Token t = make(Tok::Symbol, start, eq);
                t.text = eq;
                out.push_back(std::move(t));
                continue;
            }
            if (lex_symbol(out, start)) continue;
            fail(start, "unexpected character");
        }
        out.push_back(make(Tok::Eof, pos(), ""));
        return out;
    }

private:
    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;

    bool at_end() const { return i_ >= src_.size(); }
    SourcePos pos() const { return {line_, col_, i_}; }

    char32_t peek_cp() {
        std::size_t j = i_;
        auto cp = uni::decode_utf8(src_, j);
        if (!cp) fail(pos(), "invalid UTF-8");
        return *cp;
    }

    char peek_byte(std::size_t ahead = 0) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }

    char32_t advance_cp() {
        auto cp = uni::decode_utf8(src_, i_);
        if (!cp) fail(pos(), "invalid UTF-8");
        if (*cp == U'\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return *cp;
    }

    void consume_newline() {
        char32_t c = advance_cp();
        if (c == U'\r') {
            if (!at_end() && peek_byte() == '\n') {
                advance_cp();
            } else {
                ++line_; // \r alone counts as a line break too
                col_ = 1;
            }
        }
    }

    [[noreturn]] void fail(SourcePos p, std::string msg) const {
        throw StaticError(ErrorStage::Lex, p, std::move(msg));
    }

    Token make(Tok kind, SourcePos start, std::string text) const {
        Token t;
        t.kind = kind;
        t.pos = start;
        t.raw = std::string(src_.substr(start.offset, i_ - start.offset));
        t.text = std::move(text);
        return t;
    }

    // A newline is dropped after tokens that cannot end a statement, so
    // expressions can break across lines without a layout rule.
    bool suppress_newline(const std::vector<Token>& out) const {
        if (out.empty()) return true;
        const Token& prev = out.back();
        switch (prev.kind) {
        case Tok::Newline: return true;
        case Tok::Symbol:
            return prev.text != ")" && prev.text != "]" && prev.text != "}" && prev.text != "_";
        case Tok::Keyword: return lex_detail::keyword_cannot_end_statement(prev.text);
        default: return false;
        }
    }

    void skip_space_and_comments(std::vector<Token>& out) {
        for (;;) {
            if (at_end()) return;
            char b = peek_byte();
            if (b == ' ' || b == '\t') {
                advance_cp();
                continue;
            }
            if (b == '#') {
                char b1 = peek_byte(1);
                if (b1 == '(') {
                    skip_block_comment();
                    continue;
                }
                if (b1 == '#') {
                    while (!at_end() && peek_byte() != '\n' && peek_byte() != '\r') advance_cp();
                    continue;
                }
                lex_pragma(out);
                continue;
            }
            return;
        }
    }

    void skip_block_comment() {
        SourcePos start = pos();
        advance_cp(); // '#'
        advance_cp(); // '('
        int depth = 1;
        while (depth > 0) {
            if (at_end()) fail(start, "unterminated block comment");
            char b = peek_byte();
            if (b == '#' && peek_byte(1) == '(') {
                advance_cp();
                advance_cp();
                ++depth;
            } else if (b == ')' && peek_byte(1) == '#') {
                advance_cp();
                advance_cp();
                --depth;
            } else {
                advance_cp();
            }
        }
    }

    void lex_pragma(std::vector<Token>& out) {
        SourcePos start = pos();
        advance_cp(); // '#'
        std::string name;
        while (!at_end() && uni::is_word_char(peek_cp())) {
            char32_t c = advance_cp();
            uni::encode_utf8(c, name);
        }
        static const std::unordered_set<std::string> known = {"assert", "catch", "log", "print", "profile"};
        if (!known.count(name)) fail(start, "unknown pragma '#" + name + "'");
        out.push_back(make(Tok::Pragma, start, name));
    }

    void lex_number(std::vector<Token>& out, SourcePos start) {
        std::string text;
        auto take = [&] { uni::encode_utf8(advance_cp(), text); };
        char b0 = peek_byte();
        if (b0 == '0' && (peek_byte(1) == 'x' || peek_byte(1) == 'X' || peek_byte(1) == 'b' ||
                          peek_byte(1) == 'B' || peek_byte(1) == 'o' || peek_byte(1) == 'O')) {
            take();
            char tag = peek_byte();
            take();
            auto digit_ok = [&](char c) {
                if (tag == 'x' || tag == 'X')
                    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
                if (tag == 'b' || tag == 'B') return c == '0' || c == '1';
                return c >= '0' && c <= '7';
            };
            bool any = false;
            while (!at_end() && digit_ok(peek_byte())) {
                take();
                any = true;
            }
            if (!any) fail(start, "malformed numeric literal");
            if (!at_end() && uni::is_word_char(peek_cp())) fail(start, "malformed numeric literal");
            Token t = make(Tok::IntLit, start, text);
            t.int_value = Int::parse_literal(text);
            out.push_back(std::move(t));
            return;
        }
        while (!at_end() && uni::is_ascii_digit(peek_cp())) take();
        bool is_real = false;
        if (!at_end() && peek_byte() == '.' && i_ + 1 < src_.size() &&
            uni::is_ascii_digit(static_cast<unsigned char>(src_[i_ + 1]))) {
            is_real = true;
            take(); // '.'
            while (!at_end() && uni::is_ascii_digit(peek_cp())) take();
        }
        if (!at_end() && (peek_byte() == 'e' || peek_byte() == 'E')) {
            is_real = true;
            take();
            if (!at_end() && (peek_byte() == '+' || peek_byte() == '-')) take();
            if (at_end() || !uni::is_ascii_digit(peek_cp())) fail(start, "malformed numeric literal");
            while (!at_end() && uni::is_ascii_digit(peek_cp())) take();
        }
        if (!at_end() && uni::is_word_char(peek_cp())) fail(start, "malformed numeric literal");
        if (is_real) {
            Token t = make(Tok::RealLit, start, text);
            t.real_value = std::stod(text);
            out.push_back(std::move(t));
        } else {
            Token t = make(Tok::IntLit, start, text);
            t.int_value = Int::parse_literal(text);
            out.push_back(std::move(t));
        }
    }

    void lex_word(std::vector<Token>& out, SourcePos start) {
        std::string raw;
        bool capital = uni::is_capital(peek_cp());
        while (!at_end() && uni::is_word_char(peek_cp())) uni::encode_utf8(advance_cp(), raw);
        std::string folded = uni::fold_word(raw);
        if (capital) {
            out.push_back(make(Tok::Constructor, start, folded));
            return;
        }
        if (keywords().count(folded)) {
            if (raw != folded)
                fail(start, "'" + raw + "' is neither a keyword (keywords are lower-case) nor an identifier");
            out.push_back(make(Tok::Keyword, start, folded));
            return;
        }
        out.push_back(make(Tok::Identifier, start, folded));
    }

    void lex_string(std::vector<Token>& out, SourcePos start) {
        advance_cp(); // opening quote
        std::u32string value;
        for (;;) {
            if (at_end()) fail(start, "unterminated string literal");
            SourcePos cpos = pos();
            char32_t c = advance_cp();
            if (c == U'"') break;
            if (c == U'\n' || c == U'\r') fail(cpos, "newline in string literal");
            if (c != U'\\') {
                value.push_back(c);
                continue;
            }
            if (at_end()) fail(cpos, "unterminated string literal");
            char32_t e = advance_cp();
            switch (e) {
            case U'"': value.push_back(U'"'); break;
            case U'\\': value.push_back(U'\\'); break;
            case U'n': value.push_back(U'\n'); break;
            case U'r': value.push_back(U'\r'); break;
            case U'u':
            case U'U': {
                int n = e == U'u' ? 4 : 8;
                char32_t cp = 0;
                for (int k = 0; k < n; ++k) {
                    if (at_end()) fail(cpos, "malformed escape sequence");
                    char32_t h = advance_cp();
                    int d;
                    if (h >= U'0' && h <= U'9') d = static_cast<int>(h - U'0');
                    else if (h >= U'a' && h <= U'f') d = static_cast<int>(h - U'a') + 10;
                    else if (h >= U'A' && h <= U'F') d = static_cast<int>(h - U'A') + 10;
                    else fail(cpos, "malformed escape sequence");
                    cp = cp * 16 + static_cast<char32_t>(d);
                }
                if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
                    fail(cpos, "escape denotes an invalid code point");
                value.push_back(cp);
                break;
            }
            default: fail(cpos, "malformed escape sequence");
            }
        }
        Token t = make(Tok::StringLit, start, "");
        t.str_value = std::move(value);
        out.push_back(std::move(t));
    }

    bool lex_symbol(std::vector<Token>& out, SourcePos start) {
        for (const std::string& s : lex_detail::symbols()) {
            if (src_.substr(i_).substr(0, s.size()) == s) {
                for (std::size_t k = 0; k < s.size(); ++k) advance_cp();
                out.push_back(make(Tok::Symbol, start, s));
                return true;
            }
        }
        return false;
    }
};

inline std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

// Decodes the text between the quotation marks of a string literal.
// Throws StaticError on malformed escapes.
inline std::u32string decode_string_literal(std::string_view raw) {
    std::string quoted;
    quoted.reserve(raw.size() + 2);
    quoted.push_back('"');
    quoted.append(raw);
    quoted.push_back('"');
    auto toks = tokenize(quoted);
    return toks.at(0).str_value;
}

} // namespace babel17
