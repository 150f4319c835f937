#pragma once

#include "babel17/bigint.hpp"
#include "babel17/source.hpp"

#include <array>
#include <string>
#include <string_view>
#include <unordered_set>

namespace babel17 {

enum class Tok {
    Keyword,
    Identifier,  // text = case-folded form
    Constructor, // text = case-folded form
    IntLit,
    RealLit,
    StringLit,
    Symbol, // text = canonical ASCII form
    Pragma, // text = name without '#'
    Newline,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    SourcePos pos;
    std::string text;      // normalized payload (see Tok)
    std::string raw;       // original source slice
    Int int_value;         // Tok::IntLit
    double real_value = 0; // Tok::RealLit
    std::u32string str_value;

    bool is_kw(std::string_view k) const { return kind == Tok::Keyword && text == k; }
    bool is_sym(std::string_view s) const { return kind == Tok::Symbol && text == s; }
};

inline const std::unordered_set<std::string>& keywords() {
    static const std::unordered_set<std::string> kws = {
        "begin",  "end",       "object",  "with",    "if",      "then",    "else",    "elseif",
        "while",  "for",       "do",      "choose",  "random",  "yield",   "match",   "case",
        "as",     "val",       "def",     "in",      "exception", "lazy",  "concurrent", "memoize",
        "to",     "downto",    "true",    "false",   "nil",     "unittest", "force",  "this",
        "try",    "catch",     "typedef", "typeof",  "module",  "private", "import",  "not",
        "and",    "or",        "xor",     "native",  "root",    "lens",    "min",     "max",
        "div",    "mod",
    };
    return kws;
}

inline const char* token_kind_name(Tok k) {
    switch (k) {
    case Tok::Keyword: return "keyword";
    case Tok::Identifier: return "identifier";
    case Tok::Constructor: return "constructor";
    case Tok::IntLit: return "int";
    case Tok::RealLit: return "real";
    case Tok::StringLit: return "string";
    case Tok::Symbol: return "symbol";
    case Tok::Pragma: return "pragma";
    case Tok::Newline: return "newline";
    case Tok::Eof: return "eof";
    }
    return "?";
}

} // namespace babel17
