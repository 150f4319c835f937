#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace babel17::uni {

inline constexpr char32_t replacement = 0xFFFD;

// Decodes one UTF-8 scalar value starting at i. Advances i past the sequence.
// Returns nullopt on malformed input (overlong encodings, surrogates, truncation).
inline std::optional<char32_t> decode_utf8(std::string_view s, std::size_t& i) {
    if (i >= s.size()) return std::nullopt;
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return std::nullopt;
    }
    if (i + len > s.size()) return std::nullopt;
    for (int k = 1; k < len; ++k) {
        unsigned char b = byte(i + k);
        if ((b & 0xC0) != 0x80) return std::nullopt;
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len]) return std::nullopt;        // overlong
    if (cp >= 0xD800 && cp <= 0xDFFF) return std::nullopt; // surrogate
    if (cp > 0x10FFFF) return std::nullopt;
    i += len;
    return cp;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string to_utf8(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) encode_utf8(c, out);
    return out;
}

// Simple case folding over the ranges identifiers can use
// (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic). Other
// code points fold to themselves.
inline char32_t fold(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 0x20;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20; // Latin-1 capitals
    if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20; // Greek capitals
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;               // Cyrillic
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    return c;
}

inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_letter(char32_t c) {
    if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
    if (c >= 0xC0 && c <= 0xFF && c != 0xD7 && c != 0xF7) return true;
    if (c >= 0x100 && c <= 0x17F) return true;
    if (c >= 0x391 && c <= 0x3C9 && c != 0x3A2) return true;
    if (c >= 0x400 && c <= 0x45F) return true;
    return false;
}

// A capital letter is one that simple folding changes.
inline bool is_capital(char32_t c) { return is_letter(c) && fold(c) != c; }

inline bool is_word_char(char32_t c) { return is_letter(c) || is_ascii_digit(c) || c == U'_'; }

inline std::string fold_word(std::string_view word) {
    std::string out;
    out.reserve(word.size());
    std::size_t i = 0;
    while (i < word.size()) {
        auto cp = decode_utf8(word, i);
        if (!cp) break;
        encode_utf8(fold(*cp), out);
    }
    return out;
}

} // namespace babel17::uni
