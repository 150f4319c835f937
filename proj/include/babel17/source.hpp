#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace babel17 {

// Line and column are 1-based; column counts Unicode code points.
struct SourcePos {
    int line = 1;
    int column = 1;
    std::size_t offset = 0; // byte offset into the source

    std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
};

enum class ErrorStage { Lex, Parse, Check };

// Static (compile-time) failure: lexing, parsing or semantic analysis.
// Runtime failures are Babel-17 values and never use C++ exceptions.
struct StaticError : std::runtime_error {
    StaticError(ErrorStage stage, SourcePos pos, std::string message)
        : std::runtime_error(pos.str() + " " + message), stage(stage), pos(pos), message(std::move(message)) {}

    ErrorStage stage;
    SourcePos pos;
    std::string message;
};

} // namespace babel17
