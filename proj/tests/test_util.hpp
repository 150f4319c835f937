#pragma once

#include "babel17/babel17.hpp"

#include <catch2/catch.hpp>
#include <memory>

namespace b17test {

using namespace babel17;

inline EngineConfig test_config(unsigned long seed = 42, int workers = 2, RunMode mode = RunMode::Production) {
    EngineConfig cfg;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.workers = workers;
    cfg.pragmas_enabled = true;
    cfg.log_sink = [](const std::string&) {}; // quiet; lines still recorded
    return cfg;
}

struct Run {
    std::unique_ptr<Engine> eng;
    Value value;
    bool dynexc = false;
    std::string rendered;

    std::string exc_ctor() const {
        if (!dynexc) return "";
        Value p = value->exc_param;
        if (p->kind == VK::CExpr) return p->cexpr->shown;
        return "<non-cexpr>";
    }
};

inline Run run_src(const std::string& src, EngineConfig cfg = test_config()) {
    Run r;
    r.eng = std::make_unique<Engine>(cfg);
    r.eng->install(compile_source(src));
    r.value = run_program(*r.eng);
    r.dynexc = is_dynexc(r.value);
    Interp in(*r.eng);
    r.rendered = r.dynexc ? "exception:" + render(in, r.value->exc_param) : render(in, r.value);
    return r;
}

// Renders the program's value (or "exception:PARAM" for uncaught exceptions).
inline std::string eval_str(const std::string& src) { return run_src(src).rendered; }

// True when the two programs evaluate to values equal under the built-in order.
inline bool same_value(const std::string& a, const std::string& b) {
    Run ra = run_src(a);
    Run rb = run_src(b);
    if (ra.dynexc || rb.dynexc) return false;
    Interp in(*ra.eng);
    auto c = in.compare(ra.value, rb.value);
    return c.ok() && c.sign == 0;
}

inline bool is_error(const std::string& src, const char* ctor) {
    Run r = run_src(src);
    return r.dynexc && r.exc_ctor() == ctor;
}

inline bool static_error(const std::string& src) {
    try {
        compile_source(src);
        return false;
    } catch (const StaticError&) {
        return true;
    }
}

// One shared engine for direct Interp-level tests.
struct Fixture {
    Engine eng;
    Interp in;
    Fixture() : eng(test_config()), in(eng) { eng.install(CompiledProgram{}); }
};

} // namespace b17test
