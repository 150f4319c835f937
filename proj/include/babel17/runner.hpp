#pragma once

#include "babel17/interp_impl.hpp"

#include <fstream>
#include <sstream>

namespace babel17 {

struct SourceFile {
    std::string name;
    std::string text;
};

// Lex + parse + analyze. Throws StaticError.
inline CompiledProgram compile_sources(const std::vector<SourceFile>& files) {
    std::vector<std::vector<StmtPtr>> parsed;
    for (const auto& f : files) {
        try {
            parsed.push_back(Parser::from_source(f.text).parse_program());
        } catch (const StaticError& e) {
            throw StaticError(e.stage, e.pos, f.name + ": " + e.message);
        }
    }
    return Analyzer().run(parsed);
}

inline CompiledProgram compile_source(const std::string& text) {
    return compile_sources({SourceFile{"<memory>", text}});
}

// Runs the top-level statements; returns the program's value (possibly a
// dynamic exception).
inline Value run_program(Engine& eng) {
    Interp in(eng);
    Env frame = EnvNode::child_of(nullptr);
    Interp::Sink sink;
    Value exc = in.exec_block_stmts(eng.program().top, frame, sink);
    if (exc) return exc;
    return in.close_sink(sink);
}

// Convenience for tests: evaluate one source text in a fresh engine.
struct EvalResult {
    Value value;
    std::string rendered;
    bool dynamic_exception = false;
};

inline EvalResult eval_source(Engine& eng, const std::string& text) {
    eng.install(compile_source(text));
    Value v = run_program(eng);
    Interp in(eng);
    EvalResult r;
    r.value = v;
    r.dynamic_exception = is_dynexc(v);
    r.rendered = r.dynamic_exception ? render(in, v->exc_param) : render(in, v);
    return r;
}

// ---- unit-test running ------------------------------------------------------------

struct TestReport {
    int passed = 0;
    int failed = 0;
    int errored = 0;
    std::vector<std::string> lines;
    bool ok() const { return failed == 0 && errored == 0; }
};

inline TestReport run_tests(Engine& eng) {
    TestReport report;
    std::size_t seen = 0;
    for (const auto& [path, decl] : eng.program().modules) {
        if (!decl.unittest) continue;
        Interp in(eng);
        Value exc = in.run_test_module(path);
        std::string name;
        for (const auto& seg : path) name += (name.empty() ? "" : ".") + seg;
        if (exc) {
            ++report.errored;
            report.lines.push_back(name + ": error: uncaught exception " + render(in, exc->exc_param));
        }
        auto events = eng.pragma_events();
        for (std::size_t i = seen; i < events.size(); ++i) {
            const PragmaEvent& ev = events[i];
            if (ev.kind != "assert" && ev.kind != "catch") continue;
            if (ev.ok) {
                ++report.passed;
            } else {
                ++report.failed;
                report.lines.push_back(name + ":" + ev.pos.str() + " " + ev.kind + " failed: " + ev.rendered);
            }
        }
        seen = events.size();
    }
    return report;
}

// ---- interactive sessions -----------------------------------------------------------
//
// The REPL keeps one persistent top-level frame with linear scope across
// entries. Entries are checked dynamically (unbound names surface as errors).

class Session {
public:
    explicit Session(Engine& eng) : eng_(eng), in_(eng), top_(EnvNode::child_of(nullptr)) {}

    struct Reply {
        bool has_value = false;
        bool error = false;
        std::string text;
    };

    Reply feed(const std::string& line) {
        Reply reply;
        StmtPtr stmt;
        try {
            stmt = Parser::from_source(line).parse_single_statement();
        } catch (const StaticError& e) {
            reply.error = true;
            reply.text = e.what();
            return reply;
        }
        if (!stmt) return reply;
        Interp::Sink sink;
        Value exc = in_.exec_block_stmts({stmt}, top_, sink);
        if (exc) {
            reply.error = true;
            reply.text = "uncaught exception: " + render(in_, exc->exc_param);
            return reply;
        }
        if (stmt->kind == StK::Yield) {
            Value v = in_.close_sink(sink);
            reply.has_value = true;
            reply.text = render(in_, v);
        }
        return reply;
    }

    // Ingests a source file: modules are registered, top-level statements run
    // in the session environment.
    Reply load(const std::string& name, const std::string& text) {
        Reply reply;
        std::vector<StmtPtr> stmts;
        try {
            stmts = Parser::from_source(text).parse_program();
        } catch (const StaticError& e) {
            reply.error = true;
            reply.text = name + ": " + e.what();
            return reply;
        }
        for (const auto& s : stmts) {
            if (s->kind == StK::Module) {
                try {
                    eng_.add_modules(s);
                } catch (const StaticError& e) {
                    reply.error = true;
                    reply.text = name + ": " + e.what();
                    return reply;
                }
                continue;
            }
            Interp::Sink sink;
            Value exc = in_.exec_block_stmts({s}, top_, sink);
            if (exc) {
                reply.error = true;
                reply.text = "uncaught exception: " + render(in_, exc->exc_param);
                return reply;
            }
        }
        reply.text = "loaded " + name;
        return reply;
    }

private:
    Engine& eng_;
    Interp in_;
    Env top_;
};

} // namespace babel17
