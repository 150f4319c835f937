// babel17 — run, test, and explore Babel-17 programs.
//
//   babel17 run [files...]      evaluate programs, print the final value
//   babel17 test [files...]     run unit-test modules, print a report
//   babel17 repl                interactive session
//   babel17 check [files...]    static checks only

#include "babel17/babel17.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace babel17;

namespace {

std::vector<SourceFile> collect_sources(const std::vector<std::string>& paths) {
    std::vector<SourceFile> files;
    auto add_file = [&](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + p.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        files.push_back(SourceFile{p.string(), ss.str()});
    };
    for (const auto& raw : paths) {
        fs::path p(raw);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::recursive_directory_iterator(p))
                if (entry.is_regular_file() && entry.path().extension() == ".b17") found.push_back(entry.path());
            std::sort(found.begin(), found.end());
            for (const auto& f : found) add_file(f);
        } else {
            add_file(p);
        }
    }
    return files;
}

struct CommonOpts {
    std::optional<unsigned long> seed;
    int workers = 2;
    bool no_pragmas = false;
    std::string log_file;
    bool dump_tokens = false;
    bool dump_ast = false;
};

EngineConfig make_config(const CommonOpts& opts, RunMode mode, std::ofstream& log_stream) {
    EngineConfig cfg;
    cfg.mode = mode;
    cfg.workers = opts.workers;
    cfg.seed = opts.seed;
    cfg.pragmas_enabled = !opts.no_pragmas;
    if (!opts.log_file.empty()) {
        log_stream.open(opts.log_file, std::ios::app);
        cfg.log_sink = [&log_stream](const std::string& line) { log_stream << line << "\n"; };
    }
    return cfg;
}

int dump_tokens(const std::vector<SourceFile>& files) {
    for (const auto& f : files) {
        for (const auto& t : tokenize(f.text)) {
            if (t.kind == Tok::Eof) break;
            std::cout << t.pos.str() << " " << token_kind_name(t.kind) << " "
                      << (t.kind == Tok::Newline ? std::string("\\n") : t.raw) << "\n";
        }
    }
    return 0;
}

int dump_ast(const std::vector<SourceFile>& files) {
    for (const auto& f : files) {
        for (const auto& s : Parser::from_source(f.text).parse_program())
            std::cout << SexprPrinter::stmt_sexpr(s) << "\n";
    }
    return 0;
}

int cmd_run(const std::vector<std::string>& paths, const CommonOpts& opts) {
    std::ofstream log_stream;
    auto files = collect_sources(paths);
    if (opts.dump_tokens) return dump_tokens(files);
    if (opts.dump_ast) return dump_ast(files);
    Engine eng(make_config(opts, RunMode::Production, log_stream));
    try {
        eng.install(compile_sources(files));
    } catch (const StaticError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    Value v = run_program(eng);
    Interp in(eng);
    if (is_dynexc(v)) {
        std::cerr << "uncaught exception: " << render(in, v->exc_param) << "\n";
        return 1;
    }
    std::cout << render(in, v) << "\n";
    return 0;
}

int cmd_test(const std::vector<std::string>& paths, const CommonOpts& opts) {
    std::ofstream log_stream;
    auto files = collect_sources(paths);
    Engine eng(make_config(opts, RunMode::Test, log_stream));
    try {
        eng.install(compile_sources(files));
    } catch (const StaticError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    TestReport report = run_tests(eng);
    for (const auto& line : report.lines) std::cout << line << "\n";
    std::cout << report.passed << " passed, " << report.failed << " failed, " << report.errored
              << " errored\n";
    return report.ok() ? 0 : 1;
}

int cmd_check(const std::vector<std::string>& paths) {
    try {
        compile_sources(collect_sources(paths));
    } catch (const StaticError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}

int cmd_repl(const CommonOpts& opts) {
    std::ofstream log_stream;
    Engine eng(make_config(opts, RunMode::Production, log_stream));
    eng.install(CompiledProgram{});
    Session session(eng);
    std::string line;
    std::string pending;
    while (true) {
        std::cout << (pending.empty() ? "b17> " : "...> ") << std::flush;
        if (!std::getline(std::cin, line)) break;
        if (pending.empty()) {
            if (line == ":quit" || line == ":q") break;
            if (line.rfind(":load ", 0) == 0) {
                std::string path = line.substr(6);
                std::ifstream f(path, std::ios::binary);
                if (!f) {
                    std::cout << "cannot open " << path << "\n";
                    continue;
                }
                std::ostringstream ss;
                ss << f.rdbuf();
                auto reply = session.load(path, ss.str());
                std::cout << reply.text << "\n";
                continue;
            }
        }
        pending += line;
        if (pending.find_first_not_of(" \t") == std::string::npos) {
            pending.clear();
            continue;
        }
        auto reply = session.feed(pending);
        if (reply.error && reply.text.find("unexpected end of input") != std::string::npos) {
            pending += "\n";
            continue; // keep reading a multi-line form
        }
        pending.clear();
        if (reply.error || reply.has_value) std::cout << reply.text << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Babel-17 interpreter"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> paths;

    auto add_common = [&](CLI::App* cmd, bool with_paths) {
        if (with_paths) cmd->add_option("paths", paths, "source files or directories (.b17)");
        cmd->add_option("--seed", opts.seed, "random seed for reproducible runs");
        cmd->add_option("--workers", opts.workers, "worker threads for concurrent evaluation");
        cmd->add_flag("--no-pragmas", opts.no_pragmas, "ignore pragmas");
        cmd->add_option("--log", opts.log_file, "write pragma/log output to a file");
    };

    auto* run = app.add_subcommand("run", "run programs and print the final value");
    add_common(run, true);
    run->add_flag("--dump-tokens", opts.dump_tokens, "print the token stream and exit");
    run->add_flag("--dump-ast", opts.dump_ast, "print the core syntax tree and exit");

    auto* test = app.add_subcommand("test", "run unit-test modules");
    add_common(test, true);

    auto* repl = app.add_subcommand("repl", "interactive session");
    add_common(repl, false);

    auto* check = app.add_subcommand("check", "static checks only");
    check->add_option("paths", paths, "source files or directories (.b17)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(paths, opts);
        if (test->parsed()) return cmd_test(paths, opts);
        if (repl->parsed()) return cmd_repl(opts);
        if (check->parsed()) return cmd_check(paths);
    } catch (const StaticError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
