#pragma once

#include "babel17/ast.hpp"
#include "babel17/parser.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace babel17 {

struct ModuleDecl {
    std::vector<std::string> path;
    bool unittest = false;
    std::vector<StmtPtr> stmts;
    std::set<std::string> public_members; // dispatchable from outside
    std::set<std::string> all_members;
    std::set<std::string> private_names;
    std::set<std::string> typedef_names;
    bool needs_init = false;
    SourcePos pos;
};

struct CompiledProgram {
    std::vector<StmtPtr> top; // top-level statements in file order
    std::map<std::vector<std::string>, ModuleDecl> modules;

    bool is_module_prefix(const std::vector<std::string>& p) const {
        auto it = modules.lower_bound(p);
        if (it == modules.end()) return false;
        if (it->first.size() < p.size()) return false;
        return std::equal(p.begin(), p.end(), it->first.begin());
    }
    const ModuleDecl* find_module(const std::vector<std::string>& p) const {
        auto it = modules.find(p);
        return it == modules.end() ? nullptr : &it->second;
    }
};

inline bool path_is_unittest(const std::vector<std::string>& p) {
    for (const auto& seg : p)
        if (seg == "unittest") return true;
    return false;
}

// Names bound by a pattern, in no particular order.
inline void pattern_names(const PatternPtr& p, std::set<std::string>& out) {
    if (!p) return;
    switch (p->kind) {
    case PK::Ident: out.insert(p->name); break;
    case PK::As:
        out.insert(p->name);
        pattern_names(p->sub, out);
        break;
    default:
        pattern_names(p->sub, out);
        pattern_names(p->sub2, out);
        for (const auto& i : p->items) pattern_names(i, out);
        for (const auto& kv : p->pairs) {
            pattern_names(kv.first, out);
            pattern_names(kv.second, out);
        }
        for (const auto& f : p->fields) pattern_names(f.pattern, out);
        pattern_names(p->delta, out);
        break;
    }
}

// Builds member tables / init classification for one module declaration.
inline void finalize_module_decl(ModuleDecl& d) {
    d.needs_init = true;
    d.all_members.clear();
    d.public_members.clear();
    d.private_names.clear();
    d.typedef_names.clear();
    for (const auto& s : d.stmts) {
        switch (s->kind) {
        case StK::Def:
            if (s->is_conversion)
                throw StaticError(ErrorStage::Check, s->pos, "conversion definitions belong in object expressions");
            d.all_members.insert(s->name);
            break;
        case StK::Typedef:
            d.all_members.insert(s->name);
            d.typedef_names.insert(s->name);
            break;
        case StK::Val: {
            std::set<std::string> names;
            pattern_names(s->pattern, names);
            d.all_members.insert(names.begin(), names.end());
            d.needs_init = false;
            break;
        }
        case StK::Private:
            for (const auto& n : s->names) d.private_names.insert(n);
            break;
        case StK::Import:
        case StK::Memoize: break;
        default: d.needs_init = false; break;
        }
    }
    for (const auto& n : d.all_members)
        if (!d.private_names.count(n)) d.public_members.insert(n);
}

inline void register_module_into(CompiledProgram& prog, const StmtPtr& m, std::vector<std::string> prefix) {
    std::vector<std::string> path = prefix;
    for (const auto& seg : m->module_path) path.push_back(seg);
    ModuleDecl& decl = prog.modules[path];
    if (!decl.path.empty())
        throw StaticError(ErrorStage::Check, m->pos, "module is defined twice");
    decl.path = path;
    decl.pos = m->pos;
    decl.unittest = path_is_unittest(path);
    for (const auto& s : m->body) {
        if (s->kind == StK::Module) register_module_into(prog, s, path);
        else decl.stmts.push_back(s);
    }
    if (m->next_sibling) register_module_into(prog, m->next_sibling, prefix);
}

class Analyzer {
public:
    // `sources` are parsed programs in file order.
    CompiledProgram run(const std::vector<std::vector<StmtPtr>>& sources) {
        CompiledProgram prog;
        for (const auto& stmts : sources) {
            for (const auto& s : stmts) {
                if (s->kind == StK::Module) {
                    register_module_into(prog, s, {});
                } else {
                    prog.top.push_back(s);
                }
            }
        }
        for (auto& [path, decl] : prog.modules) finalize_module_decl(decl);
        prog_ = &prog;
        for (auto& [path, decl] : prog.modules) {
            ScopeCtx ctx;
            ctx.module_path = path;
            ctx.unittest = decl.unittest;
            check_module_body(decl, ctx);
        }
        {
            ScopeCtx ctx;
            ctx.unittest = false;
            check_block(prog.top, ctx, /*linear_root=*/true, /*is_module=*/false);
        }
        return prog;
    }

private:
    const CompiledProgram* prog_ = nullptr;

    [[noreturn]] static void fail(SourcePos pos, const std::string& msg) {
        throw StaticError(ErrorStage::Check, pos, msg);
    }

    static std::string dotted(const std::vector<std::string>& p) {
        std::string s;
        for (const auto& seg : p) {
            if (!s.empty()) s += ".";
            s += seg;
        }
        return s;
    }

    // ---- scope checking -----------------------------------------------------

    struct FrameInfo {
        std::set<std::string> names;      // visible identifiers
        std::set<std::string> linear;     // assignable identifiers
        std::set<std::string> defs;       // block defs (never assignable)
        std::map<std::string, std::vector<std::string>> import_module; // alias -> module path
        bool closure_boundary = false; // capture: outer vals assignable as local copies
        bool expr_boundary = false;    // operand position: outer vals not assignable
    };

    struct ScopeCtx {
        std::vector<FrameInfo> frames;
        std::vector<std::string> module_path; // empty at top level
        std::set<std::string> module_typedefs;
        bool unittest = false;
        bool in_object = false; // `this` legal
    };

    static const std::set<std::string>& builtin_type_names() {
        static const std::set<std::string> names = {"int",  "real", "bool",    "string", "list",  "vect",
                                                    "set",  "map",  "cexp",    "obj",    "fun",   "exc",
                                                    "type", "module_", "lens_", "native_"};
        return names;
    }

    bool name_visible(const ScopeCtx& ctx, const std::string& n) const {
        for (auto it = ctx.frames.rbegin(); it != ctx.frames.rend(); ++it)
            if (it->names.count(n) || it->defs.count(n)) return true;
        return false;
    }

    bool name_linear(const ScopeCtx& ctx, const std::string& n) const {
        for (auto it = ctx.frames.rbegin(); it != ctx.frames.rend(); ++it) {
            if (it->linear.count(n)) return true;
            if (it->names.count(n) || it->defs.count(n)) return false;
            if (it->expr_boundary) return false;
            // a closure boundary keeps captured vals assignable (as local copies)
        }
        return false;
    }

    bool is_module_root(const std::string& n) const {
        return prog_ && prog_->is_module_prefix({n});
    }

    void check_module_body(ModuleDecl& decl, ScopeCtx& ctx) {
        ctx.module_typedefs = decl.typedef_names;
        check_block(decl.stmts, ctx, /*linear_root=*/true, /*is_module=*/true);
    }

    // Common pre-scan: import grouping, def conflicts, memoize refs.
    void prescan_block(const std::vector<StmtPtr>& stmts, FrameInfo& frame) {
        bool seen_non_import = false;
        std::map<std::string, int> def_kind; // 1 simple, 2 function, 3 typedef
        std::set<std::string> val_names_whole_block;
        for (const auto& s : stmts) {
            if (s->kind == StK::Import) {
                if (seen_non_import) fail(s->pos, "imports must be grouped at the beginning of the block");
            } else if (s->kind != StK::Pragma) {
                seen_non_import = true;
            }
            switch (s->kind) {
            case StK::Val: {
                std::set<std::string> names;
                pattern_names(s->pattern, names);
                val_names_whole_block.insert(names.begin(), names.end());
                break;
            }
            case StK::Def: {
                if (s->is_conversion) break;
                int kind = s->def_simple ? 1 : 2;
                auto [it, fresh] = def_kind.emplace(s->name, kind);
                if (!fresh) {
                    if (it->second == 1 || kind == 1)
                        fail(s->pos, "identifier '" + s->name + "' already has a simple definition in this block");
                }
                frame.defs.insert(s->name);
                break;
            }
            case StK::Typedef: {
                auto [it, fresh] = def_kind.emplace(s->name, 3);
                if (!fresh && it->second != 3)
                    fail(s->pos, "identifier '" + s->name + "' is already defined in this block");
                frame.defs.insert(s->name);
                break;
            }
            default: break;
            }
        }
        for (const auto& n : val_names_whole_block)
            if (frame.defs.count(n))
                fail(stmts.empty() ? SourcePos{} : stmts[0]->pos,
                     "identifier '" + n + "' is introduced by both val and def in one block");
        // memoize refs must match block defs
        for (const auto& s : stmts) {
            if (s->kind != StK::Memoize) continue;
            for (const auto& r : s->memo_refs)
                if (!frame.defs.count(r.name))
                    fail(r.pos, "memoize must refer to a def in the same block ('" + r.name + "')");
        }
    }

    void check_block(const std::vector<StmtPtr>& stmts, ScopeCtx& ctx, bool linear_root, bool is_module) {
        ctx.frames.push_back({});
        FrameInfo& frame = ctx.frames.back();
        if (linear_root) frame.closure_boundary = true;
        prescan_block(stmts, frame);
        for (const auto& s : stmts) check_stmt(s, ctx, is_module);
        ctx.frames.pop_back();
    }

    void enter_names(ScopeCtx& ctx, const PatternPtr& p, bool linear) {
        std::set<std::string> names;
        pattern_names(p, names);
        for (const auto& n : names) {
            ctx.frames.back().names.insert(n);
            if (linear) ctx.frames.back().linear.insert(n);
        }
    }

    void check_stmt(const StmtPtr& s, ScopeCtx& ctx, bool is_module) {
        switch (s->kind) {
        case StK::Val:
            check_expr_or_control(s->expr, ctx);
            check_pattern(s->pattern, ctx);
            enter_names(ctx, s->pattern, true);
            break;
        case StK::Assign: {
            if (!name_linear(ctx, s->name))
                fail(s->pos, "identifier '" + s->name + "' is not in linear scope");
            check_expr_or_control(s->expr, ctx);
            break;
        }
        case StK::AssignPath: {
            if (!name_linear(ctx, s->name))
                fail(s->pos, "identifier '" + s->name + "' is not in linear scope");
            for (const auto& st : s->steps)
                if (st.arg) check_expr(st.arg, ctx);
            check_expr_or_control(s->expr, ctx);
            break;
        }
        case StK::PatternAssign: {
            std::set<std::string> names;
            pattern_names(s->pattern, names);
            for (const auto& n : names)
                if (!name_linear(ctx, n)) fail(s->pos, "identifier '" + n + "' is not in linear scope");
            check_pattern(s->pattern, ctx);
            check_expr_or_control(s->expr, ctx);
            break;
        }
        case StK::Def: {
            // body is a closure: fresh linear region rooted at the parameters
            for (const auto& c : s->def_clauses) {
                ctx.frames.push_back({});
                ctx.frames.back().closure_boundary = true;
                if (c.param) {
                    check_pattern(c.param, ctx);
                    enter_names(ctx, c.param, true);
                }
                check_expr_or_control(c.body, ctx);
                ctx.frames.pop_back();
            }
            if (s->is_conversion) {
                if (!ctx.in_object) fail(s->pos, "conversion definitions belong in object expressions");
                check_type_ref(s->conv_target, ctx, s->pos);
            }
            ctx.frames.back().names.insert(s->name);
            break;
        }
        case StK::Typedef: {
            if (ctx.module_path.empty()) fail(s->pos, "typedef is only legal inside a module");
            if (!is_module) fail(s->pos, "typedef is only legal at module level");
            for (const auto& c : s->typedef_clauses) {
                ctx.frames.push_back({});
                ctx.frames.back().closure_boundary = true;
                check_pattern(c.pattern, ctx);
                enter_names(ctx, c.pattern, true);
                check_expr_or_control(c.body, ctx);
                ctx.frames.pop_back();
            }
            ctx.frames.back().names.insert(s->name);
            break;
        }
        case StK::Import: check_import(s, ctx); break;
        case StK::Private: break;
        case StK::Memoize: break;
        case StK::Yield: check_expr(s->expr, ctx); break;
        case StK::Control: check_control(s->expr, ctx); break;
        case StK::Pragma:
            if (s->pragma_pattern) check_pattern(s->pragma_pattern, ctx);
            check_expr(s->expr, ctx);
            break;
        case StK::Module: fail(s->pos, "unexpected module statement");
        }
    }

    // Control expressions in statement position or as val right-hand sides keep
    // the surrounding linear scope.
    void check_expr_or_control(const ExprPtr& e, ScopeCtx& ctx) {
        if (is_control_expr(*e)) check_control(e, ctx);
        else check_expr(e, ctx);
    }

    void check_control(const ExprPtr& e, ScopeCtx& ctx) {
        switch (e->kind) {
        case ExK::BlockE: check_block(e->stmts, ctx, /*linear_root=*/false, false); break;
        case ExK::Match: {
            check_expr(e->a, ctx);
            for (const auto& c : e->cases) {
                ctx.frames.push_back({});
                check_pattern(c.pattern, ctx);
                enter_names(ctx, c.pattern, true);
                check_block(c.body->stmts, ctx, /*linear_root=*/false, false);
                ctx.frames.pop_back();
            }
            break;
        }
        case ExK::TryE: {
            check_block(e->a->stmts, ctx, /*linear_root=*/false, false);
            for (const auto& c : e->cases) {
                ctx.frames.push_back({});
                check_pattern(c.pattern, ctx);
                enter_names(ctx, c.pattern, true);
                check_block(c.body->stmts, ctx, /*linear_root=*/false, false);
                ctx.frames.pop_back();
            }
            break;
        }
        case ExK::WhileLoop:
            check_expr(e->a, ctx);
            check_block(e->b->stmts, ctx, /*linear_root=*/false, false);
            break;
        case ExK::ForLoop: {
            check_expr(e->a, ctx);
            ctx.frames.push_back({});
            check_pattern(e->pattern, ctx);
            enter_names(ctx, e->pattern, true);
            check_block(e->b->stmts, ctx, /*linear_root=*/false, false);
            ctx.frames.pop_back();
            break;
        }
        default: check_expr(e, ctx);
        }
    }

    void check_import(const StmtPtr& s, ScopeCtx& ctx) {
        for (const auto& e : s->imports) {
            std::vector<std::string> path = resolve_import_path(e.path, ctx, e.pos);
            if (!ctx.unittest && path_is_unittest(path))
                fail(e.pos, "production code cannot import unit-test code");
            if (e.wildcard) {
                const ModuleDecl* m = prog_->find_module(path);
                if (!m) fail(e.pos, "unknown module '" + dotted(path) + "'");
                for (const auto& n : m->public_members) ctx.frames.back().names.insert(n);
                continue;
            }
            // the path denotes a module, or a member of its parent module
            const ModuleDecl* whole = prog_->find_module(path);
            bool prefix = prog_->is_module_prefix(path);
            if (!whole && !prefix) {
                std::vector<std::string> parent(path.begin(), path.end() - 1);
                const ModuleDecl* pm = parent.empty() ? nullptr : prog_->find_module(parent);
                if (!pm || !pm->public_members.count(path.back()))
                    fail(e.pos, "cannot resolve import '" + dotted(path) + "'");
            }
            ctx.frames.back().names.insert(e.bind_name);
            if (whole || prefix) ctx.frames.back().import_module[e.bind_name] = path;
        }
    }

    // Resolves the written path against earlier import aliases; `root.` escapes.
    std::vector<std::string> resolve_import_path(const TypePath& p, ScopeCtx& ctx, SourcePos pos) {
        std::vector<std::string> path;
        std::size_t start = 0;
        if (!p.root_anchored) {
            const std::string& head = p.segments[0];
            for (auto it = ctx.frames.rbegin(); it != ctx.frames.rend(); ++it) {
                auto f = it->import_module.find(head);
                if (f != it->import_module.end()) {
                    path = f->second;
                    start = 1;
                    break;
                }
            }
        }
        for (std::size_t i = start; i < p.segments.size(); ++i) path.push_back(p.segments[i]);
        if (path.empty()) fail(pos, "empty import path");
        return path;
    }

    void check_ident(const std::string& n, SourcePos pos, ScopeCtx& ctx) {
        if (name_visible(ctx, n)) return;
        if (is_module_root(n)) {
            if (!ctx.unittest && path_is_unittest({n})) fail(pos, "production code cannot refer to unit-test code");
            return;
        }
        fail(pos, "identifier '" + n + "' is not in scope");
    }

    void check_type_ref(const TypeRef& t, ScopeCtx& ctx, SourcePos pos) {
        if (t.dynamic) {
            check_expr(t.dynamic, ctx);
            return;
        }
        check_type_path(t.path, ctx, pos);
    }

    void check_type_path(const TypePath& p, ScopeCtx& ctx, SourcePos pos) {
        if (p.root_anchored) return; // resolved against the registry at runtime
        const std::string& head = p.segments[0];
        if (name_visible(ctx, head)) return;
        if (p.segments.size() == 1 && builtin_type_names().count(head)) return;
        if (is_module_root(head)) {
            if (!ctx.unittest) {
                for (const auto& seg : p.segments)
                    if (seg == "unittest") fail(pos, "production code cannot refer to unit-test code");
            }
            return;
        }
        fail(pos, "cannot resolve type '" + p.dotted() + "'");
    }

    void check_pattern(const PatternPtr& p, ScopeCtx& ctx) {
        std::set<std::string> bound;
        check_pattern_acc(p, ctx, bound);
    }

    // `bound` accumulates identifiers matched so far; embedded expressions
    // (guards, val, predicates, dynamic types) can refer to them.
    void check_pattern_acc(const PatternPtr& p, ScopeCtx& ctx, std::set<std::string>& bound) {
        if (!p) return;
        auto with_bound = [&](const ExprPtr& e) {
            ctx.frames.push_back({});
            ctx.frames.back().closure_boundary = true;
            for (const auto& n : bound) ctx.frames.back().names.insert(n);
            check_expr(e, ctx);
            ctx.frames.pop_back();
        };
        switch (p->kind) {
        case PK::Ident: bound.insert(p->name); return;
        case PK::As:
            check_pattern_acc(p->sub, ctx, bound);
            bound.insert(p->name);
            return;
        case PK::Guard:
            check_pattern_acc(p->sub, ctx, bound);
            with_bound(p->expr);
            return;
        case PK::ValP:
        case PK::Predicate:
            with_bound(p->expr);
            check_pattern_acc(p->sub, ctx, bound);
            return;
        case PK::TypeAnnot:
            check_pattern_acc(p->sub, ctx, bound);
            if (p->type_ref.dynamic) with_bound(p->type_ref.dynamic);
            else check_type_path(p->type_ref.path, ctx, p->pos);
            return;
        case PK::Inner: {
            bool ok = false;
            if (p->type_path.segments.size() == 1 && ctx.module_typedefs.count(p->type_path.segments[0]))
                ok = true;
            if (!ok)
                fail(p->pos, "inner-value pattern '" + p->type_path.dotted() +
                                 "' is only legal inside the type's defining module");
            check_pattern_acc(p->sub, ctx, bound);
            return;
        }
        default:
            check_pattern_acc(p->sub, ctx, bound);
            check_pattern_acc(p->sub2, ctx, bound);
            for (const auto& i : p->items) check_pattern_acc(i, ctx, bound);
            for (const auto& kv : p->pairs) {
                check_pattern_acc(kv.first, ctx, bound);
                check_pattern_acc(kv.second, ctx, bound);
            }
            for (const auto& f : p->fields) check_pattern_acc(f.pattern, ctx, bound);
            check_pattern_acc(p->delta, ctx, bound);
            return;
        }
    }

    void check_expr(const ExprPtr& ep, ScopeCtx& ctx) {
        const Expr& e = *ep;
        switch (e.kind) {
        case ExK::Ident: check_ident(e.name, e.pos, ctx); break;
        case ExK::ThisRef:
            if (!ctx.in_object) fail(e.pos, "'this' is only legal inside object definitions");
            break;
        case ExK::Lambda: {
            for (const auto& c : e.cases) {
                ctx.frames.push_back({});
                ctx.frames.back().closure_boundary = true;
                check_pattern(c.pattern, ctx);
                enter_names(ctx, c.pattern, true);
                // `p => e` is notation for `def f p = e`: a control-expression
                // body keeps the parameters in linear scope
                if (c.body->stmts.size() == 1 && c.body->stmts[0]->kind == StK::Yield &&
                    is_control_expr(*c.body->stmts[0]->expr)) {
                    check_control(c.body->stmts[0]->expr, ctx);
                } else {
                    check_block(c.body->stmts, ctx, /*linear_root=*/false, false);
                }
                ctx.frames.pop_back();
            }
            break;
        }
        case ExK::ObjectLit: {
            if (e.a) check_expr(e.a, ctx);
            bool saved = ctx.in_object;
            ctx.in_object = true;
            ctx.frames.push_back({});
            ctx.frames.back().closure_boundary = true;
            check_block(e.stmts, ctx, /*linear_root=*/true, false);
            ctx.frames.pop_back();
            ctx.in_object = saved;
            break;
        }
        case ExK::BlockE:
        case ExK::Match:
        case ExK::TryE:
        case ExK::WhileLoop:
        case ExK::ForLoop: {
            // operand position: fresh linear region, no assignments outward
            ctx.frames.push_back({});
            ctx.frames.back().expr_boundary = true;
            check_control(ep, ctx);
            ctx.frames.pop_back();
            break;
        }
        case ExK::With: {
            check_expr(e.a, ctx);
            ctx.frames.push_back({});
            ctx.frames.back().expr_boundary = true;
            check_block(e.b->stmts, ctx, /*linear_root=*/false, false);
            ctx.frames.pop_back();
            break;
        }
        case ExK::Lazy:
        case ExK::Concurrent: {
            ctx.frames.push_back({});
            ctx.frames.back().closure_boundary = true;
            check_expr(e.a, ctx);
            ctx.frames.pop_back();
            break;
        }
        case ExK::LensPath: {
            ctx.frames.push_back({});
            ctx.frames.back().closure_boundary = true;
            ctx.frames.back().names.insert(e.name);
            for (const auto& s : e.steps)
                if (s.arg) check_expr(s.arg, ctx);
            ctx.frames.pop_back();
            break;
        }
        case ExK::TypeLit: check_type_path(e.type_path, ctx, e.pos); break;
        case ExK::ConvertE:
            check_expr(e.a, ctx);
            check_type_ref(e.type_ref, ctx, e.pos);
            break;
        default:
            if (e.a) check_expr(e.a, ctx);
            if (e.b) check_expr(e.b, ctx);
            for (const auto& i : e.items) check_expr(i, ctx);
            for (const auto& c : e.cases) {
                ctx.frames.push_back({});
                check_pattern(c.pattern, ctx);
                enter_names(ctx, c.pattern, true);
                check_block(c.body->stmts, ctx, /*linear_root=*/true, false);
                ctx.frames.pop_back();
            }
            if (e.pattern) check_pattern(e.pattern, ctx);
            break;
        }
    }
};

// Bundles multiple function defs of one name into a single statement list entry
// and attaches memoize flags; used by the evaluator when entering a block.
struct BlockPlan {
    struct DefPlan {
        std::string name;
        bool simple = false;
        bool is_conversion = false;
        bool conv_auto = false;
        TypeRef conv_target;
        std::vector<Clause> clauses;
        int memo_kind = 0;
        std::size_t first_index = 0; // statement index where the entry becomes ready
        std::size_t last_index = 0;
    };
    std::vector<DefPlan> defs;      // in first-occurrence order
    std::map<std::string, int> by_name;
};

inline BlockPlan plan_block(const std::vector<StmtPtr>& stmts) {
    BlockPlan plan;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
        const Stmt& s = *stmts[i];
        if (s.kind != StK::Def || s.is_conversion) continue;
        auto it = plan.by_name.find(s.name);
        if (it == plan.by_name.end()) {
            BlockPlan::DefPlan d;
            d.name = s.name;
            d.simple = s.def_simple;
            d.first_index = d.last_index = i;
            for (const auto& c : s.def_clauses) d.clauses.push_back(Clause{c.param, c.body});
            plan.by_name[s.name] = static_cast<int>(plan.defs.size());
            plan.defs.push_back(std::move(d));
        } else {
            BlockPlan::DefPlan& d = plan.defs[it->second];
            for (const auto& c : s.def_clauses) d.clauses.push_back(Clause{c.param, c.body});
            d.last_index = i;
        }
    }
    for (const auto& s : stmts) {
        if (s->kind != StK::Memoize) continue;
        for (const auto& r : s->memo_refs) {
            auto it = plan.by_name.find(r.name);
            if (it != plan.by_name.end()) plan.defs[it->second].memo_kind = r.weak ? 2 : 1;
        }
    }
    return plan;
}

} // namespace babel17
