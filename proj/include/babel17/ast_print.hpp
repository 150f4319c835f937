#pragma once

#include "babel17/ast.hpp"
#include "babel17/interval.hpp"
#include "babel17/unicode.hpp"

#include <sstream>
#include <string>

namespace babel17 {

// ---- string escaping (section 3 escapes) -----------------------------------

inline std::string escape_string(const std::u32string& s) {
    std::string out = "\"";
    for (char32_t c : s) {
        switch (c) {
        case U'"': out += "\\\""; break;
        case U'\\': out += "\\\\"; break;
        case U'\n': out += "\\n"; break;
        case U'\r': out += "\\r"; break;
        default:
            if (c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(c));
                out += buf;
            } else {
                uni::encode_utf8(c, out);
            }
        }
    }
    out += "\"";
    return out;
}

// ---- source printer ---------------------------------------------------------
//
// Prints the core AST back as Babel-17 source. Compound subexpressions are
// parenthesized, which is always safe to reparse.

class SourcePrinter {
public:
    static std::string expr_source(const ExprPtr& e) {
        SourcePrinter p;
        return p.expr(e);
    }
    static std::string stmt_source(const StmtPtr& s) {
        SourcePrinter p;
        return p.stmt(s);
    }
    static std::string pattern_source(const PatternPtr& p) {
        SourcePrinter pr;
        return pr.pat(p);
    }

private:
    std::string sub(const ExprPtr& e) {
        switch (e->kind) {
        case ExK::IntLit:
            if (e->int_value.sign() < 0) return "(" + expr(e) + ")";
            return expr(e);
        case ExK::RealLit:
            if (e->real_value < 0) return "(" + expr(e) + ")";
            return expr(e);
        case ExK::StrLit:
        case ExK::BoolLit:
        case ExK::NilLit:
        case ExK::EmptyList:
        case ExK::Ident:
        case ExK::CtorLit:
        case ExK::VectorDisplay:
        case ExK::SetDisplay:
        case ExK::MapDisplay:
        case ExK::IntervalE:
        case ExK::TypeLit:
        case ExK::RootRef:
        case ExK::ThisRef: return expr(e);
        default: return "(" + expr(e) + ")";
        }
    }

    std::string block_stmts(const ExprPtr& block) {
        std::string out;
        for (std::size_t i = 0; i < block->stmts.size(); ++i) {
            if (i) out += "; ";
            out += stmt(block->stmts[i]);
        }
        return out;
    }

    std::string cases(const std::vector<MatchCase>& cs) {
        std::string out;
        for (const auto& c : cs) out += " case " + pat(c.pattern) + " => " + block_stmts(c.body);
        return out;
    }

    std::string type_ref(const TypeRef& t) {
        if (t.dynamic) return "(" + expr(t.dynamic) + ")";
        return t.path.dotted();
    }

    std::string steps_source(std::string base, const std::vector<PathStep>& steps) {
        for (const auto& s : steps) {
            switch (s.kind) {
            case PathStep::K::Message: base += "." + s.name; break;
            case PathStep::K::MessageArg: base = "(" + base + "." + s.name + " " + sub(s.arg) + ")"; break;
            case PathStep::K::LensApp: base += ".(" + expr(s.arg) + ")"; break;
            }
        }
        return base;
    }

    std::string expr(const ExprPtr& ep) {
        const Expr& e = *ep;
        switch (e.kind) {
        case ExK::IntLit: return e.int_value.to_string();
        case ExK::RealLit: {
            std::string s = render_double(e.real_value);
            return s;
        }
        case ExK::StrLit: return escape_string(e.str_value);
        case ExK::BoolLit: return e.bool_value ? "true" : "false";
        case ExK::NilLit: return "nil";
        case ExK::EmptyList: return "[]";
        case ExK::Ident: return e.name;
        case ExK::CtorLit: return std::string(e.str_value.begin(), e.str_value.end());
        case ExK::Send: return sub(e.a) + "." + e.name;
        case ExK::SendLens: return sub(e.a) + ".(" + expr(e.b) + ")";
        case ExK::Apply: return sub(e.a) + " " + sub(e.b);
        case ExK::Cons: return sub(e.a) + " :: " + sub(e.b);
        case ExK::VectorDisplay: {
            if (e.items.empty()) return "()";
            std::string out = "(";
            for (std::size_t i = 0; i < e.items.size(); ++i) {
                if (i) out += ", ";
                out += sub(e.items[i]);
            }
            if (e.items.size() == 1) out += ",";
            return out + ")";
        }
        case ExK::SetDisplay: {
            std::string out = "{";
            for (std::size_t i = 0; i < e.items.size(); ++i) {
                if (i) out += ", ";
                out += sub(e.items[i]);
            }
            return out + "}";
        }
        case ExK::MapDisplay: {
            if (e.items.empty()) return "{->}";
            std::string out = "{";
            for (std::size_t i = 0; i + 1 < e.items.size(); i += 2) {
                if (i) out += ", ";
                out += sub(e.items[i]) + " -> " + sub(e.items[i + 1]);
            }
            return out + "}";
        }
        case ExK::IntervalE: return "[" + expr(e.a) + "; " + expr(e.b) + "]";
        case ExK::Lambda: return "(" + cases(e.cases).substr(1) + ")";
        case ExK::ObjectLit: {
            std::string out = "object";
            if (e.a) out += " + " + sub(e.a);
            for (const auto& s : e.stmts) out += " " + stmt(s) + ";";
            return out + " end";
        }
        case ExK::BlockE: {
            std::string out = "begin ";
            out += block_stmts(ep);
            return out + " end";
        }
        case ExK::Match: return "match " + sub(e.a) + cases(e.cases) + " end";
        case ExK::TryE: return "try " + block_stmts(e.a) + " catch" + cases(e.cases) + " end";
        case ExK::Lazy: return "lazy " + sub(e.a);
        case ExK::Concurrent: return "concurrent " + sub(e.a);
        case ExK::Force: return "force " + sub(e.a);
        case ExK::Raise: return "exception " + sub(e.a);
        case ExK::TypeofE: return "typeof " + sub(e.a);
        case ExK::Random: return "random " + sub(e.a);
        case ExK::Choose: return "choose " + sub(e.a);
        case ExK::MinOf: return "min " + sub(e.a);
        case ExK::MaxOf: return "max " + sub(e.a);
        case ExK::NativeE: return "native " + sub(e.a);
        case ExK::CompareOp: {
            const std::string op = e.name.empty() ? "~" : e.name;
            return sub(e.a) + " " + op + " " + sub(e.b);
        }
        case ExK::XorOp: return sub(e.a) + " xor " + sub(e.b);
        case ExK::With: return "with " + sub(e.a) + " do " + block_stmts(e.b) + " end";
        case ExK::WhileLoop: return "while " + sub(e.a) + " do " + block_stmts(e.b) + " end";
        case ExK::ForLoop:
            return "for " + pat(e.pattern) + " in " + sub(e.a) + " do " + block_stmts(e.b) + " end";
        case ExK::LensPair: return "lens (" + sub(e.a) + ", " + sub(e.b) + ")";
        case ExK::LensPath: return "lens " + e.name + " => " + steps_source(e.name, e.steps);
        case ExK::TypeLit: return "(: " + e.type_path.dotted() + ")";
        case ExK::ConvertE: return sub(e.a) + " :> " + type_ref(e.type_ref);
        case ExK::RootRef: return "root";
        case ExK::ThisRef: return "this";
        }
        return "?";
    }

    std::string pat_sub(const PatternPtr& p) {
        switch (p->kind) {
        case PK::Ctor:
            if (p->sub) return "(" + pat(p) + ")";
            return pat(p);
        case PK::Inner:
        case PK::ConsP:
        case PK::Exception:
        case PK::TypeAnnot: return "(" + pat(p) + ")";
        default: return pat(p);
        }
    }

    std::string pat(const PatternPtr& pp) {
        const Pattern& p = *pp;
        switch (p.kind) {
        case PK::Wildcard: return "_";
        case PK::Ident: return p.name;
        case PK::As: return "(" + p.name + " as " + pat(p.sub) + ")";
        case PK::IntLit:
            return p.int_value.sign() < 0 ? "(" + p.int_value.to_string() + ")" : p.int_value.to_string();
        case PK::StrLit: return escape_string(p.str_value);
        case PK::BoolLit: return p.bool_value ? "true" : "false";
        case PK::Nil: return "nil";
        case PK::Ctor: {
            std::string shown(p.str_value.begin(), p.str_value.end());
            if (p.sub) return shown + " " + pat_sub(p.sub);
            return shown;
        }
        case PK::Guard: return "(" + pat(p.sub) + " if " + expr(p.expr) + ")";
        case PK::ValP: return "(val " + expr(p.expr) + ")";
        case PK::Destruct: return "(" + p.name + " ! " + pat(p.sub) + ")";
        case PK::Predicate: return "((" + expr(p.expr) + ") ? " + pat(p.sub) + ")";
        case PK::Record: {
            std::string out = "{";
            bool first = true;
            for (const auto& f : p.fields) {
                if (!first) out += ", ";
                first = false;
                out += f.name + " = " + pat(f.pattern);
            }
            if (p.delta) {
                if (!first) out += ", ";
                out += pat(p.delta);
            }
            return out + "}";
        }
        case PK::Exception: return "exception " + pat_sub(p.sub);
        case PK::TypeAnnot:
            if (p.type_ref.dynamic) return "(" + pat(p.sub) + " : (" + expr(p.type_ref.dynamic) + "))";
            return "(" + pat(p.sub) + " : " + p.type_ref.path.dotted() + ")";
        case PK::Inner: return p.type_path.dotted() + " " + pat_sub(p.sub);
        case PK::ListP: {
            std::string out = "[";
            bool first = true;
            for (const auto& it : p.items) {
                if (!first) out += ", ";
                first = false;
                out += pat(it);
            }
            if (p.delta) {
                if (!first) out += ", ";
                out += pat(p.delta);
            }
            return out + "]";
        }
        case PK::VectorP: {
            std::string out = "(";
            bool first = true;
            for (const auto& it : p.items) {
                if (!first) out += ", ";
                first = false;
                out += pat(it);
            }
            if (p.delta) {
                if (!first) out += ", ";
                out += pat(p.delta);
            } else if (p.items.size() == 1) {
                out += ",";
            }
            return out + ")";
        }
        case PK::ConsP: return pat_sub(p.sub) + " :: " + pat_sub(p.sub2);
        case PK::SetP: {
            std::string out = "{";
            bool first = true;
            for (const auto& it : p.items) {
                if (!first) out += ", ";
                first = false;
                out += pat(it);
            }
            if (p.delta) {
                if (!first) out += ", ";
                out += pat(p.delta);
            }
            return out + "}";
        }
        case PK::MapP: {
            std::string out = "{";
            bool first = true;
            for (const auto& kv : p.pairs) {
                if (!first) out += ", ";
                first = false;
                out += pat(kv.first) + " -> " + pat(kv.second);
            }
            if (p.delta) {
                if (!first) out += ", ";
                out += pat(p.delta);
            }
            return out + "}";
        }
        case PK::EmptyMapP: return "{->}";
        case PK::CollectP: {
            std::string out = "(for ";
            bool first = true;
            for (const auto& it : p.items) {
                if (!first) out += ", ";
                first = false;
                out += pat(it);
            }
            if (p.delta) {
                if (!first) out += ", ";
                out += pat(p.delta);
            }
            return out + " end)";
        }
        case PK::DeltaRest: return "...";
        }
        return "?";
    }

    std::string stmt(const StmtPtr& sp) {
        const Stmt& s = *sp;
        switch (s.kind) {
        case StK::Val: return "val " + pat(s.pattern) + " = " + sub(s.expr);
        case StK::Assign: return s.name + " = " + sub(s.expr);
        case StK::AssignPath: return steps_source(s.name, s.steps) + " = " + sub(s.expr);
        case StK::PatternAssign: {
            std::string p = pat(s.pattern);
            if (p.empty() || p[0] != '(') p = "(" + p + ")";
            return p + " = " + sub(s.expr);
        }
        case StK::Def: {
            if (s.is_conversion) {
                const DefClause& c = s.def_clauses[0];
                return std::string("def this ") + (s.conv_auto ? ": " : ":> ") + type_ref(s.conv_target) +
                       " = " + sub(c.body);
            }
            std::string out;
            for (std::size_t i = 0; i < s.def_clauses.size(); ++i) {
                const DefClause& c = s.def_clauses[i];
                if (i) out += "; ";
                out += "def " + s.name;
                if (c.param) out += " " + pat(c.param);
                out += " = " + sub(c.body);
            }
            return out;
        }
        case StK::Typedef: {
            std::string out = "typedef " + s.name + " ";
            for (std::size_t i = 0; i < s.typedef_clauses.size(); ++i) {
                if (i) out += ", ";
                out += pat(s.typedef_clauses[i].pattern) + " = " + sub(s.typedef_clauses[i].body);
            }
            return out;
        }
        case StK::Import: {
            if (s.imports.size() > 1) {
                // grouped form: all entries share the base path
                TypePath base = s.imports[0].path;
                base.segments.pop_back();
                std::string out = "import " + base.dotted() + ".{";
                for (std::size_t i = 0; i < s.imports.size(); ++i) {
                    const ImportEntry& e = s.imports[i];
                    if (i) out += ", ";
                    out += e.path.segments.back();
                    if (e.bind_name != e.path.segments.back()) out += " => " + e.bind_name;
                }
                return out + "}";
            }
            const ImportEntry& e = s.imports[0];
            std::string out = "import " + e.path.dotted();
            if (e.wildcard) out += "._";
            else if (e.bind_name != e.path.segments.back()) out += " => " + e.bind_name;
            return out;
        }
        case StK::Private: {
            std::string out = "private ";
            for (std::size_t i = 0; i < s.names.size(); ++i) {
                if (i) out += ", ";
                out += s.names[i];
            }
            return out;
        }
        case StK::Memoize: {
            std::string out = "memoize ";
            for (std::size_t i = 0; i < s.memo_refs.size(); ++i) {
                if (i) out += ", ";
                out += s.memo_refs[i].weak ? "(" + s.memo_refs[i].name + ")" : s.memo_refs[i].name;
            }
            return out;
        }
        case StK::Yield: return "yield " + sub(s.expr);
        case StK::Control: return expr(s.expr);
        case StK::Pragma: {
            std::string out = "#";
            switch (s.pragma_kind) {
            case PragmaKind::Log: out += "log"; break;
            case PragmaKind::Print: out += "print"; break;
            case PragmaKind::Profile: out += "profile"; break;
            case PragmaKind::Assert: out += "assert"; break;
            case PragmaKind::Catch: out += "catch"; break;
            }
            if (s.pragma_kind == PragmaKind::Catch) return out + " " + pat(s.pragma_pattern) + " try " + sub(s.expr);
            return out + " " + sub(s.expr);
        }
        case StK::Module: {
            std::string out = "module ";
            for (std::size_t i = 0; i < s.module_path.size(); ++i) {
                if (i) out += ".";
                out += s.module_path[i];
            }
            for (const auto& b : s.body) out += "\n" + stmt(b);
            out += "\nend";
            if (s.next_sibling) out += "\n" + stmt(s.next_sibling);
            return out;
        }
        }
        return "?";
    }
};

// ---- s-expression dump (--dump-ast) -----------------------------------------

class SexprPrinter {
public:
    static std::string stmt_sexpr(const StmtPtr& s) {
        SexprPrinter p;
        return p.stmt(s);
    }
    static std::string expr_sexpr(const ExprPtr& e) {
        SexprPrinter p;
        return p.expr(e);
    }

private:
    std::string expr(const ExprPtr& ep) {
        const Expr& e = *ep;
        switch (e.kind) {
        case ExK::IntLit: return "(int " + e.int_value.to_string() + ")";
        case ExK::RealLit: return "(real " + render_double(e.real_value) + ")";
        case ExK::StrLit: return "(str " + escape_string(e.str_value) + ")";
        case ExK::BoolLit: return e.bool_value ? "(bool true)" : "(bool false)";
        case ExK::NilLit: return "nil";
        case ExK::EmptyList: return "(list)";
        case ExK::Ident: return "(id " + e.name + ")";
        case ExK::CtorLit: return "(ctor " + e.name + ")";
        case ExK::Send: return "(send " + expr(e.a) + " " + e.name + ")";
        case ExK::SendLens: return "(send-lens " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::Apply: return "(apply " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::Cons: return "(cons " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::VectorDisplay: return list("vector", e.items);
        case ExK::SetDisplay: return list("set", e.items);
        case ExK::MapDisplay: return list("map", e.items);
        case ExK::IntervalE: return "(interval " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::Lambda: return "(lambda" + cases(e.cases) + ")";
        case ExK::ObjectLit: {
            std::string out = "(object";
            if (e.a) out += " (parents " + expr(e.a) + ")";
            for (const auto& s : e.stmts) out += " " + stmt(s);
            return out + ")";
        }
        case ExK::BlockE: {
            std::string out = "(block";
            for (const auto& s : e.stmts) out += " " + stmt(s);
            return out + ")";
        }
        case ExK::Match: return "(match " + expr(e.a) + cases(e.cases) + ")";
        case ExK::TryE: return "(try " + expr(e.a) + cases(e.cases) + ")";
        case ExK::Lazy: return "(lazy " + expr(e.a) + ")";
        case ExK::Concurrent: return "(concurrent " + expr(e.a) + ")";
        case ExK::Force: return "(force " + expr(e.a) + ")";
        case ExK::Raise: return "(raise " + expr(e.a) + ")";
        case ExK::TypeofE: return "(typeof " + expr(e.a) + ")";
        case ExK::Random: return "(random " + expr(e.a) + ")";
        case ExK::Choose: return "(choose " + expr(e.a) + ")";
        case ExK::MinOf: return "(min " + expr(e.a) + ")";
        case ExK::MaxOf: return "(max " + expr(e.a) + ")";
        case ExK::NativeE: return "(native " + expr(e.a) + ")";
        case ExK::CompareOp:
            return "(" + std::string(e.name.empty() ? "~" : e.name) + " " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::XorOp: return "(xor " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::With: return "(with " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::WhileLoop: return "(while " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::ForLoop: return "(for " + pat(e.pattern) + " " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::LensPair: return "(lens-pair " + expr(e.a) + " " + expr(e.b) + ")";
        case ExK::LensPath: {
            std::string out = "(lens-path " + e.name;
            for (const auto& s : e.steps) {
                switch (s.kind) {
                case PathStep::K::Message: out += " (msg " + s.name + ")"; break;
                case PathStep::K::MessageArg: out += " (msg-arg " + s.name + " " + expr(s.arg) + ")"; break;
                case PathStep::K::LensApp: out += " (lens-app " + expr(s.arg) + ")"; break;
                }
            }
            return out + ")";
        }
        case ExK::TypeLit: return "(type " + e.type_path.dotted() + ")";
        case ExK::ConvertE: {
            std::string t = e.type_ref.dynamic ? "(dyn " + expr(e.type_ref.dynamic) + ")" : e.type_ref.path.dotted();
            return "(convert " + expr(e.a) + " " + t + ")";
        }
        case ExK::RootRef: return "root";
        case ExK::ThisRef: return "this";
        }
        return "?";
    }

    std::string list(const char* tag, const std::vector<ExprPtr>& items) {
        std::string out = "(" + std::string(tag);
        for (const auto& it : items) out += " " + expr(it);
        return out + ")";
    }

    std::string cases(const std::vector<MatchCase>& cs) {
        std::string out;
        for (const auto& c : cs) out += " (case " + pat(c.pattern) + " " + expr(c.body) + ")";
        return out;
    }

    std::string pat(const PatternPtr& p) { return "(pat " + SourcePrinter::pattern_source(p) + ")"; }

    std::string stmt(const StmtPtr& sp) {
        const Stmt& s = *sp;
        switch (s.kind) {
        case StK::Val: return "(val " + pat(s.pattern) + " " + expr(s.expr) + ")";
        case StK::Assign: return "(assign " + s.name + " " + expr(s.expr) + ")";
        case StK::AssignPath: {
            std::string out = "(assign-path " + s.name;
            for (const auto& st : s.steps) {
                switch (st.kind) {
                case PathStep::K::Message: out += " (msg " + st.name + ")"; break;
                case PathStep::K::MessageArg: out += " (msg-arg " + st.name + " " + expr(st.arg) + ")"; break;
                case PathStep::K::LensApp: out += " (lens-app " + expr(st.arg) + ")"; break;
                }
            }
            return out + " " + expr(s.expr) + ")";
        }
        case StK::PatternAssign: return "(passign " + pat(s.pattern) + " " + expr(s.expr) + ")";
        case StK::Def: {
            if (s.is_conversion)
                return std::string("(def-conversion ") + (s.conv_auto ? "auto " : "explicit ") +
                       expr(s.def_clauses[0].body) + ")";
            std::string out = "(def " + s.name;
            for (const auto& c : s.def_clauses) {
                out += " (clause";
                if (c.param) out += " " + pat(c.param);
                out += " " + expr(c.body) + ")";
            }
            return out + ")";
        }
        case StK::Typedef: {
            std::string out = "(typedef " + s.name;
            for (const auto& c : s.typedef_clauses) out += " (clause " + pat(c.pattern) + " " + expr(c.body) + ")";
            return out + ")";
        }
        case StK::Import: {
            std::string out = "(import";
            for (const auto& e : s.imports) {
                out += " (" + e.path.dotted();
                if (e.wildcard) out += " *";
                else out += " as " + e.bind_name;
                out += ")";
            }
            return out + ")";
        }
        case StK::Private: {
            std::string out = "(private";
            for (const auto& n : s.names) out += " " + n;
            return out + ")";
        }
        case StK::Memoize: {
            std::string out = "(memoize";
            for (const auto& r : s.memo_refs) out += r.weak ? " (weak " + r.name + ")" : " " + r.name;
            return out + ")";
        }
        case StK::Yield: return "(yield " + expr(s.expr) + ")";
        case StK::Control: return "(control " + expr(s.expr) + ")";
        case StK::Pragma: return "(pragma " + SourcePrinter::stmt_source(sp) + ")";
        case StK::Module: {
            std::string out = "(module";
            for (const auto& seg : s.module_path) out += " " + seg;
            for (const auto& b : s.body) out += " " + stmt(b);
            out += ")";
            if (s.next_sibling) out += " " + stmt(s.next_sibling);
            return out;
        }
        }
        return "?";
    }
};

// ---- structural equality (positions ignored) ---------------------------------

bool ast_equal(const ExprPtr& a, const ExprPtr& b);
bool ast_equal(const StmtPtr& a, const StmtPtr& b);

inline bool ast_equal(const PatternPtr& a, const PatternPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    if (a->name != b->name) return false;
    if (!(a->int_value == b->int_value)) return false;
    if (a->str_value != b->str_value && (a->kind == PK::StrLit)) return false;
    if (a->bool_value != b->bool_value) return false;
    if (!ast_equal(a->sub, b->sub) || !ast_equal(a->sub2, b->sub2)) return false;
    if (!ast_equal(a->expr, b->expr)) return false;
    if (a->items.size() != b->items.size()) return false;
    for (std::size_t i = 0; i < a->items.size(); ++i)
        if (!ast_equal(a->items[i], b->items[i])) return false;
    if (a->pairs.size() != b->pairs.size()) return false;
    for (std::size_t i = 0; i < a->pairs.size(); ++i)
        if (!ast_equal(a->pairs[i].first, b->pairs[i].first) ||
            !ast_equal(a->pairs[i].second, b->pairs[i].second))
            return false;
    if (a->fields.size() != b->fields.size()) return false;
    for (std::size_t i = 0; i < a->fields.size(); ++i)
        if (a->fields[i].name != b->fields[i].name || !ast_equal(a->fields[i].pattern, b->fields[i].pattern))
            return false;
    if (!ast_equal(a->delta, b->delta)) return false;
    if (a->type_ref.path.segments != b->type_ref.path.segments ||
        a->type_ref.path.root_anchored != b->type_ref.path.root_anchored ||
        !ast_equal(a->type_ref.dynamic, b->type_ref.dynamic))
        return false;
    if (a->type_path.segments != b->type_path.segments) return false;
    return true;
}

inline bool steps_equal(const std::vector<PathStep>& a, const std::vector<PathStep>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].kind != b[i].kind || a[i].name != b[i].name) return false;
        if (!ast_equal(a[i].arg, b[i].arg)) return false;
    }
    return true;
}

inline bool ast_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    if (a->name != b->name) return false;
    if (!(a->int_value == b->int_value)) return false;
    if (a->kind == ExK::RealLit &&
        !(a->real_value == b->real_value || (a->real_value != a->real_value && b->real_value != b->real_value)))
        return false;
    if (a->kind == ExK::StrLit && a->str_value != b->str_value) return false;
    if (a->bool_value != b->bool_value) return false;
    if (!ast_equal(a->a, b->a) || !ast_equal(a->b, b->b)) return false;
    if (a->items.size() != b->items.size()) return false;
    for (std::size_t i = 0; i < a->items.size(); ++i)
        if (!ast_equal(a->items[i], b->items[i])) return false;
    if (a->cases.size() != b->cases.size()) return false;
    for (std::size_t i = 0; i < a->cases.size(); ++i)
        if (!ast_equal(a->cases[i].pattern, b->cases[i].pattern) || !ast_equal(a->cases[i].body, b->cases[i].body))
            return false;
    if (a->stmts.size() != b->stmts.size()) return false;
    for (std::size_t i = 0; i < a->stmts.size(); ++i)
        if (!ast_equal(a->stmts[i], b->stmts[i])) return false;
    if (!ast_equal(a->pattern, b->pattern)) return false;
    if (!steps_equal(a->steps, b->steps)) return false;
    if (a->type_path.segments != b->type_path.segments) return false;
    if (a->type_ref.path.segments != b->type_ref.path.segments ||
        a->type_ref.path.root_anchored != b->type_ref.path.root_anchored ||
        !ast_equal(a->type_ref.dynamic, b->type_ref.dynamic))
        return false;
    return true;
}

inline bool ast_equal(const StmtPtr& a, const StmtPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    if (a->name != b->name) return false;
    if (!ast_equal(a->pattern, b->pattern)) return false;
    if (!ast_equal(a->expr, b->expr)) return false;
    if (!steps_equal(a->steps, b->steps)) return false;
    if (a->def_clauses.size() != b->def_clauses.size()) return false;
    for (std::size_t i = 0; i < a->def_clauses.size(); ++i)
        if (!ast_equal(a->def_clauses[i].param, b->def_clauses[i].param) ||
            !ast_equal(a->def_clauses[i].body, b->def_clauses[i].body))
            return false;
    if (a->def_simple != b->def_simple || a->is_conversion != b->is_conversion || a->conv_auto != b->conv_auto)
        return false;
    if (a->typedef_clauses.size() != b->typedef_clauses.size()) return false;
    for (std::size_t i = 0; i < a->typedef_clauses.size(); ++i)
        if (!ast_equal(a->typedef_clauses[i].pattern, b->typedef_clauses[i].pattern) ||
            !ast_equal(a->typedef_clauses[i].body, b->typedef_clauses[i].body))
            return false;
    if (a->imports.size() != b->imports.size()) return false;
    for (std::size_t i = 0; i < a->imports.size(); ++i)
        if (a->imports[i].path.segments != b->imports[i].path.segments ||
            a->imports[i].bind_name != b->imports[i].bind_name || a->imports[i].wildcard != b->imports[i].wildcard)
            return false;
    if (a->names != b->names) return false;
    if (a->memo_refs.size() != b->memo_refs.size()) return false;
    for (std::size_t i = 0; i < a->memo_refs.size(); ++i)
        if (a->memo_refs[i].name != b->memo_refs[i].name || a->memo_refs[i].weak != b->memo_refs[i].weak)
            return false;
    if (a->pragma_kind != b->pragma_kind || !ast_equal(a->pragma_pattern, b->pragma_pattern)) return false;
    if (a->module_path != b->module_path) return false;
    if (a->body.size() != b->body.size()) return false;
    for (std::size_t i = 0; i < a->body.size(); ++i)
        if (!ast_equal(a->body[i], b->body[i])) return false;
    if (!ast_equal(a->next_sibling, b->next_sibling)) return false;
    return true;
}

} // namespace babel17
