#pragma once

#include "babel17/bigint.hpp"
#include "babel17/source.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace babel17 {

struct Expr;
struct Stmt;
struct Pattern;
using ExprPtr = std::shared_ptr<const Expr>;
using StmtPtr = std::shared_ptr<const Stmt>;
using PatternPtr = std::shared_ptr<const Pattern>;

// A dotted path of (folded) identifiers, optionally anchored at the module root.
struct TypePath {
    std::vector<std::string> segments;
    bool root_anchored = false;

    std::string dotted() const {
        std::string s = root_anchored ? "root" : "";
        for (const auto& seg : segments) {
            if (!s.empty()) s += ".";
            s += seg;
        }
        return s;
    }
};

// A type position is either a static path or a parenthesized expression
// evaluating to a type value.
struct TypeRef {
    TypePath path;     // valid when dynamic == nullptr
    ExprPtr dynamic;   // (e) form
};

enum class ExK {
    IntLit,
    RealLit,
    StrLit,
    BoolLit,
    NilLit,
    EmptyList,
    Ident,
    CtorLit, // bare constructor; argument application goes through Apply
    Send,    // target.name
    SendLens, // target.(lens)
    Apply,
    Cons, // h :: t
    VectorDisplay,
    SetDisplay,
    MapDisplay, // pairs; empty map display is MapDisplay with no items
    IntervalE,  // [a; b]
    Lambda,     // one or more (pattern, block) clauses; unmatched -> DomainError
    ObjectLit,  // statements + optional parents
    BlockE,     // begin ... end
    Match,
    TryE,
    Lazy,
    Concurrent,
    Force,
    Raise, // exception e
    TypeofE,
    Random,
    Choose,
    MinOf,
    MaxOf,
    NativeE,
    CompareOp, // a ~ b
    XorOp,
    With,      // with collector do block end
    WhileLoop,
    ForLoop,
    LensPair, // lens (g, p)
    LensPath, // lens x => access-path
    TypeLit,  // (: path)
    ConvertE, // e :> t   (explicit conversion)
    RootRef,
    ThisRef,
};

struct MatchCase {
    PatternPtr pattern;
    ExprPtr body; // always a BlockE
};

// Steps of a lens access path / assignment path.
struct PathStep {
    enum class K { Message, MessageArg, LensApp } kind;
    std::string name; // Message / MessageArg
    ExprPtr arg;      // MessageArg argument or LensApp lens expression
};

struct Expr {
    ExK kind;
    SourcePos pos;
    bool synthetic = false; // desugar-generated block/match: an expression, not a control statement

    Int int_value;                    // IntLit
    double real_value = 0;            // RealLit
    std::u32string str_value;         // StrLit
    bool bool_value = false;          // BoolLit
    std::string name;                 // Ident / CtorLit / Send message / LensPath parameter
    ExprPtr a, b;                     // generic children (target/fn/head/..., arg/tail/...)
    std::vector<ExprPtr> items;       // displays
    std::vector<MatchCase> cases;     // Match / Lambda clauses / Try catch cases
    std::vector<StmtPtr> stmts;       // BlockE / ObjectLit
    PatternPtr pattern;               // ForLoop pattern
    std::vector<PathStep> steps;      // LensPath
    TypePath type_path;               // TypeLit
    TypeRef type_ref;                 // ConvertE target
};

inline ExprPtr mk_expr(ExK k, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->pos = pos;
    return e;
}

// Mutable during construction; stored as const.
inline Expr& mut(const ExprPtr& p) { return const_cast<Expr&>(*p); }

enum class StK {
    Val,
    Assign,        // x = e (op-assignments are pre-lowered)
    AssignPath,    // x.path... = e  /  x.path... op= e (lowered to set/modify)
    PatternAssign, // (a, b) = e
    Def,
    Typedef,
    Import,
    Private,
    Memoize,
    Yield,
    Control, // control expression in statement position
    Pragma,
    Module, // top-level only after analysis
};

struct DefClause {
    PatternPtr param; // null for a simple definition
    ExprPtr body;
    SourcePos pos;
};

// Runtime clause view shared by defs, lambdas and object members.
struct Clause {
    PatternPtr param; // null for a simple definition
    ExprPtr body;
};

struct TypedefClause {
    PatternPtr pattern;
    ExprPtr body; // never null: shorthand forms are expanded by the parser
    SourcePos pos;
};

struct ImportEntry {
    TypePath path;            // full path as written (aliases resolved later)
    std::string bind_name;    // local name (last segment or rename)
    bool wildcard = false;    // import path._
    SourcePos pos;
};

struct MemoRef {
    std::string name;
    bool weak = false;
    SourcePos pos;
};

enum class PragmaKind { Log, Print, Profile, Assert, Catch };

struct Stmt {
    StK kind;
    SourcePos pos;

    PatternPtr pattern;       // Val / PatternAssign
    ExprPtr expr;             // most statements
    std::string name;         // Assign / AssignPath root / Def / Typedef names
    std::vector<PathStep> steps; // AssignPath
    std::vector<DefClause> def_clauses;
    bool def_simple = false;
    bool is_conversion = false; // def this : t / def this :> t
    bool conv_auto = false;
    TypeRef conv_target;
    int memo_kind = 0; // 0 none, 1 strong, 2 weak (set on Def by analysis)
    std::vector<TypedefClause> typedef_clauses;
    std::vector<ImportEntry> imports;
    std::vector<std::string> names; // Private
    std::vector<MemoRef> memo_refs;
    PragmaKind pragma_kind = PragmaKind::Log;
    PatternPtr pragma_pattern; // #catch
    std::vector<std::string> module_path;
    bool module_unittest = false;
    std::vector<StmtPtr> body; // Module
    StmtPtr next_sibling;      // unittest section split off by the parser
};

inline std::shared_ptr<Stmt> mk_stmt(StK k, SourcePos pos) {
    auto s = std::make_shared<Stmt>();
    s->kind = k;
    s->pos = pos;
    return s;
}

enum class PK {
    Wildcard,
    Ident,
    As,      // (x as p)
    IntLit,
    StrLit,
    BoolLit,
    Nil,
    Ctor,     // c p / bare c
    Guard,    // (p if e)
    ValP,     // (val e)
    Destruct, // (c ! p)
    Predicate, // (f ? p)
    Record,    // {m = p, ...}
    Exception, // exception p
    TypeAnnot, // (p : t) / (p : (e))
    Inner,     // (t p), inner-value pattern
    ListP,
    VectorP,
    ConsP,
    SetP,
    MapP,
    EmptyMapP,
    CollectP, // (for p1, ..., pn end)
    DeltaRest, // ...
};

struct RecordFieldPattern {
    std::string name;
    PatternPtr pattern;
};

struct Pattern {
    PK kind;
    SourcePos pos;

    Int int_value;
    std::u32string str_value;
    bool bool_value = false;
    std::string name;              // Ident / As binder / Ctor name / Destruct ctor
    PatternPtr sub;                // single child
    PatternPtr sub2;               // ConsP tail
    ExprPtr expr;                  // Guard / ValP / Predicate fn / dynamic type
    std::vector<PatternPtr> items; // sequence/set elements
    std::vector<std::pair<PatternPtr, PatternPtr>> pairs; // MapP key->value
    std::vector<RecordFieldPattern> fields;
    PatternPtr delta; // trailing rest pattern, when present
    TypeRef type_ref; // TypeAnnot
    TypePath type_path; // Inner
};

inline std::shared_ptr<Pattern> mk_pattern(PK k, SourcePos pos) {
    auto p = std::make_shared<Pattern>();
    p->kind = k;
    p->pos = pos;
    return p;
}

// True for the control expressions of section 21: begin/if/match/try/for/while.
// `if` is already lowered to match by the parser.
inline bool is_control_expr(const Expr& e) {
    if (e.synthetic) return false;
    switch (e.kind) {
    case ExK::BlockE:
    case ExK::Match:
    case ExK::TryE:
    case ExK::ForLoop:
    case ExK::WhileLoop: return true;
    default: return false;
    }
}

} // namespace babel17
