#pragma once

#include "babel17/ast.hpp"
#include "babel17/lexer.hpp"

#include <functional>
#include <optional>
#include <set>
#include <unordered_set>

namespace babel17 {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    static Parser from_source(std::string_view src) { return Parser(tokenize(src)); }

    std::vector<StmtPtr> parse_program() {
        auto stmts = parse_block({"\x04"}, /*allow_module=*/true);
        expect_eof();
        return stmts;
    }

    ExprPtr parse_single_expression() {
        skip_separators();
        ExprPtr e = parse_expression();
        skip_separators();
        expect_eof();
        return e;
    }

    // One REPL entry: a single statement.
    StmtPtr parse_single_statement() {
        skip_separators();
        StmtPtr s = parse_statement(true);
        skip_separators();
        expect_eof();
        return s;
    }

    PatternPtr parse_single_pattern() {
        skip_separators();
        PatternPtr p = parse_pattern();
        skip_separators();
        expect_eof();
        return p;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    int fresh_ = 0;

    // ---- token plumbing -------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = i_ + ahead;
        return k < toks_.size() ? toks_[k] : toks_.back();
    }
    const Token& advance() { return toks_[std::min(i_++, toks_.size() - 1)]; }
    bool at_eof() const { return peek().kind == Tok::Eof; }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(peek().pos, msg); }
    [[noreturn]] void fail_at(SourcePos p, const std::string& msg) const {
        throw StaticError(ErrorStage::Parse, p, msg);
    }

    bool accept_sym(std::string_view s) {
        if (peek().is_sym(s)) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_kw(std::string_view k) {
        if (peek().is_kw(k)) {
            advance();
            return true;
        }
        return false;
    }
    void expect_sym(std::string_view s) {
        if (!accept_sym(s)) fail("expected '" + std::string(s) + "'");
    }
    void expect_kw(std::string_view k) {
        if (!accept_kw(k)) fail("expected '" + std::string(k) + "'");
    }
    void expect_eof() {
        if (!at_eof()) fail("unexpected trailing input");
    }
    std::string expect_ident() {
        if (peek().kind != Tok::Identifier) fail("expected an identifier");
        return advance().text;
    }

    // module path segments may also be the keyword `unittest`
    bool peek_segment(std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Identifier || peek(ahead).is_kw("unittest");
    }
    std::string expect_segment() {
        if (!peek_segment()) fail("expected an identifier");
        return advance().text;
    }

    void skip_separators() {
        while (peek().kind == Tok::Newline || peek().is_sym(";")) advance();
    }

    std::string fresh(const char* stem) { return std::string("tmp") + stem + std::to_string(fresh_++); }

    // ---- small builders --------------------------------------------------

    static ExprPtr block_of(std::vector<StmtPtr> stmts, SourcePos pos) {
        auto b = mk_expr(ExK::BlockE, pos);
        mut(b).stmts = std::move(stmts);
        return b;
    }

    static ExprPtr yield_block(ExprPtr e) {
        auto y = mk_stmt(StK::Yield, e->pos);
        y->expr = e;
        return block_of({y}, e->pos);
    }

    static StmtPtr val_stmt(const std::string& name, ExprPtr e) {
        auto p = mk_pattern(PK::Ident, e->pos);
        p->name = name;
        auto s = mk_stmt(StK::Val, e->pos);
        s->pattern = p;
        s->expr = e;
        return s;
    }

    static ExprPtr ident(const std::string& name, SourcePos pos) {
        auto e = mk_expr(ExK::Ident, pos);
        mut(e).name = name;
        return e;
    }

    static ExprPtr bool_lit(bool v, SourcePos pos) {
        auto e = mk_expr(ExK::BoolLit, pos);
        mut(e).bool_value = v;
        return e;
    }

    static ExprPtr int_lit(const Int& v, SourcePos pos) {
        auto e = mk_expr(ExK::IntLit, pos);
        mut(e).int_value = v;
        return e;
    }

    static ExprPtr ctor_lit(const std::string& folded, const std::string& shown, SourcePos pos) {
        auto e = mk_expr(ExK::CtorLit, pos);
        mut(e).name = folded;
        mut(e).str_value = std::u32string(shown.begin(), shown.end());
        return e;
    }

    static ExprPtr raise_ctor(const char* shown, SourcePos pos) {
        auto r = mk_expr(ExK::Raise, pos);
        mut(r).a = ctor_lit(uni::fold_word(shown), shown, pos);
        return r;
    }

    static ExprPtr send(ExprPtr target, const std::string& msg, SourcePos pos) {
        auto e = mk_expr(ExK::Send, pos);
        mut(e).a = std::move(target);
        mut(e).name = msg;
        return e;
    }

    static ExprPtr apply(ExprPtr fn, ExprPtr arg, SourcePos pos) {
        auto e = mk_expr(ExK::Apply, pos);
        mut(e).a = std::move(fn);
        mut(e).b = std::move(arg);
        return e;
    }

    static ExprPtr binop_send(ExprPtr a, const std::string& msg, ExprPtr b, SourcePos pos) {
        return apply(send(std::move(a), msg, pos), std::move(b), pos);
    }

    static PatternPtr wild(SourcePos pos) { return mk_pattern(PK::Wildcard, pos); }

    static PatternPtr bool_pat(bool v, SourcePos pos) {
        auto p = mk_pattern(PK::BoolLit, pos);
        p->bool_value = v;
        return p;
    }

    static MatchCase mcase(PatternPtr p, ExprPtr body_block) { return MatchCase{std::move(p), std::move(body_block)}; }

    static ExprPtr match_of(ExprPtr scrutinee, std::vector<MatchCase> cases, SourcePos pos) {
        auto m = mk_expr(ExK::Match, pos);
        mut(m).a = std::move(scrutinee);
        mut(m).cases = std::move(cases);
        return m;
    }

    // The Table 5 translations.
    static ExprPtr synthetic(ExprPtr e) {
        mut(e).synthetic = true;
        return e;
    }

    static ExprPtr not_of(ExprPtr a, SourcePos pos) {
        return synthetic(match_of(std::move(a),
                        {mcase(bool_pat(true, pos), yield_block(bool_lit(false, pos))),
                         mcase(bool_pat(false, pos), yield_block(bool_lit(true, pos))),
                         mcase(wild(pos), yield_block(raise_ctor("DomainError", pos)))},
                        pos));
    }

    static ExprPtr bool_match_tail(ExprPtr b, SourcePos pos) {
        return synthetic(match_of(std::move(b),
                                  {mcase(bool_pat(true, pos), yield_block(bool_lit(true, pos))),
                                   mcase(bool_pat(false, pos), yield_block(bool_lit(false, pos))),
                                   mcase(wild(pos), yield_block(raise_ctor("DomainError", pos)))},
                                  pos));
    }

    static ExprPtr and_of(ExprPtr a, ExprPtr b, SourcePos pos) {
        return synthetic(match_of(std::move(a),
                                  {mcase(bool_pat(true, pos), yield_block(bool_match_tail(std::move(b), pos))),
                                   mcase(bool_pat(false, pos), yield_block(bool_lit(false, pos))),
                                   mcase(wild(pos), yield_block(raise_ctor("DomainError", pos)))},
                                  pos));
    }

    static ExprPtr or_of(ExprPtr a, ExprPtr b, SourcePos pos) {
        return synthetic(match_of(std::move(a),
                                  {mcase(bool_pat(false, pos), yield_block(bool_match_tail(std::move(b), pos))),
                                   mcase(bool_pat(true, pos), yield_block(bool_lit(true, pos))),
                                   mcase(wild(pos), yield_block(raise_ctor("DomainError", pos)))},
                                  pos));
    }

    // ---- patterns ---------------------------------------------------------

    static bool is_delta(const PatternPtr& p) {
        if (!p) return false;
        if (p->kind == PK::DeltaRest) return true;
        if (p->kind == PK::As || p->kind == PK::Guard) return is_delta(p->sub);
        return false;
    }

    PatternPtr parse_pattern() { return parse_pattern_annot(); }

    PatternPtr parse_pattern_annot() {
        PatternPtr p = parse_pattern_cons();
        SourcePos pos = peek().pos;
        if (peek().is_sym(":") && !peek(1).is_sym(">")) {
            advance();
            auto a = mk_pattern(PK::TypeAnnot, pos);
            a->sub = p;
            a->type_ref = parse_type_ref();
            return a;
        }
        return p;
    }

    PatternPtr parse_pattern_cons() {
        PatternPtr h = parse_pattern_juxta();
        if (peek().is_sym("::")) {
            SourcePos pos = advance().pos;
            auto t = parse_pattern_cons();
            auto c = mk_pattern(PK::ConsP, pos);
            c->sub = h;
            c->sub2 = t;
            return c;
        }
        return h;
    }

    bool token_starts_pattern(const Token& t) const {
        switch (t.kind) {
        case Tok::IntLit:
        case Tok::StringLit:
        case Tok::Identifier:
        case Tok::Constructor: return true;
        case Tok::Keyword:
            return t.text == "true" || t.text == "false" || t.text == "nil" || t.text == "val" ||
                   t.text == "exception" || t.text == "for";
        case Tok::Symbol:
            return t.text == "_" || t.text == "(" || t.text == "[" || t.text == "{" || t.text == "..." ||
                   t.text == "-";
        default: return false;
        }
    }

    PatternPtr parse_pattern_juxta() {
        const Token& t = peek();
        if (t.kind == Tok::Constructor) {
            SourcePos pos = t.pos;
            std::string name = advance().text;
            std::string shown = toks_[i_ - 1].raw;
            auto p = mk_pattern(PK::Ctor, pos);
            p->name = name;
            p->str_value = std::u32string(shown.begin(), shown.end());
            if (token_starts_pattern(peek())) p->sub = parse_pattern_juxta();
            return p;
        }
        if (t.is_kw("exception")) {
            SourcePos pos = advance().pos;
            auto p = mk_pattern(PK::Exception, pos);
            p->sub = parse_pattern_juxta();
            return p;
        }
        if (t.is_kw("val")) {
            SourcePos pos = advance().pos;
            auto p = mk_pattern(PK::ValP, pos);
            p->expr = parse_app_expr();
            return p;
        }
        if (t.kind == Tok::Identifier) {
            // `x`, or an inner-value pattern `t p` (t possibly dotted).
            SourcePos pos = t.pos;
            std::size_t save = i_;
            std::string first = advance().text;
            TypePath path;
            path.segments.push_back(first);
            while (peek().is_sym(".") && peek(1).kind == Tok::Identifier) {
                advance();
                path.segments.push_back(advance().text);
            }
            if (token_starts_pattern(peek())) {
                auto p = mk_pattern(PK::Inner, pos);
                p->type_path = std::move(path);
                p->sub = parse_pattern_juxta();
                return p;
            }
            if (path.segments.size() > 1) {
                i_ = save; // dotted path without an argument is not a pattern
                fail("expected a pattern");
            }
            auto p = mk_pattern(PK::Ident, pos);
            p->name = first;
            return p;
        }
        return parse_pattern_atom();
    }

    PatternPtr parse_pattern_atom() {
        const Token& t = peek();
        SourcePos pos = t.pos;
        switch (t.kind) {
        case Tok::IntLit: {
            advance();
            auto p = mk_pattern(PK::IntLit, pos);
            p->int_value = t.int_value;
            return p;
        }
        case Tok::StringLit: {
            advance();
            auto p = mk_pattern(PK::StrLit, pos);
            p->str_value = t.str_value;
            return p;
        }
        case Tok::Keyword:
            if (t.text == "true" || t.text == "false") {
                advance();
                return bool_pat(t.text == "true", pos);
            }
            if (t.text == "nil") {
                advance();
                return mk_pattern(PK::Nil, pos);
            }
            if (t.text == "for") return parse_collect_pattern();
            break;
        case Tok::Symbol:
            if (t.text == "_") {
                advance();
                return wild(pos);
            }
            if (t.text == "...") {
                advance();
                return mk_pattern(PK::DeltaRest, pos);
            }
            if (t.text == "-" && peek(1).kind == Tok::IntLit) {
                advance();
                auto p = mk_pattern(PK::IntLit, pos);
                p->int_value = -advance().int_value;
                return p;
            }
            if (t.text == "(") return parse_paren_pattern();
            if (t.text == "[") return parse_list_pattern();
            if (t.text == "{") return parse_brace_pattern();
            break;
        default: break;
        }
        fail("expected a pattern");
    }

    PatternPtr parse_collect_pattern() {
        SourcePos pos = peek().pos;
        expect_kw("for");
        auto p = mk_pattern(PK::CollectP, pos);
        if (!accept_kw("end")) {
            for (;;) {
                auto item = parse_pattern();
                if (is_delta(item)) {
                    p->delta = item;
                    break;
                }
                p->items.push_back(item);
                if (!accept_sym(",")) break;
                if (peek().is_kw("end")) break;
            }
            expect_kw("end");
        }
        return p;
    }

    PatternPtr parse_paren_pattern() {
        SourcePos pos = peek().pos;
        expect_sym("(");
        if (accept_sym(")")) return mk_pattern(PK::VectorP, pos); // ()
        // (c ! p) destructuring
        if (peek().kind == Tok::Constructor && peek(1).is_sym("!")) {
            std::string name = advance().text;
            advance(); // '!'
            auto p = mk_pattern(PK::Destruct, pos);
            p->name = name;
            p->sub = peek().is_sym(")") ? wild(pos) : parse_pattern();
            expect_sym(")");
            return p;
        }
        // (f ? p) predicate: an expression followed by '?'
        {
            std::size_t save = i_;
            int save_fresh = fresh_;
            try {
                ExprPtr fn = parse_expression();
                if (peek().is_sym("?")) {
                    advance();
                    auto p = mk_pattern(PK::Predicate, pos);
                    p->expr = fn;
                    p->sub = peek().is_sym(")") ? bool_pat(true, pos) : parse_pattern();
                    expect_sym(")");
                    return p;
                }
            } catch (const StaticError&) {
            }
            i_ = save;
            fresh_ = save_fresh;
        }
        PatternPtr p = parse_pattern();
        if (p->kind == PK::Ident && peek().is_kw("as")) {
            advance();
            auto a = mk_pattern(PK::As, pos);
            a->name = p->name;
            a->sub = parse_pattern();
            p = a;
        }
        if (peek().is_kw("if")) {
            advance();
            auto g = mk_pattern(PK::Guard, pos);
            g->sub = p;
            g->expr = parse_expression();
            p = g;
        }
        if (accept_sym(",")) {
            auto v = mk_pattern(PK::VectorP, pos);
            if (is_delta(p)) fail_at(p->pos, "a rest pattern cannot be the first element");
            v->items.push_back(p);
            if (accept_sym(")")) return v; // (p,) one-element vector
            for (;;) {
                auto item = parse_pattern_element();
                if (is_delta(item)) {
                    v->delta = item;
                    break;
                }
                v->items.push_back(item);
                if (!accept_sym(",")) break;
            }
            expect_sym(")");
            return v;
        }
        expect_sym(")");
        return p;
    }

    // An element of a bracketed pattern; allows `x as p` / `p if e` without parens
    // only through the paren form, but allows bare deltas.
    PatternPtr parse_pattern_element() { return parse_pattern(); }

    PatternPtr parse_list_pattern() {
        SourcePos pos = peek().pos;
        expect_sym("[");
        auto p = mk_pattern(PK::ListP, pos);
        if (accept_sym("]")) return p;
        for (;;) {
            auto item = parse_pattern_element();
            if (is_delta(item)) {
                p->delta = item;
                break;
            }
            p->items.push_back(item);
            if (!accept_sym(",")) break;
        }
        expect_sym("]");
        return p;
    }

    PatternPtr parse_brace_pattern() {
        SourcePos pos = peek().pos;
        expect_sym("{");
        if (accept_sym("}")) return mk_pattern(PK::SetP, pos); // {} empty set
        if (accept_sym("->")) {
            expect_sym("}");
            return mk_pattern(PK::EmptyMapP, pos);
        }
        // record pattern: ident '=' (not '==')
        if (peek().kind == Tok::Identifier && peek(1).is_sym("=")) {
            auto p = mk_pattern(PK::Record, pos);
            for (;;) {
                if (peek().is_sym("}")) break;
                auto item_pos = peek().pos;
                if (!(peek().kind == Tok::Identifier && peek(1).is_sym("="))) {
                    auto d = parse_pattern_element();
                    if (!is_delta(d)) fail_at(item_pos, "expected 'name = pattern' or a rest pattern");
                    p->delta = d;
                    break;
                }
                RecordFieldPattern f;
                f.name = advance().text;
                advance(); // '='
                f.pattern = parse_pattern_element();
                p->fields.push_back(std::move(f));
                if (!accept_sym(",")) break;
            }
            expect_sym("}");
            return p;
        }
        // set or map pattern
        auto first = parse_pattern_element();
        if (peek().is_sym("->")) {
            advance();
            auto p = mk_pattern(PK::MapP, pos);
            p->pairs.emplace_back(first, parse_pattern_element());
            while (accept_sym(",")) {
                if (peek().is_sym("}")) break;
                auto k = parse_pattern_element();
                if (is_delta(k)) {
                    p->delta = k;
                    break;
                }
                expect_sym("->");
                p->pairs.emplace_back(k, parse_pattern_element());
            }
            expect_sym("}");
            return p;
        }
        auto p = mk_pattern(PK::SetP, pos);
        if (is_delta(first)) fail_at(first->pos, "a rest pattern cannot be the only element");
        p->items.push_back(first);
        while (accept_sym(",")) {
            if (peek().is_sym("}")) break;
            auto item = parse_pattern_element();
            if (is_delta(item)) {
                p->delta = item;
                break;
            }
            p->items.push_back(item);
        }
        expect_sym("}");
        return p;
    }

    // ---- type references -------------------------------------------------

    TypePath parse_type_path() {
        TypePath path;
        if (accept_kw("root")) {
            path.root_anchored = true;
            expect_sym(".");
        }
        path.segments.push_back(expect_ident());
        while (peek().is_sym(".") && peek_segment(1)) {
            advance();
            path.segments.push_back(advance().text);
        }
        return path;
    }

    TypeRef parse_type_ref() {
        TypeRef r;
        if (peek().is_sym("(")) {
            advance();
            r.dynamic = parse_expression();
            expect_sym(")");
            return r;
        }
        r.path = parse_type_path();
        return r;
    }

    // ---- expressions -------------------------------------------------------

    ExprPtr parse_expression() {
        // `pattern => body` lambda?
        std::size_t save = i_;
        int save_fresh = fresh_;
        try {
            PatternPtr p = parse_pattern();
            if (peek().is_sym("=>")) {
                SourcePos pos = advance().pos;
                ExprPtr body = parse_expression();
                auto lam = mk_expr(ExK::Lambda, pos);
                mut(lam).cases.push_back(mcase(p, yield_block(body)));
                return lam;
            }
        } catch (const StaticError&) {
        }
        i_ = save;
        fresh_ = save_fresh;
        return parse_or_expr();
    }

    // `:>` binds tighter than the relational layer: section 28 tests read
    // `e :> list == [1, 3]` as `(e :> list) == [1, 3]`.
    ExprPtr parse_convert_expr() {
        ExprPtr e = parse_to_expr();
        while (peek().is_sym(":>")) {
            SourcePos pos = advance().pos;
            auto c = mk_expr(ExK::ConvertE, pos);
            mut(c).a = e;
            mut(c).type_ref = parse_type_ref();
            e = c;
        }
        return e;
    }

    ExprPtr parse_or_expr() {
        ExprPtr e = parse_and_expr();
        for (;;) {
            if (peek().is_kw("or")) {
                SourcePos pos = advance().pos;
                e = or_of(e, parse_and_expr(), pos);
            } else if (peek().is_kw("xor")) {
                SourcePos pos = advance().pos;
                auto x = mk_expr(ExK::XorOp, pos);
                mut(x).a = e;
                mut(x).b = parse_and_expr();
                e = x;
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_and_expr() {
        ExprPtr e = parse_not_expr();
        while (peek().is_kw("and")) {
            SourcePos pos = advance().pos;
            e = and_of(e, parse_not_expr(), pos);
        }
        return e;
    }

    ExprPtr parse_not_expr() {
        if (peek().is_kw("not")) {
            SourcePos pos = advance().pos;
            return not_of(parse_not_expr(), pos);
        }
        return parse_rel_expr();
    }

    static bool is_rel_op(const Token& t) {
        return t.is_sym("==") || t.is_sym("<>") || t.is_sym("<") || t.is_sym("<=") || t.is_sym(">") ||
               t.is_sym(">=") || t.is_sym("~");
    }

    // Primitive single relation node: a RelOp wrapping ~ with the section 16
    // match semantics is represented via ExK::CompareOp plus a Match when needed.
    ExprPtr rel_node(const std::string& op, ExprPtr a, ExprPtr b, SourcePos pos) {
        auto cmp = mk_expr(ExK::CompareOp, pos);
        mut(cmp).a = std::move(a);
        mut(cmp).b = std::move(b);
        if (op == "~") return cmp;
        mut(cmp).name = op; // evaluator maps the sign through op, absorbing Unrelated for == and <>
        return cmp;
    }

    ExprPtr parse_rel_expr() {
        ExprPtr first = parse_convert_expr();
        if (!is_rel_op(peek())) return first;
        std::vector<ExprPtr> operands{first};
        std::vector<std::string> ops;
        std::vector<SourcePos> positions;
        while (is_rel_op(peek())) {
            positions.push_back(peek().pos);
            ops.push_back(advance().text);
            operands.push_back(parse_convert_expr());
        }
        if (operands.size() == 2) return rel_node(ops[0], operands[0], operands[1], positions[0]);
        return build_chain(operands, ops, positions);
    }

    // The section 16 nested single-evaluation form.
    ExprPtr build_chain(const std::vector<ExprPtr>& es, const std::vector<std::string>& ops,
                        const std::vector<SourcePos>& positions) {
        SourcePos pos = es[0]->pos;
        std::string t1 = fresh("chain");
        std::string t2 = fresh("chain");
        std::vector<StmtPtr> stmts;
        stmts.push_back(val_stmt(t1, es[0]));
        stmts.push_back(val_stmt(t2, es[1]));
        ExprPtr head = rel_node(ops[0], ident(t1, pos), ident(t2, pos), positions[0]);
        ExprPtr rest = build_chain_rest(t2, es, ops, positions, 2);
        auto y = mk_stmt(StK::Yield, pos);
        y->expr = and_of(head, rest, positions[0]);
        stmts.push_back(y);
        return synthetic(block_of(std::move(stmts), pos));
    }

    ExprPtr build_chain_rest(const std::string& prev, const std::vector<ExprPtr>& es,
                             const std::vector<std::string>& ops, const std::vector<SourcePos>& positions,
                             std::size_t k) {
        SourcePos pos = positions[k - 1];
        if (k + 1 == es.size()) return rel_node(ops[k - 1], ident(prev, pos), es[k], pos);
        std::string tk = fresh("chain");
        std::vector<StmtPtr> stmts;
        stmts.push_back(val_stmt(tk, es[k]));
        ExprPtr head = rel_node(ops[k - 1], ident(prev, pos), ident(tk, pos), pos);
        ExprPtr rest = build_chain_rest(tk, es, ops, positions, k + 1);
        auto y = mk_stmt(StK::Yield, pos);
        y->expr = and_of(head, rest, pos);
        stmts.push_back(y);
        return synthetic(block_of(std::move(stmts), pos));
    }

    ExprPtr parse_to_expr() {
        ExprPtr e = parse_cons_expr();
        for (;;) {
            if (peek().is_kw("to")) {
                SourcePos pos = advance().pos;
                e = binop_send(e, "to_", parse_cons_expr(), pos);
            } else if (peek().is_kw("downto")) {
                SourcePos pos = advance().pos;
                e = binop_send(e, "downto_", parse_cons_expr(), pos);
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_cons_expr() {
        ExprPtr h = parse_add_expr();
        if (peek().is_sym("::")) {
            SourcePos pos = advance().pos;
            ExprPtr t = parse_cons_expr();
            auto c = mk_expr(ExK::Cons, pos);
            mut(c).a = h;
            mut(c).b = t;
            return c;
        }
        return h;
    }

    ExprPtr parse_add_expr() {
        ExprPtr e = parse_mul_expr();
        for (;;) {
            SourcePos pos = peek().pos;
            if (accept_sym("+")) e = binop_send(e, "plus_", parse_mul_expr(), pos);
            else if (accept_sym("-")) e = binop_send(e, "minus_", parse_mul_expr(), pos);
            else if (accept_sym("++")) e = binop_send(e, "plus__", parse_mul_expr(), pos);
            else if (accept_sym("--")) e = binop_send(e, "minus__", parse_mul_expr(), pos);
            else return e;
        }
    }

    ExprPtr parse_mul_expr() {
        ExprPtr e = parse_pow_expr();
        for (;;) {
            SourcePos pos = peek().pos;
            if (accept_sym("*")) e = binop_send(e, "times_", parse_pow_expr(), pos);
            else if (accept_sym("/")) e = binop_send(e, "slash_", parse_pow_expr(), pos);
            else if (accept_kw("div")) e = binop_send(e, "div_", parse_pow_expr(), pos);
            else if (accept_kw("mod")) e = binop_send(e, "mod_", parse_pow_expr(), pos);
            else if (accept_sym("**")) e = binop_send(e, "times__", parse_pow_expr(), pos);
            else if (accept_sym("//")) e = binop_send(e, "slash__", parse_pow_expr(), pos);
            else return e;
        }
    }

    ExprPtr parse_pow_expr() {
        ExprPtr e = parse_prefix_expr();
        if (peek().is_sym("^")) {
            SourcePos pos = advance().pos;
            return binop_send(e, "pow_", parse_pow_expr(), pos);
        }
        return e;
    }

    ExprPtr parse_prefix_expr() {
        const Token& t = peek();
        SourcePos pos = t.pos;
        if (t.is_sym("-")) {
            advance();
            ExprPtr e = parse_prefix_expr();
            if (e->kind == ExK::IntLit) return int_lit(-e->int_value, pos);
            if (e->kind == ExK::RealLit) {
                auto r = mk_expr(ExK::RealLit, pos);
                mut(r).real_value = -e->real_value;
                return r;
            }
            return send(e, "uminus_", pos);
        }
        auto prefix = [&](ExK k) {
            advance();
            auto e = mk_expr(k, pos);
            mut(e).a = parse_prefix_expr();
            return e;
        };
        if (t.is_kw("lazy")) return prefix(ExK::Lazy);
        if (t.is_kw("concurrent")) return prefix(ExK::Concurrent);
        if (t.is_kw("force")) return prefix(ExK::Force);
        if (t.is_kw("exception")) return prefix(ExK::Raise);
        if (t.is_kw("typeof")) return prefix(ExK::TypeofE);
        if (t.is_kw("random")) return prefix(ExK::Random);
        if (t.is_kw("choose")) return prefix(ExK::Choose);
        if (t.is_kw("min")) return prefix(ExK::MinOf);
        if (t.is_kw("max")) return prefix(ExK::MaxOf);
        if (t.is_kw("native")) return prefix(ExK::NativeE);
        return parse_app_expr();
    }

    bool token_starts_argument(const Token& t) const {
        switch (t.kind) {
        case Tok::IntLit:
        case Tok::RealLit:
        case Tok::StringLit:
        case Tok::Identifier:
        case Tok::Constructor: return true;
        case Tok::Keyword: return t.text == "true" || t.text == "false" || t.text == "nil" || t.text == "this" || t.text == "root";
        case Tok::Symbol: return t.text == "(" || t.text == "[" || t.text == "{";
        default: return false;
        }
    }

    ExprPtr parse_app_expr() {
        ExprPtr e = parse_postfix_expr();
        while (token_starts_argument(peek())) {
            SourcePos pos = peek().pos;
            e = apply(e, parse_postfix_expr(), pos);
        }
        return e;
    }

    ExprPtr parse_postfix_expr() {
        ExprPtr e = parse_atom();
        for (;;) {
            if (peek().is_sym(".") && peek_segment(1)) {
                SourcePos pos = advance().pos;
                e = send(e, advance().text, pos);
            } else if (peek().is_sym(".") && peek(1).is_sym("(")) {
                SourcePos pos = advance().pos;
                advance(); // '('
                auto s = mk_expr(ExK::SendLens, pos);
                mut(s).a = e;
                mut(s).b = parse_expression();
                expect_sym(")");
                e = s;
            } else {
                return e;
            }
        }
    }

    std::vector<StmtPtr> parse_block(const std::set<std::string>& terminators, bool allow_module = false) {
        std::vector<StmtPtr> stmts;
        for (;;) {
            skip_separators();
            const Token& t = peek();
            if (t.kind == Tok::Eof) {
                if (terminators.count("\x04")) return stmts;
                fail("unexpected end of input");
            }
            if (t.kind == Tok::Keyword && terminators.count(t.text)) return stmts;
            if (t.kind == Tok::Symbol && terminators.count(t.text)) return stmts;
            StmtPtr s = parse_statement(allow_module);
            if (!s) return stmts;
            stmts.push_back(s);
            if (peek().kind != Tok::Newline && !peek().is_sym(";")) {
                const Token& n = peek();
                bool at_term = n.kind == Tok::Eof || (n.kind == Tok::Keyword && terminators.count(n.text)) ||
                               (n.kind == Tok::Symbol && terminators.count(n.text));
                if (!at_term) fail("expected a newline or ';' between statements");
            }
        }
    }

    ExprPtr parse_block_expr(const std::set<std::string>& terminators) {
        SourcePos pos = peek().pos;
        auto stmts = parse_block(terminators);
        return block_of(std::move(stmts), pos);
    }

    // ---- atoms -------------------------------------------------------------

    ExprPtr parse_atom() {
        const Token& t = peek();
        SourcePos pos = t.pos;
        switch (t.kind) {
        case Tok::IntLit: {
            advance();
            return int_lit(t.int_value, pos);
        }
        case Tok::RealLit: {
            advance();
            auto e = mk_expr(ExK::RealLit, pos);
            mut(e).real_value = t.real_value;
            return e;
        }
        case Tok::StringLit: {
            advance();
            auto e = mk_expr(ExK::StrLit, pos);
            mut(e).str_value = t.str_value;
            return e;
        }
        case Tok::Identifier: {
            advance();
            return ident(t.text, pos);
        }
        case Tok::Constructor: {
            advance();
            return ctor_lit(t.text, t.raw, pos);
        }
        case Tok::Keyword: return parse_keyword_atom();
        case Tok::Symbol:
            if (t.text == "(") return parse_paren_atom();
            if (t.text == "[") return parse_bracket_atom();
            if (t.text == "{") return parse_brace_atom();
            break;
        default: break;
        }
        fail("expected an expression");
    }

    ExprPtr parse_keyword_atom() {
        const Token& t = peek();
        SourcePos pos = t.pos;
        const std::string& k = t.text;
        if (k == "true" || k == "false") {
            advance();
            return bool_lit(k == "true", pos);
        }
        if (k == "nil") {
            advance();
            return mk_expr(ExK::NilLit, pos);
        }
        if (k == "this") {
            advance();
            return mk_expr(ExK::ThisRef, pos);
        }
        if (k == "root") {
            advance();
            return mk_expr(ExK::RootRef, pos);
        }
        if (k == "begin") {
            advance();
            ExprPtr b = parse_block_expr({"end"});
            expect_kw("end");
            return b;
        }
        if (k == "if") return parse_if_expr();
        if (k == "match") return parse_match_expr();
        if (k == "try") return parse_try_expr();
        if (k == "object") return parse_object_expr();
        if (k == "while") {
            advance();
            ExprPtr cond = parse_expression();
            expect_kw("do");
            ExprPtr body = parse_block_expr({"end"});
            expect_kw("end");
            auto w = mk_expr(ExK::WhileLoop, pos);
            mut(w).a = cond;
            mut(w).b = body;
            return w;
        }
        if (k == "for") {
            advance();
            PatternPtr p = parse_pattern();
            expect_kw("in");
            ExprPtr src = parse_expression();
            expect_kw("do");
            ExprPtr body = parse_block_expr({"end"});
            expect_kw("end");
            auto f = mk_expr(ExK::ForLoop, pos);
            mut(f).pattern = p;
            mut(f).a = src;
            mut(f).b = body;
            return f;
        }
        if (k == "with") {
            advance();
            ExprPtr coll = parse_expression();
            auto w = mk_expr(ExK::With, pos);
            mut(w).a = coll;
            if (accept_sym(":")) {
                StmtPtr s = parse_statement(false);
                mut(w).b = block_of({s}, pos);
            } else {
                expect_kw("do");
                mut(w).b = parse_block_expr({"end"});
                expect_kw("end");
            }
            return w;
        }
        if (k == "lens") return parse_lens_expr();
        fail("expected an expression");
    }

    ExprPtr parse_if_expr() {
        SourcePos pos = peek().pos;
        expect_kw("if");
        ExprPtr cond = parse_expression();
        expect_kw("then");
        ExprPtr then_block = parse_block_expr({"elseif", "else", "end"});
        ExprPtr else_block;
        if (peek().is_kw("elseif")) {
            // rewrite `elseif` as a nested if
            peek_mutable().text = "if";
            else_block = yield_block(parse_if_expr());
            return lower_if(cond, then_block, else_block, pos);
        }
        if (accept_kw("else")) {
            else_block = parse_block_expr({"end"});
        } else {
            else_block = block_of({}, pos);
        }
        expect_kw("end");
        return lower_if(cond, then_block, else_block, pos);
    }

    Token& peek_mutable() { return toks_[std::min(i_, toks_.size() - 1)]; }

    ExprPtr lower_if(ExprPtr cond, ExprPtr then_block, ExprPtr else_block, SourcePos pos) {
        return match_of(std::move(cond),
                        {mcase(bool_pat(true, pos), std::move(then_block)),
                         mcase(bool_pat(false, pos), std::move(else_block)),
                         mcase(wild(pos), yield_block(raise_ctor("DomainError", pos)))},
                        pos);
    }

    std::vector<MatchCase> parse_cases(const std::set<std::string>& terminators) {
        std::vector<MatchCase> cases;
        skip_separators();
        while (peek().is_kw("case")) {
            advance();
            PatternPtr p = parse_pattern();
            expect_sym("=>");
            std::set<std::string> body_terms = terminators;
            body_terms.insert("case");
            ExprPtr body = parse_block_expr(body_terms);
            cases.push_back(mcase(p, body));
            skip_separators();
        }
        return cases;
    }

    ExprPtr parse_match_expr() {
        SourcePos pos = peek().pos;
        expect_kw("match");
        ExprPtr scrutinee = parse_expression();
        auto cases = parse_cases({"end"});
        if (cases.empty()) fail("a match expression needs at least one case");
        expect_kw("end");
        return match_of(scrutinee, std::move(cases), pos);
    }

    ExprPtr parse_try_expr() {
        SourcePos pos = peek().pos;
        expect_kw("try");
        ExprPtr body = parse_block_expr({"catch"});
        expect_kw("catch");
        auto cases = parse_cases({"end"});
        if (cases.empty()) fail("a try expression needs at least one catch case");
        expect_kw("end");
        auto e = mk_expr(ExK::TryE, pos);
        mut(e).a = body;
        mut(e).cases = std::move(cases);
        return e;
    }

    ExprPtr parse_object_expr() {
        SourcePos pos = peek().pos;
        expect_kw("object");
        auto o = mk_expr(ExK::ObjectLit, pos);
        if (accept_sym("+")) mut(o).a = parse_expression();
        mut(o).stmts = parse_block({"end"});
        expect_kw("end");
        return o;
    }

    // lens (g, p)  |  lens x => access-path
    ExprPtr parse_lens_expr() {
        SourcePos pos = peek().pos;
        expect_kw("lens");
        ExprPtr e = parse_expression();
        if (e->kind == ExK::Lambda && e->cases.size() == 1) {
            const MatchCase& c = e->cases[0];
            if (!c.pattern || c.pattern->kind != PK::Ident)
                fail_at(pos, "a lens access path must bind a single identifier");
            const Expr& body_block = *c.body;
            if (body_block.stmts.size() != 1 || body_block.stmts[0]->kind != StK::Yield)
                fail_at(pos, "malformed lens access path");
            ExprPtr body = body_block.stmts[0]->expr;
            auto l = mk_expr(ExK::LensPath, pos);
            mut(l).name = c.pattern->name;
            mut(l).steps = decompose_access_path(body, c.pattern->name, pos);
            return l;
        }
        if (e->kind == ExK::VectorDisplay && e->items.size() == 2) {
            auto l = mk_expr(ExK::LensPair, pos);
            mut(l).a = e->items[0];
            mut(l).b = e->items[1];
            return l;
        }
        fail_at(pos, "expected 'lens (get, putback)' or 'lens x => access-path'");
    }

    // Flattens u.m / u.m arg / u.(l) chains rooted at `root_name` into steps.
    std::vector<PathStep> decompose_access_path(const ExprPtr& body, const std::string& root_name,
                                                SourcePos pos) {
        std::vector<PathStep> steps;
        const Expr* cur = body.get();
        std::function<void(const Expr*)> walk = [&](const Expr* e) {
            switch (e->kind) {
            case ExK::Ident:
                if (e->name != root_name) fail_at(e->pos, "access path must start at the bound variable");
                return;
            case ExK::Send: {
                walk(e->a.get());
                steps.push_back({PathStep::K::Message, e->name, nullptr});
                return;
            }
            case ExK::SendLens: {
                walk(e->a.get());
                steps.push_back({PathStep::K::LensApp, "", e->b});
                return;
            }
            case ExK::Apply: {
                const Expr* fn = e->a.get();
                if (fn->kind != ExK::Send) fail_at(e->pos, "access path steps must be message sends");
                walk(fn->a.get());
                steps.push_back({PathStep::K::MessageArg, fn->name, e->b});
                return;
            }
            default: fail_at(e->pos, "not a valid lens access path");
            }
        };
        walk(cur);
        return steps;
    }

    ExprPtr parse_paren_atom() {
        SourcePos pos = peek().pos;
        expect_sym("(");
        if (accept_sym(")")) return mk_expr(ExK::VectorDisplay, pos); // ()
        if (peek().is_sym(":") && !peek(1).is_sym(">")) {            // (: path)
            advance();
            auto t = mk_expr(ExK::TypeLit, pos);
            mut(t).type_path = parse_type_path();
            expect_sym(")");
            return t;
        }
        if (peek().is_kw("case")) { // multi-case anonymous function
            auto cases = parse_cases({")"});
            if (cases.empty()) fail("expected at least one case");
            expect_sym(")");
            auto lam = mk_expr(ExK::Lambda, pos);
            mut(lam).cases = std::move(cases);
            return lam;
        }
        ExprPtr e = parse_expression();
        if (accept_sym(",")) {
            auto v = mk_expr(ExK::VectorDisplay, pos);
            mut(v).items.push_back(e);
            if (accept_sym(")")) return v; // (e,) one-element vector
            for (;;) {
                mut(v).items.push_back(parse_expression());
                if (!accept_sym(",")) break;
                if (peek().is_sym(")")) break;
            }
            expect_sym(")");
            return v;
        }
        expect_sym(")");
        return e;
    }

    ExprPtr parse_bracket_atom() {
        SourcePos pos = peek().pos;
        expect_sym("[");
        if (accept_sym("]")) return mk_expr(ExK::EmptyList, pos);
        ExprPtr first = parse_expression();
        if (accept_sym(";")) { // interval [a; b]
            ExprPtr second = parse_expression();
            expect_sym("]");
            auto iv = mk_expr(ExK::IntervalE, pos);
            mut(iv).a = first;
            mut(iv).b = second;
            return iv;
        }
        std::vector<ExprPtr> items{first};
        while (accept_sym(",")) {
            if (peek().is_sym("]")) break;
            items.push_back(parse_expression());
        }
        expect_sym("]");
        // [e1, ..., en] is sugar for e1::...::en::[]
        ExprPtr list = mk_expr(ExK::EmptyList, pos);
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
            auto c = mk_expr(ExK::Cons, (*it)->pos);
            mut(c).a = *it;
            mut(c).b = list;
            list = c;
        }
        return list;
    }

    ExprPtr parse_brace_atom() {
        SourcePos pos = peek().pos;
        expect_sym("{");
        if (accept_sym("}")) return mk_expr(ExK::SetDisplay, pos);
        if (accept_sym("->")) { // {->} empty map
            expect_sym("}");
            return mk_expr(ExK::MapDisplay, pos);
        }
        if (peek().kind == Tok::Identifier && peek(1).is_sym("=")) return parse_record_literal(pos);
        ExprPtr first = parse_expression();
        if (accept_sym("->")) { // map display
            auto m = mk_expr(ExK::MapDisplay, pos);
            mut(m).items.push_back(first);
            mut(m).items.push_back(parse_expression());
            while (accept_sym(",")) {
                if (peek().is_sym("}")) break;
                mut(m).items.push_back(parse_expression());
                expect_sym("->");
                mut(m).items.push_back(parse_expression());
            }
            expect_sym("}");
            return m;
        }
        auto s = mk_expr(ExK::SetDisplay, pos);
        mut(s).items.push_back(first);
        while (accept_sym(",")) {
            if (peek().is_sym("}")) break;
            mut(s).items.push_back(parse_expression());
        }
        expect_sym("}");
        return s;
    }

    // { m1 = v1, ..., mn = vn }  ==>  begin val (w...) = (v...); object def mi = wi ... end end
    ExprPtr parse_record_literal(SourcePos pos) {
        std::vector<std::string> names;
        std::vector<ExprPtr> values;
        for (;;) {
            names.push_back(expect_ident());
            expect_sym("=");
            values.push_back(parse_expression());
            if (!accept_sym(",")) break;
            if (peek().is_sym("}")) break;
        }
        expect_sym("}");

        std::vector<std::string> locals;
        locals.reserve(names.size());
        for (std::size_t k = 0; k < names.size(); ++k) locals.push_back(fresh("rec"));

        StmtPtr binder;
        if (names.size() == 1) {
            binder = val_stmt(locals[0], values[0]);
        } else {
            auto vp = mk_pattern(PK::VectorP, pos);
            for (const auto& l : locals) {
                auto ip = mk_pattern(PK::Ident, pos);
                ip->name = l;
                vp->items.push_back(ip);
            }
            auto vd = mk_expr(ExK::VectorDisplay, pos);
            mut(vd).items = values;
            auto s = mk_stmt(StK::Val, pos);
            s->pattern = vp;
            s->expr = vd;
            binder = s;
        }

        auto obj = mk_expr(ExK::ObjectLit, pos);
        for (std::size_t k = 0; k < names.size(); ++k) {
            auto d = mk_stmt(StK::Def, pos);
            d->name = names[k];
            d->def_simple = true;
            d->def_clauses.push_back(DefClause{nullptr, ident(locals[k], pos), pos});
            mut(obj).stmts.push_back(d);
        }
        auto y = mk_stmt(StK::Yield, pos);
        y->expr = obj;
        return synthetic(block_of({binder, y}, pos));
    }

    // ---- statements ----------------------------------------------------------

    StmtPtr parse_statement(bool allow_module) {
        const Token& t = peek();
        SourcePos pos = t.pos;
        if (t.kind == Tok::Pragma) return parse_pragma_stmt();
        if (t.kind == Tok::Keyword) {
            const std::string& k = t.text;
            if (k == "val") return parse_val_stmt();
            if (k == "def") return parse_def_stmt();
            if (k == "typedef") return parse_typedef_stmt();
            if (k == "memoize") return parse_memoize_stmt();
            if (k == "import") return parse_import_stmt();
            if (k == "private") return parse_private_stmt();
            if (k == "yield") {
                advance();
                auto s = mk_stmt(StK::Yield, pos);
                s->expr = parse_expression();
                return s;
            }
            if (k == "module") {
                if (!allow_module) fail("modules may only appear at the top level or inside modules");
                return parse_module_stmt();
            }
        }
        // assignment forms
        if (t.kind == Tok::Identifier) {
            if (StmtPtr s = try_parse_assignment()) return s;
        }
        if (t.is_sym("(")) {
            if (StmtPtr s = try_parse_pattern_assignment()) return s;
        }
        ExprPtr e = parse_expression();
        if (is_control_expr(*e)) {
            auto s = mk_stmt(StK::Control, pos);
            s->expr = e;
            return s;
        }
        auto s = mk_stmt(StK::Yield, pos);
        s->expr = e;
        return s;
    }

    StmtPtr parse_val_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("val");
        PatternPtr p = parse_pattern();
        expect_sym("=");
        ExprPtr e = parse_expression();
        auto s = mk_stmt(StK::Val, pos);
        s->pattern = p;
        s->expr = e;
        return s;
    }

    StmtPtr parse_def_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("def");
        if (peek().is_kw("this")) return parse_conversion_def(pos);
        std::string name = expect_ident();
        PatternPtr param;
        if (!peek().is_sym("=") && !peek().is_sym(":") && !peek().is_sym(":>")) param = parse_pattern();
        TypeRef ret;
        bool has_ret = false;
        if (accept_sym(":>")) {
            ret = parse_type_ref();
            has_ret = true;
        } else if (peek().is_sym(":") && !peek(1).is_sym(">")) {
            advance();
            ret = parse_type_ref();
            has_ret = true;
        }
        expect_sym("=");
        ExprPtr body = parse_expression();
        if (has_ret) {
            auto c = mk_expr(ExK::ConvertE, pos);
            mut(c).a = body;
            mut(c).type_ref = ret;
            body = c;
        }
        auto s = mk_stmt(StK::Def, pos);
        s->name = name;
        s->def_simple = param == nullptr;
        s->def_clauses.push_back(DefClause{param, body, pos});
        return s;
    }

    // def this : t = e   /   def this :> t = e
    StmtPtr parse_conversion_def(SourcePos pos) {
        expect_kw("this");
        bool auto_conv;
        if (accept_sym(":>")) {
            auto_conv = false;
        } else {
            expect_sym(":");
            auto_conv = true;
        }
        TypeRef target = parse_type_ref();
        expect_sym("=");
        ExprPtr body = parse_expression();
        auto s = mk_stmt(StK::Def, pos);
        s->name = "this";
        s->def_simple = true;
        s->is_conversion = true;
        s->conv_auto = auto_conv;
        s->conv_target = target;
        s->def_clauses.push_back(DefClause{nullptr, body, pos});
        return s;
    }

    StmtPtr parse_typedef_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("typedef");
        std::string name = expect_ident();
        auto s = mk_stmt(StK::Typedef, pos);
        s->name = name;
        for (;;) {
            SourcePos cpos = peek().pos;
            PatternPtr p = parse_pattern();
            ExprPtr body;
            if (accept_sym("=")) {
                body = parse_expression();
            } else {
                // typedef t p  ==  typedef t (x as p) = x
                std::string x = fresh("tydef");
                auto as = mk_pattern(PK::As, cpos);
                as->name = x;
                as->sub = p;
                p = as;
                body = ident(x, cpos);
            }
            s->typedef_clauses.push_back(TypedefClause{p, body, cpos});
            if (!accept_sym(",")) break;
        }
        return s;
    }

    StmtPtr parse_memoize_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("memoize");
        auto s = mk_stmt(StK::Memoize, pos);
        for (;;) {
            SourcePos rpos = peek().pos;
            if (accept_sym("(")) {
                std::string n = expect_ident();
                expect_sym(")");
                s->memo_refs.push_back(MemoRef{n, true, rpos});
            } else {
                s->memo_refs.push_back(MemoRef{expect_ident(), false, rpos});
            }
            if (!accept_sym(",")) break;
        }
        return s;
    }

    StmtPtr parse_import_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("import");
        auto s = mk_stmt(StK::Import, pos);
        TypePath path;
        if (accept_kw("root")) {
            path.root_anchored = true;
            expect_sym(".");
        }
        path.segments.push_back(expect_ident());
        for (;;) {
            if (peek().is_sym(".") && peek_segment(1)) {
                advance();
                path.segments.push_back(advance().text);
                continue;
            }
            break;
        }
        if (peek().is_sym(".") && peek(1).is_sym("_")) { // import path._
            advance();
            advance();
            ImportEntry e;
            e.path = path;
            e.wildcard = true;
            e.pos = pos;
            s->imports.push_back(std::move(e));
            return s;
        }
        if (peek().is_sym(".") && peek(1).is_sym("{")) { // import path.{a, b => c}
            advance();
            advance();
            for (;;) {
                ImportEntry e;
                e.pos = peek().pos;
                std::string member = expect_ident();
                e.path = path;
                e.path.segments.push_back(member);
                e.bind_name = member;
                if (accept_sym("=>")) e.bind_name = expect_ident();
                s->imports.push_back(std::move(e));
                if (!accept_sym(",")) break;
            }
            expect_sym("}");
            return s;
        }
        ImportEntry e;
        e.path = path;
        e.bind_name = path.segments.back();
        e.pos = pos;
        if (accept_sym("=>")) e.bind_name = expect_ident();
        s->imports.push_back(std::move(e));
        return s;
    }

    StmtPtr parse_private_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("private");
        auto s = mk_stmt(StK::Private, pos);
        for (;;) {
            s->names.push_back(expect_ident());
            if (!accept_sym(",")) break;
        }
        return s;
    }

    StmtPtr parse_module_stmt() {
        SourcePos pos = peek().pos;
        expect_kw("module");
        auto s = mk_stmt(StK::Module, pos);
        s->module_path.push_back(expect_segment());
        while (peek().is_sym(".") && peek_segment(1)) {
            advance();
            s->module_path.push_back(advance().text);
        }
        s->body = parse_block({"end", "unittest"}, /*allow_module=*/true);
        if (accept_kw("unittest")) {
            auto test = mk_stmt(StK::Module, pos);
            test->module_path = s->module_path;
            test->module_path.push_back("unittest");
            test->body = parse_block({"end"}, /*allow_module=*/true);
            // the section sees the enclosing module's members
            auto imp = mk_stmt(StK::Import, pos);
            ImportEntry e;
            e.path.segments = s->module_path;
            e.path.root_anchored = true;
            e.wildcard = true;
            e.pos = pos;
            imp->imports.push_back(std::move(e));
            test->body.insert(test->body.begin(), imp);
            s->next_sibling = test;
        }
        expect_kw("end");
        return s;
    }

    StmtPtr parse_pragma_stmt() {
        const Token& t = peek();
        SourcePos pos = t.pos;
        std::string name = advance().text;
        auto s = mk_stmt(StK::Pragma, pos);
        if (name == "log") s->pragma_kind = PragmaKind::Log;
        else if (name == "print") s->pragma_kind = PragmaKind::Print;
        else if (name == "profile") s->pragma_kind = PragmaKind::Profile;
        else if (name == "assert") s->pragma_kind = PragmaKind::Assert;
        else if (name == "catch") s->pragma_kind = PragmaKind::Catch;
        if (s->pragma_kind == PragmaKind::Catch) {
            s->pragma_pattern = parse_pattern();
            expect_kw("try");
        }
        s->expr = parse_expression();
        return s;
    }

    // ---- assignments -----------------------------------------------------------

    static bool is_symbol_assign_op(const Token& t) {
        static const std::unordered_set<std::string> ops = {
            "=", "+=", "=+", "-=", "=-", "++=", "=++", "--=", "=--",
            "*=", "=*", "**=", "=**", "/=", "=/", "//=", "=//", "^=", "=^",
        };
        return t.kind == Tok::Symbol && ops.count(t.text) > 0;
    }

    static bool is_assign_keyword(const Token& t) {
        static const std::unordered_set<std::string> kws = {"div", "mod", "and", "or", "xor", "min", "max"};
        return t.kind == Tok::Keyword && kws.count(t.text) > 0;
    }

    StmtPtr try_parse_assignment() {
        std::size_t save = i_;
        int save_fresh = fresh_;
        SourcePos pos = peek().pos;
        try {
            std::string name = expect_ident();
            std::vector<PathStep> steps;
            for (;;) {
                if (peek().is_sym(".") && peek(1).kind == Tok::Identifier) {
                    advance();
                    steps.push_back({PathStep::K::Message, advance().text, nullptr});
                    continue;
                }
                if (peek().is_sym(".") && peek(1).is_sym("(")) {
                    advance();
                    advance();
                    ExprPtr lens = parse_expression();
                    expect_sym(")");
                    steps.push_back({PathStep::K::LensApp, "", lens});
                    continue;
                }
                break;
            }
            std::string op;
            if (is_symbol_assign_op(peek())) {
                op = advance().text;
                if (op == "=" && is_assign_keyword(peek()) && !peek().is_kw("min") && !peek().is_kw("max")) {
                    op = "=" + advance().text; // x =div y and friends
                }
            } else if (is_assign_keyword(peek()) && peek(1).is_sym("=")) {
                op = advance().text + "=";
                advance();
            } else {
                i_ = save;
                fresh_ = save_fresh;
                return nullptr;
            }
            ExprPtr rhs = parse_expression();
            return build_assignment(name, std::move(steps), op, rhs, pos);
        } catch (const StaticError&) {
            i_ = save;
            fresh_ = save_fresh;
            return nullptr;
        }
    }

    // x OP y for the Table 9 operator table, with `cur` standing in for x.
    ExprPtr op_assign_rhs(const std::string& op, ExprPtr cur, ExprPtr y, SourcePos pos) {
        auto forward = [&](const std::string& msg) { return binop_send(cur, msg, y, pos); };
        auto reversed = [&](const std::string& msg) { return binop_send(y, msg, cur, pos); };
        if (op == "+=") return forward("plus_");
        if (op == "=+") return reversed("plus_");
        if (op == "-=") return forward("minus_");
        if (op == "=-") return reversed("minus_");
        if (op == "++=") return forward("plus__");
        if (op == "=++") return reversed("plus__");
        if (op == "--=") return forward("minus__");
        if (op == "=--") return reversed("minus__");
        if (op == "*=") return forward("times_");
        if (op == "=*") return reversed("times_");
        if (op == "**=") return forward("times__");
        if (op == "=**") return reversed("times__");
        if (op == "/=") return forward("slash_");
        if (op == "=/") return reversed("slash_");
        if (op == "//=") return forward("slash__");
        if (op == "=//") return reversed("slash__");
        if (op == "^=") return forward("pow_");
        if (op == "=^") return reversed("pow_");
        if (op == "div=") return forward("div_");
        if (op == "=div") return reversed("div_");
        if (op == "mod=") return forward("mod_");
        if (op == "=mod") return reversed("mod_");
        if (op == "and=") return and_of(cur, y, pos);
        if (op == "=and") return and_of(y, cur, pos);
        if (op == "or=") return or_of(cur, y, pos);
        if (op == "=or") return or_of(y, cur, pos);
        if (op == "xor=") {
            auto x = mk_expr(ExK::XorOp, pos);
            mut(x).a = cur;
            mut(x).b = y;
            return x;
        }
        if (op == "=xor") {
            auto x = mk_expr(ExK::XorOp, pos);
            mut(x).a = y;
            mut(x).b = cur;
            return x;
        }
        if (op == "min=" || op == "max=") {
            auto v = mk_expr(ExK::VectorDisplay, pos);
            mut(v).items = {cur, y};
            auto m = mk_expr(op == "min=" ? ExK::MinOf : ExK::MaxOf, pos);
            mut(m).a = v;
            return m;
        }
        fail_at(pos, "unknown assignment operator '" + op + "'");
    }

    StmtPtr build_assignment(const std::string& name, std::vector<PathStep> steps, const std::string& op,
                             ExprPtr rhs, SourcePos pos) {
        if (steps.empty()) {
            auto s = mk_stmt(StK::Assign, pos);
            s->name = name;
            s->expr = op == "=" ? rhs : op_assign_rhs(op, ident(name, pos), rhs, pos);
            return s;
        }
        if (op == "=") {
            auto s = mk_stmt(StK::AssignPath, pos);
            s->name = name;
            s->steps = std::move(steps);
            s->expr = rhs;
            return s;
        }
        // u.path op= y: evaluate the path's get once, then put back the
        // modified value (the section 23 modify semantics).
        std::string tmp = fresh("mod");
        ExprPtr get = ident(name, pos);
        for (const PathStep& st : steps) {
            if (st.kind == PathStep::K::Message) {
                get = send(get, st.name, pos);
            } else if (st.kind == PathStep::K::MessageArg) {
                get = apply(send(get, st.name, pos), st.arg, pos);
            } else {
                auto sl = mk_expr(ExK::SendLens, pos);
                mut(sl).a = get;
                mut(sl).b = st.arg;
                get = sl;
            }
        }
        auto put = mk_stmt(StK::AssignPath, pos);
        put->name = name;
        put->steps = std::move(steps);
        put->expr = op_assign_rhs(op, ident(tmp, pos), rhs, pos);
        auto ctrl = mk_stmt(StK::Control, pos);
        ctrl->expr = block_of({val_stmt(tmp, get), put}, pos);
        return ctrl;
    }

    StmtPtr try_parse_pattern_assignment() {
        std::size_t save = i_;
        int save_fresh = fresh_;
        SourcePos pos = peek().pos;
        try {
            PatternPtr p = parse_pattern();
            if (peek().is_sym("=") ) {
                advance();
                ExprPtr rhs = parse_expression();
                auto s = mk_stmt(StK::PatternAssign, pos);
                s->pattern = p;
                s->expr = rhs;
                return s;
            }
        } catch (const StaticError&) {
        }
        i_ = save;
        fresh_ = save_fresh;
        return nullptr;
    }
};

} // namespace babel17
