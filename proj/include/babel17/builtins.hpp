#pragma once

#include "babel17/interp.hpp"

#include <algorithm>

namespace babel17 {

// ---- element views ---------------------------------------------------------------
//
// Every built-in collection iterates as a sequence of elements: lists/vectors
// their items, sets their ascending members, maps ascending (key, value)
// pairs, strings single-code-point strings.

namespace stdlib {

inline Value str1(char32_t c) { return vstr(std::u32string(1, c)); }

inline std::vector<Value> elements_of(Interp& in, const Value& v) {
    std::vector<Value> out;
    switch (v->kind) {
    case VK::List:
        for (const ListNode* n = v->list.get(); n; n = n->tail.get()) out.push_back(n->head);
        break;
    case VK::Vector: out = *v->vec; break;
    case VK::Set:
        for (const TreeNode* n : tree::entries(v->tree)) out.push_back(n->key);
        break;
    case VK::Map:
        for (const TreeNode* n : tree::entries(v->tree)) out.push_back(vvector({n->key, n->val}));
        break;
    case VK::Str:
        for (char32_t c : v->s) out.push_back(str1(c));
        break;
    default: break;
    }
    (void)in;
    return out;
}

inline Value list_of(const std::vector<Value>& items) {
    ListPtr l;
    for (auto it = items.rbegin(); it != items.rend(); ++it) l = list_cons(*it, l);
    return vlist(l);
}

// Rebuilds a collection of the same kind as `like` from elements. Sets/maps
// re-sort; maps expect pairs; strings expect strings.
inline Value rebuild_like(Interp& in, const Value& like, const std::vector<Value>& items) {
    switch (like->kind) {
    case VK::List: return list_of(items);
    case VK::Vector: return vvector(items);
    case VK::Set: {
        TreePtr t;
        try {
            for (const auto& e : items) t = tree::insert(t, in.force(e), nullptr, in.comparator(), false);
        } catch (const CmpFail& f) {
            return f.exc;
        }
        return vset(t);
    }
    case VK::Map: {
        TreePtr t;
        try {
            for (const auto& e : items) {
                Value p = in.force(e);
                if (p->kind != VK::Vector || p->vec->size() != 2) return domain_error();
                t = tree::insert(t, in.force((*p->vec)[0]), (*p->vec)[1], in.comparator(), true);
            }
        } catch (const CmpFail& f) {
            return f.exc;
        }
        return vmap(t);
    }
    case VK::Str: {
        std::u32string s;
        for (const auto& e : items) {
            Value c = in.force(e);
            if (c->kind != VK::Str) return domain_error();
            s += c->s;
        }
        return vstr(s);
    }
    default: return domain_error();
    }
}

inline std::size_t size_of(const Value& v) {
    switch (v->kind) {
    case VK::List: return v->list ? v->list->count : 0;
    case VK::Vector: return v->vec->size();
    case VK::Set:
    case VK::Map: return tree::size(v->tree);
    case VK::Str: return v->s.size();
    default: return 0;
    }
}

inline Value empty_like(const Value& v) {
    switch (v->kind) {
    case VK::List: return vlist(nullptr);
    case VK::Vector: return vvector({});
    case VK::Set: return vset(nullptr);
    case VK::Map: return vmap(nullptr);
    case VK::Str: return vstr(U"");
    default: return domain_error();
    }
}

inline bool is_builtin_collection(const Value& v) {
    switch (v->kind) {
    case VK::List:
    case VK::Vector:
    case VK::Set:
    case VK::Map:
    case VK::Str: return true;
    default: return false;
    }
}

// ---- numeric helpers ------------------------------------------------------------

inline std::optional<Interval> as_real(Interp& in, const Value& v) {
    if (v->kind == VK::Real) return v->r;
    if (v->kind == VK::Int) return int_to_iv(v->i); // may fail for huge ints
    (void)in;
    return std::nullopt;
}

inline Value int_arith(Interp& in, const Value& self, const std::string& msg, const Value& raw_arg) {
    Value arg = in.force(raw_arg);
    if (is_dynexc(arg)) return arg;
    if (arg->kind == VK::Real) {
        // promote to interval arithmetic
        auto lhs = int_to_iv(self->i);
        if (!lhs) return domain_error();
        Value self_real = vreal(*lhs);
        return in.apply(in.send(self_real, msg), arg);
    }
    if (arg->kind != VK::Int) return domain_error();
    const Int& a = self->i;
    const Int& b = arg->i;
    if (msg == "plus_") return vint(a + b);
    if (msg == "minus_") return vint(a - b);
    if (msg == "times_") return vint(a * b);
    if (msg == "div_") {
        if (b.is_zero()) return domain_error();
        return vint(a.div_euclid(b));
    }
    if (msg == "mod_") {
        if (b.is_zero()) return domain_error();
        return vint(a.mod_euclid(b));
    }
    if (msg == "pow_") {
        if (b.sign() < 0 || !b.fits_ulong()) return domain_error();
        unsigned long e = b.to_ulong();
        std::size_t bits = mpz_sizeinbase(a.raw().get_mpz_t(), 2);
        if (e > 0 && bits * e > (1u << 24)) return domain_error();
        return vint(a.pow(e));
    }
    if (msg == "to_" || msg == "downto_") {
        std::vector<Value> items;
        Int step(msg == "to_" ? 1 : -1);
        Int cur = a;
        while (msg == "to_" ? !(b < cur) : !(cur < b)) {
            items.push_back(vint(cur));
            cur = cur + step;
        }
        return list_of(items);
    }
    return domain_error();
}

inline Value real_arith(Interp& in, const Value& self, const std::string& msg, const Value& raw_arg) {
    Value arg = in.force(raw_arg);
    if (is_dynexc(arg)) return arg;
    auto rhs = as_real(in, arg);
    if (!rhs) return domain_error();
    const Interval& x = self->r;
    const Interval& y = *rhs;
    if (msg == "plus_") return vreal(iv_add(x, y));
    if (msg == "minus_") return vreal(iv_sub(x, y));
    if (msg == "times_") return vreal(iv_mul(x, y));
    if (msg == "slash_") {
        auto q = iv_div(x, y);
        return q ? vreal(*q) : domain_error();
    }
    if (msg == "pow_") {
        auto p = iv_pow(x, y);
        return p ? vreal(*p) : domain_error();
    }
    return domain_error();
}

// ---- searching --------------------------------------------------------------------

inline Value index_of(Interp& in, const Value& coll, const Value& needle) {
    if (coll->kind == VK::Str) {
        Value n = in.force(needle);
        if (is_dynexc(n)) return n;
        if (n->kind != VK::Str) return domain_error();
        auto pos = coll->s.find(n->s);
        if (pos == std::u32string::npos) return domain_error();
        return vint(Int(static_cast<long>(pos)));
    }
    auto items = elements_of(in, coll);
    for (std::size_t i = 0; i < items.size(); ++i) {
        Interp::Cmp c = in.compare(in.force(items[i]), in.force(needle));
        if (c.exc) return c.exc;
        if (!c.unrelated && c.sign == 0) return vint(Int(static_cast<long>(i)));
    }
    return domain_error();
}

inline Value contains(Interp& in, const Value& coll, const Value& raw) {
    Value x = in.force(raw);
    if (is_dynexc(x)) return x;
    if (coll->kind == VK::Str) {
        if (x->kind != VK::Str) return domain_error();
        return vbool(coll->s.find(x->s) != std::u32string::npos);
    }
    if (coll->kind == VK::Set) {
        try {
            return vbool(tree::find(coll->tree, x, in.comparator()) != nullptr);
        } catch (const CmpFail& f) {
            return f.exc;
        }
    }
    auto items = elements_of(in, coll);
    for (const auto& e : items) {
        Interp::Cmp c = in.compare(in.force(e), x);
        if (c.exc) return c.exc;
        if (!c.unrelated && c.sign == 0) return vbool(true);
    }
    return vbool(false);
}

// Walks the iterate_ protocol; returns a dynamic exception or null, filling `out`.
inline Value collect_elements(Interp& in, const Value& c, std::vector<Value>& out) {
    Value cur = c;
    for (;;) {
        Value step = in.iterate(cur);
        if (is_dynexc(step)) return step;
        if (step->kind != VK::Vector) return domain_error();
        if (step->vec->empty()) return nullptr;
        if (step->vec->size() != 2) return domain_error();
        out.push_back((*step->vec)[0]);
        cur = (*step->vec)[1];
    }
}

// Rebuilds a collection shaped like `like` (builtin fast path, otherwise
// through the object's own empty/collector_add_).
inline Value rebuild_any(Interp& in, const Value& like, const std::vector<Value>& items) {
    if (is_builtin_collection(like)) return rebuild_like(in, like, items);
    Value acc = in.send(like, "empty");
    if (is_dynexc(acc)) return acc;
    for (const auto& e : items) {
        acc = in.builtin_collector_add(acc, e);
        if (is_dynexc(acc)) return acc;
    }
    return acc;
}

} // namespace stdlib

// ---- the Table 12 conversion matrix (built-in cells) -----------------------------------
//
// Returns nullopt when the matrix has no such conversion (or the value
// resists); the caller turns that into DomainError or tries another route.

inline std::optional<Value> convert_builtin(Interp& in, const Value& v, const TypeIdent& t, bool explicit_mode) {
    using stdlib::elements_of;
    if (!t.builtin) return std::nullopt;
    BT target = t.bt;
    switch (v->kind) {
    case VK::Int:
        if (target == BT::Real) { // auto
            auto iv = int_to_iv(v->i);
            if (!iv) return std::nullopt;
            return vreal(*iv);
        }
        if (!explicit_mode) return std::nullopt;
        if (target == BT::Bool) return vbool(!v->i.is_zero());
        if (target == BT::String) return vstr(Interp::to_u32(v->i.to_string()));
        return std::nullopt;
    case VK::Real:
        if (target == BT::Int) { // marked auto; only integral points convert automatically
            if (explicit_mode) {
                auto n = iv_to_int_explicit(v->r);
                return n ? std::optional<Value>(vint(*n)) : std::nullopt;
            }
            auto n = iv_to_int_auto(v->r);
            return n ? std::optional<Value>(vint(*n)) : std::nullopt;
        }
        if (!explicit_mode) return std::nullopt;
        if (target == BT::String) return vstr(Interp::to_u32(render_interval(v->r)));
        return std::nullopt;
    case VK::Bool:
        if (!explicit_mode) return std::nullopt;
        if (target == BT::Int) return vint(v->b ? 1 : 0);
        if (target == BT::String) return vstr(v->b ? U"true" : U"false");
        return std::nullopt;
    case VK::Str: {
        if (!explicit_mode) return std::nullopt;
        std::string utf8 = uni::to_utf8(v->s);
        if (target == BT::Int) {
            auto n = Int::parse_decimal(utf8);
            return n ? std::optional<Value>(vint(*n)) : std::nullopt;
        }
        if (target == BT::Bool) {
            if (utf8 == "true") return vbool(true);
            if (utf8 == "false") return vbool(false);
            return std::nullopt;
        }
        if (target == BT::Real) {
            try {
                std::size_t used = 0;
                double d = std::stod(utf8, &used);
                if (used != utf8.size()) return std::nullopt;
                return vreal(Interval::point(d));
            } catch (...) {
                return std::nullopt;
            }
        }
        if (target == BT::List) return stdlib::list_of(elements_of(in, v));
        if (target == BT::Vect) return vvector(elements_of(in, v));
        if (target == BT::Set) return stdlib::rebuild_like(in, vset(nullptr), elements_of(in, v));
        return std::nullopt;
    }
    case VK::List:
        if (target == BT::Vect) return vvector(elements_of(in, v)); // auto
        if (!explicit_mode) return std::nullopt;
        if (target == BT::Set) return stdlib::rebuild_like(in, vset(nullptr), elements_of(in, v));
        if (target == BT::Map) return stdlib::rebuild_like(in, vmap(nullptr), elements_of(in, v));
        return std::nullopt;
    case VK::Vector:
        if (target == BT::List) return stdlib::list_of(elements_of(in, v)); // auto
        if (!explicit_mode) return std::nullopt;
        if (target == BT::Set) return stdlib::rebuild_like(in, vset(nullptr), elements_of(in, v));
        if (target == BT::Map) return stdlib::rebuild_like(in, vmap(nullptr), elements_of(in, v));
        return std::nullopt;
    case VK::Set:
        if (!explicit_mode) return std::nullopt;
        if (target == BT::List) return stdlib::list_of(elements_of(in, v));
        if (target == BT::Vect) return vvector(elements_of(in, v));
        if (target == BT::Map) return stdlib::rebuild_like(in, vmap(nullptr), elements_of(in, v));
        return std::nullopt;
    case VK::Map:
        if (!explicit_mode) return std::nullopt;
        if (target == BT::List) return stdlib::list_of(elements_of(in, v));
        if (target == BT::Vect) return vvector(elements_of(in, v));
        if (target == BT::Set) return stdlib::rebuild_like(in, vset(nullptr), elements_of(in, v));
        return std::nullopt;
    default: return std::nullopt;
    }
}

// ---- generic collection messages (Table 11) ----------------------------------------------
//
// Implemented over iterate_/collector_add_/collector_close_/empty so that both
// built-ins and qualifying custom objects share one behavior. Built-in fast
// paths provide the four primitives natively.

inline bool is_generic_collection_message(const std::string& msg) {
    static const std::set<std::string> set = {
        "isempty", "empty",   "size",   "plus_",  "plus__", "minus_", "minus__", "times__",
        "head",    "tail",    "atindex", "indexof", "contains", "take", "drop",
        "slash_",  "times_",  "pow_",   "slash__",
    };
    return set.count(msg) > 0;
}

inline Value generic_collection_send(Interp& in, const Value& c, const std::string& msg, bool& found) {
    found = true;
    if (msg == "isempty") {
        Value step = in.iterate(c);
        if (is_dynexc(step)) return step;
        return vbool(step->kind == VK::Vector && step->vec->empty());
    }
    if (msg == "empty") {
        if (stdlib::is_builtin_collection(c)) return stdlib::empty_like(c);
        found = false; // custom objects provide their own `empty`
        return nullptr;
    }
    if (msg == "size") {
        if (stdlib::is_builtin_collection(c)) return vint(Int(static_cast<long>(stdlib::size_of(c))));
        std::vector<Value> items;
        if (Value exc = stdlib::collect_elements(in, c, items)) return exc;
        return vint(Int(static_cast<long>(items.size())));
    }
    if (msg == "head" || msg == "tail") {
        Value step = in.iterate(c);
        if (is_dynexc(step)) return step;
        if (step->kind != VK::Vector || step->vec->size() != 2) return domain_error();
        return msg == "head" ? (*step->vec)[0] : (*step->vec)[1];
    }
    if (msg == "plus_") {
        return vnative_fn("plus_", [c](Interp& i2, const Value& x) { return i2.builtin_collector_add(c, x); });
    }
    if (msg == "plus__") {
        return vnative_fn("plus__", [c](Interp& i2, const Value& d) -> Value {
            Value other = i2.force(d);
            if (is_dynexc(other)) return other;
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, other, items)) return exc;
            Value acc = c;
            for (const auto& e : items) {
                acc = i2.builtin_collector_add(acc, e);
                if (is_dynexc(acc)) return acc;
            }
            return acc;
        });
    }
    if (msg == "minus_" || msg == "minus__" || msg == "times__") {
        // maps override these (Table 14); here: remove/keep equal elements
        std::string op = msg;
        return vnative_fn(msg, [c, op](Interp& i2, const Value& raw) -> Value {
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, c, items)) return exc;
            Value x = i2.force(raw);
            if (is_dynexc(x)) return x;
            std::vector<Value> others;
            if (op != "minus_") {
                if (Value exc = stdlib::collect_elements(i2, x, others)) return exc;
            }
            std::vector<Value> kept;
            for (const auto& e : items) {
                bool matches = false;
                if (op == "minus_") {
                    Interp::Cmp cm = i2.compare(i2.force(e), x);
                    if (cm.exc) return cm.exc;
                    matches = !cm.unrelated && cm.sign == 0;
                } else {
                    for (const auto& o : others) {
                        Interp::Cmp cm = i2.compare(i2.force(e), i2.force(o));
                        if (cm.exc) return cm.exc;
                        if (!cm.unrelated && cm.sign == 0) {
                            matches = true;
                            break;
                        }
                    }
                }
                bool keep = op == "times__" ? matches : !matches;
                if (keep) kept.push_back(e);
            }
            return stdlib::rebuild_any(i2, c, kept);
        });
    }
    if (msg == "atindex") {
        return vnative_fn("atindex", [c](Interp& i2, const Value& raw) -> Value {
            Value n = i2.force(raw);
            if (is_dynexc(n)) return n;
            if (n->kind != VK::Int || n->i.sign() < 0 || !n->i.fits_slong()) return domain_error();
            long want = n->i.to_slong();
            Value cur = c;
            for (long i = 0;; ++i) {
                Value step = i2.iterate(cur);
                if (is_dynexc(step)) return step;
                if (step->kind != VK::Vector || step->vec->size() != 2) return domain_error();
                if (i == want) return (*step->vec)[0];
                cur = (*step->vec)[1];
            }
        });
    }
    if (msg == "indexof") {
        return vnative_fn("indexof", [c](Interp& i2, const Value& x) -> Value {
            if (stdlib::is_builtin_collection(c)) return stdlib::index_of(i2, c, x);
            Value cur = c;
            for (long i = 0;; ++i) {
                Value step = i2.iterate(cur);
                if (is_dynexc(step)) return step;
                if (step->kind != VK::Vector) return domain_error();
                if (step->vec->empty()) return domain_error();
                Interp::Cmp cm = i2.compare(i2.force((*step->vec)[0]), i2.force(x));
                if (cm.exc) return cm.exc;
                if (!cm.unrelated && cm.sign == 0) return vint(Int(i));
                cur = (*step->vec)[1];
            }
        });
    }
    if (msg == "contains") {
        return vnative_fn("contains", [c](Interp& i2, const Value& x) -> Value {
            if (stdlib::is_builtin_collection(c)) return stdlib::contains(i2, c, x);
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, c, items)) return exc;
            for (const auto& e : items) {
                Interp::Cmp cm = i2.compare(i2.force(e), i2.force(x));
                if (cm.exc) return cm.exc;
                if (!cm.unrelated && cm.sign == 0) return vbool(true);
            }
            return vbool(false);
        });
    }
    if (msg == "take" || msg == "drop") {
        bool taking = msg == "take";
        return vnative_fn(msg, [c, taking](Interp& i2, const Value& raw) -> Value {
            Value n = i2.force(raw);
            if (is_dynexc(n)) return n;
            if (n->kind != VK::Int) return domain_error();
            long want = n->i.sign() < 0 ? 0 : (n->i.fits_slong() ? n->i.to_slong() : (1L << 60));
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, c, items)) return exc;
            std::vector<Value> out;
            for (std::size_t i = 0; i < items.size(); ++i) {
                bool in_range = static_cast<long>(i) < want;
                if (taking == in_range) out.push_back(items[i]);
            }
            return stdlib::rebuild_any(i2, c, out);
        });
    }
    if (msg == "slash_") { // map f over elements
        return vnative_fn("slash_", [c](Interp& i2, const Value& f) -> Value {
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, c, items)) return exc;
            std::vector<Value> out;
            for (const auto& e : items) {
                Value r = i2.apply(f, e);
                if (is_dynexc(r)) return r;
                out.push_back(r);
            }
            return stdlib::rebuild_any(i2, c, out);
        });
    }
    if (msg == "times_") { // (c * f) a0 folds via a_{i+1} = f (c_i, a_i)
        return vnative_fn("times_", [c](Interp& i2, const Value& f) -> Value {
            Value coll = c;
            return vnative_fn("fold", [coll, f](Interp& i3, const Value& a0) -> Value {
                std::vector<Value> items;
                if (Value exc = stdlib::collect_elements(i3, coll, items)) return exc;
                Value acc = a0;
                for (const auto& e : items) {
                    acc = i3.apply(f, vvector({e, acc}));
                    if (is_dynexc(acc)) return acc;
                }
                return acc;
            });
        });
    }
    if (msg == "pow_") { // filter
        return vnative_fn("pow_", [c](Interp& i2, const Value& f) -> Value {
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, c, items)) return exc;
            std::vector<Value> out;
            for (const auto& e : items) {
                Value keep = i2.force(i2.apply(f, e));
                if (is_dynexc(keep)) return keep;
                if (keep->kind != VK::Bool) return domain_error();
                if (keep->b) out.push_back(e);
            }
            return stdlib::rebuild_any(i2, c, out);
        });
    }
    if (msg == "slash__") { // map built from (x, f x); later pairs overwrite earlier
        return vnative_fn("slash__", [c](Interp& i2, const Value& f) -> Value {
            std::vector<Value> items;
            if (Value exc = stdlib::collect_elements(i2, c, items)) return exc;
            TreePtr t;
            try {
                for (const auto& x : items) {
                    Value fx = i2.apply(f, x);
                    if (is_dynexc(fx)) return fx;
                    t = tree::insert(t, i2.force(x), fx, i2.comparator(), true);
                }
            } catch (const CmpFail& fcmp) {
                return fcmp.exc;
            }
            return vmap(t);
        });
    }
    found = false;
    return nullptr;
}

// ---- per-type message dispatch --------------------------------------------------------------

inline Value builtin_send(Interp& in, const Value& v, const std::string& msg, bool& found) {
    found = true;
    switch (v->kind) {
    case VK::Int: {
        if (msg == "plus_" || msg == "minus_" || msg == "times_" || msg == "div_" || msg == "mod_" ||
            msg == "pow_" || msg == "to_" || msg == "downto_")
            return vnative_fn(msg, [v, msg](Interp& i2, const Value& arg) {
                return stdlib::int_arith(i2, v, msg, arg);
            });
        if (msg == "uminus_") return vint(-v->i);
        if (msg == "plus__putback_" || msg == "minus__putback_") {
            bool is_plus = msg == "plus__putback_";
            return vnative_fn(msg, [is_plus](Interp& i2, const Value& c_raw) -> Value {
                Value c = i2.force(c_raw);
                if (is_dynexc(c)) return c;
                return vnative_fn("putback", [is_plus, c](Interp& i3, const Value& t_raw) -> Value {
                    Value t = i3.force(t_raw);
                    if (is_dynexc(t)) return t;
                    // x + c = t  =>  x = t - c;   x - c = t  =>  x = t + c
                    return is_plus ? i3.apply(i3.send(t, "minus_"), c) : i3.apply(i3.send(t, "plus_"), c);
                });
            });
        }
        break;
    }
    case VK::Real: {
        if (msg == "plus_" || msg == "minus_" || msg == "times_" || msg == "slash_" || msg == "pow_")
            return vnative_fn(msg, [v, msg](Interp& i2, const Value& arg) {
                return stdlib::real_arith(i2, v, msg, arg);
            });
        if (msg == "uminus_") return vreal(iv_neg(v->r));
        if (msg == "plus__putback_" || msg == "minus__putback_") {
            bool is_plus = msg == "plus__putback_";
            return vnative_fn(msg, [is_plus](Interp& i2, const Value& c_raw) -> Value {
                Value c = i2.force(c_raw);
                if (is_dynexc(c)) return c;
                return vnative_fn("putback", [is_plus, c](Interp& i3, const Value& t_raw) -> Value {
                    Value t = i3.force(t_raw);
                    if (is_dynexc(t)) return t;
                    return is_plus ? i3.apply(i3.send(t, "minus_"), c) : i3.apply(i3.send(t, "plus_"), c);
                });
            });
        }
        break;
    }
    case VK::List:
    case VK::Vector: {
        if (msg == "uminus_") { // reverse
            auto items = stdlib::elements_of(in, v);
            std::reverse(items.begin(), items.end());
            return stdlib::rebuild_like(in, v, items);
        }
        if (msg == "apply_")
            return vnative_fn("atindex", [v](Interp& i2, const Value& arg) {
                bool f2 = false;
                Value ati = generic_collection_send(i2, v, "atindex", f2);
                return i2.apply(ati, arg);
            });
        if (msg == "atindex_putback_") {
            return vnative_fn(msg, [v](Interp& i2, const Value& raw_i) -> Value {
                Value idx = i2.force(raw_i);
                if (is_dynexc(idx)) return idx;
                if (idx->kind != VK::Int || idx->i.sign() < 0 || !idx->i.fits_slong()) return domain_error();
                long k = idx->i.to_slong();
                return vnative_fn("putback", [v, k](Interp& i3, const Value& t) -> Value {
                    auto items = stdlib::elements_of(i3, v);
                    if (k >= static_cast<long>(items.size())) return domain_error();
                    items[k] = t;
                    return stdlib::rebuild_like(i3, v, items);
                });
            });
        }
        break;
    }
    case VK::Set: {
        if (msg == "apply_" || msg == "contains")
            return vnative_fn("contains", [v](Interp& i2, const Value& x) { return stdlib::contains(i2, v, x); });
        if (msg == "plus_")
            return vnative_fn("plus_", [v](Interp& i2, const Value& x) { return i2.builtin_collector_add(v, x); });
        if (msg == "minus_")
            return vnative_fn("minus_", [v](Interp& i2, const Value& raw) -> Value {
                Value x = i2.force(raw);
                if (is_dynexc(x)) return x;
                try {
                    return vset(tree::remove(v->tree, x, i2.comparator()));
                } catch (const CmpFail& f) {
                    return f.exc;
                }
            });
        break;
    }
    case VK::Map: {
        if (msg == "apply_" || msg == "lookup")
            return vnative_fn("lookup", [v](Interp& i2, const Value& raw) -> Value {
                Value k = i2.force(raw);
                if (is_dynexc(k)) return k;
                try {
                    const TreeNode* n = tree::find(v->tree, k, i2.comparator());
                    return n ? n->val : domain_error();
                } catch (const CmpFail& f) {
                    return f.exc;
                }
            });
        if (msg == "containskey")
            return vnative_fn("containskey", [v](Interp& i2, const Value& raw) -> Value {
                Value k = i2.force(raw);
                if (is_dynexc(k)) return k;
                try {
                    return vbool(tree::find(v->tree, k, i2.comparator()) != nullptr);
                } catch (const CmpFail& f) {
                    return f.exc;
                }
            });
        if (msg == "lookup_putback_")
            return vnative_fn(msg, [v](Interp& i2, const Value& raw_k) -> Value {
                Value k = i2.force(raw_k);
                if (is_dynexc(k)) return k;
                return vnative_fn("putback", [v, k](Interp& i3, const Value& nv) -> Value {
                    try {
                        return vmap(tree::insert(v->tree, k, nv, i3.comparator(), true));
                    } catch (const CmpFail& f) {
                        return f.exc;
                    }
                });
            });
        if (msg == "plus_") // m + (k, w): associate
            return vnative_fn("plus_", [v](Interp& i2, const Value& x) { return i2.builtin_collector_add(v, x); });
        if (msg == "minus_") // m - k: remove key
            return vnative_fn("minus_", [v](Interp& i2, const Value& raw) -> Value {
                Value k = i2.force(raw);
                if (is_dynexc(k)) return k;
                try {
                    return vmap(tree::remove(v->tree, k, i2.comparator()));
                } catch (const CmpFail& f) {
                    return f.exc;
                }
            });
        if (msg == "minus__") // m -- n: remove keys in n
            return vnative_fn("minus__", [v](Interp& i2, const Value& raw) -> Value {
                Value n = i2.force(raw);
                if (is_dynexc(n)) return n;
                TreePtr t = v->tree;
                Value cur = n;
                try {
                    for (;;) {
                        Value step = i2.iterate(cur);
                        if (is_dynexc(step)) return step;
                        if (step->kind != VK::Vector) return domain_error();
                        if (step->vec->empty()) break;
                        t = tree::remove(t, i2.force((*step->vec)[0]), i2.comparator());
                        cur = (*step->vec)[1];
                    }
                } catch (const CmpFail& f) {
                    return f.exc;
                }
                return vmap(t);
            });
        if (msg == "times__") // m ** n: keep keys in n
            return vnative_fn("times__", [v](Interp& i2, const Value& raw) -> Value {
                Value n = i2.force(raw);
                if (is_dynexc(n)) return n;
                std::vector<Value> keys;
                Value cur = n;
                for (;;) {
                    Value step = i2.iterate(cur);
                    if (is_dynexc(step)) return step;
                    if (step->kind != VK::Vector) return domain_error();
                    if (step->vec->empty()) break;
                    keys.push_back(i2.force((*step->vec)[0]));
                    cur = (*step->vec)[1];
                }
                TreePtr t;
                try {
                    for (const TreeNode* e : tree::entries(v->tree)) {
                        bool keep = false;
                        for (const auto& k : keys) {
                            Interp::Cmp cm = i2.compare(e->key, k);
                            if (cm.exc) return cm.exc;
                            if (!cm.unrelated && cm.sign == 0) {
                                keep = true;
                                break;
                            }
                        }
                        if (keep) t = tree::insert(t, e->key, e->val, i2.comparator(), true);
                    }
                } catch (const CmpFail& f) {
                    return f.exc;
                }
                return vmap(t);
            });
        if (msg == "slash__") // m // f: (k, f (k, v))
            return vnative_fn("slash__", [v](Interp& i2, const Value& f) -> Value {
                TreePtr t;
                try {
                    for (const TreeNode* e : tree::entries(v->tree)) {
                        Value nv = i2.apply(f, vvector({e->key, e->val}));
                        if (is_dynexc(nv)) return nv;
                        t = tree::insert(t, e->key, nv, i2.comparator(), true);
                    }
                } catch (const CmpFail& f2) {
                    return f2.exc;
                }
                return vmap(t);
            });
        break;
    }
    case VK::Str: {
        if (msg == "plus_")
            return vnative_fn("plus_", [v](Interp& i2, const Value& x) { return i2.builtin_collector_add(v, x); });
        if (msg == "indexof")
            return vnative_fn("indexof", [v](Interp& i2, const Value& x) { return stdlib::index_of(i2, v, x); });
        if (msg == "contains")
            return vnative_fn("contains", [v](Interp& i2, const Value& x) { return stdlib::contains(i2, v, x); });
        break;
    }
    case VK::CExpr: {
        if (msg == "destruct_")
            return vnative_fn("destruct_", [v](Interp& i2, const Value& raw) -> Value {
                Value c = i2.force(raw);
                if (is_dynexc(c)) return c;
                if (c->kind != VK::CExpr) return domain_error();
                if (c->cexpr->ctor == v->cexpr->ctor) return v->cexpr->param;
                return domain_error();
            });
        break;
    }
    case VK::Fun:
    case VK::NativeFn:
        if (msg == "apply_") return v;
        break;
    case VK::Lens: {
        if (msg == "putback") return v->lens->put;
        if (msg == "modify")
            return vnative_fn("modify", [v](Interp& i2, const Value& u) -> Value {
                return vnative_fn("modify2", [v, u](Interp& i3, const Value& f) -> Value {
                    // l.modify u f = l.putback u (f (l u))
                    Value got = i3.apply(v->lens->get, u);
                    if (is_dynexc(got)) return got;
                    Value fx = i3.apply(f, got);
                    if (is_dynexc(fx)) return fx;
                    Value p1 = i3.apply(v->lens->put, u);
                    if (is_dynexc(p1)) return p1;
                    return i3.apply(p1, fx);
                });
            });
        if (msg == "apply_") return v->lens->get;
        if (msg == "times_") // lens composition: a * b = lens x => x.(a).(b)
            return vnative_fn("times_", [v](Interp& i2, const Value& raw) -> Value {
                Value b = i2.force(raw);
                if (is_dynexc(b)) return b;
                if (b->kind != VK::Lens) return domain_error();
                Value a = v;
                Value get = vnative_fn("get", [a, b](Interp& i3, const Value& u) -> Value {
                    Value mid = i3.apply(a->lens->get, u);
                    if (is_dynexc(mid)) return mid;
                    return i3.apply(b->lens->get, mid);
                });
                Value put = vnative_fn("put", [a, b](Interp& i3, const Value& u) -> Value {
                    return vnative_fn("put2", [a, b, u](Interp& i4, const Value& t) -> Value {
                        Value mid = i4.apply(a->lens->get, u);
                        if (is_dynexc(mid)) return mid;
                        Value pb = i4.apply(b->lens->put, mid);
                        if (is_dynexc(pb)) return pb;
                        Value new_mid = i4.apply(pb, t);
                        if (is_dynexc(new_mid)) return new_mid;
                        Value pa = i4.apply(a->lens->put, u);
                        if (is_dynexc(pa)) return pa;
                        return i4.apply(pa, new_mid);
                    });
                });
                return vlens(get, put);
            });
        break;
    }
    default: break;
    }
    if (stdlib::is_builtin_collection(v)) {
        if (msg == "iterate_") {
            Value step = in.iterate(v);
            return step;
        }
        if (msg == "collector_close_") return v;
        if (msg == "collector_add_")
            return vnative_fn("collector_add_",
                              [v](Interp& i2, const Value& x) { return i2.builtin_collector_add(v, x); });
        bool f2 = false;
        Value r = generic_collection_send(in, v, msg, f2);
        if (f2) return r;
    }
    found = false;
    return nullptr;
}

// Message-presence oracle for the runtime's putback/destruct checks.
inline bool builtin_has_message(Interp& in, const Value& v, const std::string& msg) {
    bool found = false;
    Value r = builtin_send(in, v, msg, found);
    (void)r;
    return found;
}

} // namespace babel17
