#pragma once

#include "babel17/builtins.hpp"
#include "babel17/interp.hpp"
#include "babel17/render.hpp"

#include <chrono>

namespace babel17 {

// ---- thunks ------------------------------------------------------------------

inline Value Interp::force(Value v) {
    while (v && v->kind == VK::Thunk) {
        auto th = v->thunk;
        std::unique_lock<std::mutex> lk(th->m);
        if (th->st == Thunk::St::Done) {
            v = th->result;
            continue;
        }
        if (th->st == Thunk::St::Pending) {
            th->st = Thunk::St::Running;
            th->owner = std::this_thread::get_id();
            ExprPtr body = th->body;
            Env env = th->env;
            lk.unlock();
            Value r = run_thunk_result(body, env);
            lk.lock();
            th->result = r;
            th->st = Thunk::St::Done;
            th->body = nullptr;
            th->env = nullptr;
            lk.unlock();
            th->cv.notify_all();
            v = r;
            continue;
        }
        // Running: join, with deadlock surveillance across module loads
        if (th->owner == std::this_thread::get_id()) return domain_error(); // self-referential force
        std::thread::id owner = th->owner;
        lk.unlock();
        auto token = eng.begin_wait_thunk(th.get(), owner);
        if (!token) return deadlock_error();
        lk.lock();
        th->cv.wait(lk, [&] { return th->st == Thunk::St::Done || *token->dead; });
        bool dead = th->st != Thunk::St::Done;
        Value out = dead ? nullptr : th->result;
        lk.unlock();
        eng.end_wait();
        if (dead) return deadlock_error();
        v = out;
    }
    return v;
}

inline Value Interp::run_thunk_result(const ExprPtr& body, const Env& env) {
    Interp sub(eng);
    sub.current_module = current_module;
    Value r = sub.eval(body, env);
    if (is_dynexc(r)) r = vpersistent(r->exc_param); // section 6: trapped into a persistent exception
    return r;
}

inline Value Interp::deep_force(const Value& raw) {
    Value v = force(raw);
    switch (v->kind) {
    case VK::List: {
        std::vector<Value> items;
        for (const ListNode* n = v->list.get(); n; n = n->tail.get()) items.push_back(deep_force(n->head));
        return stdlib::list_of(items);
    }
    case VK::Vector: {
        std::vector<Value> items;
        for (const auto& e : *v->vec) items.push_back(deep_force(e));
        return vvector(std::move(items));
    }
    case VK::Set:
        // element order is unchanged by forcing (comparison forces anyway)
        return vset(rebuild_ordered(tree::entries(v->tree), true));
    case VK::Map: return vmap(rebuild_ordered(tree::entries(v->tree), false));
    case VK::CExpr: return vcexpr(v->cexpr->ctor, v->cexpr->shown, deep_force(v->cexpr->param));
    case VK::PersistentExc: return vpersistent(deep_force(v->exc_param));
    case VK::User: {
        auto d = std::make_shared<UserData>();
        d->type = v->user->type;
        d->inner = deep_force(v->user->inner);
        d->outer = deep_force(v->user->outer);
        auto nv = mk(VK::User);
        vmut(nv).user = d;
        return nv;
    }
    default: return v;
    }
}

inline TreePtr Interp::rebuild_ordered(const std::vector<const TreeNode*>& entries, bool keys_only) {
    // rebuilds a balanced tree from already-ordered entries
    std::function<TreePtr(std::size_t, std::size_t)> build = [&](std::size_t lo, std::size_t hi) -> TreePtr {
        if (lo >= hi) return nullptr;
        std::size_t mid = lo + (hi - lo) / 2;
        Value k = deep_force(entries[mid]->key);
        Value val = keys_only ? nullptr : deep_force(entries[mid]->val);
        return tree::node(k, val, build(lo, mid), build(mid + 1, hi));
    };
    return build(0, entries.size());
}

// ---- message send --------------------------------------------------------------

inline Value Interp::invalid_message(const Value& target, const std::string& msg) {
    Value param = vvector({vtype(type_of(target)), vstr(to_u32(msg))});
    return vdynexc(vcexpr("invalidmessage", "InvalidMessage", param));
}

inline bool Interp::obj_qualifies_as_collection(const ObjData& obj) {
    return obj.table.count("iterate_") && obj.table.count("collector_add_") &&
           obj.table.count("collector_close_") && obj.table.count("empty");
}

inline Value Interp::send(const Value& raw_target, const std::string& msg) {
    Value target = force(raw_target);
    if (is_exc(target)) return vdynexc(target->exc_param); // (Exception v).m ~> DynamicException v
    switch (target->kind) {
    case VK::Obj: {
        auto it = target->obj->table.find(msg);
        if (it != target->obj->table.end()) return member_value(it->second, target);
        if (obj_qualifies_as_collection(*target->obj) && is_generic_collection_message(msg)) {
            bool found = false;
            Value r = generic_collection_send(*this, target, msg, found);
            if (found) return r;
        }
        return invalid_message(target, msg);
    }
    case VK::User: {
        Value outer = target->user->outer;
        if (outer->kind == VK::Obj) {
            auto it = outer->obj->table.find(msg);
            if (it != outer->obj->table.end()) return member_value(it->second, target);
            if (obj_qualifies_as_collection(*outer->obj) && is_generic_collection_message(msg)) {
                bool found = false;
                Value r = generic_collection_send(*this, target, msg, found);
                if (found) return r;
            }
            return invalid_message(target, msg);
        }
        if (outer->kind == VK::Module) return module_send(outer->module->path, msg);
        bool found = false;
        Value r = builtin_send(*this, outer, msg, found);
        if (found) return r;
        return invalid_message(target, msg);
    }
    case VK::Module: return module_send(target->module->path, msg);
    default: {
        bool found = false;
        Value r = builtin_send(*this, target, msg, found);
        if (found) return r;
        return invalid_message(target, msg);
    }
    }
}

inline bool Interp::has_member(const Value& raw, const std::string& msg) {
    Value v = force(raw);
    switch (v->kind) {
    case VK::Obj:
        return v->obj->table.count(msg) > 0 ||
               (obj_qualifies_as_collection(*v->obj) && is_generic_collection_message(msg));
    case VK::User: {
        Value outer = v->user->outer;
        if (outer->kind == VK::Obj)
            return outer->obj->table.count(msg) > 0 ||
                   (obj_qualifies_as_collection(*outer->obj) && is_generic_collection_message(msg));
        return has_member(outer, msg);
    }
    case VK::Module: {
        auto rec = eng.find_record(v->module->path);
        return rec && rec->decl.public_members.count(msg) > 0;
    }
    case VK::PersistentExc:
    case VK::DynamicExc: return false;
    default: return builtin_has_message(*this, v, msg);
    }
}

// ---- application ------------------------------------------------------------------

inline Value Interp::apply(const Value& raw_fn, const Value& raw_arg) {
    Value fn = force(raw_fn);
    if (is_dynexc(fn)) return fn;
    Value arg = force(raw_arg);
    if (is_dynexc(arg)) return arg;
    if (fn->kind == VK::PersistentExc) return vdynexc(fn->exc_param); // (PersistentException v) g
    switch (fn->kind) {
    case VK::Fun: return call_clauses(*fn->fun->clauses, fn->fun->env, arg, fn->fun->memo);
    case VK::NativeFn: return fn->nfn->fn(*this, arg);
    case VK::CExpr: {
        // a bare constructor acts as the constructor function
        Value param = force(fn->cexpr->param);
        if (param->kind == VK::Obj && param->obj->table.empty())
            return vcexpr(fn->cexpr->ctor, fn->cexpr->shown, arg);
        return domain_error();
    }
    case VK::Lens: return apply(fn->lens->get, arg);
    case VK::Type: {
        auto id = fn->type;
        return convert_explicit(arg, *id);
    }
    case VK::List:
    case VK::Vector: {
        bool found = false;
        Value ati = generic_collection_send(*this, fn, "atindex", found);
        return apply(ati, arg);
    }
    case VK::Set: return stdlib::contains(*this, fn, arg);
    case VK::Map: {
        bool found = false;
        Value lookup = builtin_send(*this, fn, "apply_", found);
        return apply(lookup, arg);
    }
    default: {
        // f x is equivalent to (f.apply_) x
        Value ap = send(fn, "apply_");
        if (is_dynexc(ap)) return ap;
        return apply(ap, arg);
    }
    }
}

// ---- the built-in order ---------------------------------------------------------------

inline CmpFn Interp::comparator() {
    return [this](const Value& a, const Value& b) -> int {
        Cmp c = compare(a, b);
        if (c.exc) throw CmpFail{c.exc};
        if (c.unrelated) throw CmpFail{unrelated_error()};
        return c.sign;
    };
}

inline Interp::Cmp Interp::compare(const Value& raw_a, const Value& raw_b) {
    Value a = force(raw_a);
    Value b = force(raw_b);
    if (is_dynexc(a)) return {0, false, a};
    if (is_dynexc(b)) return {0, false, b};

    TypeIdent ta = type_of(a);
    TypeIdent tb = type_of(b);
    if (!(ta == tb)) {
        if (auto ca = convert_auto(a, tb)) return compare(*ca, b);
        if (auto cb = convert_auto(b, ta)) return compare(a, *cb);
        return {0, true, nullptr};
    }

    auto sign_of = [](int s) { return Cmp{s < 0 ? -1 : (s > 0 ? 1 : 0), false, nullptr}; };

    // obj and user-defined types go through compare_
    if (a->kind == VK::Obj || a->kind == VK::User) {
        if (has_member(a, "compare_")) {
            Value r = apply(send(a, "compare_"), b);
            r = force(r);
            if (is_dynexc(r)) return {0, true, nullptr}; // case (exception _) => exception Unrelated
            if (r->kind != VK::Int) {
                static const TypeIdent int_t{true, BT::Int, {}, ""};
                auto conv = convert_auto(r, int_t);
                if (!conv) return {0, true, nullptr};
                r = *conv;
            }
            return sign_of(r->i.sign());
        }
        if (a->kind == VK::User) return compare(a->user->outer, b->user->outer);
        // structural: number, names and contents of the messages
        const auto& ta2 = a->obj->table;
        const auto& tb2 = b->obj->table;
        if (ta2.size() != tb2.size()) return sign_of(ta2.size() < tb2.size() ? -1 : 1);
        auto ia = ta2.begin();
        auto ib = tb2.begin();
        for (; ia != ta2.end(); ++ia, ++ib) {
            if (ia->first != ib->first) return sign_of(ia->first < ib->first ? -1 : 1);
        }
        ia = ta2.begin();
        ib = tb2.begin();
        for (; ia != ta2.end(); ++ia, ++ib) {
            Value va = member_value(ia->second, a);
            if (is_dynexc(va)) return {0, false, va};
            Value vb = member_value(ib->second, b);
            if (is_dynexc(vb)) return {0, false, vb};
            Cmp c = compare(va, vb);
            if (!c.ok() || c.sign != 0) return c;
        }
        return sign_of(0);
    }

    switch (a->kind) {
    case VK::Int: return sign_of(a->i.cmp(b->i));
    case VK::Real: {
        auto r = iv_compare(a->r, b->r);
        if (!r) return {0, true, nullptr};
        return sign_of(*r);
    }
    case VK::Bool: return sign_of(int(a->b) - int(b->b));
    case VK::Str: return sign_of(a->s.compare(b->s) < 0 ? -1 : (a->s == b->s ? 0 : 1));
    case VK::List:
    case VK::Vector: {
        auto ea = stdlib::elements_of(*this, a);
        auto eb = stdlib::elements_of(*this, b);
        for (std::size_t i = 0; i < std::min(ea.size(), eb.size()); ++i) {
            Cmp c = compare(ea[i], eb[i]);
            if (!c.ok() || c.sign != 0) return c;
        }
        return sign_of(ea.size() == eb.size() ? 0 : (ea.size() < eb.size() ? -1 : 1));
    }
    case VK::CExpr: {
        int c = a->cexpr->ctor.compare(b->cexpr->ctor);
        if (c != 0) return sign_of(c);
        return compare(a->cexpr->param, b->cexpr->param);
    }
    case VK::Fun:
        if (a->fun == b->fun) return sign_of(0);
        return {0, true, nullptr};
    case VK::NativeFn:
        if (a->nfn == b->nfn) return sign_of(0);
        return {0, true, nullptr};
    case VK::PersistentExc: return compare(a->exc_param, b->exc_param);
    case VK::Set: {
        std::size_t na = tree::size(a->tree), nb = tree::size(b->tree);
        if (na != nb) return sign_of(na < nb ? -1 : 1);
        auto ea = tree::entries(a->tree);
        auto eb = tree::entries(b->tree);
        for (std::size_t i = 0; i < ea.size(); ++i) {
            Cmp c = compare(ea[i]->key, eb[i]->key);
            if (!c.ok() || c.sign != 0) return c;
        }
        return sign_of(0);
    }
    case VK::Map: {
        std::size_t na = tree::size(a->tree), nb = tree::size(b->tree);
        if (na != nb) return sign_of(na < nb ? -1 : 1);
        auto ea = tree::entries(a->tree);
        auto eb = tree::entries(b->tree);
        for (std::size_t i = 0; i < ea.size(); ++i) {
            Cmp c = compare(ea[i]->key, eb[i]->key);
            if (!c.ok() || c.sign != 0) return c;
        }
        for (std::size_t i = 0; i < ea.size(); ++i) {
            Cmp c = compare(ea[i]->val, eb[i]->val);
            if (!c.ok() || c.sign != 0) return c;
        }
        return sign_of(0);
    }
    case VK::Type: {
        int c = a->type->display().compare(b->type->display());
        return sign_of(c < 0 ? -1 : (c > 0 ? 1 : 0));
    }
    case VK::Module: {
        if (a->module->path == b->module->path) return sign_of(0);
        return sign_of(a->module->path < b->module->path ? -1 : 1);
    }
    case VK::Lens:
        if (a->lens == b->lens) return sign_of(0);
        return {0, true, nullptr};
    default: return {0, true, nullptr};
    }
}

// ---- types and conversions ----------------------------------------------------------------

inline TypeIdent Interp::type_of(const Value& v) {
    TypeIdent t;
    switch (v->kind) {
    case VK::Int: t.bt = BT::Int; break;
    case VK::Real: t.bt = BT::Real; break;
    case VK::Bool: t.bt = BT::Bool; break;
    case VK::Str: t.bt = BT::String; break;
    case VK::List: t.bt = BT::List; break;
    case VK::Vector: t.bt = BT::Vect; break;
    case VK::Set: t.bt = BT::Set; break;
    case VK::Map: t.bt = BT::Map; break;
    case VK::CExpr: t.bt = BT::Cexp; break;
    case VK::Obj: t.bt = BT::Obj; break;
    case VK::Fun:
    case VK::NativeFn: t.bt = BT::Fun; break;
    case VK::PersistentExc:
    case VK::DynamicExc: t.bt = BT::Exc; break;
    case VK::Type: t.bt = BT::Type; break;
    case VK::Module: t.bt = BT::Module; break;
    case VK::Lens: t.bt = BT::Lens; break;
    case VK::Native: t.bt = BT::Native; break;
    case VK::Thunk: t.bt = BT::Obj; break; // callers force first
    case VK::User: return v->user->type;
    }
    return t;
}

inline std::optional<Value> Interp::convert_auto(const Value& raw, const TypeIdent& t) {
    Value v = force(raw);
    if (type_of(v) == t) return v;
    const ObjData* obj = nullptr;
    Value receiver = v;
    if (v->kind == VK::Obj) obj = v->obj.get();
    if (v->kind == VK::User && v->user->outer->kind == VK::Obj) obj = v->user->outer->obj.get();
    if (obj) {
        auto it = obj->convs_auto.find(t.display());
        if (it != obj->convs_auto.end()) {
            Value r = force(member_value(it->second, receiver));
            if (is_dynexc(r)) return std::nullopt;
            return r;
        }
    }
    if (v->kind == VK::User) return std::nullopt;
    return convert_builtin(*this, v, t, /*explicit=*/false);
}

inline Value Interp::convert_explicit(const Value& raw, const TypeIdent& t) {
    Value v = force(raw);
    if (is_dynexc(v)) return v;
    // an automatic conversion takes precedence over a non-automatic one
    if (auto a = convert_auto(v, t)) return *a;
    const ObjData* obj = nullptr;
    Value receiver = v;
    if (v->kind == VK::Obj) obj = v->obj.get();
    if (v->kind == VK::User && v->user->outer->kind == VK::Obj) obj = v->user->outer->obj.get();
    if (obj) {
        auto it = obj->convs_explicit.find(t.display());
        if (it != obj->convs_explicit.end()) return member_value(it->second, receiver);
        // collection-protocol objects inherit conversions to list/vect/set
        if (obj_qualifies_as_collection(*obj) && t.builtin &&
            (t.bt == BT::List || t.bt == BT::Vect || t.bt == BT::Set)) {
            std::vector<Value> items;
            Value cur = receiver;
            for (;;) {
                Value step = iterate(cur);
                if (is_dynexc(step)) return step;
                if (step->kind != VK::Vector) return domain_error();
                if (step->vec->empty()) break;
                items.push_back((*step->vec)[0]);
                cur = (*step->vec)[1];
            }
            if (t.bt == BT::List) return stdlib::list_of(items);
            if (t.bt == BT::Vect) return vvector(items);
            return stdlib::rebuild_like(*this, vset(nullptr), items);
        }
        return domain_error();
    }
    if (v->kind != VK::User) {
        if (auto b = convert_builtin(*this, v, t, /*explicit=*/true)) return *b;
    }
    return domain_error();
}

inline Value Interp::resolve_type_path(const TypePath& p, const Env& env, SourcePos pos) {
    (void)pos;
    std::vector<std::string> segs = p.segments;
    if (!p.root_anchored && !segs.empty()) {
        // bindings that denote a type shadow builtin names; other bindings
        // (e.g. a pattern variable that happens to be called `list`) do not
        if (const Binding* b = env_lookup(env, segs[0])) {
            switch (b->kind) {
            case Binding::K::Typedef:
                if (segs.size() == 1) return vtype(b->tdef->id);
                break;
            case Binding::K::Import: {
                const ImportTarget& t = *b->import_target;
                if (t.member.empty()) {
                    // alias for a module path: resolve the remaining segments beneath it
                    std::vector<std::string> path = t.module_path;
                    for (std::size_t i = 1; i < segs.size(); ++i) path.push_back(segs[i]);
                    return resolve_module_type(path);
                }
                if (segs.size() == 1) {
                    auto rec = eng.find_record(t.module_path);
                    if (rec && rec->decl.typedef_names.count(t.member))
                        return vtype(TypeIdent{false, BT::Obj, t.module_path, t.member});
                }
                break;
            }
            case Binding::K::Val: {
                if (segs.size() != 1) break;
                Value v = force(b->value);
                if (v->kind == VK::Type) return v;
                if (v->kind == VK::Module) return resolve_module_type(v->module->path);
                break;
            }
            default: break;
            }
        }
        if (segs.size() == 1) {
            static const std::map<std::string, BT> builtin = {
                {"int", BT::Int},   {"real", BT::Real}, {"bool", BT::Bool},   {"string", BT::String},
                {"list", BT::List}, {"vect", BT::Vect}, {"set", BT::Set},     {"map", BT::Map},
                {"cexp", BT::Cexp}, {"obj", BT::Obj},   {"fun", BT::Fun},     {"exc", BT::Exc},
                {"type", BT::Type}, {"module_", BT::Module}, {"lens_", BT::Lens}, {"native_", BT::Native}};
            auto it = builtin.find(segs[0]);
            if (it != builtin.end()) return vtype(TypeIdent{true, it->second, {}, ""});
        }
    }
    return resolve_module_type(segs);
}

// A dotted path denotes either module+typedef (a.b.t) or a module whose last
// segment names a typedef of the same name (the module/type aliasing rule).
inline Value Interp::resolve_module_type(const std::vector<std::string>& path) {
    if (path.empty()) return domain_error();
    if (auto rec = eng.find_record(path)) {
        if (rec->decl.typedef_names.count(path.back()))
            return vtype(TypeIdent{false, BT::Obj, path, path.back()});
    }
    if (path.size() >= 2) {
        std::vector<std::string> parent(path.begin(), path.end() - 1);
        if (auto rec = eng.find_record(parent)) {
            if (rec->decl.typedef_names.count(path.back()))
                return vtype(TypeIdent{false, BT::Obj, parent, path.back()});
        }
    }
    return domain_error();
}

inline Value Interp::resolve_type(const TypeRef& t, const Env& env, SourcePos pos) {
    if (t.dynamic) {
        Value v = force(eval(t.dynamic, env));
        if (is_dynexc(v)) return v;
        if (v->kind == VK::Type) return v;
        if (v->kind == VK::Module) return resolve_module_type(v->module->path);
        return domain_error();
    }
    return resolve_type_path(t.path, env, pos);
}

// ---- pattern matching -------------------------------------------------------------------------

inline Interp::MatchOut Interp::match(const PatternPtr& p, const Value& v, const Env& env) {
    std::map<std::string, Value> binds;
    MatchOut out = match_impl(p, v, env, binds);
    if (out.k == MatchOut::K::Success) out.binds = std::move(binds);
    return out;
}

inline Interp::MatchOut Interp::match_impl(const PatternPtr& p, const Value& v, const Env& env,
                                           std::map<std::string, Value>& binds) {
    auto success = [] { return MatchOut{MatchOut::K::Success, {}, nullptr}; };
    auto failure = [] { return MatchOut{MatchOut::K::Failure, {}, nullptr}; };
    auto error = [](Value e) { return MatchOut{MatchOut::K::Exc, {}, std::move(e)}; };

    // only exception patterns can look at a dynamic exception
    if (is_dynexc(v) && p->kind != PK::Exception && p->kind != PK::As && p->kind != PK::Guard)
        return failure();

    // environment for embedded expressions: current bindings visible
    auto embedded_env = [&]() {
        Env e = EnvNode::child_of(env);
        for (auto& [n, val] : binds) e->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
        e->frozen = true;
        return e;
    };

    auto equal_by_order = [&](const Value& lit) -> MatchOut {
        Value fv = force(v);
        if (is_dynexc(fv)) return failure();
        Cmp c = compare(fv, lit);
        if (c.exc) return error(c.exc);
        if (c.unrelated) return failure();
        return c.sign == 0 ? success() : failure();
    };

    switch (p->kind) {
    case PK::Wildcard: return success();
    case PK::Ident:
        binds[p->name] = v;
        return success();
    case PK::As: {
        if (is_dynexc(v)) return failure();
        MatchOut m = match_impl(p->sub, v, env, binds);
        if (m.k != MatchOut::K::Success) return m;
        binds[p->name] = v;
        return success();
    }
    case PK::IntLit: return equal_by_order(vint(p->int_value));
    case PK::StrLit: return equal_by_order(vstr(p->str_value));
    case PK::BoolLit: {
        Value fv = force(v);
        if (fv->kind != VK::Bool) return failure();
        return fv->b == p->bool_value ? success() : failure();
    }
    case PK::Nil: return equal_by_order(nil_object());
    case PK::Ctor: {
        Value fv = force(v);
        if (fv->kind == VK::User) fv = force(fv->user->outer);
        if (fv->kind != VK::CExpr) return failure();
        if (fv->cexpr->ctor != p->name) return failure();
        if (!p->sub) return success(); // bare `c` matches any parameter
        return match_impl(p->sub, fv->cexpr->param, env, binds);
    }
    case PK::Guard: {
        MatchOut m = match_impl(p->sub, v, env, binds);
        if (m.k != MatchOut::K::Success) return m;
        Value g = force(eval(p->expr, embedded_env()));
        if (is_dynexc(g)) return error(g);
        if (g->kind != VK::Bool) return error(domain_error());
        return g->b ? success() : failure();
    }
    case PK::ValP: {
        Value e = force(eval(p->expr, embedded_env()));
        if (is_dynexc(e)) return error(e);
        return equal_by_order(e);
    }
    case PK::Destruct: {
        Value fv = force(v);
        Value effective = fv->kind == VK::User ? force(fv->user->outer) : fv;
        if (effective->kind == VK::CExpr) {
            if (effective->cexpr->ctor != p->name) return failure();
            return match_impl(p->sub, effective->cexpr->param, env, binds);
        }
        if (!has_member(fv, "destruct_")) return failure();
        Value r = apply(send(fv, "destruct_"), vcexpr(p->name, p->name, nil_object()));
        if (is_dynexc(r)) return error(r);
        return match_impl(p->sub, r, env, binds);
    }
    case PK::Predicate: {
        Value f = eval(p->expr, embedded_env());
        if (is_dynexc(f)) return error(f);
        Value r = apply(f, v);
        if (is_dynexc(r)) return error(r);
        return match_impl(p->sub, r, env, binds);
    }
    case PK::Record: {
        Value fv = force(v);
        const ObjData* obj = nullptr;
        if (fv->kind == VK::Obj) obj = fv->obj.get();
        else if (fv->kind == VK::User && fv->user->outer->kind == VK::Obj) obj = fv->user->outer->obj.get();
        if (!obj) return failure();
        std::set<std::string> named;
        for (const auto& f : p->fields) named.insert(f.name);
        if (!p->delta && obj->table.size() != named.size()) return failure();
        for (const auto& f : p->fields)
            if (!obj->table.count(f.name)) return failure();
        for (const auto& f : p->fields) {
            Value mv = member_value(obj->table.at(f.name), fv);
            if (is_dynexc(mv)) return error(mv);
            MatchOut m = match_impl(f.pattern, mv, env, binds);
            if (m.k != MatchOut::K::Success) return m;
        }
        if (p->delta) {
            auto rest = std::make_shared<ObjData>();
            for (const auto& [name, member] : obj->table)
                if (!named.count(name)) rest->table[name] = member;
            return match_impl(p->delta, vobj(rest), env, binds);
        }
        return success();
    }
    case PK::Exception: {
        Value fv = force(v);
        if (!is_exc(fv)) return failure();
        return match_impl(p->sub, fv->exc_param, env, binds);
    }
    case PK::TypeAnnot: {
        Value tv = resolve_type(p->type_ref, embedded_env(), p->pos);
        if (is_dynexc(tv)) return error(tv);
        if (tv->kind != VK::Type) return error(domain_error());
        Value fv = force(v);
        if (is_dynexc(fv)) return failure();
        if (type_of(fv) == *tv->type) return match_impl(p->sub, fv, env, binds);
        auto conv = convert_auto(fv, *tv->type);
        if (!conv) return failure();
        return match_impl(p->sub, *conv, env, binds);
    }
    case PK::Inner: {
        const Binding* b = env_lookup(env, p->type_path.segments[0]);
        if (!b || b->kind != Binding::K::Typedef) return failure();
        Value fv = force(v);
        if (fv->kind != VK::User || !(fv->user->type == b->tdef->id)) return failure();
        return match_impl(p->sub, fv->user->inner, env, binds);
    }
    case PK::ListP:
    case PK::VectorP: {
        Value fv = force(v);
        if (fv->kind != VK::List && fv->kind != VK::Vector) return failure();
        auto items = stdlib::elements_of(*this, fv);
        if (p->delta) {
            if (items.size() < p->items.size()) return failure();
        } else if (items.size() != p->items.size()) {
            return failure();
        }
        for (std::size_t i = 0; i < p->items.size(); ++i) {
            MatchOut m = match_impl(p->items[i], items[i], env, binds);
            if (m.k != MatchOut::K::Success) return m;
        }
        if (p->delta) {
            std::vector<Value> rest(items.begin() + p->items.size(), items.end());
            Value rv = fv->kind == VK::List ? stdlib::list_of(rest) : vvector(rest);
            return match_impl(p->delta, rv, env, binds);
        }
        return success();
    }
    case PK::ConsP: {
        Value fv = force(v);
        if (fv->kind == VK::List) {
            if (!fv->list) return failure();
            MatchOut m = match_impl(p->sub, fv->list->head, env, binds);
            if (m.k != MatchOut::K::Success) return m;
            return match_impl(p->sub2, vlist(fv->list->tail), env, binds);
        }
        if (fv->kind == VK::Vector) {
            if (fv->vec->empty()) return failure();
            MatchOut m = match_impl(p->sub, (*fv->vec)[0], env, binds);
            if (m.k != MatchOut::K::Success) return m;
            std::vector<Value> rest(fv->vec->begin() + 1, fv->vec->end());
            return match_impl(p->sub2, vvector(rest), env, binds);
        }
        return failure();
    }
    case PK::SetP: {
        Value fv = force(v);
        if (fv->kind != VK::Set) return failure();
        auto entries = tree::entries(fv->tree);
        if (p->delta) {
            if (entries.size() < p->items.size()) return failure();
        } else if (entries.size() != p->items.size()) {
            return failure();
        }
        for (std::size_t i = 0; i < p->items.size(); ++i) {
            MatchOut m = match_impl(p->items[i], entries[i]->key, env, binds);
            if (m.k != MatchOut::K::Success) return m;
        }
        if (p->delta) {
            TreePtr rest;
            try {
                for (std::size_t i = p->items.size(); i < entries.size(); ++i)
                    rest = tree::insert(rest, entries[i]->key, nullptr, comparator(), false);
            } catch (const CmpFail& f) {
                return error(f.exc);
            }
            return match_impl(p->delta, vset(rest), env, binds);
        }
        return success();
    }
    case PK::MapP:
    case PK::EmptyMapP: {
        Value fv = force(v);
        if (fv->kind != VK::Map) return failure();
        auto entries = tree::entries(fv->tree);
        if (p->kind == PK::EmptyMapP) return entries.empty() ? success() : failure();
        if (p->delta) {
            if (entries.size() < p->pairs.size()) return failure();
        } else if (entries.size() != p->pairs.size()) {
            return failure();
        }
        for (std::size_t i = 0; i < p->pairs.size(); ++i) {
            MatchOut m = match_impl(p->pairs[i].first, entries[i]->key, env, binds);
            if (m.k != MatchOut::K::Success) return m;
            m = match_impl(p->pairs[i].second, entries[i]->val, env, binds);
            if (m.k != MatchOut::K::Success) return m;
        }
        if (p->delta) {
            TreePtr rest;
            try {
                for (std::size_t i = p->pairs.size(); i < entries.size(); ++i)
                    rest = tree::insert(rest, entries[i]->key, entries[i]->val, comparator(), true);
            } catch (const CmpFail& f) {
                return error(f.exc);
            }
            return match_impl(p->delta, vmap(rest), env, binds);
        }
        return success();
    }
    case PK::CollectP: {
        Value cur = force(v);
        for (const auto& item : p->items) {
            Value step = iterate(cur);
            if (is_dynexc(step)) return error(step);
            if (step->kind != VK::Vector) return error(domain_error());
            if (step->vec->empty()) return failure();
            if (step->vec->size() != 2) return error(domain_error());
            MatchOut m = match_impl(item, (*step->vec)[0], env, binds);
            if (m.k != MatchOut::K::Success) return m;
            cur = (*step->vec)[1];
        }
        if (p->delta) return match_impl(p->delta, cur, env, binds);
        Value step = iterate(cur);
        if (is_dynexc(step)) return error(step);
        if (step->kind != VK::Vector) return error(domain_error());
        return step->vec->empty() ? success() : failure();
    }
    case PK::DeltaRest: return success();
    }
    return failure();
}

// ---- expression evaluation ---------------------------------------------------------

inline Value Interp::eval(const ExprPtr& ep, const Env& env) {
    const Expr& e = *ep;
    switch (e.kind) {
    case ExK::IntLit: return vint(e.int_value);
    case ExK::RealLit: return vreal(Interval::point(e.real_value));
    case ExK::StrLit: return vstr(e.str_value);
    case ExK::BoolLit: return vbool(e.bool_value);
    case ExK::NilLit: return nil_object();
    case ExK::EmptyList: return vlist(nullptr);
    case ExK::Ident: {
        if (const Binding* b = env_lookup(env, e.name)) {
            switch (b->kind) {
            case Binding::K::Val: return b->value;
            case Binding::K::Def: return eval_def_entry(b->def);
            case Binding::K::Import: {
                const ImportTarget& t = *b->import_target;
                if (t.member.empty()) return vmodule(t.module_path);
                return module_send(t.module_path, t.member);
            }
            case Binding::K::Typedef: return make_user_ctor(b->tdef);
            }
        }
        if (eng.is_module_prefix({e.name})) return vmodule({e.name});
        return domain_error();
    }
    case ExK::CtorLit:
        return vcexpr(e.name, std::string(e.str_value.begin(), e.str_value.end()), nil_object());
    case ExK::Send: {
        Value t = eval(e.a, env);
        if (is_dynexc(t)) return t;
        return send(t, e.name);
    }
    case ExK::SendLens: {
        Value u = eval(e.a, env);
        if (is_dynexc(u)) return u;
        Value l = force(eval(e.b, env));
        if (is_dynexc(l)) return l;
        if (l->kind != VK::Lens) return domain_error();
        return apply(l->lens->get, u);
    }
    case ExK::Apply: {
        Value fn = eval(e.a, env);
        if (is_dynexc(fn)) return fn;
        Value arg = eval(e.b, env);
        if (is_dynexc(arg)) return arg;
        return apply(fn, arg);
    }
    case ExK::Cons: {
        Value h = eval(e.a, env);
        if (is_dynexc(h)) return h;
        Value t = eval(e.b, env);
        if (is_dynexc(t)) return t;
        t = force(t);
        if (is_dynexc(t)) return t;
        if (t->kind == VK::List) return vlist(list_cons(h, t->list));
        return vlist(list_cons(h, list_cons(t, nullptr))); // h::t is h::t::[]
    }
    case ExK::VectorDisplay: {
        std::vector<Value> items;
        items.reserve(e.items.size());
        for (const auto& it : e.items) {
            Value v = eval(it, env);
            if (is_dynexc(v)) return v;
            items.push_back(v);
        }
        return vvector(std::move(items));
    }
    case ExK::SetDisplay: {
        TreePtr t;
        try {
            for (const auto& it : e.items) {
                Value v = force(eval(it, env));
                if (is_dynexc(v)) return v;
                t = tree::insert(t, v, nullptr, comparator(), false);
            }
        } catch (const CmpFail& f) {
            return f.exc;
        }
        return vset(t);
    }
    case ExK::MapDisplay: {
        TreePtr t;
        try {
            for (std::size_t i = 0; i + 1 < e.items.size(); i += 2) {
                Value k = force(eval(e.items[i], env));
                if (is_dynexc(k)) return k;
                Value v = eval(e.items[i + 1], env);
                if (is_dynexc(v)) return v;
                t = tree::insert(t, k, v, comparator(), true);
            }
        } catch (const CmpFail& f) {
            return f.exc;
        }
        return vmap(t);
    }
    case ExK::IntervalE: {
        Value a = force(eval(e.a, env));
        if (is_dynexc(a)) return a;
        Value b = force(eval(e.b, env));
        if (is_dynexc(b)) return b;
        if (a->kind != VK::Real || b->kind != VK::Real) return domain_error();
        return vreal(Interval::join(a->r, b->r));
    }
    case ExK::Lambda: {
        auto fd = std::make_shared<FunData>();
        auto clauses = std::make_shared<std::vector<Clause>>();
        for (const auto& c : e.cases) clauses->push_back(Clause{c.pattern, c.body});
        fd->clauses = clauses;
        fd->env = env_freeze(env);
        return vfun(fd);
    }
    case ExK::ObjectLit: return eval_object(e, env);
    case ExK::BlockE: return eval_block_expr(ep, env);
    case ExK::Match: {
        Value scrutinee = eval(e.a, env);
        return match_dispatch(scrutinee, e.cases, env, nullptr);
    }
    case ExK::TryE: return try_dispatch(e, env, nullptr);
    case ExK::Lazy: {
        auto th = std::make_shared<Thunk>();
        th->body = e.a;
        th->env = env_freeze(env);
        return vthunk(th);
    }
    case ExK::Concurrent: {
        auto th = std::make_shared<Thunk>();
        th->body = e.a;
        th->env = env_freeze(env);
        th->concurrent = true;
        Value tv = vthunk(th);
        Engine* engine = &eng;
        auto mod = current_module;
        eng.submit([engine, th, mod] {
            Interp w(*engine);
            w.current_module = mod;
            w.force(vthunk(th));
        });
        return tv;
    }
    case ExK::Force: return force(eval(e.a, env));
    case ExK::Raise: {
        Value v = force(eval(e.a, env));
        if (is_dynexc(v)) return v;
        return vdynexc(v);
    }
    case ExK::TypeofE: {
        Value v = force(eval(e.a, env));
        if (is_dynexc(v)) return v;
        return vtype(type_of(v));
    }
    case ExK::Random: {
        Value n = force(eval(e.a, env));
        if (is_dynexc(n)) return n;
        if (n->kind != VK::Int || n->i.sign() <= 0) return domain_error();
        return vint(eng.random_below(n->i));
    }
    case ExK::Choose: {
        Value c = force(eval(e.a, env));
        if (is_dynexc(c)) return c;
        return choose_from(c);
    }
    case ExK::MinOf:
    case ExK::MaxOf: {
        Value c = force(eval(e.a, env));
        if (is_dynexc(c)) return c;
        return min_max_of(c, e.kind == ExK::MinOf);
    }
    case ExK::NativeE: {
        Value v = force(eval(e.a, env));
        if (is_dynexc(v)) return v;
        if (v->kind == VK::CExpr && v->cexpr->ctor == "platform") return nil_object();
        return domain_error();
    }
    case ExK::CompareOp: {
        Value a = force(eval(e.a, env));
        if (is_dynexc(a)) return a;
        Value b = force(eval(e.b, env));
        if (is_dynexc(b)) return b;
        Cmp c = compare(a, b);
        if (c.exc) return c.exc;
        const std::string& op = e.name;
        if (op.empty()) { // the ~ operator
            if (c.unrelated) return unrelated_error();
            return vint(Int(c.sign));
        }
        if (c.unrelated) {
            if (op == "==") return vbool(false);
            if (op == "<>") return vbool(true);
            return unrelated_error();
        }
        int s = c.sign;
        if (op == "==") return vbool(s == 0);
        if (op == "<>") return vbool(s != 0);
        if (op == "<") return vbool(s < 0);
        if (op == "<=") return vbool(s <= 0);
        if (op == ">") return vbool(s > 0);
        if (op == ">=") return vbool(s >= 0);
        return domain_error();
    }
    case ExK::XorOp: {
        Value a = force(eval(e.a, env));
        if (is_dynexc(a)) return a;
        if (a->kind != VK::Bool) return domain_error();
        Value b = force(eval(e.b, env));
        if (is_dynexc(b)) return b;
        if (b->kind != VK::Bool) return domain_error();
        return vbool(a->b != b->b);
    }
    case ExK::With: {
        Value coll = force(eval(e.a, env));
        if (is_dynexc(coll)) return coll;
        Sink sink;
        sink.k = Sink::K::User;
        sink.user = coll;
        Env frame = EnvNode::child_of(env);
        Sink* saved = cur_sink_;
        cur_sink_ = &sink;
        Value exc = exec_block_stmts(e.b->stmts, frame, sink);
        cur_sink_ = saved;
        if (exc) return exc;
        return close_sink(sink);
    }
    case ExK::WhileLoop:
    case ExK::ForLoop: {
        // loops always yield into the innermost enclosing block context
        Sink discard;
        discard.k = Sink::K::Discard;
        Sink& sink = cur_sink_ ? *cur_sink_ : discard;
        Value exc = eval_loop(e, env, sink);
        if (exc) return exc;
        return unit();
    }
    case ExK::LensPair: {
        Value g = force(eval(e.a, env));
        if (is_dynexc(g)) return g;
        Value p = force(eval(e.b, env));
        if (is_dynexc(p)) return p;
        return vlens(g, p);
    }
    case ExK::LensPath: return make_path_lens(e.name, e.steps, env);
    case ExK::TypeLit: return resolve_type_path(e.type_path, env, e.pos);
    case ExK::ConvertE: {
        Value v = force(eval(e.a, env));
        if (is_dynexc(v)) return v;
        Value t = resolve_type(e.type_ref, env, e.pos);
        if (is_dynexc(t)) return t;
        if (t->kind != VK::Type) return domain_error();
        return convert_explicit(v, *t->type);
    }
    case ExK::RootRef: return vmodule({});
    case ExK::ThisRef: {
        if (const Binding* b = env_lookup(env, "this")) return b->value;
        return domain_error();
    }
    }
    return domain_error();
}

// ---- blocks and statements ------------------------------------------------------------

inline Value Interp::eval_block_expr(const ExprPtr& block, const Env& enclosing) {
    return eval_stmts_value(block->stmts, enclosing);
}

inline Value Interp::eval_stmts_value(const std::vector<StmtPtr>& stmts, const Env& enclosing) {
    Env frame = EnvNode::child_of(enclosing);
    Sink sink;
    Sink* saved = cur_sink_;
    cur_sink_ = &sink;
    Value exc = exec_block_stmts(stmts, frame, sink);
    cur_sink_ = saved;
    if (exc) return exc;
    return close_sink(sink);
}

inline Value Interp::close_sink(Sink& sink) {
    switch (sink.k) {
    case Sink::K::Default:
        if (sink.acc.empty()) return unit();
        if (sink.acc.size() == 1) return sink.acc[0];
        return vvector(sink.acc);
    case Sink::K::User: return send(sink.user, "collector_close_");
    case Sink::K::Discard: return unit();
    }
    return unit();
}

inline Value Interp::sink_add(Sink& sink, const Value& v) {
    switch (sink.k) {
    case Sink::K::Default: sink.acc.push_back(v); return nullptr;
    case Sink::K::User: {
        Value add = send(sink.user, "collector_add_");
        if (is_dynexc(add)) return add;
        Value next = apply(add, v);
        if (is_dynexc(next)) return next;
        sink.user = next;
        return nullptr;
    }
    case Sink::K::Discard: return nullptr;
    }
    return nullptr;
}

inline void Interp::hoist_block(const std::vector<StmtPtr>& stmts, const Env& frame) {
    BlockPlan plan = plan_block(stmts);
    for (const auto& d : plan.defs) {
        auto entry = std::make_shared<DefEntry>();
        entry->name = d.name;
        entry->simple = d.simple;
        entry->clauses = d.clauses;
        entry->memo_kind = d.memo_kind;
        if (d.memo_kind) entry->memo = std::make_shared<MemoTable>(d.memo_kind == 2);
        frame->table[d.name] = Binding{Binding::K::Def, nullptr, entry, nullptr, nullptr};
    }
    for (const auto& s : stmts) {
        if (s->kind != StK::Typedef) continue;
        auto it = frame->table.find(s->name);
        if (it != frame->table.end() && it->second.kind == Binding::K::Typedef) {
            for (const auto& c : s->typedef_clauses) it->second.tdef->clauses.push_back(c);
            continue;
        }
        auto tdef = std::make_shared<UserTypeDef>();
        tdef->id = TypeIdent{false, BT::Obj, current_module, s->name};
        for (const auto& c : s->typedef_clauses) tdef->clauses.push_back(c);
        frame->table[s->name] = Binding{Binding::K::Typedef, nullptr, nullptr, nullptr, tdef};
    }
}

inline Value Interp::exec_block_stmts(const std::vector<StmtPtr>& stmts, const Env& frame, Sink& sink) {
    hoist_block(stmts, frame);
    BlockPlan plan = plan_block(stmts);
    std::map<std::size_t, const BlockPlan::DefPlan*> ready_at;
    for (const auto& d : plan.defs) ready_at[d.last_index] = &d;

    Sink* saved = cur_sink_;
    cur_sink_ = &sink;
    auto restore = [&] { cur_sink_ = saved; };

    for (std::size_t i = 0; i < stmts.size(); ++i) {
        const Stmt& s = *stmts[i];
        switch (s.kind) {
        case StK::Val: {
            Value v = eval(s.expr, frame);
            if (is_dynexc(v)) {
                restore();
                return v;
            }
            MatchOut m = match(s.pattern, v, frame);
            if (m.k == MatchOut::K::Exc) {
                restore();
                return m.exc;
            }
            if (m.k == MatchOut::K::Failure) {
                restore();
                return no_match_error();
            }
            for (auto& [n, val] : m.binds)
                frame->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
            break;
        }
        case StK::Assign: {
            Value v = eval(s.expr, frame);
            if (is_dynexc(v)) {
                restore();
                return v;
            }
            if (!env_assign(frame, s.name, v)) {
                restore();
                return domain_error();
            }
            break;
        }
        case StK::AssignPath: {
            Value rhs = eval(s.expr, frame);
            if (is_dynexc(rhs)) {
                restore();
                return rhs;
            }
            const Binding* b = env_lookup(frame, s.name);
            if (!b || b->kind != Binding::K::Val) {
                restore();
                return domain_error();
            }
            Value updated = path_assign(b->value, s.steps, rhs, frame);
            if (is_dynexc(updated)) {
                restore();
                return updated;
            }
            env_assign(frame, s.name, updated);
            break;
        }
        case StK::PatternAssign: {
            Value v = eval(s.expr, frame);
            if (is_dynexc(v)) {
                restore();
                return v;
            }
            MatchOut m = match(s.pattern, v, frame);
            if (m.k == MatchOut::K::Exc) {
                restore();
                return m.exc;
            }
            if (m.k == MatchOut::K::Failure) {
                restore();
                return no_match_error();
            }
            for (auto& [n, val] : m.binds) env_assign(frame, n, val);
            break;
        }
        case StK::Def: {
            if (s.is_conversion) {
                Value tv = resolve_type(s.conv_target, frame, s.pos);
                if (is_dynexc(tv)) {
                    restore();
                    return tv;
                }
                if (tv->kind != VK::Type) {
                    restore();
                    return domain_error();
                }
                if (pending_convs_) {
                    ObjMember m;
                    m.kind = ObjMember::K::Simple;
                    auto clauses = std::make_shared<std::vector<Clause>>();
                    clauses->push_back(Clause{nullptr, s.def_clauses[0].body});
                    m.clauses = clauses;
                    m.env = env_freeze(frame);
                    pending_convs_->push_back(PendingConv{*tv->type, s.conv_auto, m});
                }
                break;
            }
            auto it = ready_at.find(i);
            if (it != ready_at.end()) {
                const Binding* b = env_lookup(frame, it->second->name);
                if (b && b->kind == Binding::K::Def) {
                    b->def->env = env_freeze(frame);
                    b->def->ready = true;
                }
            }
            break;
        }
        case StK::Typedef: {
            auto it = frame->table.find(s.name);
            if (it != frame->table.end() && it->second.kind == Binding::K::Typedef) {
                it->second.tdef->env = env_freeze(frame);
                it->second.tdef->ready = true;
            }
            break;
        }
        case StK::Import: {
            Value exc = exec_import(s, frame);
            if (exc) {
                restore();
                return exc;
            }
            break;
        }
        case StK::Private:
        case StK::Memoize:
        case StK::Module: break;
        case StK::Yield: {
            Value v = eval(s.expr, frame);
            if (is_dynexc(v)) {
                restore();
                return v;
            }
            Value exc = sink_add(sink, v);
            if (exc) {
                restore();
                return exc;
            }
            break;
        }
        case StK::Control: {
            Value exc = eval_control_stmt(s.expr, frame, sink);
            if (exc) {
                restore();
                return exc;
            }
            break;
        }
        case StK::Pragma: {
            Value exc = exec_pragma(s, frame);
            if (exc) {
                restore();
                return exc;
            }
            break;
        }
        }
    }
    restore();
    return nullptr;
}

// Control expressions in statement position share the enclosing sink and keep
// the linear scope; their value is discarded.
inline Value Interp::eval_control_stmt(const ExprPtr& ep, const Env& env, Sink& sink) {
    const Expr& e = *ep;
    switch (e.kind) {
    case ExK::BlockE: {
        // a nested begin..end statement is value-neutral: its yields stay local
        Env frame = EnvNode::child_of(env);
        Sink local;
        Value exc = exec_block_stmts(e.stmts, frame, local);
        return exc;
    }
    case ExK::Match: {
        Value scrutinee = eval(e.a, env);
        Value r = match_dispatch(scrutinee, e.cases, env, &sink);
        return is_dynexc(r) ? r : nullptr;
    }
    case ExK::TryE: {
        Value r = try_dispatch(e, env, &sink);
        return is_dynexc(r) ? r : nullptr;
    }
    case ExK::WhileLoop:
    case ExK::ForLoop: return eval_loop(e, env, sink);
    default: {
        Value v = eval(ep, env);
        return is_dynexc(v) ? v : nullptr;
    }
    }
}

inline Value Interp::match_dispatch(const Value& scrutinee, const std::vector<MatchCase>& cases,
                                    const Env& env, Sink* stmt_sink) {
    for (const auto& c : cases) {
        MatchOut m = match(c.pattern, scrutinee, env);
        if (m.k == MatchOut::K::Exc) return m.exc;
        if (m.k != MatchOut::K::Success) continue;
        Env frame = EnvNode::child_of(env);
        for (auto& [n, val] : m.binds) frame->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
        if (stmt_sink) {
            Value exc = exec_block_stmts(c.body->stmts, frame, *stmt_sink);
            return exc ? exc : unit();
        }
        return eval_stmts_value(c.body->stmts, frame);
    }
    if (is_dynexc(scrutinee)) return scrutinee; // the value of the match is just e
    return no_match_error();
}

inline Value Interp::try_dispatch(const Expr& e, const Env& env, Sink* stmt_sink) {
    Value body;
    {
        Env frame = EnvNode::child_of(env);
        if (stmt_sink) {
            Value exc = exec_block_stmts(e.a->stmts, frame, *stmt_sink);
            body = exc ? exc : unit();
        } else {
            body = eval_stmts_value(e.a->stmts, frame);
        }
    }
    if (!is_dynexc(body)) return body; // try does not catch persistent exceptions
    Value param = body->exc_param;
    for (const auto& c : e.cases) {
        MatchOut m = match(c.pattern, param, env);
        if (m.k == MatchOut::K::Exc) return m.exc;
        if (m.k != MatchOut::K::Success) continue;
        Env frame = EnvNode::child_of(env);
        for (auto& [n, val] : m.binds) frame->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
        if (stmt_sink) {
            Value exc = exec_block_stmts(c.body->stmts, frame, *stmt_sink);
            return exc ? exc : unit();
        }
        return eval_stmts_value(c.body->stmts, frame);
    }
    return body; // unmatched: the original exception
}

inline Value Interp::eval_loop(const Expr& e, const Env& env, Sink& sink) {
    if (e.kind == ExK::WhileLoop) {
        for (;;) {
            Value c = force(eval(e.a, env));
            if (is_dynexc(c)) return c;
            if (c->kind != VK::Bool) return domain_error();
            if (!c->b) return nullptr;
            Env frame = EnvNode::child_of(env);
            Value exc = exec_block_stmts(e.b->stmts, frame, sink);
            if (exc) return exc;
        }
    }
    // for loop
    Value cur = force(eval(e.a, env));
    if (is_dynexc(cur)) return cur;
    for (;;) {
        Value step = iterate(cur);
        if (is_dynexc(step)) return step;
        if (step->kind != VK::Vector) return domain_error();
        if (step->vec->empty()) return nullptr;
        if (step->vec->size() != 2) return domain_error();
        Value element = (*step->vec)[0];
        cur = (*step->vec)[1];
        MatchOut m = match(e.pattern, element, env);
        if (m.k == MatchOut::K::Exc) return m.exc;
        if (m.k != MatchOut::K::Success) continue; // non-matching elements are skipped
        Env frame = EnvNode::child_of(env);
        for (auto& [n, val] : m.binds) frame->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
        Value exc = exec_block_stmts(e.b->stmts, frame, sink);
        if (exc) return exc;
    }
}

inline Value Interp::exec_import(const Stmt& s, const Env& frame) {
    for (const auto& entry : s.imports) {
        std::vector<std::string> path;
        std::size_t start = 0;
        if (!entry.path.root_anchored) {
            const Binding* b = env_lookup(frame, entry.path.segments[0]);
            if (b && b->kind == Binding::K::Import && b->import_target->member.empty()) {
                path = b->import_target->module_path;
                start = 1;
            }
        }
        for (std::size_t i = start; i < entry.path.segments.size(); ++i) path.push_back(entry.path.segments[i]);

        if (entry.wildcard) {
            auto rec = eng.find_record(path);
            if (!rec) return domain_error();
            for (const auto& member : rec->decl.public_members) {
                auto t = std::make_shared<ImportTarget>();
                t->module_path = path;
                t->member = member;
                frame->table[member] = Binding{Binding::K::Import, nullptr, nullptr, t, nullptr};
            }
            continue;
        }
        auto t = std::make_shared<ImportTarget>();
        if (eng.find_record(path) || eng.is_module_prefix(path)) {
            t->module_path = path;
        } else {
            t->module_path.assign(path.begin(), path.end() - 1);
            t->member = path.back();
        }
        frame->table[entry.bind_name] = Binding{Binding::K::Import, nullptr, nullptr, t, nullptr};
    }
    return nullptr;
}

// ---- defs and functions ------------------------------------------------------------------

inline Value Interp::eval_def_entry(const std::shared_ptr<DefEntry>& entry) {
    if (!entry->ready) return domain_error(); // used before its statement has run
    if (entry->simple) {
        if (entry->memo) {
            auto hit = entry->memo->lookup(comparator(), unit());
            if (hit.exc) return hit.exc;
            if (hit.found) return hit.value;
            Value v = eval(entry->clauses[0].body, entry->env);
            if (!is_dynexc(v)) entry->memo->store(comparator(), unit(), v);
            return v;
        }
        return eval(entry->clauses[0].body, entry->env);
    }
    auto fd = std::make_shared<FunData>();
    fd->clauses = std::shared_ptr<const std::vector<Clause>>(entry, &entry->clauses);
    fd->env = entry->env;
    fd->memo = entry->memo;
    return vfun(fd);
}

inline Value Interp::call_clauses(const std::vector<Clause>& clauses, const Env& env, const Value& arg,
                                  const std::shared_ptr<MemoTable>& memo) {
    if (memo) {
        auto hit = memo->lookup(comparator(), arg);
        if (hit.exc) return hit.exc;
        if (hit.found) return hit.value;
    }
    for (const auto& c : clauses) {
        MatchOut m = match(c.param, arg, env);
        if (m.k == MatchOut::K::Exc) return m.exc;
        if (m.k != MatchOut::K::Success) continue;
        Env frame = EnvNode::child_of(env);
        for (auto& [n, val] : m.binds) frame->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
        Value v = eval(c.body, frame);
        if (memo && !is_dynexc(v)) memo->store(comparator(), arg, v);
        return v;
    }
    return domain_error(); // exhausted clauses of a bundled definition
}

inline Value Interp::make_user_ctor(const std::shared_ptr<UserTypeDef>& tdef) {
    return vnative_fn("typedef:" + tdef->id.name, [tdef](Interp& in, const Value& arg) -> Value {
        if (!tdef->ready) return domain_error();
        for (const auto& c : tdef->clauses) {
            MatchOut m = in.match(c.pattern, arg, tdef->env);
            if (m.k == MatchOut::K::Exc) return m.exc;
            if (m.k != MatchOut::K::Success) continue;
            Env frame = EnvNode::child_of(tdef->env);
            for (auto& [n, val] : m.binds)
                frame->table[n] = Binding{Binding::K::Val, val, nullptr, nullptr, nullptr};
            Value outer = in.eval(c.body, frame);
            if (is_dynexc(outer)) return outer;
            outer = in.deep_force(outer);
            return vuser(tdef->id, arg, outer);
        }
        return domain_error();
    });
}

// ---- objects ---------------------------------------------------------------------------------

inline Value Interp::member_value(const ObjMember& m, const Value& receiver) {
    Env with_this = EnvNode::child_of(m.env);
    with_this->table["this"] = Binding{Binding::K::Val, receiver, nullptr, nullptr, nullptr};
    with_this->frozen = true;
    switch (m.kind) {
    case ObjMember::K::Const: return m.constv;
    case ObjMember::K::Simple: {
        if (m.memo) {
            auto hit = m.memo->lookup(comparator(), unit());
            if (hit.exc) return hit.exc;
            if (hit.found) return hit.value;
            Value v = eval((*m.clauses)[0].body, with_this);
            if (!is_dynexc(v)) m.memo->store(comparator(), unit(), v);
            return v;
        }
        return eval((*m.clauses)[0].body, with_this);
    }
    case ObjMember::K::Fun: {
        auto fd = std::make_shared<FunData>();
        fd->clauses = m.clauses;
        fd->env = with_this;
        fd->memo = m.memo;
        return vfun(fd);
    }
    }
    return domain_error();
}

inline Value Interp::eval_object(const Expr& e, const Env& env) {
    auto data = std::make_shared<ObjData>();
    if (e.a) {
        Value parents = force(eval(e.a, env));
        if (is_dynexc(parents)) return parents;
        if (parents->kind != VK::List && parents->kind != VK::Vector && parents->kind != VK::Set)
            return domain_error();
        auto items = stdlib::elements_of(*this, parents);
        // later parents first; earlier ones overwrite
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
            Value par = force(*it);
            if (is_dynexc(par)) return par;
            const ObjData* pd = nullptr;
            if (par->kind == VK::Obj) pd = par->obj.get();
            else if (par->kind == VK::User && par->user->outer->kind == VK::Obj)
                pd = par->user->outer->obj.get();
            if (!pd) return domain_error();
            for (const auto& [name, member] : pd->table) data->table[name] = member;
            for (const auto& [k, member] : pd->convs_auto) data->convs_auto[k] = member;
            for (const auto& [k, member] : pd->convs_explicit) data->convs_explicit[k] = member;
        }
    }
    Env frame = EnvNode::child_of(env);
    Sink discard;
    discard.k = Sink::K::Discard;
    std::vector<PendingConv> convs;
    std::vector<PendingConv>* saved = pending_convs_;
    pending_convs_ = &convs;
    Value exc = exec_block_stmts(e.stmts, frame, discard);
    pending_convs_ = saved;
    if (exc) return exc;

    for (const auto& [name, binding] : frame->table) {
        if (binding.kind != Binding::K::Def) continue;
        const auto& entry = binding.def;
        ObjMember m;
        m.kind = entry->simple ? ObjMember::K::Simple : ObjMember::K::Fun;
        m.clauses = std::shared_ptr<const std::vector<Clause>>(entry, &entry->clauses);
        m.env = entry->env;
        m.memo = entry->memo;
        data->table[name] = m;
    }
    for (const auto& c : convs) {
        if (c.auto_conv) data->convs_auto[c.target.display()] = c.member;
        else data->convs_explicit[c.target.display()] = c.member;
    }
    return vobj(data);
}

inline Value Interp::record_update(const Value& raw_u, const std::string& m, const Value& t) {
    Value u = force(raw_u);
    if (is_dynexc(u)) return u;
    std::string putback = m + "_putback_";
    if (has_member(u, putback)) {
        Value f = send(u, putback);
        if (is_dynexc(f)) return f;
        return apply(f, t);
    }
    const ObjData* obj = nullptr;
    if (u->kind == VK::Obj) obj = u->obj.get();
    else if (u->kind == VK::User && u->user->outer->kind == VK::Obj) obj = u->user->outer->obj.get();
    if (!obj) return domain_error();
    auto data = std::make_shared<ObjData>(*obj);
    ObjMember member;
    member.kind = ObjMember::K::Const;
    member.constv = t;
    data->table[m] = member;
    return vobj(data);
}

// ---- lenses ----------------------------------------------------------------------------------------

inline Value Interp::path_get_step(const Value& cur, const PathStep& step, const Value& evaluated_arg) {
    switch (step.kind) {
    case PathStep::K::Message: return send(cur, step.name);
    case PathStep::K::MessageArg: {
        Value f = send(cur, step.name);
        if (is_dynexc(f)) return f;
        return apply(f, evaluated_arg);
    }
    case PathStep::K::LensApp: {
        Value l = evaluated_arg;
        if (l->kind != VK::Lens) return domain_error();
        return apply(l->lens->get, cur);
    }
    }
    return domain_error();
}

// Putback over evaluated steps: forward values, then backward updates.
inline Value Interp::path_assign(const Value& root, const std::vector<PathStep>& steps, const Value& t,
                                 const Env& env) {
    if (steps.empty()) return t; // the identity access path
    std::vector<Value> args(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].kind == PathStep::K::Message) continue;
        Value a = eval(steps[i].arg, env);
        if (is_dynexc(a)) return a;
        a = force(a);
        if (is_dynexc(a)) return a;
        args[i] = a;
    }
    std::vector<Value> vals(steps.size());
    vals[0] = root;
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        Value next = path_get_step(vals[i], steps[i], args[i]);
        if (is_dynexc(next)) return next;
        vals[i + 1] = next;
    }
    Value cur = t;
    for (std::size_t i = steps.size(); i-- > 0;) {
        const PathStep& st = steps[i];
        switch (st.kind) {
        case PathStep::K::Message: cur = record_update(vals[i], st.name, cur); break;
        case PathStep::K::MessageArg: {
            std::string pb = st.name + "_putback_";
            if (!has_member(vals[i], pb)) return domain_error();
            Value f = send(vals[i], pb);
            if (is_dynexc(f)) return f;
            Value f2 = apply(f, args[i]);
            if (is_dynexc(f2)) return f2;
            cur = apply(f2, cur);
            break;
        }
        case PathStep::K::LensApp: {
            if (args[i]->kind != VK::Lens) return domain_error();
            Value p1 = apply(args[i]->lens->put, vals[i]);
            if (is_dynexc(p1)) return p1;
            cur = apply(p1, cur);
            break;
        }
        }
        if (is_dynexc(cur)) return cur;
    }
    return cur;
}

inline Value Interp::make_path_lens(const std::string& param, const std::vector<PathStep>& steps,
                                    const Env& env) {
    Env frozen = env_freeze(env);
    auto steps_copy = std::make_shared<std::vector<PathStep>>(steps);
    (void)param;
    Value get = vnative_fn("lens-get", [steps_copy, frozen](Interp& in, const Value& u) -> Value {
        Value cur = u;
        for (const auto& st : *steps_copy) {
            Value arg;
            if (st.kind != PathStep::K::Message) {
                arg = in.force(in.eval(st.arg, frozen));
                if (is_dynexc(arg)) return arg;
            }
            cur = in.path_get_step(cur, st, arg);
            if (is_dynexc(cur)) return cur;
        }
        return cur;
    });
    Value put = vnative_fn("lens-put", [steps_copy, frozen](Interp& in, const Value& u) -> Value {
        return vnative_fn("lens-put2", [steps_copy, frozen, u](Interp& in2, const Value& t) -> Value {
            return in2.path_assign(u, *steps_copy, t, frozen);
        });
    });
    return vlens(get, put);
}

// ---- collection protocol -----------------------------------------------------------------------------

inline Value Interp::iterate(const Value& raw) {
    Value v = force(raw);
    if (is_dynexc(v)) return v;
    switch (v->kind) {
    case VK::List:
        if (!v->list) return unit();
        return vvector({v->list->head, vlist(v->list->tail)});
    case VK::Vector: {
        if (v->vec->empty()) return unit();
        std::vector<Value> rest(v->vec->begin() + 1, v->vec->end());
        return vvector({(*v->vec)[0], vvector(std::move(rest))});
    }
    case VK::Set: {
        if (!v->tree) return unit();
        const TreeNode* m = tree::leftmost(v->tree);
        return vvector({m->key, vset(tree::remove_leftmost(v->tree))});
    }
    case VK::Map: {
        if (!v->tree) return unit();
        const TreeNode* m = tree::leftmost(v->tree);
        return vvector({vvector({m->key, m->val}), vmap(tree::remove_leftmost(v->tree))});
    }
    case VK::Str: {
        if (v->s.empty()) return unit();
        return vvector({stdlib::str1(v->s[0]), vstr(v->s.substr(1))});
    }
    case VK::Obj:
    case VK::User: {
        if (!has_member(v, "iterate_")) return domain_error();
        Value r = force(send(v, "iterate_"));
        if (is_dynexc(r)) return r;
        if (r->kind != VK::Vector || (!r->vec->empty() && r->vec->size() != 2)) return domain_error();
        return r;
    }
    default: return domain_error();
    }
}

inline Value Interp::min_max_of(const Value& coll, bool want_min) {
    Value cur = coll;
    Value best;
    for (;;) {
        Value step = iterate(cur);
        if (is_dynexc(step)) return step;
        if (step->kind != VK::Vector) return domain_error();
        if (step->vec->empty()) break;
        if (step->vec->size() != 2) return domain_error();
        Value item = force((*step->vec)[0]);
        if (is_dynexc(item)) return item;
        if (!best) {
            best = item;
        } else {
            Cmp c = compare(item, best);
            if (c.exc) return c.exc;
            if (c.unrelated) return unrelated_error();
            if (want_min ? c.sign < 0 : c.sign > 0) best = item;
        }
        cur = (*step->vec)[1];
    }
    if (!best) return domain_error(); // empty collection
    return best;
}

inline Value Interp::choose_from(const Value& coll) {
    Value step = iterate(coll);
    if (is_dynexc(step)) return step;
    if (step->kind != VK::Vector) return domain_error();
    if (step->vec->empty()) return domain_error(); // choosing from nothing
    return (*step->vec)[0];
}

inline Value Interp::builtin_collector_add(const Value& raw, const Value& item) {
    Value coll = force(raw);
    if (is_dynexc(coll)) return coll;
    switch (coll->kind) {
    case VK::List: {
        auto items = stdlib::elements_of(*this, coll);
        items.push_back(item);
        return stdlib::list_of(items);
    }
    case VK::Vector: {
        auto items = *coll->vec;
        items.push_back(item);
        return vvector(std::move(items));
    }
    case VK::Set: {
        Value x = force(item);
        if (is_dynexc(x)) return x;
        try {
            return vset(tree::insert(coll->tree, x, nullptr, comparator(), false));
        } catch (const CmpFail& f) {
            return f.exc;
        }
    }
    case VK::Map: {
        Value p = force(item);
        if (is_dynexc(p)) return p;
        if (p->kind != VK::Vector || p->vec->size() != 2) return domain_error();
        Value k = force((*p->vec)[0]);
        if (is_dynexc(k)) return k;
        try {
            return vmap(tree::insert(coll->tree, k, (*p->vec)[1], comparator(), true));
        } catch (const CmpFail& f) {
            return f.exc;
        }
    }
    case VK::Str: {
        Value s = force(item);
        if (is_dynexc(s)) return s;
        if (s->kind != VK::Str) return domain_error();
        return vstr(coll->s + s->s);
    }
    case VK::Obj:
    case VK::User: {
        Value add = send(coll, "collector_add_");
        if (is_dynexc(add)) return add;
        return apply(add, item);
    }
    default: return domain_error();
    }
}

// ---- modules ----------------------------------------------------------------------------------------------

inline Value Interp::module_send(const std::vector<std::string>& path, const std::string& msg) {
    auto rec = eng.find_record(path);
    if (rec && rec->decl.all_members.count(msg)) {
        bool hidden = rec->decl.private_names.count(msg) && current_module != path;
        if (!hidden) {
            Value exc = ensure_loaded(rec);
            if (exc) return exc;
            const Binding* b = env_lookup(rec->members, msg);
            if (!b) return invalid_message(vmodule(path), msg);
            switch (b->kind) {
            case Binding::K::Val: return b->value;
            case Binding::K::Def: return eval_def_entry(b->def);
            case Binding::K::Typedef: return make_user_ctor(b->tdef);
            case Binding::K::Import: {
                const ImportTarget& t = *b->import_target;
                if (t.member.empty()) return vmodule(t.module_path);
                return module_send(t.module_path, t.member);
            }
            }
        }
    }
    std::vector<std::string> sub = path;
    sub.push_back(msg);
    if (eng.find_record(sub) || eng.is_module_prefix(sub)) return vmodule(sub);
    return invalid_message(vmodule(path), msg);
}

inline Value Interp::ensure_loaded(const std::shared_ptr<ModuleRec>& rec) {
    for (;;) {
        std::unique_lock<std::mutex> lk(rec->m);
        switch (rec->st) {
        case ModuleRec::St::Up: return nullptr;
        case ModuleRec::St::Failed: return vdynexc(rec->failure->exc_param);
        case ModuleRec::St::Down: {
            rec->st = ModuleRec::St::Loading;
            rec->loader.store(std::this_thread::get_id());
            lk.unlock();
            Interp sub(eng);
            sub.current_module = rec->decl.path;
            Env frame = EnvNode::child_of(nullptr);
            Sink discard;
            discard.k = Sink::K::Discard;
            Value exc = sub.exec_block_stmts(rec->decl.stmts, frame, discard);
            lk.lock();
            rec->members = frame;
            if (exc) {
                rec->st = ModuleRec::St::Failed;
                rec->failure = exc;
            } else {
                rec->st = ModuleRec::St::Up;
            }
            lk.unlock();
            rec->cv.notify_all();
            continue;
        }
        case ModuleRec::St::Loading: {
            if (rec->loader.load() == std::this_thread::get_id()) return deadlock_error();
            lk.unlock();
            auto token = eng.begin_wait(rec.get());
            if (!token) return deadlock_error();
            lk.lock();
            rec->cv.wait(lk, [&] { return rec->st != ModuleRec::St::Loading || *token->dead; });
            bool dead = rec->st == ModuleRec::St::Loading && *token->dead;
            lk.unlock();
            eng.end_wait();
            if (dead) return deadlock_error();
            continue;
        }
        }
    }
}

inline Value Interp::run_test_module(const std::vector<std::string>& path) {
    auto rec = eng.find_record(path);
    if (!rec) return domain_error();
    Interp sub(eng);
    sub.current_module = path;
    return sub.ensure_loaded(rec);
}

// ---- pragmas ------------------------------------------------------------------------------------------------

inline Value Interp::exec_pragma(const Stmt& s, const Env& env) {
    if (!eng.pragmas_enabled()) return nullptr;
    PragmaEvent ev;
    ev.pos = s.pos;
    ev.module_path = current_module;
    switch (s.pragma_kind) {
    case PragmaKind::Log: {
        ev.kind = "log";
        Value v = eval(s.expr, env);
        ev.rendered = render(*this, v, 0, /*force_thunks=*/false);
        break;
    }
    case PragmaKind::Print: {
        ev.kind = "print";
        Value v = eval(s.expr, env);
        if (!is_dynexc(v)) v = deep_force(v);
        ev.rendered = render(*this, v);
        break;
    }
    case PragmaKind::Profile: {
        ev.kind = "profile";
        auto t0 = std::chrono::steady_clock::now();
        Value v = eval(s.expr, env);
        auto ms = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0);
        ev.rendered = render(*this, v) + " [" + std::to_string(ms.count() / 1000.0) + " ms]";
        break;
    }
    case PragmaKind::Assert: {
        ev.kind = "assert";
        Value v = force(eval(s.expr, env));
        ev.ok = v->kind == VK::Bool && v->b;
        ev.rendered = render(*this, v);
        break;
    }
    case PragmaKind::Catch: {
        ev.kind = "catch";
        Value v = eval(s.expr, env);
        v = force(v);
        ev.ok = false;
        if (is_exc(v)) {
            MatchOut m = match(s.pragma_pattern, v->exc_param, env);
            ev.ok = m.k == MatchOut::K::Success;
        }
        ev.rendered = render(*this, v);
        break;
    }
    }
    eng.log(ev.pos.str() + " " + ev.kind + (ev.ok ? "" : " FAILED") + ": " + ev.rendered);
    eng.record_pragma(std::move(ev));
    return nullptr;
}

} // namespace babel17
