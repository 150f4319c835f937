#pragma once

#include "babel17/ast.hpp"
#include "babel17/bigint.hpp"
#include "babel17/interval.hpp"
#include "babel17/unicode.hpp"

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <string>
#include <vector>

namespace babel17 {

class Interp;
class Engine;

enum class VK {
    Int,
    Real,
    Bool,
    Str,
    List,
    Vector,
    Set,
    Map,
    CExpr,
    Obj,
    Fun,
    NativeFn,
    PersistentExc,
    DynamicExc,
    Type,
    Module,
    Lens,
    Native,
    Thunk,
    User,
};

struct ValueRep;
using Value = std::shared_ptr<const ValueRep>;

// ---- environments ------------------------------------------------------------

struct DefEntry;
struct UserTypeDef;

struct ImportTarget {
    std::vector<std::string> module_path; // module owning the member, or the module itself
    std::string member;                   // empty: the module/type itself
    bool is_type = false;
};

struct Binding {
    enum class K { Val, Def, Import, Typedef };
    K kind = K::Val;
    Value value;
    std::shared_ptr<DefEntry> def;
    std::shared_ptr<const ImportTarget> import_target;
    std::shared_ptr<UserTypeDef> tdef;
};

struct EnvNode;
using Env = std::shared_ptr<EnvNode>;

struct EnvNode {
    Env parent;
    std::map<std::string, Binding> table;
    bool frozen = false;

    static Env child_of(Env parent) {
        auto n = std::make_shared<EnvNode>();
        n->parent = std::move(parent);
        return n;
    }
};

inline const Binding* env_lookup(const Env& env, const std::string& name) {
    for (const EnvNode* n = env.get(); n; n = n->parent.get()) {
        auto it = n->table.find(name);
        if (it != n->table.end()) return &it->second;
    }
    return nullptr;
}

// Rebinds the innermost occurrence. Assigning to a variable captured in a
// frozen closure environment rebinds a copy local to the current activation
// (at its root frame), leaving the captured binding untouched.
inline bool env_assign(const Env& env, const std::string& name, Value v) {
    EnvNode* activation_root = nullptr;
    for (EnvNode* n = env.get(); n; n = n->parent.get()) {
        if (!n->frozen) activation_root = n;
        auto it = n->table.find(name);
        if (it != n->table.end()) {
            if (!n->frozen) {
                it->second = Binding{Binding::K::Val, std::move(v), nullptr, nullptr, nullptr};
                return true;
            }
            if (!activation_root) return false;
            activation_root->table[name] =
                Binding{Binding::K::Val, std::move(v), nullptr, nullptr, nullptr};
            return true;
        }
    }
    return false;
}

// Closure capture: linear variables freeze to their current values.
inline Env env_freeze(const Env& env) {
    if (!env) return env;
    if (env->frozen) return env;
    auto n = std::make_shared<EnvNode>();
    n->parent = env_freeze(env->parent);
    n->table = env->table;
    n->frozen = true;
    return n;
}

// ---- closures, memo tables, user types ----------------------------------------

class MemoTable; // defined in interp.hpp (needs value ordering)

struct DefEntry {
    std::string name;
    bool simple = false;
    bool is_conversion = false;
    std::vector<Clause> clauses;
    int memo_kind = 0; // 0 none, 1 strong, 2 weak
    std::shared_ptr<MemoTable> memo;
    Env env;          // the def's positional environment; set when its statement runs
    bool ready = false;
};

struct FunData {
    std::shared_ptr<const std::vector<Clause>> clauses;
    Env env;
    std::shared_ptr<MemoTable> memo;
};

struct NativeFnData {
    std::function<Value(Interp&, const Value&)> fn;
    std::string name;
};

// ---- builtin and user type identities -----------------------------------------

enum class BT { Int, Real, Bool, String, List, Vect, Set, Map, Cexp, Obj, Fun, Exc, Type, Module, Lens, Native };

inline const char* bt_name(BT t) {
    switch (t) {
    case BT::Int: return "int";
    case BT::Real: return "real";
    case BT::Bool: return "bool";
    case BT::String: return "string";
    case BT::List: return "list";
    case BT::Vect: return "vect";
    case BT::Set: return "set";
    case BT::Map: return "map";
    case BT::Cexp: return "cexp";
    case BT::Obj: return "obj";
    case BT::Fun: return "fun";
    case BT::Exc: return "exc";
    case BT::Type: return "type";
    case BT::Module: return "module_";
    case BT::Lens: return "lens_";
    case BT::Native: return "native_";
    }
    return "?";
}

struct TypeIdent {
    bool builtin = true;
    BT bt = BT::Obj;
    std::vector<std::string> module_path; // user types
    std::string name;

    std::string display() const {
        if (builtin) return bt_name(bt);
        std::string s;
        for (const auto& seg : module_path) s += seg + ".";
        return s + name;
    }
    bool operator==(const TypeIdent& o) const {
        if (builtin != o.builtin) return false;
        if (builtin) return bt == o.bt;
        return module_path == o.module_path && name == o.name;
    }
};

struct UserTypeDef {
    TypeIdent id;
    std::vector<TypedefClause> clauses;
    Env env; // module environment, set while loading
    bool ready = false;
};

// ---- collections ---------------------------------------------------------------

struct ListNode {
    Value head;
    std::shared_ptr<const ListNode> tail;
    std::size_t count = 0;
};
using ListPtr = std::shared_ptr<const ListNode>;

struct TreeNode; // ordtree.hpp
using TreePtr = std::shared_ptr<const TreeNode>;

// ---- the rest of the value universe ---------------------------------------------

struct CExprData {
    std::string ctor;  // folded
    std::string shown; // as written
    Value param;
};

struct ObjMember {
    enum class K { Const, Simple, Fun };
    K kind = K::Const;
    Value constv;
    std::shared_ptr<const std::vector<Clause>> clauses;
    Env env;
    std::shared_ptr<MemoTable> memo;
};

struct ObjData {
    std::map<std::string, ObjMember> table;
    std::map<std::string, ObjMember> convs_auto;     // keyed by type identity display
    std::map<std::string, ObjMember> convs_explicit;
};

struct LensData {
    Value get;
    Value put;
};

struct ModuleRefData {
    std::vector<std::string> path;
};

struct UserData {
    TypeIdent type;
    Value inner;
    Value outer;
};

struct Thunk {
    std::mutex m;
    std::condition_variable cv;
    enum class St { Pending, Running, Done };
    St st = St::Pending;
    std::thread::id owner; // while Running
    bool concurrent = false;
    ExprPtr body;
    Env env;
    Value result;
};

struct ValueRep {
    VK kind = VK::Bool;
    Int i;
    Interval r;
    bool b = false;
    std::u32string s;
    ListPtr list;
    std::shared_ptr<const std::vector<Value>> vec;
    TreePtr tree;
    std::shared_ptr<const CExprData> cexpr;
    std::shared_ptr<const ObjData> obj;
    std::shared_ptr<const FunData> fun;
    std::shared_ptr<const NativeFnData> nfn;
    Value exc_param;
    std::shared_ptr<const TypeIdent> type;
    std::shared_ptr<const ModuleRefData> module;
    std::shared_ptr<const LensData> lens;
    std::shared_ptr<Thunk> thunk;
    std::shared_ptr<const UserData> user;
};

// ---- factories -------------------------------------------------------------------

inline Value mk(VK k) {
    auto v = std::make_shared<ValueRep>();
    v->kind = k;
    return v;
}

inline ValueRep& vmut(const Value& v) { return const_cast<ValueRep&>(*v); }

inline Value vint(Int n) {
    auto v = mk(VK::Int);
    vmut(v).i = std::move(n);
    return v;
}
inline Value vint(long n) { return vint(Int(n)); }

inline Value vreal(Interval r) {
    auto v = mk(VK::Real);
    vmut(v).r = r;
    return v;
}

inline Value vbool(bool b) {
    auto v = mk(VK::Bool);
    vmut(v).b = b;
    return v;
}

inline Value vstr(std::u32string s) {
    auto v = mk(VK::Str);
    vmut(v).s = std::move(s);
    return v;
}

inline Value vlist(ListPtr l) {
    auto v = mk(VK::List);
    vmut(v).list = std::move(l);
    return v;
}

inline ListPtr list_cons(Value h, ListPtr t) {
    auto n = std::make_shared<ListNode>();
    n->head = std::move(h);
    n->count = (t ? t->count : 0) + 1;
    n->tail = std::move(t);
    return n;
}

inline Value vvector(std::vector<Value> items) {
    auto v = mk(VK::Vector);
    vmut(v).vec = std::make_shared<const std::vector<Value>>(std::move(items));
    return v;
}

inline Value unit() { return vvector({}); }

inline Value vset(TreePtr t) {
    auto v = mk(VK::Set);
    vmut(v).tree = std::move(t);
    return v;
}

inline Value vmap(TreePtr t) {
    auto v = mk(VK::Map);
    vmut(v).tree = std::move(t);
    return v;
}

inline Value vcexpr(std::string folded, std::string shown, Value param) {
    auto v = mk(VK::CExpr);
    auto d = std::make_shared<CExprData>();
    d->ctor = std::move(folded);
    d->shown = std::move(shown);
    d->param = std::move(param);
    vmut(v).cexpr = d;
    return v;
}

inline Value vobj(std::shared_ptr<const ObjData> data) {
    auto v = mk(VK::Obj);
    vmut(v).obj = std::move(data);
    return v;
}

inline const Value& nil_object() {
    static const Value v = vobj(std::make_shared<const ObjData>());
    return v;
}

inline Value vfun(std::shared_ptr<const FunData> f) {
    auto v = mk(VK::Fun);
    vmut(v).fun = std::move(f);
    return v;
}

inline Value vnative_fn(std::string name, std::function<Value(Interp&, const Value&)> fn) {
    auto v = mk(VK::NativeFn);
    auto d = std::make_shared<NativeFnData>();
    d->fn = std::move(fn);
    d->name = std::move(name);
    vmut(v).nfn = d;
    return v;
}

inline Value vpersistent(Value param) {
    auto v = mk(VK::PersistentExc);
    vmut(v).exc_param = std::move(param);
    return v;
}

inline Value vdynexc(Value param) {
    auto v = mk(VK::DynamicExc);
    vmut(v).exc_param = std::move(param);
    return v;
}

inline Value vtype(TypeIdent id) {
    auto v = mk(VK::Type);
    vmut(v).type = std::make_shared<const TypeIdent>(std::move(id));
    return v;
}

inline Value vmodule(std::vector<std::string> path) {
    auto v = mk(VK::Module);
    auto d = std::make_shared<ModuleRefData>();
    d->path = std::move(path);
    vmut(v).module = d;
    return v;
}

inline Value vlens(Value get, Value put) {
    auto v = mk(VK::Lens);
    auto d = std::make_shared<LensData>();
    d->get = std::move(get);
    d->put = std::move(put);
    vmut(v).lens = d;
    return v;
}

inline Value vthunk(std::shared_ptr<Thunk> t) {
    auto v = mk(VK::Thunk);
    vmut(v).thunk = std::move(t);
    return v;
}

inline Value vuser(TypeIdent type, Value inner, Value outer) {
    auto v = mk(VK::User);
    auto d = std::make_shared<UserData>();
    d->type = std::move(type);
    d->inner = std::move(inner);
    d->outer = std::move(outer);
    vmut(v).user = d;
    return v;
}

inline bool is_dynexc(const Value& v) { return v && v->kind == VK::DynamicExc; }
inline bool is_exc(const Value& v) {
    return v && (v->kind == VK::DynamicExc || v->kind == VK::PersistentExc);
}

// Common exception parameters.
inline Value cx(const char* shown) { return vcexpr(uni::fold_word(shown), shown, nil_object()); }
inline Value domain_error() { return vdynexc(cx("DomainError")); }
inline Value no_match_error() { return vdynexc(cx("NoMatch")); }
inline Value unrelated_error() { return vdynexc(cx("Unrelated")); }
inline Value deadlock_error() { return vdynexc(cx("DeadLock")); }

} // namespace babel17
