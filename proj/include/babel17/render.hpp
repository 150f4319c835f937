#pragma once

#include "babel17/ast_print.hpp"
#include "babel17/builtins.hpp"
#include "babel17/interp.hpp"

namespace babel17 {

// Canonical rendering: lists [..], vectors (..), sets {..} ascending, maps
// {k -> v, ..} ascending by key, strings quoted with section 3 escapes,
// cexprs `Name param`. Rendering forces thunks.
inline std::string render(Interp& in, const Value& raw, int depth = 0, bool force_thunks = true);

inline std::string render_atomic(Interp& in, const Value& raw, int depth, bool force_thunks = true) {
    Value v = force_thunks ? in.force(raw) : raw;
    if (v && v->kind == VK::Thunk) return "<lazy>";
    std::string s = render(in, v, depth, force_thunks);
    if (v->kind == VK::CExpr && v->cexpr->param->kind != VK::Obj) return "(" + s + ")";
    if (v->kind == VK::PersistentExc) return "(" + s + ")";
    return s;
}

inline std::string render(Interp& in, const Value& raw, int depth, bool force_thunks) {
    if (!raw) return "?";
    if (depth > 24) return "...";
    if (!force_thunks && raw->kind == VK::Thunk) return "<lazy>";
    Value v = in.force(raw);
    switch (v->kind) {
    case VK::Int: return v->i.to_string();
    case VK::Real: return render_interval(v->r);
    case VK::Bool: return v->b ? "true" : "false";
    case VK::Str: return escape_string(v->s);
    case VK::List: {
        std::string out = "[";
        bool first = true;
        for (const ListNode* n = v->list.get(); n; n = n->tail.get()) {
            if (!first) out += ", ";
            first = false;
            out += render(in, n->head, depth + 1, force_thunks);
        }
        return out + "]";
    }
    case VK::Vector: {
        if (v->vec->empty()) return "()";
        std::string out = "(";
        for (std::size_t i = 0; i < v->vec->size(); ++i) {
            if (i) out += ", ";
            out += render(in, (*v->vec)[i], depth + 1, force_thunks);
        }
        if (v->vec->size() == 1) out += ",";
        return out + ")";
    }
    case VK::Set: {
        std::string out = "{";
        bool first = true;
        for (const TreeNode* n : tree::entries(v->tree)) {
            if (!first) out += ", ";
            first = false;
            out += render(in, n->key, depth + 1, force_thunks);
        }
        return out + "}";
    }
    case VK::Map: {
        if (!v->tree) return "{->}";
        std::string out = "{";
        bool first = true;
        for (const TreeNode* n : tree::entries(v->tree)) {
            if (!first) out += ", ";
            first = false;
            out += render(in, n->key, depth + 1, force_thunks) + " -> " + render(in, n->val, depth + 1, force_thunks);
        }
        return out + "}";
    }
    case VK::CExpr: {
        Value param = in.force(v->cexpr->param);
        if (param->kind == VK::Obj && param->obj->table.empty()) return v->cexpr->shown; // nil parameter
        return v->cexpr->shown + " " + render_atomic(in, param, depth + 1, force_thunks);
    }
    case VK::Obj: {
        if (v->obj->table.empty()) return "nil";
        std::string out = "{";
        bool first = true;
        for (const auto& [name, member] : v->obj->table) {
            if (!first) out += ", ";
            first = false;
            out += name + " = ";
            Value m = in.member_value(member, v);
            out += is_dynexc(m) ? "<error>" : render(in, m, depth + 1, force_thunks);
        }
        return out + "}";
    }
    case VK::Fun:
    case VK::NativeFn: return "<fun>";
    case VK::PersistentExc: return "exception " + render_atomic(in, v->exc_param, depth + 1, force_thunks);
    case VK::DynamicExc: return "<dynamic exception " + render(in, v->exc_param, depth + 1, force_thunks) + ">";
    case VK::Type: return "(: " + v->type->display() + ")";
    case VK::Module: {
        std::string out = "<module ";
        for (std::size_t i = 0; i < v->module->path.size(); ++i) {
            if (i) out += ".";
            out += v->module->path[i];
        }
        return out + ">";
    }
    case VK::Lens: return "<lens>";
    case VK::Native: return "<native>";
    case VK::User: return render(in, v->user->outer, depth + 1, force_thunks);
    case VK::Thunk: return "?";
    }
    return "?";
}

} // namespace babel17
