#pragma once

#include "babel17/value.hpp"

#include <functional>

namespace babel17 {

// Persistent weight-balanced tree (Adams-style) keyed by the built-in order.
// The comparator can fail (Unrelated, or a user compare_ raising); failures
// surface as CmpFail and are converted to values at the stdlib boundary.

struct CmpFail {
    Value exc; // a DynamicException value
};

using CmpFn = std::function<int(const Value&, const Value&)>;

struct TreeNode {
    Value key;
    Value val; // maps only; null for sets
    TreePtr left, right;
    std::size_t size = 1;
};

namespace tree {

inline std::size_t size(const TreePtr& t) { return t ? t->size : 0; }

inline TreePtr node(Value k, Value v, TreePtr l, TreePtr r) {
    auto n = std::make_shared<TreeNode>();
    n->key = std::move(k);
    n->val = std::move(v);
    n->size = 1 + size(l) + size(r);
    n->left = std::move(l);
    n->right = std::move(r);
    return n;
}

inline constexpr std::size_t delta = 3;

inline TreePtr rotate_single_left(const TreePtr& t) {
    const TreePtr& r = t->right;
    return node(r->key, r->val, node(t->key, t->val, t->left, r->left), r->right);
}

inline TreePtr rotate_single_right(const TreePtr& t) {
    const TreePtr& l = t->left;
    return node(l->key, l->val, l->left, node(t->key, t->val, l->right, t->right));
}

inline TreePtr rotate_double_left(const TreePtr& t) {
    const TreePtr& r = t->right;
    const TreePtr& rl = r->left;
    return node(rl->key, rl->val, node(t->key, t->val, t->left, rl->left),
                node(r->key, r->val, rl->right, r->right));
}

inline TreePtr rotate_double_right(const TreePtr& t) {
    const TreePtr& l = t->left;
    const TreePtr& lr = l->right;
    return node(lr->key, lr->val, node(l->key, l->val, l->left, lr->left),
                node(t->key, t->val, lr->right, t->right));
}

inline TreePtr balance(const TreePtr& t) {
    std::size_t ln = size(t->left), rn = size(t->right);
    if (ln + rn <= 1) return t;
    if (rn > delta * ln) {
        std::size_t rln = size(t->right->left), rrn = size(t->right->right);
        return rln < rrn ? rotate_single_left(t) : rotate_double_left(t);
    }
    if (ln > delta * rn) {
        std::size_t lln = size(t->left->left), lrn = size(t->left->right);
        return lrn < lln ? rotate_single_right(t) : rotate_double_right(t);
    }
    return t;
}

// Inserts or replaces. `replace` false keeps an existing equal entry (sets).
inline TreePtr insert(const TreePtr& t, const Value& k, const Value& v, const CmpFn& cmp,
                      bool replace) {
    if (!t) return node(k, v, nullptr, nullptr);
    int c = cmp(k, t->key);
    if (c == 0) {
        if (!replace) return t;
        return node(k, v, t->left, t->right);
    }
    if (c < 0) return balance(node(t->key, t->val, insert(t->left, k, v, cmp, replace), t->right));
    return balance(node(t->key, t->val, t->left, insert(t->right, k, v, cmp, replace)));
}

inline const TreeNode* find(const TreePtr& t, const Value& k, const CmpFn& cmp) {
    const TreeNode* n = t.get();
    while (n) {
        int c = cmp(k, n->key);
        if (c == 0) return n;
        n = c < 0 ? n->left.get() : n->right.get();
    }
    return nullptr;
}

inline const TreeNode* leftmost(const TreePtr& t) {
    const TreeNode* n = t.get();
    while (n && n->left) n = n->left.get();
    return n;
}

inline TreePtr remove_leftmost(const TreePtr& t) {
    if (!t->left) return t->right;
    return balance(node(t->key, t->val, remove_leftmost(t->left), t->right));
}

inline TreePtr glue(const TreePtr& l, const TreePtr& r) {
    if (!l) return r;
    if (!r) return l;
    const TreeNode* m = leftmost(r);
    return balance(node(m->key, m->val, l, remove_leftmost(r)));
}

inline TreePtr remove(const TreePtr& t, const Value& k, const CmpFn& cmp) {
    if (!t) return t;
    int c = cmp(k, t->key);
    if (c == 0) return glue(t->left, t->right);
    if (c < 0) return balance(node(t->key, t->val, remove(t->left, k, cmp), t->right));
    return balance(node(t->key, t->val, t->left, remove(t->right, k, cmp)));
}

inline void in_order(const TreePtr& t, const std::function<void(const TreeNode&)>& f) {
    if (!t) return;
    in_order(t->left, f);
    f(*t);
    in_order(t->right, f);
}

inline std::vector<const TreeNode*> entries(const TreePtr& t) {
    std::vector<const TreeNode*> out;
    out.reserve(size(t));
    in_order(t, [&](const TreeNode& n) { out.push_back(&n); });
    return out;
}

} // namespace tree
} // namespace babel17
