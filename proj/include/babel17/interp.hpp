#pragma once

#include "babel17/engine.hpp"
#include "babel17/ordtree.hpp"
#include "babel17/value.hpp"

#include <optional>

namespace babel17 {

// Argument-keyed memo table, ordered by the built-in partial order. Weak
// tables are bounded and evict oldest-first.
class MemoTable {
public:
    explicit MemoTable(bool weak) : weak_(weak) {}

    struct Hit {
        bool found = false;
        Value value; // found value, or a dynamic exception from key comparison
        Value exc;
    };

    Hit lookup(const CmpFn& cmp, const Value& key) {
        std::lock_guard<std::mutex> lock(m_);
        try {
            for (const auto& [k, v] : entries_)
                if (cmp(key, k) == 0) return {true, v, nullptr};
        } catch (const CmpFail& f) {
            return {false, nullptr, f.exc};
        }
        return {};
    }

    void store(const CmpFn& cmp, const Value& key, const Value& value) {
        std::lock_guard<std::mutex> lock(m_);
        try {
            for (auto& [k, v] : entries_)
                if (cmp(key, k) == 0) return;
            entries_.emplace_back(key, value);
            if (weak_ && entries_.size() > weak_capacity) entries_.erase(entries_.begin());
        } catch (const CmpFail&) {
            // the lookup already surfaced the comparison failure
        }
    }

    static constexpr std::size_t weak_capacity = 4096;

private:
    bool weak_;
    std::mutex m_;
    std::vector<std::pair<Value, Value>> entries_;
};

class Interp {
public:
    explicit Interp(Engine& engine) : eng(engine) {}

    Engine& eng;
    std::vector<std::string> current_module;

    // ---- yielded-value sinks -------------------------------------------------

    struct Sink {
        enum class K { Default, User, Discard };
        K k = K::Default;
        std::vector<Value> acc; // Default
        Value user;             // User: the current collector
    };

    // ---- runtime core -----------------------------------------------------------

    Value force(Value v);
    Value deep_force(const Value& v);
    Value send(const Value& target, const std::string& msg);
    Value apply(const Value& fn, const Value& arg);
    bool has_member(const Value& v, const std::string& msg);
    Value invalid_message(const Value& target, const std::string& msg);

    // ---- the built-in order ------------------------------------------------------

    struct Cmp {
        int sign = 0;
        bool unrelated = false;
        Value exc; // dynamic exception raised while comparing
        bool ok() const { return !unrelated && !exc; }
    };
    Cmp compare(const Value& a, const Value& b);
    CmpFn comparator();

    // ---- conversions / types --------------------------------------------------------

    TypeIdent type_of(const Value& v); // v must be forced, not a dynamic exception
    std::optional<Value> convert_auto(const Value& v, const TypeIdent& t);
    Value convert_explicit(const Value& v, const TypeIdent& t);
    Value resolve_type(const TypeRef& t, const Env& env, SourcePos pos); // Type value or dynexc
    Value resolve_type_path(const TypePath& p, const Env& env, SourcePos pos);

    // ---- evaluation --------------------------------------------------------------------

    Value eval(const ExprPtr& e, const Env& env);
    Value eval_block_expr(const ExprPtr& block, const Env& enclosing);
    Value eval_stmts_value(const std::vector<StmtPtr>& stmts, const Env& enclosing);

    // ---- pattern matching -----------------------------------------------------------------

    struct MatchOut {
        enum class K { Success, Failure, Exc };
        K k = K::Failure;
        std::map<std::string, Value> binds;
        Value exc;
    };
    MatchOut match(const PatternPtr& p, const Value& v, const Env& env);

    // ---- functions ------------------------------------------------------------------------

    Value call_clauses(const std::vector<Clause>& clauses, const Env& env, const Value& arg,
                       const std::shared_ptr<MemoTable>& memo);
    Value eval_def_entry(const std::shared_ptr<DefEntry>& entry); // simple defs / materialize funs
    Value make_user_ctor(const std::shared_ptr<UserTypeDef>& tdef);

    // ---- objects -----------------------------------------------------------------------------

    Value eval_object(const Expr& e, const Env& env);
    Value member_value(const ObjMember& m, const Value& receiver);
    Value record_update(const Value& u, const std::string& m, const Value& t);

    // ---- modules --------------------------------------------------------------------------------

    Value module_send(const std::vector<std::string>& path, const std::string& msg);
    Value ensure_loaded(const std::shared_ptr<ModuleRec>& rec); // null on success
    Value run_test_module(const std::vector<std::string>& path);

    // ---- lenses ------------------------------------------------------------------------------------

    Value make_path_lens(const std::string& param, const std::vector<PathStep>& steps, const Env& env);
    Value lens_apply_get(const Value& lens_or_fn, const Value& u);
    Value path_assign(const Value& root, const std::vector<PathStep>& steps, const Value& t, const Env& env);

    // ---- collection protocol --------------------------------------------------------------------------

    // () when empty, (head, rest) otherwise, or a dynamic exception.
    Value iterate(const Value& coll);
    Value min_max_of(const Value& coll, bool want_min);
    Value choose_from(const Value& coll);

    // ---- helpers used by the stdlib ------------------------------------------------------------------

    Value builtin_collector_add(const Value& coll, const Value& item);
    static std::u32string to_u32(const std::string& s) {
        std::u32string out;
        std::size_t i = 0;
        while (i < s.size()) {
            auto cp = uni::decode_utf8(s, i);
            if (!cp) break;
            out.push_back(*cp);
        }
        return out;
    }

    bool obj_qualifies_as_collection(const ObjData& obj);

    // Executes statements into the given sink; returns a dynamic exception on
    // abort, null on normal completion. Public for the module loader / runner.
    Value exec_block_stmts(const std::vector<StmtPtr>& stmts, const Env& frame, Sink& sink);
    Value close_sink(Sink& sink);

private:
    Sink* cur_sink_ = nullptr;

    Value eval_control_stmt(const ExprPtr& e, const Env& env, Sink& sink);
    Value sink_add(Sink& sink, const Value& v);
    Value match_dispatch(const Value& scrutinee, const std::vector<MatchCase>& cases, const Env& env,
                         Sink* stmt_sink);
    Value try_dispatch(const Expr& e, const Env& env, Sink* stmt_sink);
    Value eval_loop(const Expr& e, const Env& env, Sink& sink);
    Value exec_import(const Stmt& s, const Env& frame);
    Value exec_pragma(const Stmt& s, const Env& env);
    void hoist_block(const std::vector<StmtPtr>& stmts, const Env& frame);
    Value run_thunk_result(const ExprPtr& body, const Env& env);
    TreePtr rebuild_ordered(const std::vector<const TreeNode*>& entries, bool keys_only);
    Value resolve_module_type(const std::vector<std::string>& path);
    MatchOut match_impl(const PatternPtr& p, const Value& v, const Env& env,
                        std::map<std::string, Value>& binds);
    Value path_get_step(const Value& cur, const PathStep& step, const Value& evaluated_arg);

    struct PendingConv {
        TypeIdent target;
        bool auto_conv;
        ObjMember member;
    };
    std::vector<PendingConv>* pending_convs_ = nullptr;
};

} // namespace babel17
