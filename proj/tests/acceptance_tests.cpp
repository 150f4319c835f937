// Acceptance suite: one test case per criterion, each printing a PASS/FAIL line.

#include "test_util.hpp"

#include <iostream>
#include <random>

using namespace babel17;
using namespace b17test;

namespace {

struct Criterion {
    std::string name;
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
    ~Criterion() {
        std::cout << "ACCEPTANCE " << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
        for (const auto& n : notes) std::cout << "    failed: " << n << "\n";
    }
};

bool evals_to(const std::string& src, const std::string& expect) { return eval_str(src) == expect; }

const char* ordered_set_module = R"(
module util.orderedset
  private orderedset, ins
  typedef orderedset (leq, list) =
    object
      def compare_ (orderedset (leq2, list2)) = list ~ list2
      def plus_ x = insert (this, x)
      def this : list = list
      def iterate_ =
        match list
          case [] => ()
          case (x::xs) => (x, orderedset (leq, xs))
        end
      def collector_close_ = this
      def collector_add_ x = this + x
      def empty = orderedset (leq, [])
    end
  def empty (leq : fun) = orderedset (leq, [])
  def insert (orderedset (leq, list), y) = orderedset (leq, ins (leq, list, y))
  def ins (leq, [], y) = [y]
  def ins (leq, x::xs, y) =
    if leq (y, x) then
        if leq (x, y) then x::xs else y::x::xs end
    else
        x::(ins (leq, xs, y))
    end
end
)";

} // namespace

TEST_CASE("criterion 1: golden corpus") {
    Criterion c{"1 (golden corpus)"};

    // section 3: literal equivalences
    c.require(evals_to("(15 == 0xF, 15 == 0b1111, 15 == 0o17)", "(true, true, true)"), "radix literals");
    c.require(evals_to("Begin == BEGIN", "true"), "constructor case folding");
    c.require(evals_to("\"\\u000A\" == \"\\U0000000A\"", "true"), "escape equivalence");

    // section 7
    c.require(evals_to("val fst = ((a, b) => a)\nfst (0, lazy (1 div 0))", "0"), "fst with lazy error");

    // section 12: block values and the legality table
    c.require(evals_to("val r = begin end\nr", "()"), "empty block");
    c.require(evals_to("val r = begin yield 4 end\nr", "4"), "one yield");
    c.require(evals_to("val r = begin yield 4; yield 5 end\nr", "(4, 5)"), "two yields");
    c.require(static_error("val x = y\nval y = 0"), "val-val forward illegal");
    c.require(static_error("def x = y\nval y = 0"), "def-val forward illegal");
    c.require(!static_error("val x = y\ndef y = 0"), "val-def legal");
    c.require(!static_error("def x = y\ndef y = 0"), "def-def legal");
    c.require(evals_to("val r = begin val x = 1; val x = (x, x); x end\nr", "(1, 1)"), "val shadowing");
    c.require(is_error("def f 0 = A\ndef f 1 = B\nf 2", "DomainError"), "bundled def exhaustion");

    // section 16
    c.require(evals_to("min (1, 2) == max (-1, 1, 0) == 1", "true"), "min/max chain");

    // section 18: the inequality does not hold (Unrelated per the section 16 forms)
    c.require(is_error("[1.0; 2.0] <= 2.0", "Unrelated"), "interval inequality must not hold");
    c.require(evals_to("([1.0; 2.0] == 2.0, [1.0; 2.0] <> 2.0)", "(false, true)"), "interval ==/<>");

    // section 21: the linear-scope battery
    c.require(evals_to("val r = begin val x = 1\nval y = 2\nbegin val x = 3\nval y = 4 * x end\n(x, y) end\nr",
                       "(1, 2)"),
              "linear 1");
    c.require(evals_to("val r = begin val x = 1\nval y = 2\nbegin val x = 3\ny = 4 * x end\n(x, y) end\nr",
                       "(1, 12)"),
              "linear 2");
    c.require(
        evals_to("val r = begin val x = 1\nval y = 2\nbegin val x = 3\nval y = 0\ny = 4 * x end\n(x, y) end\nr",
                 "(1, 2)"),
        "linear 3");
    c.require(evals_to("val r = begin val x = 1\nval y = begin x = 2\nx + x end\n(x, y) end\nr", "(2, 4)"),
              "linear 4");
    c.require(static_error("val x = 1\nval y = 3 * begin x = 2\nx + x end\n(x, y)"), "linear 5 illegal");
    c.require(evals_to("val r = begin val x = 1\nval y = 3 * begin val x = 2\nx + x end\n(x, y) end\nr",
                       "(1, 12)"),
              "linear 6");

    // section 22
    c.require(evals_to("val u = {x = 10, y = 20, z = -4}\nu.x = 9\n(u.x, u.y, u.z)", "(9, 20, -4)"),
              "record update");

    // section 23: the lens suite
    c.require(evals_to("val id = lens (x => x, x => y => y)\nval x = 10\nx.(id) = 12\nx", "12"),
              "identity lens assignment");
    c.require(evals_to("val x = 10\nx += 2\nx", "12"), "modifying assignment");
    c.require(evals_to("val l = lens u => u.m\nval u = {m = 10, n = 12}\nu.(l) += 2\nu == {m = 12, n = 12}",
                       "true"),
              "lens +=");
    c.require(evals_to("val a = lens x => x.a\nval b = lens x => x.b\n"
                       "val x = {a = {a = 1, b = 2}, b = {a = 3, b = 4}}\n"
                       "x.(a*b) = 10\nx.(b*a) = 20\n"
                       "x == {a = {a = 1, b = 10}, b = {a = 20, b = 4}}",
                       "true"),
              "lens composition");
    for (const char* spelling :
         {"x.(a*b) = 10", "x.(a).(b) = 10", "x.a.b = 10", "x.(a).b = 10", "x.a.(b) = 10"}) {
        c.require(evals_to(std::string("val a = lens x => x.a\nval b = lens x => x.b\n"
                                       "val x = {a = {a = 1, b = 2}, b = {a = 3, b = 4}}\n") +
                               spelling + "\nx.a.b",
                           "10"),
                  std::string("lens spelling: ") + spelling);
    }

    // section 24
    c.require(evals_to("with {4} do yield 1\nyield 2\nyield 1\n10 end", "{1, 2, 4, 10}"), "set collector");

    // section 25
    c.require(evals_to("val s = [10, (5, 8), 7, (3,5)]\n"
                       "with {->} : for (a,b) in s do yield (b,a) end\n",
                       "{5 -> 3, 8 -> 5}"),
              "for-loop into map collector");
    c.require(same_value("val s = [10, (5, 8), 7, (3,5)]\nwith {->} : for (a,b) in s do yield (b,a) end",
                         "{8 -> 5, 5 -> 3}"),
              "map equals the paper's display");
    c.require(evals_to("def gcd (a,b) = begin\nwhile b <> 0 do\n(a, b) = (b, a mod b)\nend\na\nend\n"
                       "gcd (12, 18)",
                       "6"),
              "gcd");
    c.require(evals_to("(m => x =>\nwith [] do\nval y = 0\nval p = 1\nfor a in m do\n"
                       "y = y + a*p\np = p * x\nyield y\nend\nend) [1,2,3] 10",
                       "[1, 21, 321]"),
              "prefix-sum polynomial");

    // section 27.1
    c.require(is_error("module deadlock\ndef x = 10\nval a = deadlock.x + 1\ndef y = a * a\nend\ndeadlock.y",
                       "DeadLock"),
              "deadlock detection");
    c.require(evals_to("module nodeadlock\ndef x = 10\nval a = x + 1\ndef y = a * a\nend\nnodeadlock.y",
                       "121"),
              "no deadlock");

    // section 27.2
    const std::string cards =
        "module cards\n"
        "typedef rank i = match i case 14 => Ace case 13 => King case 12 => Queen case 11 => Jack "
        "case (x if 2 <= x <= 10) => Number x end\n"
        "def rank2num (rank n) = n\n"
        "end\n";
    c.require(evals_to(cards + "cards.rank2num (cards.rank 14) == 14", "true"), "rank2num");
    c.require(evals_to(cards + "(typeof (cards.rank 13)) == (:cards.rank)", "true"), "typeof rank");
    c.require(evals_to(std::string(ordered_set_module) + "(:util.orderedset.orderedset) == (:util.orderedset)",
                       "true"),
              "module/type aliasing");

    // section 27.6
    c.require(evals_to("object def this : int = 1; def this :> int = 2 end :> int", "1"),
              "automatic conversion precedence");

    // section 27.9
    c.require(evals_to("module hello.world\ndef x = 2\nend\nhello.world.x", "2"), "module path access");
    c.require(evals_to("module hello.world\ndef x = 2\nend\nimport hello.world.x\n(x, x, x)", "(2, 2, 2)"),
              "import member");

    // section 28: the orderedSet assertion pairs plus the illegal import
    {
        std::string suite = std::string(ordered_set_module) +
                            "module util.orderedset.unittest\n"
                            "import util.orderedset._\n"
                            "def leq (a, b) = a <= b\n"
                            "def geq (a, b) = a >= b\n"
                            "#assert insert (insert (empty leq, 3), 1) :> list == [1, 3]\n"
                            "#assert insert (insert (empty geq, 3), 1) :> list == [3, 1]\n"
                            "end\n";
        Engine eng(test_config(1, 2, RunMode::Test));
        eng.install(compile_source(suite));
        TestReport report = run_tests(eng);
        c.require(report.passed == 2 && report.ok(), "orderedSet assertions");
        c.require(static_error("module mystuff\nimport util.orderset.unittest => test\nend\n"
                               "module util.orderset\ndef x = 1\nunittest\ndef t = 2\nend"),
                  "production import of unittest rejected");
    }

    // section 29
    c.require(evals_to("native Platform", "nil"), "native Platform");

    CHECK(c.ok);
}

TEST_CASE("criterion 2: nondeterminism envelopes") {
    Criterion c{"2 (nondeterminism envelopes)"};
    bool val_ok = true;
    for (unsigned long seed = 0; seed < 200; ++seed) {
        std::string r = run_src("val x = random 2\n(x, x)", test_config(seed, 1)).rendered;
        if (r != "(0, 0)" && r != "(1, 1)") val_ok = false;
    }
    c.require(val_ok, "val variant produced a mixed pair");

    std::set<std::string> seen;
    for (unsigned long seed = 0; seed < 200; ++seed)
        seen.insert(run_src("def x = random 2\n(x, x)", test_config(seed, 1)).rendered);
    for (const char* want : {"(0, 0)", "(0, 1)", "(1, 0)", "(1, 1)"})
        c.require(seen.count(want) > 0, std::string("def variant never produced ") + want);
    CHECK(c.ok);
}

TEST_CASE("criterion 3: exception algebra") {
    Criterion c{"3 (exception algebra)"};
    Fixture f;
    std::mt19937_64 rng(31337);
    auto gen = [&](auto&& self, int depth) -> Value {
        switch (rng() % (depth > 2 ? 4 : 6)) {
        case 0: return vint(Int(static_cast<long>(rng() % 9) - 4));
        case 1: return vbool(rng() % 2 == 0);
        case 2: return vstr(rng() % 2 ? U"a" : U"zz");
        case 3: return nil_object();
        case 4: return vcexpr("c", "C", self(self, depth + 1));
        default: {
            std::vector<Value> items;
            for (int i = static_cast<int>(rng() % 3); i > 0; --i) items.push_back(self(self, depth + 1));
            return vvector(items);
        }
        }
    };
    auto eq = [&](const Value& a, const Value& b) {
        auto cm = f.in.compare(a, b);
        return cm.ok() && cm.sign == 0;
    };
    int cases = 0;
    bool all_ok = true;
    for (int i = 0; i < 300; ++i) {
        Value v = gen(gen, 0);
        Value w = gen(gen, 0);
        Value dyn = vdynexc(v);
        Value per = vpersistent(v);
        Value id = vnative_fn("id", [](Interp&, const Value& x) { return x; });
        Value ctor = vcexpr("k", "K", nil_object());

        auto expect_dyn = [&](const Value& r) { return is_dynexc(r) && eq(r->exc_param, v); };
        all_ok &= expect_dyn(f.in.send(dyn, "m"));                       // (Exception v).m
        all_ok &= expect_dyn(f.in.send(per, "m"));                       //   for both kinds
        all_ok &= expect_dyn(f.in.apply(dyn, w));                        // (DynExc v) x
        all_ok &= expect_dyn(f.in.apply(id, dyn));                       // f (DynExc v)
        all_ok &= expect_dyn(f.in.apply(per, w));                        // (PersExc v) g
        all_ok &= f.in.force(per)->kind == VK::PersistentExc;            // force v = v
        all_ok &= expect_dyn(f.in.apply(ctor, dyn));                     // c (DynExc v), section 9
        cases += 7;
    }
    // section 8 cons rules through the language
    all_ok &= is_error("(exception Boom)::[1]", "Boom");
    all_ok &= is_error("1::(exception Boom)", "Boom");
    all_ok &= eval_str("typeof (force (lazy (exception E)))") == "(: exc)";
    all_ok &= eval_str("typeof (force (concurrent (exception E)))") == "(: exc)";
    cases += 4;
    c.require(all_ok, "a rewrite rule was violated");
    c.require(cases >= 1000, "not enough generated cases");
    CHECK(c.ok);
}

TEST_CASE("criterion 4: order properties") {
    Criterion c{"4 (order properties)"};
    Fixture f;
    std::mt19937_64 rng(41);
    auto gen = [&](auto&& self, int depth) -> Value {
        switch (rng() % (depth >= 2 ? 4 : 7)) {
        case 0:
        case 1: return vint(Int(static_cast<long>(rng() % 15) - 7));
        case 2: return vbool(rng() % 2 == 0);
        case 3: return vstr(rng() % 2 ? U"a" : U"ab");
        case 4: return vcexpr(rng() % 2 ? "c1" : "c2", "C", self(self, depth + 1));
        default: {
            std::vector<Value> items;
            for (int i = static_cast<int>(rng() % 3); i > 0; --i) items.push_back(self(self, depth + 1));
            return rng() % 2 ? vvector(items) : stdlib::list_of(items);
        }
        }
    };
    bool refl = true, antisym = true, trans = true, total_eq = true;
    int triples = 0;
    while (triples < 10000) {
        Value a = gen(gen, 0), b = gen(gen, 0), cc = gen(gen, 0);
        auto aa = f.in.compare(a, a);
        if (!(aa.ok() && aa.sign == 0)) refl = false;
        auto ab = f.in.compare(a, b), ba = f.in.compare(b, a);
        if (ab.exc || ba.exc) total_eq = false;
        if (ab.ok() && ba.ok() && ab.sign != -ba.sign) antisym = false;
        auto bc = f.in.compare(b, cc), ac = f.in.compare(a, cc);
        if (ab.ok() && bc.ok() && ac.ok()) {
            ++triples;
            if (ab.sign <= 0 && bc.sign <= 0 && ac.sign > 0) trans = false;
        }
    }
    c.require(refl, "reflexivity");
    c.require(antisym, "antisymmetry");
    c.require(trans, "transitivity");
    c.require(total_eq, "==/<> totality (comparison raised)");

    // chain single evaluation, exact counts via instrumented operands
    auto counts_of = [](const std::string& src) {
        Run r = run_src(src);
        std::map<std::string, int> counts;
        for (const auto& line : r.eng->log_lines()) {
            auto pos = line.find("log: ");
            if (pos != std::string::npos) counts[line.substr(pos + 5)]++;
        }
        return counts;
    };
    auto c1 = counts_of("begin #log \"a\"; 1 end <= begin #log \"b\"; 3 end <= begin #log \"c\"; 2 end");
    c.require(c1["\"a\""] == 1 && c1["\"b\""] == 1 && c1["\"c\""] == 1, "chain evaluates operands once");
    auto c2 = counts_of("begin #log \"a\"; 3 end <= begin #log \"b\"; 1 end <= begin #log \"c\"; 2 end");
    c.require(c2["\"a\""] == 1 && c2["\"b\""] == 1 && c2["\"c\""] == 0, "chain short-circuits");
    CHECK(c.ok);
}

TEST_CASE("criterion 5: interval enclosure") {
    Criterion c{"5 (interval enclosure)"};
    std::mt19937_64 rng(51);
    auto rand_d = [&](double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(rng);
    };
    int escapes = 0;
    for (int i = 0; i < 10000; ++i) {
        double a1 = rand_d(-50, 50), a2 = rand_d(-50, 50);
        double b1 = rand_d(-50, 50), b2 = rand_d(-50, 50);
        Interval x{std::min(a1, a2), std::max(a1, a2)};
        Interval y{std::min(b1, b2), std::max(b1, b2)};
        double px = rand_d(x.lo, x.hi), py = rand_d(y.lo, y.hi);
        Interval s = iv_add(x, y);
        if (px + py < s.lo || px + py > s.hi) ++escapes;
        Interval d2 = iv_sub(x, y);
        if (px - py < d2.lo || px - py > d2.hi) ++escapes;
        Interval m = iv_mul(x, y);
        if (px * py < m.lo || px * py > m.hi) ++escapes;
        if (y.lo > 0 || y.hi < 0) {
            auto q = iv_div(x, y);
            if (!q || px / py < q->lo || px / py > q->hi) ++escapes;
        }
        auto p3 = iv_pow_int(x, 3);
        double want = px * px * px;
        if (!p3 || want < p3->lo || want > p3->hi) ++escapes;
    }
    c.require(escapes == 0, "a sampled point escaped (" + std::to_string(escapes) + ")");

    // the section 18 order formula over the 5x5 grid of small intervals
    bool grid_ok = true;
    const double pts[5] = {-1, 0, 1, 2, 3};
    std::vector<Interval> grid;
    for (double a : pts)
        for (double b : pts)
            if (a <= b) grid.push_back({a, b});
    for (const auto& x : grid)
        for (const auto& y : grid) {
            bool le = x.hi < y.lo || (x.lo == y.lo && x.hi == y.hi);
            bool ge = y.hi < x.lo || (x.lo == y.lo && x.hi == y.hi);
            auto cm = iv_compare(x, y);
            bool ok = (le && ge)   ? (cm && *cm == 0)
                      : le         ? (cm && *cm < 0)
                      : ge         ? (cm && *cm > 0)
                                   : !cm.has_value();
            if (!ok) grid_ok = false;
        }
    c.require(grid_ok, "order formula grid");
    CHECK(c.ok);
}

TEST_CASE("criterion 6: pattern matcher oracle") {
    Criterion c{"6 (pattern matcher oracle)"};
    Fixture f;
    std::mt19937_64 rng(61);

    // independent structural matcher over the literal/constructor/sequence fragment
    struct Oracle {
        static bool is_seq(const Value& v) { return v->kind == VK::List || v->kind == VK::Vector; }
        static std::vector<Value> items(const Value& v) {
            std::vector<Value> out;
            if (v->kind == VK::List)
                for (const ListNode* n = v->list.get(); n; n = n->tail.get()) out.push_back(n->head);
            if (v->kind == VK::Vector) out = *v->vec;
            return out;
        }
    };
    // patterns are generated as source strings plus a parallel closure oracle
    struct Gen {
        std::mt19937_64& rng;
        int vars = 0;
        std::function<bool(const Value&, std::map<std::string, Value>&)> make(std::string& src, int depth) {
            switch (rng() % (depth >= 2 ? 4 : 7)) {
            case 0:
                src += "_";
                return [](const Value&, auto&) { return true; };
            case 1: {
                std::string name = "v" + std::to_string(vars++);
                src += name;
                return [name](const Value& v, std::map<std::string, Value>& b) {
                    b[name] = v;
                    return true;
                };
            }
            case 2: {
                long n = static_cast<long>(rng() % 5) - 2;
                src += n < 0 ? "(" + std::to_string(n) + ")" : std::to_string(n);
                return [n](const Value& v, auto&) { return v->kind == VK::Int && v->i == Int(n); };
            }
            case 3: {
                bool a = rng() % 2;
                src += a ? "\"a\"" : "\"b\"";
                std::u32string want = a ? U"a" : U"b";
                return [want](const Value& v, auto&) { return v->kind == VK::Str && v->s == want; };
            }
            case 4: {
                std::string ctor = rng() % 2 ? "c1" : "c2";
                src += "(" + std::string(ctor == "c1" ? "C1 " : "C2 ");
                auto sub = make(src, depth + 1);
                src += ")";
                return [ctor, sub](const Value& v, std::map<std::string, Value>& b) {
                    return v->kind == VK::CExpr && v->cexpr->ctor == ctor && sub(v->cexpr->param, b);
                };
            }
            case 5: {
                std::size_t n = rng() % 3;
                src += "[";
                std::vector<std::function<bool(const Value&, std::map<std::string, Value>&)>> subs;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i) src += ", ";
                    subs.push_back(make(src, depth + 1));
                }
                src += "]";
                return [subs](const Value& v, std::map<std::string, Value>& b) {
                    if (!Oracle::is_seq(v)) return false;
                    auto items = Oracle::items(v);
                    if (items.size() != subs.size()) return false;
                    for (std::size_t i = 0; i < subs.size(); ++i)
                        if (!subs[i](items[i], b)) return false;
                    return true;
                };
            }
            default: {
                src += "(";
                auto h = make(src, depth + 1);
                src += " :: ";
                auto t = make(src, depth + 1);
                src += ")";
                return [h, t](const Value& v, std::map<std::string, Value>& b) {
                    if (!Oracle::is_seq(v)) return false;
                    auto items = Oracle::items(v);
                    if (items.empty()) return false;
                    if (!h(items[0], b)) return false;
                    Value rest;
                    if (v->kind == VK::List) {
                        ListPtr l;
                        for (auto it = items.rbegin(); it + 1 != items.rend(); ++it) l = list_cons(*it, l);
                        rest = vlist(l);
                    } else {
                        rest = vvector({items.begin() + 1, items.end()});
                    }
                    return t(rest, b);
                };
            }
            }
        }
        Value value(int depth) {
            switch (rng() % (depth >= 2 ? 3 : 6)) {
            case 0: return vint(Int(static_cast<long>(rng() % 5) - 2));
            case 1: return vstr(rng() % 2 ? U"a" : U"b");
            case 2: return vcexpr(rng() % 2 ? "c1" : "c2", "C", value(depth + 1));
            default: {
                std::vector<Value> items;
                for (int i = static_cast<int>(rng() % 3); i > 0; --i) items.push_back(value(depth + 1));
                if (rng() % 2) return vvector(items);
                ListPtr l;
                for (auto it = items.rbegin(); it != items.rend(); ++it) l = list_cons(*it, l);
                return vlist(l);
            }
            }
        }
    };

    Gen gen{rng};
    int disagreements = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string src;
        gen.vars = 0;
        auto oracle = gen.make(src, 0);
        Value v = gen.value(0);
        PatternPtr pat = Parser::from_source(src).parse_single_pattern();
        auto mine = f.in.match(pat, v, EnvNode::child_of(nullptr));
        std::map<std::string, Value> ob;
        bool oracle_ok = oracle(v, ob);
        bool mine_ok = mine.k == Interp::MatchOut::K::Success;
        if (mine_ok != oracle_ok) {
            ++disagreements;
            continue;
        }
        if (mine_ok) {
            if (mine.binds.size() != ob.size()) {
                ++disagreements;
                continue;
            }
            for (auto& [n, val] : ob) {
                auto it = mine.binds.find(n);
                auto cm = it == mine.binds.end() ? Interp::Cmp{1, false, nullptr}
                                                 : f.in.compare(it->second, val);
                if (!(cm.ok() && cm.sign == 0)) {
                    ++disagreements;
                    break;
                }
            }
        }
    }
    c.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
    CHECK(c.ok);
}

TEST_CASE("criterion 7: stdlib matrix") {
    Criterion c{"7 (stdlib matrix)"};
    // Table 12, every cell: yes/auto succeed on a witness, no -> DomainError
    struct Cell {
        const char* src;
        const char* expect; // nullptr => DomainError
    };
    const Cell cells[] = {
        {"120 :> bool", "true"},          {"(5 :> real) == 5.0", "true"}, {"120 :> string", "\"120\""},
        {"5 :> list", nullptr},           {"5 :> vect", nullptr},         {"5 :> set", nullptr},
        {"5 :> map", nullptr},            {"true :> int", "1"},           {"true :> string", "\"true\""},
        {"true :> real", nullptr},        {"true :> list", nullptr},      {"true :> vect", nullptr},
        {"true :> set", nullptr},         {"true :> map", nullptr},       {"5.1 :> int", "5"},
        {"1.5 :> string", "\"1.5\""},     {"1.5 :> bool", nullptr},       {"1.5 :> list", nullptr},
        {"1.5 :> vect", nullptr},         {"1.5 :> set", nullptr},        {"1.5 :> map", nullptr},
        {"\"120\" :> int", "120"},        {"\"true\" :> bool", "true"},   {"(\"1.5\" :> real) == 1.5", "true"},
        {"\"ab\" :> list", "[\"a\", \"b\"]"},                             {"\"ab\" :> vect", "(\"a\", \"b\")"},
        {"\"aa\" :> set", "{\"a\"}"},     {"\"a\" :> map", nullptr},      {"[1, 2] :> vect", "(1, 2)"},
        {"[1, 1] :> set", "{1}"},         {"[(1, 2)] :> map", "{1 -> 2}"},{"[1] :> int", nullptr},
        {"[1] :> bool", nullptr},         {"[1] :> real", nullptr},       {"[1] :> string", nullptr},
        {"(1, 2) :> list", "[1, 2]"},     {"(1, 1) :> set", "{1}"},       {"((1, 2),) :> map", "{1 -> 2}"},
        {"(1,) :> int", nullptr},         {"(1,) :> bool", nullptr},      {"(1,) :> real", nullptr},
        {"(1,) :> string", nullptr},      {"{2, 1} :> list", "[1, 2]"},   {"{2, 1} :> vect", "(1, 2)"},
        {"{(1, 2)} :> map", "{1 -> 2}"},  {"{1} :> int", nullptr},        {"{1} :> bool", nullptr},
        {"{1} :> real", nullptr},         {"{1} :> string", nullptr},     {"{1 -> 2} :> list", "[(1, 2)]"},
        {"{1 -> 2} :> vect", "((1, 2),)"},{"{1 -> 2} :> set", "{(1, 2)}"},{"{1 -> 2} :> int", nullptr},
        {"{1 -> 2} :> bool", nullptr},    {"{1 -> 2} :> real", nullptr},  {"{1 -> 2} :> string", nullptr},
    };
    for (const auto& cell : cells) {
        bool ok = cell.expect ? evals_to(cell.src, cell.expect) : is_error(cell.src, "DomainError");
        c.require(ok, cell.src);
    }

    // Table 11 rows with derived oracles
    c.require(evals_to("[1, 2, 3] / (x => x * x)", "[1, 4, 9]"), "map");
    c.require(evals_to("([1, 2, 3] * ((x, a) => a + x)) 0", "6"), "fold");
    c.require(evals_to("[1, 2, 3, 4] ^ (x => x mod 2 == 0)", "[2, 4]"), "filter");
    c.require(evals_to("[1, 2] // (x => x * 10)", "{1 -> 10, 2 -> 20}"), "keymap");
    c.require(evals_to("(\"abc\".size, \"abc\".atIndex 1, \"abcd\".indexOf \"cd\")", "(3, \"b\", 2)"),
              "string collection");
    c.require(evals_to("([9, 8].isEmpty, [9, 8].head, [9, 8].tail, [9, 8].take 1, [9, 8].drop 1)",
                       "(false, 9, [8], [9], [8])"),
              "list prefix messages");
    c.require(evals_to("([1, 2] + 3, [1] ++ [2], [1, 2, 1] - 1, [1, 2, 3] -- [2], [1, 2, 3] ** [2, 9])",
                       "([1, 2, 3], [1, 2], [2], [1, 3], [2])"),
              "element algebra");
    c.require(evals_to("{1, 2} ** {2, 3}", "{2}") && evals_to("{1, 2} -- {2, 3}", "{1}"), "set algebra");

    // Table 13
    c.require(evals_to("([10, 20] 1, -[1, 2, 3])", "(20, [3, 2, 1])"), "list specifics");

    // Table 14
    c.require(evals_to("({1 -> 2}.containsKey 1, {1 -> 2}.contains (1, 2), {1 -> 2} + (4, 0), "
                       "{1 -> 2, 4 -> 0} - 1, {1 -> 2, 4 -> 0} ** [4], {1 -> 2, 4 -> 0} -- [4], "
                       "{1 -> 2} 1, {1 -> 2, 4 -> 0} // ((k, v) => k + v))",
                       "(true, true, {1 -> 2, 4 -> 0}, {4 -> 0}, {4 -> 0}, {1 -> 2}, 2, {1 -> 3, 4 -> 4})"),
              "map specifics");
    c.require(is_error("{1 -> 2} 7", "DomainError"), "map miss");

    // Euclidean law over all |n|,|d| <= 50
    int violations = 0;
    for (long n = -50; n <= 50; ++n)
        for (long d = -50; d <= 50; ++d) {
            if (d == 0) continue;
            Int q = Int(n).div_euclid(Int(d));
            Int r = Int(n).mod_euclid(Int(d));
            if (!(Int(d) * q + r == Int(n)) || r.sign() < 0 || !(r < (d < 0 ? Int(-d) : Int(d))))
                ++violations;
        }
    c.require(violations == 0, "euclidean law violations: " + std::to_string(violations));
    c.require(evals_to("((-7) div 2, (-7) mod 2)", "(-4, 1)"), "euclidean through the language");
    CHECK(c.ok);
}

TEST_CASE("criterion 8: memoization") {
    Criterion c{"8 (memoization)"};
    Run r = run_src(
        "memoize fib\n"
        "def fib n = begin #log n; if n <= 1 then yield n else yield fib (n - 1) + fib (n - 2) end end\n"
        "fib 25");
    c.require(r.rendered == "75025", "memoized fib value");
    int evals = 0;
    for (const auto& line : r.eng->log_lines())
        if (line.find(" log: ") != std::string::npos) ++evals;
    c.require(evals == 26, "expected exactly 26 body evaluations, saw " + std::to_string(evals));
    Run plain = run_src("def fib n = if n <= 1 then n else fib (n - 1) + fib (n - 2) end\nfib 25");
    c.require(plain.rendered == r.rendered, "memoized result differs from unmemoized");
    CHECK(c.ok);
}

TEST_CASE("criterion 9: concurrency soundness") {
    Criterion c{"9 (concurrency soundness)"};
    auto cfg = test_config(91, 8);

    // golden corpus fragments under 8 workers
    c.require(run_src("min (1, 2) == max (-1, 1, 0) == 1", cfg).rendered == "true", "golden: min/max");
    c.require(run_src("val fst = ((a, b) => a)\nfst (0, lazy (1 div 0))", cfg).rendered == "0",
              "golden: fst");
    c.require(run_src("def gcd (a,b) = begin while b <> 0 do (a, b) = (b, a mod b) end\na end\ngcd (12, 18)",
                      cfg)
                      .rendered == "6",
              "golden: gcd");
    c.require(run_src("with {4} do yield 1; yield 2; yield 1; 10 end", cfg).rendered == "{1, 2, 4, 10}",
              "golden: collector");
    c.require(
        run_src("module deadlock\ndef x = 10\nval a = deadlock.x + 1\ndef y = a * a\nend\n"
                "try deadlock.y catch case DeadLock => Detected end",
                cfg)
                .rendered == "Detected",
        "golden: deadlock");

    // a thunk forced by 8 threads evaluates once
    {
        Engine eng(cfg);
        eng.install(compile_source("lazy begin #log Evaluated; 42 end"));
        Value thunk = run_program(eng);
        std::vector<std::thread> threads;
        std::atomic<int> bad{0};
        for (int i = 0; i < 8; ++i)
            threads.emplace_back([&] {
                Interp in(eng);
                Value r = in.force(thunk);
                if (r->kind != VK::Int) ++bad;
            });
        for (auto& t : threads) t.join();
        int evals = 0;
        for (const auto& line : eng.log_lines())
            if (line.find("Evaluated") != std::string::npos) ++evals;
        c.require(bad == 0 && evals == 1,
                  "thunk body ran " + std::to_string(evals) + " times under 8 forcers");
    }

    // module load-once under 8 concurrent first messages
    {
        Engine eng(cfg);
        eng.install(compile_source("module m\nval x = begin #log Loading; 7 end\nend\n()"));
        (void)run_program(eng);
        std::vector<std::thread> threads;
        std::atomic<int> bad{0};
        for (int i = 0; i < 8; ++i)
            threads.emplace_back([&] {
                Interp in(eng);
                Value r = in.module_send({"m"}, "x");
                if (r->kind != VK::Int) ++bad;
            });
        for (auto& t : threads) t.join();
        int loads = 0;
        for (const auto& line : eng.log_lines())
            if (line.find("Loading") != std::string::npos) ++loads;
        c.require(bad == 0 && loads == 1, "module loaded " + std::to_string(loads) + " times");
    }
    CHECK(c.ok);
}
