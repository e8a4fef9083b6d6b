#include "tasklogic/oracle.hpp"

#include <stdexcept>

namespace tasklogic::oracle {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Derivable: return "derivable";
    case Verdict::NotDerivable: return "not-derivable";
    case Verdict::DepthExhausted: return "depth-exhausted";
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------------------
// derivation search
// ---------------------------------------------------------------------------

// A search configuration: the machine state plus the Failtree visible to
// `case` (absent outside handlers and after an arm has consumed it).
struct Config {
    StateValue state;
    std::optional<ExceptionTree> failtree;
};

// Parameter instantiation of the procedure body being searched. Lexically
// scoped: a callee never sees its caller's parameters.
using Params = std::map<Identifier, Value>;

struct GoalResult {
    Verdict verdict;
    Config after;          // Derivable
    ExceptionTree reason;  // NotDerivable
    std::string rule;

    static GoalResult derived(Config c, std::string rule) {
        return {Verdict::Derivable, std::move(c), {}, std::move(rule)};
    }
    static GoalResult refuted(ExceptionTree why, std::string rule = {}) {
        return {Verdict::NotDerivable, {}, std::move(why), std::move(rule)};
    }
    static GoalResult exhausted() { return {Verdict::DepthExhausted, {}, {}, {}}; }
    bool derivable() const { return verdict == Verdict::Derivable; }
    bool refutedp() const { return verdict == Verdict::NotDerivable; }
};

struct ExprResultV {
    Verdict verdict;
    Config after;
    std::optional<Value> value;
    ExceptionTree reason;
};

// Exact arithmetic before reducing to 64 bits.
__extension__ typedef __int128 Wide;
__extension__ typedef unsigned __int128 UWide;

ExceptionTree sys_tree(const char* leaf) {
    return ExceptionTree{FailPath::sys(leaf)};
}

class Search {
public:
    Search(const Program& p, const SearchConfig& cfg) : program_(p), cfg_(cfg) {}

    GoalResult goal(const Config& c, const Goal& g, const Params& params, std::size_t depth) {
        if (depth > cfg_.max_depth) {
            return GoalResult::exhausted();
        }
        const auto& n = g.node;
        if (std::holds_alternative<True>(n)) {
            return GoalResult::derived(c, "1");
        }
        if (const auto* f = std::get_if<Fail>(&n)) {
            // No rule concludes f.
            return GoalResult::refuted(ExceptionTree{f->path}, "fail");
        }
        if (const auto* a = std::get_if<Assign>(&n)) {
            return assign(c, *a, params, depth);
        }
        if (const auto* t = std::get_if<Test>(&n)) {
            return test(c, *t, params, depth);
        }
        if (const auto* s = std::get_if<Seq>(&n)) {
            return sequence(c, *s, params, depth);
        }
        if (const auto* u = std::get_if<Union>(&n)) {
            return disjunction(c, *u, params, depth);
        }
        if (const auto* e = std::get_if<Else>(&n)) {
            return choice(c, *e, params, depth);
        }
        if (const auto* k = std::get_if<Case>(&n)) {
            return handler_case(c, *k, params, depth);
        }
        return call(c, std::get<Call>(n), params, depth);
    }

private:
    // rule 5
    GoalResult assign(const Config& c, const Assign& a, const Params& params, std::size_t depth) {
        ExprResultV r = expr(c, a.expr, params, depth);
        if (r.verdict != Verdict::Derivable) {
            return propagate(r);
        }
        Config out = std::move(r.after);
        out.state.bindings.insert_or_assign(a.var, *r.value);
        return GoalResult::derived(std::move(out), "5");
    }

    GoalResult test(const Config& c, const Test& t, const Params& params, std::size_t depth) {
        ExprResultV l = expr(c, t.left, params, depth);
        if (l.verdict != Verdict::Derivable) {
            return propagate(l);
        }
        ExprResultV r = expr(l.after, t.right, params, depth);
        if (r.verdict != Verdict::Derivable) {
            return propagate(r);
        }
        if (holds(*l.value, t.op, *r.value)) {
            return GoalResult::derived(std::move(r.after), "test");
        }
        return GoalResult::refuted(sys_tree(sys_failure::kTest), "test");
    }

    static bool holds(const Value& l, RelOp op, const Value& r) {
        if (l.is_str() || r.is_str()) {
            if (!(l.is_str() && r.is_str())) {
                return false;
            }
            if (op == RelOp::Eq) return l.as_str() == r.as_str();
            if (op == RelOp::Ne) return l.as_str() != r.as_str();
            return false;
        }
        std::int64_t a = l.as_int();
        std::int64_t b = r.as_int();
        switch (op) {
        case RelOp::Eq: return a == b;
        case RelOp::Ne: return !(a == b);
        case RelOp::Lt: return a < b;
        case RelOp::Le: return !(b < a);
        case RelOp::Gt: return b < a;
        case RelOp::Ge: return !(a < b);
        }
        return false;
    }

    // rule 6
    GoalResult sequence(const Config& c, const Seq& s, const Params& params, std::size_t depth) {
        GoalResult first = goal(c, *s.first, params, depth + 1);
        if (!first.derivable()) {
            return relabel(std::move(first), "6");
        }
        GoalResult second = goal(first.after, *s.second, params, depth + 1);
        return relabel(std::move(second), "6");
    }

    // rules 7, 8, 9: each rule is tried in turn; when all are refuted the
    // reasons of both operands (each run from the entry configuration) are joined.
    GoalResult disjunction(const Config& c, const Union& u, const Params& params, std::size_t depth) {
        GoalResult first = goal(c, *u.first, params, depth + 1);
        if (first.verdict == Verdict::DepthExhausted) {
            return first;
        }
        std::vector<GoalResult> candidates;

        // rule 7: both operands succeed, the second from the first's result.
        if (first.derivable()) {
            GoalResult second = goal(first.after, *u.second, params, depth + 1);
            if (second.verdict == Verdict::DepthExhausted) {
                return second;
            }
            if (second.derivable()) {
                candidates.push_back(GoalResult::derived(second.after, "7"));
            }
        }
        // rule 8: only the second succeeds, run from the entry configuration.
        GoalResult second_from_entry = GoalResult::exhausted();
        if (first.refutedp()) {
            second_from_entry = goal(c, *u.second, params, depth + 1);
            if (second_from_entry.verdict == Verdict::DepthExhausted) {
                return second_from_entry;
            }
            if (second_from_entry.derivable()) {
                candidates.push_back(GoalResult::derived(second_from_entry.after, "8"));
            }
        }
        // rule 9: only the first succeeds.
        if (first.derivable()) {
            GoalResult second = goal(first.after, *u.second, params, depth + 1);
            if (second.refutedp()) {
                candidates.push_back(GoalResult::derived(first.after, "9"));
            }
        }

        if (candidates.size() > 1) {
            throw std::logic_error("union rules overlap");
        }
        if (candidates.size() == 1) {
            return std::move(candidates.front());
        }
        return GoalResult::refuted(merge(first.reason, second_from_entry.reason), "union");
    }

    // rules 10, 11
    GoalResult choice(const Config& c, const Else& e, const Params& params, std::size_t depth) {
        GoalResult tried = goal(c, *e.tried, params, depth + 1);
        if (tried.derivable()) {
            return GoalResult::derived(std::move(tried.after), "10");
        }
        if (tried.verdict == Verdict::DepthExhausted) {
            return tried;
        }
        Config in_handler{c.state, tried.reason};
        GoalResult handled = goal(in_handler, *e.handler, params, depth + 1);
        if (handled.derivable()) {
            handled.after.failtree = c.failtree;
        }
        return relabel(std::move(handled), "11");
    }

    GoalResult handler_case(const Config& c, const Case& k, const Params& params, std::size_t depth) {
        if (!c.failtree) {
            if (k.fallback) {
                return relabel(goal(c, **k.fallback, params, depth + 1), "case");
            }
            return GoalResult::refuted(sys_tree(sys_failure::kNoFailtree), "case");
        }
        const ExceptionTree& tree = *c.failtree;
        const Goal* chosen = nullptr;
        for (const auto& arm : k.arms) {
            bool hit = false;
            for (const auto& p : tree.paths()) {
                const auto& hs = arm.pattern.segments();
                const auto& ps = p.segments();
                if (hs.size() <= ps.size() && std::equal(hs.begin(), hs.end(), ps.begin())) {
                    hit = true;
                }
            }
            if (hit) {
                chosen = &*arm.body;
                break;
            }
        }
        if (!chosen && k.fallback) {
            chosen = &**k.fallback;
        }
        if (!chosen) {
            return GoalResult::refuted(tree, "case");
        }
        Config consumed{c.state, std::nullopt};
        return relabel(goal(consumed, *chosen, params, depth + 1), "case");
    }

    // rule 4 selects the definition, rule 3 instantiates its parameters,
    // rule 2 executes the instantiated body.
    GoalResult call(const Config& c, const Call& k, const Params& params, std::size_t depth) {
        if (k.name == "print" && k.args.size() == 1) {
            ExprResultV v = expr(c, k.args.front(), params, depth);
            if (v.verdict != Verdict::Derivable) {
                return propagate(v);
            }
            Config out = std::move(v.after);
            out.state.output.push_back(v.value->is_int() ? std::to_string(v.value->as_int()) : v.value->as_str());
            return GoalResult::derived(std::move(out), "print");
        }
        auto it = program_.defs.find(DefKey{k.name, k.args.size()});
        if (it == program_.defs.end()) {
            return GoalResult::refuted(sys_tree(sys_failure::kUndefined), "4");
        }
        const Def& def = it->second;
        Config cur = c;
        Params instantiated;
        for (std::size_t i = 0; i < k.args.size(); ++i) {
            ExprResultV v = expr(cur, k.args[i], params, depth);
            if (v.verdict != Verdict::Derivable) {
                return propagate(v);
            }
            cur = std::move(v.after);
            instantiated.insert_or_assign(def.params[i], *v.value);
        }
        return relabel(goal(cur, def.body, instantiated, depth + 1), "4");
    }

    ExprResultV expr(const Config& c, const Expr& e, const Params& params, std::size_t depth) {
        auto value = [&](Config after, Value v) {
            return ExprResultV{Verdict::Derivable, std::move(after), std::move(v), {}};
        };
        auto fail = [&](ExceptionTree why) { return ExprResultV{Verdict::NotDerivable, {}, std::nullopt, std::move(why)}; };

        if (const auto* i = std::get_if<IntLit>(&e.node)) {
            return value(c, Value(i->value));
        }
        if (const auto* s = std::get_if<StrLit>(&e.node)) {
            return value(c, Value(s->value));
        }
        if (const auto* v = std::get_if<Var>(&e.node)) {
            if (auto p = params.find(v->name); p != params.end()) {
                return value(c, p->second);
            }
            if (auto b = c.state.bindings.find(v->name); b != c.state.bindings.end()) {
                return value(c, b->second);
            }
            return fail(sys_tree(sys_failure::kUnbound));
        }
        if (std::holds_alternative<ReadBuiltin>(e.node)) {
            if (c.state.cursor == c.state.input.size()) {
                return value(c, Value(std::int64_t{-1}));
            }
            Config after = c;
            std::int64_t token = after.state.input[after.state.cursor];
            after.state.cursor += 1;
            return value(std::move(after), Value(token));
        }
        if (const auto* b = std::get_if<Binary>(&e.node)) {
            ExprResultV l = expr(c, *b->left, params, depth);
            if (l.verdict != Verdict::Derivable) {
                return l;
            }
            ExprResultV r = expr(l.after, *b->right, params, depth);
            if (r.verdict != Verdict::Derivable) {
                return r;
            }
            if (!l.value->is_int() || !r.value->is_int()) {
                return fail(sys_tree(sys_failure::kTest));
            }
            Wide x = l.value->as_int();
            Wide y = r.value->as_int();
            Wide z = 0;
            switch (b->op) {
            case ArithOp::Add: z = x + y; break;
            case ArithOp::Sub: z = x - y; break;
            case ArithOp::Mul: z = x * y; break;
            case ArithOp::Div:
                if (y == 0) {
                    return fail(sys_tree(sys_failure::kDivZero));
                }
                z = x / y;
                break;
            }
            // Reduce modulo 2^64 into the signed range.
            auto wrapped = static_cast<std::int64_t>(static_cast<std::uint64_t>(static_cast<UWide>(z)));
            return value(std::move(r.after), Value(wrapped));
        }
        const auto& k = std::get<CallExpr>(e.node);
        Config cur = c;
        std::vector<Expr> literal_args;
        for (const auto& a : k.args) {
            ExprResultV v = expr(cur, a, params, depth);
            if (v.verdict != Verdict::Derivable) {
                return v;
            }
            cur = std::move(v.after);
            literal_args.push_back(v.value->is_int() ? Expr{IntLit{v.value->as_int()}} : Expr{StrLit{v.value->as_str()}});
        }
        GoalResult g = goal(cur, Goal{Call{k.name, std::move(literal_args)}}, Params{}, depth + 1);
        if (g.verdict == Verdict::DepthExhausted) {
            return ExprResultV{Verdict::DepthExhausted, {}, std::nullopt, {}};
        }
        if (!g.derivable()) {
            return fail(g.reason);
        }
        auto ret = g.after.state.bindings.find("ret");
        if (ret == g.after.state.bindings.end()) {
            return fail(sys_tree(sys_failure::kUnbound));
        }
        Value rv = ret->second;
        return value(std::move(g.after), std::move(rv));
    }

    static GoalResult propagate(const ExprResultV& r) {
        if (r.verdict == Verdict::DepthExhausted) {
            return GoalResult::exhausted();
        }
        return GoalResult::refuted(r.reason);
    }

    static GoalResult relabel(GoalResult r, const char* rule) {
        r.rule = rule;
        return r;
    }

    const Program& program_;
    const SearchConfig& cfg_;
};

// ---------------------------------------------------------------------------
// generator
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // splitmix64
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::size_t>(hi - lo + 1)));
    }
    bool chance(unsigned percent) { return below(100) < percent; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::uint64_t state_;
};

const std::vector<std::string> kVars = {"a", "b", "c", "ret"};
const std::vector<std::string> kParams = {"u", "v"};

const std::vector<FailPath>& thrown_paths() {
    static const std::vector<FailPath> paths = {
        FailPath(),
        FailPath::user({"e1"}),
        FailPath::user({"e2"}),
        FailPath::user({"e1", "sub"}),
        FailPath::sys(sys_failure::kTest),
    };
    return paths;
}

const std::vector<FailPath>& handler_patterns() {
    static const std::vector<FailPath> paths = {
        FailPath(),
        FailPath::under_root({"usr"}),
        FailPath::user({"e1"}),
        FailPath::user({"e2"}),
        FailPath::under_root({"sys"}),
        FailPath::sys(sys_failure::kTest),
        FailPath::sys(sys_failure::kUnbound),
    };
    return paths;
}

struct Callee {
    Identifier name;
    std::size_t arity;
};

class Generator {
public:
    Generator(Rng& rng, std::vector<Callee> callees, std::vector<Identifier> params)
        : rng_(rng), callees_(std::move(callees)), params_(std::move(params)) {}

    // Exactly `size` goal nodes.
    Goal goal(std::size_t size) {
        if (size <= 1) {
            return leaf();
        }
        std::size_t kind = rng_.below(4);
        if (kind == 3 || size == 2) {
            return case_goal(size);
        }
        std::size_t left = 1 + rng_.below(size - 2);
        Goal a = goal(left);
        Goal b = goal(size - 1 - left);
        switch (kind) {
        case 0: return build::seq(std::move(a), std::move(b));
        case 1: return build::alt(std::move(a), std::move(b));
        default: return build::orelse(std::move(a), std::move(b));
        }
    }

    Expr expr(std::size_t depth = 0) {
        std::size_t roll = rng_.below(depth >= 1 ? 10 : 13);
        if (roll < 4) {
            return build::num(rng_.between(-3, 3));
        }
        if (roll < 7) {
            return build::var(variable_or_param());
        }
        if (roll == 7) {
            return build::str(rng_.chance(50) ? "x" : "y");
        }
        if (roll == 8) {
            return build::read();
        }
        if (roll == 9) {
            if (!callees_.empty()) {
                const Callee& c = rng_.pick(callees_);
                return build::call_expr(c.name, args(c.arity, depth + 1));
            }
            return build::num(rng_.between(-3, 3));
        }
        static const std::vector<ArithOp> ops = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div};
        Expr l = expr(depth + 1);
        Expr r = expr(depth + 1);
        return build::arith(rng_.pick(ops), std::move(l), std::move(r));
    }

private:
    Identifier variable_or_param() {
        if (!params_.empty() && rng_.chance(40)) {
            return rng_.pick(params_);
        }
        return rng_.pick(kVars);
    }

    std::vector<Expr> args(std::size_t n, std::size_t depth) {
        std::vector<Expr> out;
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(expr(depth));
        }
        return out;
    }

    Goal leaf() {
        switch (rng_.below(8)) {
        case 0: return build::truth();
        case 1: return build::fail(rng_.pick(thrown_paths()));
        case 2:
        case 3: return build::assign(rng_.pick(kVars), expr());
        case 4:
        case 5: {
            static const std::vector<RelOp> ops = {RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge};
            Expr l = expr(1);
            Expr r = expr(1);
            return build::test(std::move(l), rng_.pick(ops), std::move(r));
        }
        case 6: return build::call("print", {expr(1)});
        default: {
            if (callees_.empty() || rng_.chance(15)) {
                // Unknown procedure or wrong arity.
                return build::call(rng_.chance(50) ? "r" : "p", args(3, 1));
            }
            const Callee& c = rng_.pick(callees_);
            return build::call(c.name, args(c.arity, 1));
        }
        }
    }

    Goal case_goal(std::size_t size) {
        // One node for the case itself; the rest is spread over arm bodies.
        std::size_t budget = size - 1;
        std::size_t arms = std::min<std::size_t>(budget, 1 + rng_.below(2));
        bool fallback = budget > arms && rng_.chance(50);
        std::size_t bodies = arms + (fallback ? 1 : 0);
        std::vector<std::size_t> sizes(bodies, 1);
        for (std::size_t extra = budget - bodies; extra > 0; --extra) {
            sizes[rng_.below(bodies)] += 1;
        }
        std::vector<CaseArm> out;
        for (std::size_t i = 0; i < arms; ++i) {
            out.push_back(CaseArm{rng_.pick(handler_patterns()), goal(sizes[i])});
        }
        std::optional<Goal> def;
        if (fallback) {
            def = goal(sizes.back());
        }
        return build::case_of(std::move(out), std::move(def));
    }

    Rng& rng_;
    std::vector<Callee> callees_;
    std::vector<Identifier> params_;
};

}  // namespace

Derivation derive_bounded(const Program& p, const StateValue& s, const Goal& g, const SearchConfig& cfg) {
    Search search(p, cfg);
    GoalResult r = search.goal(Config{s, std::nullopt}, g, Params{}, 1);
    Derivation d;
    d.verdict = r.verdict;
    d.rule = r.rule;
    if (r.verdict == Verdict::Derivable) {
        d.final_state = std::move(r.after.state);
    } else if (r.verdict == Verdict::NotDerivable) {
        d.reason = std::move(r.reason);
    }
    return d;
}

Instance gen_program(std::uint64_t seed, std::size_t size_bound) {
    Rng rng(seed);
    Instance inst{Program{{}, build::truth()}, StateValue{}};

    std::vector<Callee> callees;
    std::size_t ndefs = rng.below(3);
    static const std::vector<Identifier> names = {"p", "q"};
    std::size_t body_bound = std::max<std::size_t>(1, std::min<std::size_t>(size_bound, 3));
    for (std::size_t i = 0; i < ndefs; ++i) {
        std::size_t arity = rng.below(3);
        std::vector<Identifier> params(kParams.begin(), kParams.begin() + static_cast<std::ptrdiff_t>(arity));
        // Later definitions may call earlier ones only, so the call graph is acyclic.
        Generator gen(rng, callees, params);
        Def d{names[i], params, gen.goal(1 + rng.below(body_bound))};
        callees.push_back(Callee{d.name, arity});
        inst.program.defs.emplace(DefKey{d.name, arity}, std::move(d));
    }

    Generator gen(rng, callees, {});
    inst.program.main = gen.goal(1 + rng.below(std::max<std::size_t>(1, size_bound)));

    std::size_t nbind = rng.below(4);
    for (std::size_t i = 0; i < nbind; ++i) {
        Value v = rng.chance(85) ? Value(rng.between(-3, 3)) : Value(std::string("x"));
        inst.state.bindings.insert_or_assign(rng.pick(kVars), v);
    }
    std::size_t ninput = rng.below(4);
    for (std::size_t i = 0; i < ninput; ++i) {
        inst.state.input.push_back(rng.between(-1, 3));
    }
    return inst;
}

Goal gen_goal(std::uint64_t seed, std::size_t size_bound, const Program& context) {
    Rng rng(seed ^ 0x5DEECE66DULL);
    std::vector<Callee> callees;
    for (const auto& [key, def] : context.defs) {
        callees.push_back(Callee{key.first, key.second});
    }
    Generator gen(rng, std::move(callees), {});
    return gen.goal(1 + rng.below(std::max<std::size_t>(1, size_bound)));
}

}  // namespace tasklogic::oracle
