#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "tasklogic/driver.hpp"
#include "tasklogic/oracle.hpp"
#include "tasklogic/parser.hpp"

using namespace tasklogic;
using namespace tasklogic::oracle;

namespace {

Derivation derive(const std::string& goal, StateValue s = {}, const std::string& defs = "") {
    Program p = parse_program(defs + "\nmain t");
    return derive_bounded(p, s, parse_goal(goal));
}

void collect_calls(const Goal& g, std::set<DefKey>& out);

void collect_calls(const Expr& e, std::set<DefKey>& out) {
    if (const auto* c = std::get_if<CallExpr>(&e.node)) {
        out.insert({c->name, c->args.size()});
        for (const auto& a : c->args) {
            collect_calls(a, out);
        }
    } else if (const auto* b = std::get_if<Binary>(&e.node)) {
        collect_calls(*b->left, out);
        collect_calls(*b->right, out);
    }
}

void collect_calls(const Goal& g, std::set<DefKey>& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Seq> || std::is_same_v<N, Union>) {
                collect_calls(*n.first, out);
                collect_calls(*n.second, out);
            } else if constexpr (std::is_same_v<N, Else>) {
                collect_calls(*n.tried, out);
                collect_calls(*n.handler, out);
            } else if constexpr (std::is_same_v<N, Case>) {
                for (const auto& arm : n.arms) {
                    collect_calls(*arm.body, out);
                }
                if (n.fallback) {
                    collect_calls(**n.fallback, out);
                }
            } else if constexpr (std::is_same_v<N, Call>) {
                out.insert({n.name, n.args.size()});
                for (const auto& a : n.args) {
                    collect_calls(a, out);
                }
            } else if constexpr (std::is_same_v<N, Assign>) {
                collect_calls(n.expr, out);
            } else if constexpr (std::is_same_v<N, Test>) {
                collect_calls(n.left, out);
                collect_calls(n.right, out);
            }
        },
        g.node);
}

}  // namespace

TEST(Derive, Examples) {
    EXPECT_EQ(derive("t").verdict, Verdict::Derivable);
    Derivation f = derive("f");
    EXPECT_EQ(f.verdict, Verdict::NotDerivable);
    EXPECT_EQ(f.reason, ExceptionTree{FailPath()});
    Derivation u = derive("f | t");
    EXPECT_EQ(u.verdict, Verdict::Derivable);
    EXPECT_EQ(u.rule, "8");
    EXPECT_EQ(derive("t | f").rule, "9");
    EXPECT_EQ(derive("t | t").rule, "7");
}

TEST(Derive, FinalState) {
    StateValue s;
    s.input = {5};
    Derivation d = derive("x = read(); print(x + 1)", s);
    ASSERT_EQ(d.verdict, Verdict::Derivable);
    EXPECT_EQ(d.final_state->bindings.at("x"), Value(5));
    EXPECT_EQ(d.final_state->cursor, 1u);
    EXPECT_EQ(d.final_state->output, std::vector<std::string>{"6"});
}

TEST(Derive, HandlerAndCall) {
    const char* defs = "readfile() = read() != -1 else f(EOF)\n"
                       "factorial(n) = (n == 0; ret = 1) else ret = n * factorial(n - 1)";
    Derivation d = derive("readfile() else case Failtree of { /F/usr/EOF: s = 1 }", {}, defs);
    ASSERT_EQ(d.verdict, Verdict::Derivable);
    EXPECT_EQ(d.final_state->bindings.at("s"), Value(1));

    Derivation fact = derive_bounded(parse_program(std::string(defs) + "\nmain t"), {},
                                     parse_goal("x = factorial(2)"), SearchConfig{40, 3});
    ASSERT_EQ(fact.verdict, Verdict::Derivable);
    EXPECT_EQ(fact.final_state->bindings.at("x"), Value(2));
}

TEST(Derive, DepthBound) {
    Program p = parse_program("loop() = loop()\nmain t");
    EXPECT_EQ(derive_bounded(p, {}, parse_goal("loop()")).verdict, Verdict::DepthExhausted);
}

TEST(Derive, TrueDerivableFromAnyStore) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Instance inst = gen_program(seed, 6);
        Derivation d = derive_bounded(inst.program, inst.state, build::truth());
        ASSERT_EQ(d.verdict, Verdict::Derivable);
        ASSERT_EQ(*d.final_state, inst.state);
    }
}

TEST(Generator, Deterministic) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Instance a = gen_program(seed, 6);
        Instance b = gen_program(seed, 6);
        ASSERT_EQ(a.program, b.program);
        ASSERT_EQ(a.state, b.state);
        ASSERT_EQ(gen_goal(seed, 5, a.program), gen_goal(seed, 5, b.program));
    }
}

TEST(Generator, RespectsBoundsAndRoundTrips) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Instance inst = gen_program(seed, 6);
        ASSERT_LE(goal_size(inst.program.main), 6u);
        ASSERT_LE(inst.program.defs.size(), 2u);
        ASSERT_LE(inst.state.input.size(), 3u);
        ASSERT_EQ(inst.state.cursor, 0u);
        ASSERT_TRUE(inst.state.output.empty());
        std::string text = pretty_print(inst.program);
        ASSERT_EQ(parse_program(text), inst.program) << text;
    }
}

TEST(Generator, CallGraphIsAcyclic) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Instance inst = gen_program(seed, 6);
        std::map<DefKey, std::set<DefKey>> edges;
        for (const auto& [key, def] : inst.program.defs) {
            collect_calls(def.body, edges[key]);
        }
        std::set<DefKey> done, active;
        std::function<bool(const DefKey&)> cyclic = [&](const DefKey& n) {
            if (active.count(n)) {
                return true;
            }
            if (done.count(n) || !inst.program.defs.count(n)) {
                return false;
            }
            active.insert(n);
            for (const auto& m : edges[n]) {
                if (cyclic(m)) {
                    return true;
                }
            }
            active.erase(n);
            done.insert(n);
            return false;
        };
        for (const auto& [key, def] : inst.program.defs) {
            ASSERT_FALSE(cyclic(key)) << pretty_print(inst.program);
        }
    }
}

TEST(Agreement, EvaluatorMatchesOracle) {
    SearchConfig cfg;
    std::size_t decided = 0;
    for (std::uint64_t seed = 1000; seed < 3000; ++seed) {
        Instance inst = gen_program(seed, kSelfcheckSize);
        Instance copy = inst;
        Agreement a = compare_with_oracle(inst, cfg);
        ASSERT_TRUE(a.agree) << a.detail;
        ASSERT_EQ(inst.state, copy.state);
        ASSERT_EQ(inst.program, copy.program);
        if (!a.exhausted) {
            ++decided;
        }
    }
    EXPECT_GT(decided, 1950u);
}
