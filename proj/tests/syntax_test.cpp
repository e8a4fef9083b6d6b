#include <gtest/gtest.h>

#include "support/random_ast.hpp"
#include "tasklogic/parser.hpp"
#include "tasklogic/syntax.hpp"

using namespace tasklogic;
using namespace tasklogic::build;

namespace {

const char* kFactorialDef = "factorial(n) = (n == 0; ret = 1) else ret = n * factorial(n - 1)\nmain t";

}  // namespace

TEST(Substitute, ReplacesParameterInTest) {
    Goal g = test(var("n"), RelOp::Ne, num(-1));
    EXPECT_EQ(substitute(g, {{"n", num(3)}}), test(num(3), RelOp::Ne, num(-1)));
}

TEST(Substitute, TrueHasNothingToReplace) {
    EXPECT_EQ(substitute(truth(), {{"n", num(3)}}), truth());
}

TEST(Substitute, FactorialBodyAtFour) {
    Program p = parse_program(kFactorialDef);
    const Def* def = p.find("factorial", 1);
    ASSERT_NE(def, nullptr);
    // Every occurrence of n replaced by 4, by hand.
    Goal expected = orelse(seq(test(num(4), RelOp::Eq, num(0)), assign("ret", num(1))),
                           assign("ret", arith(ArithOp::Mul, num(4),
                                               call_expr("factorial", {arith(ArithOp::Sub, num(4), num(1))}))));
    EXPECT_EQ(substitute(def->body, {{"n", num(4)}}), expected);
}

TEST(Substitute, LeavesOtherVariablesAlone) {
    Goal g = seq(assign("x", var("y")), test(var("n"), RelOp::Lt, var("x")));
    EXPECT_EQ(substitute(g, {{"n", str("s")}}), seq(assign("x", var("y")), test(str("s"), RelOp::Lt, var("x"))));
}

TEST(Substitute, ReachesCaseArmsAndCallArguments) {
    Goal g = case_of({CaseArm{FailPath::user({"EOF"}), call("p", {var("n")})}}, assign("y", var("n")));
    Goal want = case_of({CaseArm{FailPath::user({"EOF"}), call("p", {num(7)})}}, assign("y", num(7)));
    EXPECT_EQ(substitute(g, {{"n", num(7)}}), want);
}

TEST(Substitute, AssignmentTargetIsAnError) {
    Goal g = seq(truth(), assign("n", num(1)));
    EXPECT_THROW(substitute(g, {{"n", num(3)}}), SubstitutionIntoAssignTarget);
}

TEST(PrettyPrint, Examples) {
    EXPECT_EQ(pretty_print(alt(truth(), fail())), "t | f");
    EXPECT_EQ(pretty_print(seq(assign("x", num(3)), truth())), "x = 3; t");
    EXPECT_EQ(pretty_print(orelse(seq(truth(), truth()), truth())), "(t; t) else t");
}

TEST(PrettyPrint, FailurePaths) {
    EXPECT_EQ(pretty_print(fail()), "f");
    EXPECT_EQ(pretty_print(fail(FailPath::user({"EOF"}))), "f(EOF)");
    EXPECT_EQ(pretty_print(fail(FailPath::user({"io", "disk"}))), "f(io/disk)");
    EXPECT_EQ(pretty_print(fail(FailPath::sys("test"))), "f(/F/sys/test)");
}

TEST(PrettyPrint, ExpressionParentheses) {
    Expr e = arith(ArithOp::Sub, var("a"), arith(ArithOp::Sub, var("b"), var("c")));
    EXPECT_EQ(pretty_print(e), "a - (b - c)");
    Expr m = arith(ArithOp::Mul, arith(ArithOp::Add, var("a"), num(1)), num(-2));
    EXPECT_EQ(pretty_print(m), "(a + 1) * -2");
    EXPECT_EQ(pretty_print(str("say \"hi\"\n")), "\"say \\\"hi\\\"\\n\"");
}

TEST(FreeVars, Examples) {
    EXPECT_EQ(free_vars(parse_goal("x = 3; y = x + 1")), (std::set<Identifier>{"x", "y"}));
    EXPECT_TRUE(free_vars(truth()).empty());
    EXPECT_EQ(free_vars(parse_goal("(x=1) | (y=2)")), (std::set<Identifier>{"x", "y"}));
}

TEST(FreeVars, IncludesArgumentsButNotProcedureNames) {
    EXPECT_EQ(free_vars(parse_goal("p(a, q(b)) | read() == c")), (std::set<Identifier>{"a", "b", "c"}));
}

TEST(SubstituteProperty, IdempotentWhenKeysNoLongerOccur) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        fuzz::RandomAst gen(seed);
        Goal g = gen.goal();
        Identifier key = gen.ident();
        // Values built from literals and variables other than the key.
        Expr value = gen.expr(2);
        if (free_vars(value).contains(key)) {
            continue;
        }
        Bindings m{{key, value}};
        Goal once;
        try {
            once = substitute(g, m);
        } catch (const SubstitutionIntoAssignTarget&) {
            continue;
        }
        EXPECT_EQ(substitute(once, m), once) << pretty_print(g);
    }
}

TEST(SubstituteProperty, FreeVarsShrinkToArgumentVars) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        fuzz::RandomAst gen(seed + 10'000);
        Goal g = gen.goal();
        Identifier key = gen.ident();
        Expr value = gen.expr(2);
        Goal out;
        try {
            out = substitute(g, {{key, value}});
        } catch (const SubstitutionIntoAssignTarget&) {
            continue;
        }
        std::set<Identifier> allowed = free_vars(g);
        allowed.erase(key);
        for (const auto& v : free_vars(value)) {
            allowed.insert(v);
        }
        for (const auto& v : free_vars(out)) {
            EXPECT_TRUE(allowed.contains(v)) << v << " in " << pretty_print(out);
        }
    }
}

TEST(GoalSize, CountsGoalNodesOnly) {
    EXPECT_EQ(goal_size(parse_goal("x = 1 + 2 * 3")), 1u);
    EXPECT_EQ(goal_size(parse_goal("a(); b() else c()")), 5u);
    EXPECT_EQ(goal_size(parse_goal("case Failtree of { /F: t; _: f }")), 3u);
}
