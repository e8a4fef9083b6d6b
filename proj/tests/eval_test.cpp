#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "tasklogic/eval.hpp"
#include "tasklogic/oracle.hpp"
#include "tasklogic/parser.hpp"

using namespace tasklogic;

namespace {

const char* kLibrary = R"(
openfile() = t
readfile() = read() != -1 else f(EOF)
factorial(n) = (n == 0; ret = 1) else ret = n * factorial(n - 1)
)";

Program library() {
    return parse_program(std::string(kLibrary) + "main t");
}

Outcome eval(const Program& p, Store& s, const std::string& goal) {
    Budget b;
    return eval_goal(p, s, parse_goal(goal), b);
}

Outcome eval(Store& s, const std::string& goal) {
    return eval(library(), s, goal);
}

ExceptionTree tree(std::initializer_list<const char*> paths) {
    ExceptionTree t;
    for (const char* p : paths) {
        t.insert(FailPath::parse(p));
    }
    return t;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(EvalGoal, Truth) {
    Store s;
    EXPECT_TRUE(eval(s, "t").ok());
    EXPECT_TRUE(s.bindings().empty());
}

TEST(EvalGoal, UnionTruthTable) {
    Store s;
    EXPECT_TRUE(eval(s, "f | t").ok());
    EXPECT_TRUE(eval(s, "t | f").ok());
    Outcome both = eval(s, "f | f");
    ASSERT_FALSE(both.ok());
    EXPECT_EQ(both.tree(), tree({"/F"}));
    Outcome merged = eval(s, "f(EOF) | 1 == 2");
    ASSERT_FALSE(merged.ok());
    EXPECT_EQ(merged.tree(), tree({"/F/usr/EOF", "/F/sys/test"}));
}

TEST(EvalGoal, UnionKeepsBothEffects) {
    Store s;
    ASSERT_TRUE(eval(s, "(x = 1) | (y = 2)").ok());
    EXPECT_EQ(s.bindings(), (std::map<Identifier, Value>{{"x", 1}, {"y", 2}}));
}

TEST(EvalGoal, UnionSecondSeesFirst) {
    Store s;
    ASSERT_TRUE(eval(s, "(x = 1) | (y = x + 1)").ok());
    EXPECT_EQ(*s.lookup("y"), Value(2));
}

TEST(EvalGoal, ElseHandlerSeesRolledBackStore) {
    Store s;
    s.bind("x", 0);
    ASSERT_TRUE(eval(s, "(x = 5; f) else t").ok());
    EXPECT_EQ(*s.lookup("x"), Value(0));
}

TEST(EvalGoal, FailedSequenceRollsBack) {
    Store s({1, 2});
    s.bind("x", 0);
    s.emit_output("before");
    StoreSnapshot before = s.snapshot();
    Outcome out = eval(s, "x = 5; y = read(); print(y); z = read(); 1 == 2");
    ASSERT_FALSE(out.ok());
    EXPECT_EQ(out.tree(), tree({"/F/sys/test"}));
    EXPECT_EQ(s.snapshot(), before);
}

TEST(EvalGoal, HandlerProgramWithInput) {
    Store s({10, -1});
    ASSERT_TRUE(eval(s, R"((openfile(); readfile() else case Failtree of {
        /F/sys: status = "sys"; /F/usr/EOF: status = "eof" }); x = factorial(4))")
                    .ok());
    EXPECT_EQ(s.lookup("status"), nullptr);
    EXPECT_EQ(*s.lookup("x"), Value(24));
    EXPECT_EQ(s.cursor(), 1u);
}

TEST(EvalGoal, HandlerProgramAtEndOfInput) {
    Store s;
    ASSERT_TRUE(eval(s, R"((openfile(); readfile() else case Failtree of {
        /F/sys: status = "sys"; /F/usr/EOF: status = "eof" }); x = factorial(4))")
                    .ok());
    EXPECT_EQ(*s.lookup("status"), Value("eof"));
    EXPECT_EQ(*s.lookup("x"), Value(24));
}

TEST(EvalGoal, OptionalReadAtEndOfInput) {
    Store s;
    ASSERT_TRUE(eval(s, "(openfile(); readfile()) | x = factorial(4)").ok());
    EXPECT_EQ(*s.lookup("x"), Value(24));
}

TEST(EvalGoal, SystemFailures) {
    Store s;
    EXPECT_EQ(eval(s, "x = y").tree(), tree({"/F/sys/unbound"}));
    EXPECT_EQ(eval(s, "x = 1 / 0").tree(), tree({"/F/sys/div0"}));
    EXPECT_EQ(eval(s, "nosuch()").tree(), tree({"/F/sys/undef"}));
    EXPECT_EQ(eval(s, "case Failtree of { /F: t }").tree(), tree({"/F/sys/case"}));
    EXPECT_EQ(eval(s, "\"a\" < \"b\"").tree(), tree({"/F/sys/test"}));
    EXPECT_EQ(eval(s, "x = \"a\" + 1").tree(), tree({"/F/sys/test"}));
}

TEST(EvalGoal, CaseDispatch) {
    Store s;
    ASSERT_TRUE(eval(s, "f(io/disk) else case Failtree of { /F/sys: r = 1; /F/usr/io: r = 2; _: r = 3 }").ok());
    EXPECT_EQ(*s.lookup("r"), Value(2));
    ASSERT_TRUE(eval(s, "1 == 2 else case Failtree of { /F/usr: r = 1; _: r = 3 }").ok());
    EXPECT_EQ(*s.lookup("r"), Value(3));
    // No arm and no default: the handled tree propagates.
    Outcome out = eval(s, "f(a) else case Failtree of { /F/sys: t }");
    ASSERT_FALSE(out.ok());
    EXPECT_EQ(out.tree(), tree({"/F/usr/a"}));
    // First matching arm wins.
    ASSERT_TRUE(eval(s, "f(a/b) else case Failtree of { /F/usr: r = 10; /F/usr/a: r = 20 }").ok());
    EXPECT_EQ(*s.lookup("r"), Value(10));
}

TEST(EvalGoal, CaseConsumesAmbientTree) {
    Store s;
    // The inner case sees no tree once the outer arm has consumed it.
    Outcome out = eval(s, "f(a) else case Failtree of { /F/usr/a: case Failtree of { /F: t } }");
    ASSERT_FALSE(out.ok());
    EXPECT_EQ(out.tree(), tree({"/F/sys/case"}));
    // A failed arm restores the tree for a later case in the same handler.
    ASSERT_TRUE(eval(s, "f(a) else ((case Failtree of { /F/usr/a: 1 == 2 }) | "
                        "(case Failtree of { /F/usr/a: r = 7 }))")
                    .ok());
    EXPECT_EQ(*s.lookup("r"), Value(7));
}

TEST(EvalGoal, NestedElseShadowsTree) {
    Store s;
    ASSERT_TRUE(eval(s, "f(outer) else ((f(inner) else case Failtree of { /F/usr/inner: r = 1 }); "
                        "case Failtree of { /F/usr/outer: q = 2 })")
                    .ok());
    EXPECT_EQ(*s.lookup("r"), Value(1));
    EXPECT_EQ(*s.lookup("q"), Value(2));
}

TEST(EvalGoal, PrintBuffersUntilSuccess) {
    Store s;
    s.checkpoint();
    ASSERT_TRUE(eval(s, "(print(\"a\"); f) | print(3)").ok());
    s.commit();
    EXPECT_EQ(s.output(), std::vector<std::string>{"3"});
}

TEST(EvalGoal, ArithmeticWrapsAndTruncates) {
    Store s;
    ASSERT_TRUE(eval(s, "a = 9223372036854775807 + 1; b = -7 / 2; c = 7 / -2; d = -9223372036854775808 / -1").ok());
    EXPECT_EQ(*s.lookup("a"), Value(INT64_MIN));
    EXPECT_EQ(*s.lookup("b"), Value(-3));
    EXPECT_EQ(*s.lookup("c"), Value(-3));
    EXPECT_EQ(*s.lookup("d"), Value(INT64_MIN));
}

TEST(EvalGoal, ArgumentsAreValues) {
    Program p = parse_program("inc(n) = ret = n + 1\nmain t");
    Store s;
    s.bind("k", 4);
    ASSERT_TRUE(eval(p, s, "inc(k); k = 100; m = ret").ok());
    EXPECT_EQ(*s.lookup("m"), Value(5));
}

TEST(EvalGoal, ArityDistinguishesProcedures) {
    Program p = parse_program("p() = r = 0\np(a) = r = a\nmain t");
    Store s;
    ASSERT_TRUE(eval(p, s, "p(); x = r; p(9); y = r").ok());
    EXPECT_EQ(*s.lookup("x"), Value(0));
    EXPECT_EQ(*s.lookup("y"), Value(9));
}

TEST(EvalExpr, Examples) {
    Program p = library();
    Budget b;
    Store s;
    s.bind("x", 3);
    EXPECT_EQ(eval_expr(p, s, parse_expr("x + 1"), b), ExprResult(Value(4)));
    EXPECT_EQ(eval_expr(p, s, parse_expr("6 / 0"), b), ExprResult(tree({"/F/sys/div0"})));
    EXPECT_EQ(eval_expr(p, s, parse_expr("factorial(4)"), b), ExprResult(Value(24)));
}

TEST(EvalExpr, CallWithoutRetIsUnbound) {
    Program p = parse_program("noop() = t\nmain t");
    Budget b;
    Store s;
    EXPECT_EQ(eval_expr(p, s, parse_expr("noop()"), b), ExprResult(tree({"/F/sys/unbound"})));
}

TEST(RunMain, Basics) {
    EXPECT_TRUE(run_main(parse_program("main t"), {}).outcome.ok());
    RunResult r = run_main(parse_program("main f(EOF)"), {});
    ASSERT_FALSE(r.outcome.ok());
    EXPECT_EQ(r.outcome.tree(), tree({"/F/usr/EOF"}));
    EXPECT_TRUE(r.store.bindings.empty());
    EXPECT_TRUE(r.output.empty());
}

TEST(RunMain, OutputFlushedOnSuccessOnly) {
    RunResult ok = run_main(parse_program("main print(\"hi\"); print(2)"), {});
    EXPECT_EQ(ok.output, (std::vector<std::string>{"hi", "2"}));
    RunResult bad = run_main(parse_program("main print(\"hi\"); f"), {});
    EXPECT_TRUE(bad.output.empty());
}

TEST(RunMain, BudgetExhaustion) {
    Program p = parse_program("loop() = loop()\nmain loop()");
    RunResult r = run_main(p, {}, 1000);
    ASSERT_FALSE(r.outcome.ok());
    EXPECT_EQ(r.outcome.tree(), tree({"/F/sys/depth"}));
    EXPECT_LE(r.steps_used, 1000u);
}

TEST(RunMain, DepthFailureIsCatchable) {
    Program p = parse_program("loop() = loop()\nmain loop() | x = 2");
    RunResult r = run_main(p, {});
    ASSERT_TRUE(r.outcome.ok());
    EXPECT_EQ(r.store.bindings.at("x"), Value(2));
}

TEST(RunMain, DeepRecursion) {
    Program p = parse_program("down(n) = n == 0 else down(n - 1)\nmain down(20000)");
    EXPECT_TRUE(run_main(p, {}).outcome.ok());
}

TEST(RunMain, TraceRules) {
    RunResult r = run_main(parse_program(std::string(kLibrary) + "main (openfile(); readfile()) | x = factorial(4)"),
                           {}, kDefaultMaxSteps, true);
    ASSERT_TRUE(r.trace.has_value());
    std::string text = format_trace(*r.trace);
    EXPECT_EQ(text.rfind("[rule 8] ", 0), 0u) << text;
    EXPECT_NE(text.find("[rule 3] factorial(4)"), std::string::npos);
    EXPECT_NE(text.find("[rule 2] factorial(4)"), std::string::npos);
    EXPECT_NE(text.find("[rule 11]"), std::string::npos);
    EXPECT_NE(text.find("failure(/F/usr/EOF)"), std::string::npos);
}

TEST(EvalLaws, ElseIdentityAndAbsorption) {
    Program ctx = library();
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Goal g = oracle::gen_goal(seed, 5, ctx);
        if (has_unguarded_case(g)) {
            continue;
        }
        Store base({1, 2});
        base.bind("a", 1);

        Store s1 = base, s2 = base;
        Budget b1, b2;
        Outcome plain = eval_goal(ctx, s1, g, b1);
        Outcome fail_else = eval_goal(ctx, s2, build::orelse(build::fail(), g), b2);
        ASSERT_EQ(plain, fail_else) << pretty_print(g);
        ASSERT_EQ(s1.snapshot(), s2.snapshot());

        Store s3 = base;
        Budget b3;
        Outcome t_else = eval_goal(ctx, s3, build::orelse(build::truth(), g), b3);
        ASSERT_TRUE(t_else.ok());
        ASSERT_EQ(s3.snapshot(), base.snapshot());
    }
}

TEST(EvalLaws, UnguardedCaseSeesHandlerTree) {
    Store s1, s2;
    Goal g = parse_goal("case Failtree of { /F: x = 1 }");
    EXPECT_EQ(eval(s1, pretty_print(g)).tree(), tree({"/F/sys/case"}));
    EXPECT_TRUE(eval(s2, "f else " + pretty_print(g)).ok());
    EXPECT_TRUE(has_unguarded_case(g));
    EXPECT_FALSE(has_unguarded_case(parse_goal("t else case Failtree of { /F: t }")));
    EXPECT_TRUE(has_unguarded_case(parse_goal("(case Failtree of { /F: t }) else t")));
}

TEST(EvalLaws, SeqAssociative) {
    Program ctx = library();
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Goal a = oracle::gen_goal(seed * 3, 3, ctx);
        Goal b = oracle::gen_goal(seed * 3 + 1, 3, ctx);
        Goal c = oracle::gen_goal(seed * 3 + 2, 3, ctx);
        Store s1({2, 3}), s2({2, 3});
        Budget b1, b2;
        Outcome left = eval_goal(ctx, s1, build::seq(build::seq(a, b), c), b1);
        Outcome right = eval_goal(ctx, s2, build::seq(a, build::seq(b, c)), b2);
        ASSERT_EQ(left, right);
        ASSERT_EQ(s1.snapshot(), s2.snapshot());
    }
}

TEST(EvalProperty, RollbackOnEveryFailure) {
    std::size_t failures = 0;
    for (std::uint64_t seed = 0; failures < 1000 && seed < 20000; ++seed) {
        oracle::Instance inst = oracle::gen_program(seed, 6);
        Store s(inst.state.input);
        for (const auto& [k, v] : inst.state.bindings) {
            s.bind(k, v);
        }
        s.read_input();
        s.emit_output("pre");
        StoreSnapshot before = s.snapshot();
        Budget b;
        if (!eval_goal(inst.program, s, inst.program.main, b).ok()) {
            ++failures;
            ASSERT_EQ(s.snapshot(), before) << pretty_print(inst.program);
        }
        ASSERT_EQ(s.undo_depth(), 0u);
    }
    EXPECT_GE(failures, 1000u);
}

TEST(EvalProperty, Deterministic) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        oracle::Instance inst = oracle::gen_program(seed, 6);
        RunResult a = run_main(inst.program, inst.state.input, kDefaultMaxSteps, true);
        RunResult b = run_main(inst.program, inst.state.input, kDefaultMaxSteps, true);
        ASSERT_EQ(a.outcome, b.outcome);
        ASSERT_EQ(a.store, b.store);
        ASSERT_EQ(a.trace, b.trace);
    }
}

TEST(Lint, SharedVariablesInUnion) {
    auto warnings = lint(parse_program("main (x = 1) | (x = 2)"));
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_EQ(warnings[0].where, "main");
    EXPECT_EQ(warnings[0].shared, std::set<Identifier>{"x"});
    EXPECT_TRUE(lint(parse_program("main (x = 1) | (y = 2)")).empty());
    EXPECT_EQ(lint(parse_program("p() = (a = 1) | (b = a)\nmain t")).at(0).where, "p/0");
}

TEST(Golden, ProgramsParse) {
    for (const char* name : {"handler.tc", "optional.tc"}) {
        EXPECT_NO_THROW(parse_program(slurp(std::string(TASKLOGIC_GOLDEN_DIR) + "/" + name))) << name;
    }
}
