#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tasklogic/failure.hpp"
#include "tasklogic/store.hpp"
#include "tasklogic/syntax.hpp"

namespace tasklogic {

inline constexpr std::uint64_t kDefaultMaxSteps = 1'000'000;

/// Goal evaluations still allowed. Each eval_goal entry costs one step;
/// an entry with no steps left fails with /F/sys/depth.
struct Budget {
    std::uint64_t remaining_steps = kDefaultMaxSteps;
};

/// Result of running a goal: success, or failure with its exception tree.
/// The store itself is the live one passed to the evaluator.
class Outcome {
public:
    static Outcome success() { return Outcome(std::nullopt); }
    static Outcome failure(ExceptionTree tree) { return Outcome(std::move(tree)); }

    bool ok() const { return !tree_.has_value(); }
    /// Only valid on failure.
    const ExceptionTree& tree() const { return *tree_; }

    bool operator==(const Outcome&) const = default;

private:
    explicit Outcome(std::optional<ExceptionTree> tree) : tree_(std::move(tree)) {}
    std::optional<ExceptionTree> tree_;
};

using ExprResult = std::variant<Value, ExceptionTree>;

/// One step of a derivation. `rule` is "1".."11" for the numbered execution
/// rules, or one of "fail", "test", "case", "call-expr", "print", "union"
/// (both operands failed) and "budget".
struct TraceNode {
    std::string rule;
    std::string goal;
    std::optional<ExceptionTree> failure;
    std::vector<TraceNode> children;

    bool operator==(const TraceNode&) const = default;
};

/// `[rule N] <goal> => success | failure(<paths>)`, one line per node,
/// two spaces of indent per level.
std::string format_trace(const TraceNode& root);

/// Deterministic big-step evaluator. Every goal runs inside its own store
/// checkpoint: success commits into the caller's checkpoint, failure rolls
/// back to the state at entry.
class Evaluator {
public:
    Evaluator(const Program& program, Store& store, Budget& budget, bool trace = false);

    Outcome eval_goal(const Goal& g);
    /// Failures do not roll back here; the enclosing goal does.
    ExprResult eval_expr(const Expr& e);

    /// Top-level trace nodes recorded so far (tracing enabled only).
    const std::vector<TraceNode>& trace() const { return trace_stack_.front().children; }

private:
    class TraceScope;

    Outcome dispatch(const Goal& g, std::string& rule);
    Outcome eval_call(const Call& c, std::string& rule);
    Outcome eval_case(const Case& c);
    Outcome eval_test(const Test& t);

    const Program& program_;
    Store& store_;
    Budget& budget_;
    bool tracing_;
    std::size_t nesting_ = 0;

    // Ambient Failtree per active else-handler; nullopt once consumed by a case arm.
    std::vector<std::optional<ExceptionTree>> failtrees_;
    // Consumed handler trees, undone when the enclosing goal fails.
    std::vector<ExceptionTree> consumed_;

    std::vector<TraceNode> trace_stack_;
};

/// Run on a dedicated large stack; the Evaluator methods use the caller's.
Outcome eval_goal(const Program& p, Store& s, const Goal& g, Budget& b);
ExprResult eval_expr(const Program& p, Store& s, const Expr& e, Budget& b);

struct RunResult {
    Outcome outcome = Outcome::success();
    StoreSnapshot store;                // final state on success, initial state on failure
    std::vector<std::string> output;    // flushed lines; empty on failure
    std::uint64_t steps_used = 0;
    std::optional<TraceNode> trace;
};

/// Runs `main` on a fresh store inside a base checkpoint.
RunResult run_main(const Program& p, std::vector<std::int64_t> input, std::uint64_t max_steps = kDefaultMaxSteps,
                   bool trace = false);

/// A union whose operands touch common variables.
struct LintWarning {
    std::string where;  // "main" or "name/arity"
    std::string goal;
    std::set<Identifier> shared;

    std::string message() const;
};

std::vector<LintWarning> lint(const Program& p);

}  // namespace tasklogic
