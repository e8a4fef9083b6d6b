#include "tasklogic/eval.hpp"

#include <pthread.h>

#include <exception>
#include <functional>
#include <limits>

namespace tasklogic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Deepest goal nesting before the run fails with /F/sys/depth; sized for
// kEvalStackBytes.
constexpr std::size_t kMaxNesting = 100'000;
constexpr std::size_t kEvalStackBytes = std::size_t{1} << 30;

ExceptionTree sys(const char* leaf) {
    return throw_failure(FailPath::sys(leaf));
}

bool compare(std::int64_t l, RelOp op, std::int64_t r) {
    switch (op) {
    case RelOp::Eq: return l == r;
    case RelOp::Ne: return l != r;
    case RelOp::Lt: return l < r;
    case RelOp::Le: return l <= r;
    case RelOp::Gt: return l > r;
    case RelOp::Ge: return l >= r;
    }
    return false;
}

// Two's-complement wrapping arithmetic; division truncates toward zero.
std::int64_t arith(ArithOp op, std::int64_t l, std::int64_t r) {
    auto ul = static_cast<std::uint64_t>(l);
    auto ur = static_cast<std::uint64_t>(r);
    switch (op) {
    case ArithOp::Add: return static_cast<std::int64_t>(ul + ur);
    case ArithOp::Sub: return static_cast<std::int64_t>(ul - ur);
    case ArithOp::Mul: return static_cast<std::int64_t>(ul * ur);
    case ArithOp::Div:
        if (r == -1) {
            return static_cast<std::int64_t>(0 - ul);
        }
        return l / r;
    }
    return 0;
}

std::string call_text(const Identifier& name, const std::vector<Value>& args) {
    std::string out = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += args[i].repr();
    }
    return out + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// tracing
// ---------------------------------------------------------------------------

class Evaluator::TraceScope {
public:
    TraceScope(Evaluator& ev, std::string text) : ev_(ev) {
        if (ev_.tracing_) {
            ev_.trace_stack_.push_back(TraceNode{{}, std::move(text), std::nullopt, {}});
        }
    }
    TraceScope(const TraceScope&) = delete;
    TraceScope& operator=(const TraceScope&) = delete;

    void finish(std::string rule, const Outcome& out) {
        if (!ev_.tracing_) {
            return;
        }
        TraceNode node = std::move(ev_.trace_stack_.back());
        ev_.trace_stack_.pop_back();
        node.rule = std::move(rule);
        if (!out.ok()) {
            node.failure = out.tree();
        }
        ev_.trace_stack_.back().children.push_back(std::move(node));
    }

private:
    Evaluator& ev_;
};

namespace {

void format_node(const TraceNode& node, std::size_t depth, std::string& out) {
    out.append(depth * 2, ' ');
    out += "[rule " + node.rule + "] " + node.goal + " => ";
    out += node.failure ? "failure(" + node.failure->joined() + ")" : std::string("success");
    out += '\n';
    for (const auto& child : node.children) {
        format_node(child, depth + 1, out);
    }
}

}  // namespace

std::string format_trace(const TraceNode& root) {
    std::string out;
    format_node(root, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// evaluator
// ---------------------------------------------------------------------------

Evaluator::Evaluator(const Program& program, Store& store, Budget& budget, bool trace)
    : program_(program), store_(store), budget_(budget), tracing_(trace) {
    trace_stack_.push_back(TraceNode{});
}

Outcome Evaluator::eval_goal(const Goal& g) {
    TraceScope scope(*this, tracing_ ? pretty_print(g) : std::string());
    if (budget_.remaining_steps == 0 || nesting_ >= kMaxNesting) {
        Outcome out = Outcome::failure(sys(sys_failure::kDepth));
        scope.finish("budget", out);
        return out;
    }
    --budget_.remaining_steps;
    ++nesting_;
    store_.checkpoint();
    std::size_t consumed_mark = consumed_.size();

    std::string rule;
    Outcome out = dispatch(g, rule);

    if (out.ok()) {
        store_.commit();
    } else {
        store_.rollback();
        while (consumed_.size() > consumed_mark) {
            failtrees_.back() = std::move(consumed_.back());
            consumed_.pop_back();
        }
    }
    --nesting_;
    scope.finish(std::move(rule), out);
    return out;
}

Outcome Evaluator::dispatch(const Goal& g, std::string& rule) {
    return std::visit(
        overloaded{
            [&](const True&) {
                rule = "1";
                return Outcome::success();
            },
            [&](const Fail& f) {
                rule = "fail";
                return Outcome::failure(throw_failure(f.path));
            },
            [&](const Assign& a) {
                rule = "5";
                ExprResult r = eval_expr(a.expr);
                if (auto* tree = std::get_if<ExceptionTree>(&r)) {
                    return Outcome::failure(std::move(*tree));
                }
                store_.bind(a.var, std::move(std::get<Value>(r)));
                return Outcome::success();
            },
            [&](const Test& t) {
                rule = "test";
                return eval_test(t);
            },
            [&](const Seq& s) {
                rule = "6";
                Outcome first = eval_goal(*s.first);
                if (!first.ok()) {
                    return first;
                }
                return eval_goal(*s.second);
            },
            [&](const Union& u) {
                // The second operand starts from the first one's result when it
                // succeeded (committed) or from the entry state (rolled back).
                Outcome first = eval_goal(*u.first);
#ifdef TASKLOGIC_FAULT_UNION
                if (!first.ok()) {
                    rule = "union";
                    return first;
                }
#endif
                Outcome second = eval_goal(*u.second);
                if (first.ok() && second.ok()) {
                    rule = "7";
                } else if (second.ok()) {
                    rule = "8";
                } else if (first.ok()) {
                    rule = "9";
                } else {
                    rule = "union";
                    return Outcome::failure(merge(first.tree(), second.tree()));
                }
                return Outcome::success();
            },
            [&](const Else& e) {
                Outcome tried = eval_goal(*e.tried);
                if (tried.ok()) {
                    rule = "10";
                    return tried;
                }
                rule = "11";
                std::size_t consumed_mark = consumed_.size();
                failtrees_.emplace_back(tried.tree());
                Outcome handled = eval_goal(*e.handler);
                failtrees_.pop_back();
                consumed_.resize(consumed_mark);
                return handled;
            },
            [&](const Case& c) {
                rule = "case";
                return eval_case(c);
            },
            [&](const Call& c) { return eval_call(c, rule); },
        },
        g.node);
}

Outcome Evaluator::eval_test(const Test& t) {
    ExprResult l = eval_expr(t.left);
    if (auto* tree = std::get_if<ExceptionTree>(&l)) {
        return Outcome::failure(std::move(*tree));
    }
    ExprResult r = eval_expr(t.right);
    if (auto* tree = std::get_if<ExceptionTree>(&r)) {
        return Outcome::failure(std::move(*tree));
    }
    const Value& lv = std::get<Value>(l);
    const Value& rv = std::get<Value>(r);
    bool holds = false;
    if (lv.is_int() && rv.is_int()) {
        holds = compare(lv.as_int(), t.op, rv.as_int());
    } else if (lv.is_str() && rv.is_str()) {
        if (t.op == RelOp::Eq) {
            holds = lv.as_str() == rv.as_str();
        } else if (t.op == RelOp::Ne) {
            holds = lv.as_str() != rv.as_str();
        }
    }
    return holds ? Outcome::success() : Outcome::failure(sys(sys_failure::kTest));
}

Outcome Evaluator::eval_case(const Case& c) {
    const std::optional<ExceptionTree>* ambient = failtrees_.empty() ? nullptr : &failtrees_.back();
    if (ambient == nullptr || !ambient->has_value()) {
        if (c.fallback) {
            return eval_goal(**c.fallback);
        }
        return Outcome::failure(sys(sys_failure::kNoFailtree));
    }

    const Goal* body = nullptr;
    for (const auto& arm : c.arms) {
        if (matches(arm.pattern, **ambient)) {
            body = &*arm.body;
            break;
        }
    }
    if (body == nullptr && c.fallback) {
        body = &**c.fallback;
    }
    if (body == nullptr) {
        return Outcome::failure(**ambient);
    }
    // The arm consumes the tree; eval_goal restores it if this case fails.
    consumed_.push_back(std::move(*failtrees_.back()));
    failtrees_.back().reset();
    return eval_goal(*body);
}

Outcome Evaluator::eval_call(const Call& c, std::string& rule) {
    if (c.name == "print" && c.args.size() == 1) {
        rule = "print";
        ExprResult v = eval_expr(c.args.front());
        if (auto* tree = std::get_if<ExceptionTree>(&v)) {
            return Outcome::failure(std::move(*tree));
        }
        store_.emit_output(std::get<Value>(v).text());
        return Outcome::success();
    }

    rule = "4";
    const Def* def = program_.find(c.name, c.args.size());
    if (def == nullptr) {
        return Outcome::failure(sys(sys_failure::kUndefined));
    }
    std::vector<Value> values;
    values.reserve(c.args.size());
    for (const auto& arg : c.args) {
        ExprResult v = eval_expr(arg);
        if (auto* tree = std::get_if<ExceptionTree>(&v)) {
            return Outcome::failure(std::move(*tree));
        }
        values.push_back(std::move(std::get<Value>(v)));
    }

    // Argument passing instantiates the quantified parameters; backchaining
    // then executes the instantiated body.
    Bindings actuals;
    for (std::size_t i = 0; i < values.size(); ++i) {
        actuals.emplace(def->params[i], values[i].to_expr());
    }
    std::string head = tracing_ ? call_text(c.name, values) : std::string();
    std::optional<TraceScope> passing;
    if (!values.empty()) {
        passing.emplace(*this, head);
    }
    TraceScope backchain(*this, head);
    Outcome out = values.empty() ? eval_goal(def->body) : eval_goal(substitute(def->body, actuals));
    backchain.finish("2", out);
    if (passing) {
        passing->finish("3", out);
    }
    return out;
}

ExprResult Evaluator::eval_expr(const Expr& e) {
    return std::visit(
        overloaded{
            [&](const IntLit& i) -> ExprResult { return Value(i.value); },
            [&](const StrLit& s) -> ExprResult { return Value(s.value); },
            [&](const Var& v) -> ExprResult {
                if (const Value* bound = store_.lookup(v.name)) {
                    return *bound;
                }
                return sys(sys_failure::kUnbound);
            },
            [&](const Binary& b) -> ExprResult {
                ExprResult l = eval_expr(*b.left);
                if (std::holds_alternative<ExceptionTree>(l)) {
                    return l;
                }
                ExprResult r = eval_expr(*b.right);
                if (std::holds_alternative<ExceptionTree>(r)) {
                    return r;
                }
                const Value& lv = std::get<Value>(l);
                const Value& rv = std::get<Value>(r);
                if (!lv.is_int() || !rv.is_int()) {
                    return sys(sys_failure::kTest);
                }
                if (b.op == ArithOp::Div && rv.as_int() == 0) {
                    return sys(sys_failure::kDivZero);
                }
                return Value(arith(b.op, lv.as_int(), rv.as_int()));
            },
            [&](const CallExpr& c) -> ExprResult {
                // Runs the procedure as a goal and yields `ret` right after it returns.
                TraceScope scope(*this, tracing_ ? pretty_print(e) : std::string());
                Call call{c.name, {}};
                Outcome out = Outcome::success();
                for (const auto& arg : c.args) {
                    ExprResult v = eval_expr(arg);
                    if (auto* tree = std::get_if<ExceptionTree>(&v)) {
                        out = Outcome::failure(std::move(*tree));
                        break;
                    }
                    call.args.push_back(std::get<Value>(v).to_expr());
                }
                if (out.ok()) {
                    out = eval_goal(Goal{std::move(call)});
                }
                if (out.ok() && store_.lookup("ret") == nullptr) {
                    out = Outcome::failure(sys(sys_failure::kUnbound));
                }
                scope.finish("call-expr", out);
                if (!out.ok()) {
                    return out.tree();
                }
                return *store_.lookup("ret");
            },
            [&](const ReadBuiltin&) -> ExprResult { return store_.read_input(); },
        },
        e.node);
}



// ---------------------------------------------------------------------------
// run_main
// ---------------------------------------------------------------------------

namespace {

struct RunJob {
    const Program* program;
    std::vector<std::int64_t> input;
    std::uint64_t max_steps;
    bool trace;
    RunResult result;
};

void run_job(RunJob& job) {
    Store store(std::move(job.input));
    Budget budget{job.max_steps};
    Evaluator ev(*job.program, store, budget, job.trace);
    StoreSnapshot initial = store.snapshot();

    store.checkpoint();
    Outcome out = ev.eval_goal(job.program->main);
    if (out.ok()) {
        store.commit();
    } else {
        store.rollback();
    }

    RunResult& r = job.result;
    r.outcome = out;
    r.store = store.snapshot();
    if (out.ok()) {
        r.output = store.output();
    } else {
        r.store = initial;
    }
    r.steps_used = job.max_steps - budget.remaining_steps;
    if (job.trace && !ev.trace().empty()) {
        r.trace = ev.trace().front();
    }
}

struct StackJob {
    const std::function<void()>* body;
    std::exception_ptr error;
};

void* stack_job_thread(void* arg) {
    auto* job = static_cast<StackJob*>(arg);
    try {
        (*job->body)();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

// Deep recursion in the object language nests host frames; give the
// evaluator its own large stack.
void on_eval_stack(const std::function<void()>& body) {
    StackJob job{&body, nullptr};
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, kEvalStackBytes);
    pthread_t thread;
    int rc = pthread_create(&thread, &attr, stack_job_thread, &job);
    pthread_attr_destroy(&attr);
    if (rc != 0) {
        body();
        return;
    }
    pthread_join(thread, nullptr);
    if (job.error) {
        std::rethrow_exception(job.error);
    }
}

}  // namespace

Outcome eval_goal(const Program& p, Store& s, const Goal& g, Budget& b) {
    Outcome out = Outcome::success();
    on_eval_stack([&] { out = Evaluator(p, s, b).eval_goal(g); });
    return out;
}

ExprResult eval_expr(const Program& p, Store& s, const Expr& e, Budget& b) {
    ExprResult out = Value(0);
    on_eval_stack([&] { out = Evaluator(p, s, b).eval_expr(e); });
    return out;
}

RunResult run_main(const Program& p, std::vector<std::int64_t> input, std::uint64_t max_steps, bool trace) {
    RunJob job{&p, std::move(input), max_steps, trace, {}};
    on_eval_stack([&] { run_job(job); });
    return std::move(job.result);
}

// ---------------------------------------------------------------------------
// lint
// ---------------------------------------------------------------------------

std::string LintWarning::message() const {
    std::string names;
    for (const auto& n : shared) {
        if (!names.empty()) {
            names += ", ";
        }
        names += n;
    }
    return "in " + where + ": union operands share variable(s) " + names + ": " + goal;
}

namespace {

void lint_goal(const Goal& g, const std::string& where, std::vector<LintWarning>& out) {
    std::visit(overloaded{
                   [&](const Union& u) {
                       auto left = free_vars(*u.first);
                       auto right = free_vars(*u.second);
                       std::set<Identifier> shared;
                       for (const auto& v : left) {
                           if (right.contains(v)) {
                               shared.insert(v);
                           }
                       }
                       if (!shared.empty()) {
                           out.push_back(LintWarning{where, pretty_print(g), std::move(shared)});
                       }
                       lint_goal(*u.first, where, out);
                       lint_goal(*u.second, where, out);
                   },
                   [&](const Seq& s) {
                       lint_goal(*s.first, where, out);
                       lint_goal(*s.second, where, out);
                   },
                   [&](const Else& e) {
                       lint_goal(*e.tried, where, out);
                       lint_goal(*e.handler, where, out);
                   },
                   [&](const Case& c) {
                       for (const auto& arm : c.arms) {
                           lint_goal(*arm.body, where, out);
                       }
                       if (c.fallback) {
                           lint_goal(**c.fallback, where, out);
                       }
                   },
                   [](const auto&) {},
               },
               g.node);
}

}  // namespace

std::vector<LintWarning> lint(const Program& p) {
    std::vector<LintWarning> out;
    for (const auto& [key, def] : p.defs) {
        lint_goal(def.body, key.first + "/" + std::to_string(key.second), out);
    }
    lint_goal(p.main, "main", out);
    return out;
}

}  // namespace tasklogic
