#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tasklogic/failure.hpp"

namespace tasklogic {

/// Immutable, shared, value-compared holder for recursive AST children.
template <typename T>
class Box {
public:
    Box(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }

    friend bool operator==(const Box& a, const Box& b) {
        return a.ptr_ == b.ptr_ || *a.ptr_ == *b.ptr_;
    }

private:
    std::shared_ptr<const T> ptr_;
};

using Identifier = std::string;

/// True for `[A-Za-z_][A-Za-z0-9_]*`.
bool is_identifier(const std::string& text);

/// Keywords (t, f, else, case, of, main, Failtree) and the lone underscore.
bool is_reserved_word(const std::string& text);

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;

enum class ArithOp { Add, Sub, Mul, Div };

struct IntLit {
    std::int64_t value;
    bool operator==(const IntLit&) const = default;
};
struct StrLit {
    std::string value;
    bool operator==(const StrLit&) const = default;
};
struct Var {
    Identifier name;
    bool operator==(const Var&) const = default;
};
struct Binary {
    ArithOp op;
    Box<Expr> left;
    Box<Expr> right;
    bool operator==(const Binary&) const = default;
};
struct CallExpr {
    Identifier name;
    std::vector<Expr> args;
    bool operator==(const CallExpr&) const;
};
struct ReadBuiltin {
    bool operator==(const ReadBuiltin&) const = default;
};

struct Expr {
    std::variant<IntLit, StrLit, Var, Binary, CallExpr, ReadBuiltin> node;
    bool operator==(const Expr&) const = default;
};

inline bool CallExpr::operator==(const CallExpr& other) const {
    return name == other.name && args == other.args;
}

// ---------------------------------------------------------------------------
// Goals
// ---------------------------------------------------------------------------

struct Goal;

enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };

struct True {
    bool operator==(const True&) const = default;
};
struct Fail {
    FailPath path;
    bool operator==(const Fail&) const = default;
};
struct Assign {
    Identifier var;
    Expr expr;
    bool operator==(const Assign&) const = default;
};
struct Test {
    Expr left;
    RelOp op;
    Expr right;
    bool operator==(const Test&) const = default;
};
struct Seq {
    Box<Goal> first;
    Box<Goal> second;
    bool operator==(const Seq&) const = default;
};
struct Union {
    Box<Goal> first;
    Box<Goal> second;
    bool operator==(const Union&) const = default;
};
struct Else {
    Box<Goal> tried;
    Box<Goal> handler;
    bool operator==(const Else&) const = default;
};
struct CaseArm;
struct Case {
    std::vector<CaseArm> arms;  // never empty
    std::optional<Box<Goal>> fallback;
    bool operator==(const Case&) const;
};
struct Call {
    Identifier name;
    std::vector<Expr> args;
    bool operator==(const Call&) const = default;
};

struct Goal {
    std::variant<True, Fail, Assign, Test, Seq, Union, Else, Case, Call> node;
    bool operator==(const Goal&) const = default;
};

struct CaseArm {
    FailPath pattern;
    Box<Goal> body;
    bool operator==(const CaseArm&) const = default;
};

inline bool Case::operator==(const Case& other) const {
    return arms == other.arms && fallback == other.fallback;
}

/// A procedure definition `name(params) = body`, universally quantified over
/// its parameters.
struct Def {
    Identifier name;
    std::vector<Identifier> params;
    Goal body;

    std::size_t arity() const { return params.size(); }
    bool operator==(const Def&) const = default;
};

using DefKey = std::pair<Identifier, std::size_t>;

struct Program {
    std::map<DefKey, Def> defs;
    Goal main;

    const Def* find(const Identifier& name, std::size_t arity) const;
    bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace build {
Expr num(std::int64_t v);
Expr str(std::string v);
Expr var(Identifier name);
Expr arith(ArithOp op, Expr l, Expr r);
Expr call_expr(Identifier name, std::vector<Expr> args = {});
Expr read();

Goal truth();
Goal fail(FailPath path = FailPath());
Goal assign(Identifier var, Expr e);
Goal test(Expr l, RelOp op, Expr r);
Goal seq(Goal a, Goal b);
Goal alt(Goal a, Goal b);  // union
Goal orelse(Goal tried, Goal handler);
Goal case_of(std::vector<CaseArm> arms, std::optional<Goal> fallback = std::nullopt);
Goal call(Identifier name, std::vector<Expr> args = {});
}  // namespace build

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Raised when a parameter being substituted is the target of an assignment
/// in the body: terms are not assignable.
class SubstitutionIntoAssignTarget : public std::runtime_error {
public:
    explicit SubstitutionIntoAssignTarget(const Identifier& name)
        : std::runtime_error("parameter '" + name + "' is assigned in the procedure body"), name_(name) {}
    const Identifier& name() const { return name_; }

private:
    Identifier name_;
};

using Bindings = std::map<Identifier, Expr>;

Goal substitute(const Goal& body, const Bindings& bindings);
Expr substitute(const Expr& expr, const Bindings& bindings);

/// Every variable read or assigned in the goal.
std::set<Identifier> free_vars(const Goal& g);
std::set<Identifier> free_vars(const Expr& e);

/// Variables assigned anywhere in the goal.
std::set<Identifier> assigned_vars(const Goal& g);

std::string pretty_print(const Goal& g);
std::string pretty_print(const Expr& e);
std::string pretty_print(const Def& d);
std::string pretty_print(const Program& p);

const char* to_string(RelOp op);
const char* to_string(ArithOp op);

/// Number of goal nodes (expressions are not counted).
std::size_t goal_size(const Goal& g);

/// True when some `case` in `g` lies outside the handler of every `else`
/// in `g`, so it reads whatever Failtree its caller provides.
bool has_unguarded_case(const Goal& g);

}  // namespace tasklogic
