#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tasklogic/syntax.hpp"

namespace tasklogic {

/// Runtime value: a 64-bit signed integer or a string.
class Value {
public:
    Value(std::int64_t i) : v_(i) {}  // NOLINT
    Value(int i) : v_(std::int64_t{i}) {}  // NOLINT
    Value(std::string s) : v_(std::move(s)) {}  // NOLINT
    Value(const char* s) : v_(std::string(s)) {}  // NOLINT

    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_str() const { return std::holds_alternative<std::string>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    const std::string& as_str() const { return std::get<std::string>(v_); }

    /// Source-like rendering: integers in decimal, strings quoted.
    std::string repr() const;
    /// Text written by print(): strings unquoted.
    std::string text() const;
    /// The literal expression denoting this value.
    Expr to_expr() const;

    bool operator==(const Value&) const = default;

private:
    std::variant<std::int64_t, std::string> v_;
};

/// Observable part of a store: compared bit-for-bit by rollback checks.
struct StoreSnapshot {
    std::map<Identifier, Value> bindings;
    std::size_t cursor = 0;
    std::vector<std::string> output;

    bool operator==(const StoreSnapshot&) const = default;
};

/// Commit or rollback without an open checkpoint. Indicates an evaluator bug.
class CheckpointUnderflow : public std::logic_error {
public:
    CheckpointUnderflow() : std::logic_error("checkpoint underflow") {}
};

/// Machine state: global bindings, the modeled input stream and output
/// buffer, plus an undo log partitioned by nested checkpoints.
///
/// Edits made while no checkpoint is open are not logged, so the log is
/// empty exactly when the checkpoint stack is.
class Store {
public:
    Store() = default;
    explicit Store(std::vector<std::int64_t> input) : input_(std::move(input)) {}

    void bind(const Identifier& name, Value v);
    /// nullptr when unbound.
    const Value* lookup(const Identifier& name) const;

    /// Next input token, or -1 at end of input (cursor unchanged).
    Value read_input();
    void emit_output(std::string line);

    void checkpoint();
    void commit();
    void rollback();

    std::size_t open_checkpoints() const { return marks_.size(); }
    std::size_t undo_depth() const { return log_.size(); }

    const std::map<Identifier, Value>& bindings() const { return bindings_; }
    const std::vector<std::int64_t>& input() const { return input_; }
    std::size_t cursor() const { return cursor_; }
    const std::vector<std::string>& output() const { return output_; }

    StoreSnapshot snapshot() const { return StoreSnapshot{bindings_, cursor_, output_}; }

private:
    struct Rebind {
        Identifier name;
        std::optional<Value> previous;
    };
    struct Advance {
        std::size_t previous;
    };
    struct Emit {};
    using Edit = std::variant<Rebind, Advance, Emit>;

    void record(Edit e);

    std::map<Identifier, Value> bindings_;
    std::vector<std::int64_t> input_;
    std::size_t cursor_ = 0;
    std::vector<std::string> output_;
    std::vector<Edit> log_;
    std::vector<std::size_t> marks_;
};

}  // namespace tasklogic
