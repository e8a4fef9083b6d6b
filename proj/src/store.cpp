#include "tasklogic/store.hpp"

namespace tasklogic {

std::string Value::repr() const {
    if (is_int()) {
        return std::to_string(as_int());
    }
    return pretty_print(build::str(as_str()));
}

std::string Value::text() const {
    return is_int() ? std::to_string(as_int()) : as_str();
}

Expr Value::to_expr() const {
    return is_int() ? build::num(as_int()) : build::str(as_str());
}

void Store::record(Edit e) {
    if (!marks_.empty()) {
        log_.push_back(std::move(e));
    }
}

void Store::bind(const Identifier& name, Value v) {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) {
        record(Rebind{name, std::nullopt});
        bindings_.emplace(name, std::move(v));
    } else {
        record(Rebind{name, it->second});
        it->second = std::move(v);
    }
}

const Value* Store::lookup(const Identifier& name) const {
    auto it = bindings_.find(name);
    return it == bindings_.end() ? nullptr : &it->second;
}

Value Store::read_input() {
    if (cursor_ >= input_.size()) {
        return Value(std::int64_t{-1});
    }
    record(Advance{cursor_});
    return Value(input_[cursor_++]);
}

void Store::emit_output(std::string line) {
    record(Emit{});
    output_.push_back(std::move(line));
}

void Store::checkpoint() {
    marks_.push_back(log_.size());
}

void Store::commit() {
    if (marks_.empty()) {
        throw CheckpointUnderflow();
    }
    marks_.pop_back();
    if (marks_.empty()) {
        log_.clear();
    }
}

void Store::rollback() {
    if (marks_.empty()) {
        throw CheckpointUnderflow();
    }
    std::size_t mark = marks_.back();
    marks_.pop_back();
    while (log_.size() > mark) {
        Edit& e = log_.back();
        if (auto* r = std::get_if<Rebind>(&e)) {
            if (r->previous) {
                bindings_.insert_or_assign(r->name, std::move(*r->previous));
            } else {
                bindings_.erase(r->name);
            }
        } else if (auto* a = std::get_if<Advance>(&e)) {
            cursor_ = a->previous;
        } else {
            output_.pop_back();
        }
        log_.pop_back();
    }
}

}  // namespace tasklogic
