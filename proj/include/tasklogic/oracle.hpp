#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tasklogic/failure.hpp"
#include "tasklogic/store.hpp"
#include "tasklogic/syntax.hpp"

namespace tasklogic::oracle {

struct SearchConfig {
    std::size_t max_depth = 8;
    std::size_t max_store_entries = 3;
};

/// Immutable machine state used by the search. Kept separate from Store on
/// purpose: no undo log, every rule returns a fresh value.
struct StateValue {
    std::map<Identifier, Value> bindings;
    std::vector<std::int64_t> input;
    std::size_t cursor = 0;
    std::vector<std::string> output;

    bool operator==(const StateValue&) const = default;
};

enum class Verdict { Derivable, NotDerivable, DepthExhausted };

const char* to_string(Verdict v);

struct Derivation {
    Verdict verdict = Verdict::NotDerivable;
    std::optional<StateValue> final_state;  // Derivable only
    std::optional<ExceptionTree> reason;    // NotDerivable only
    std::string rule;                       // rule that closed the top-level goal
};

/// Searches for a derivation of `g` from `s`, trying every rule whose
/// conclusion matches the goal form. A goal is not derivable when every
/// applicable rule is refuted within the bound.
Derivation derive_bounded(const Program& p, const StateValue& s, const Goal& g, const SearchConfig& cfg = {});

struct Instance {
    Program program;
    StateValue state;  // initial bindings and input; cursor 0, no output
};

/// Deterministic random program: ≤ size_bound goal nodes in main, at most two
/// acyclic procedures of arity ≤ 2, integer literals in [-3, 3], variables
/// drawn from {a, b, c, ret}, input of at most three tokens.
Instance gen_program(std::uint64_t seed, std::size_t size_bound);

/// A standalone random goal over the same pools, for law checks that build
/// composite goals around it.
Goal gen_goal(std::uint64_t seed, std::size_t size_bound, const Program& context);

}  // namespace tasklogic::oracle
