#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tasklogic/eval.hpp"
#include "tasklogic/failure.hpp"
#include "tasklogic/oracle.hpp"
#include "tasklogic/store.hpp"

namespace tasklogic {

enum class RunStatus { Success, Failure, ParseError, InternalError };

/// Process exit code for a status: 0, 1, 2, 3 respectively.
int exit_code(RunStatus status);

struct RunReport {
    RunStatus status = RunStatus::InternalError;
    std::optional<ExceptionTree> failtree;  // present iff status == Failure
    std::map<Identifier, Value> bindings;   // final bindings on success
    std::vector<std::string> output;
    std::uint64_t steps_used = 0;
    std::string diagnostic;                 // parse or internal error message
    std::optional<std::string> trace;       // formatted trace when requested

    /// What `run` writes to standard output.
    std::string stdout_text() const;
};

/// Whitespace-separated ASCII decimal integers. Throws std::invalid_argument
/// on anything else.
std::vector<std::int64_t> parse_input(std::string_view text);

RunReport run_source(std::string_view source, std::vector<std::int64_t> input,
                     std::uint64_t max_steps = kDefaultMaxSteps, bool trace = false);

struct CheckReport {
    RunStatus status = RunStatus::Success;  // Success or ParseError
    std::string diagnostic;
    std::vector<LintWarning> warnings;
};

CheckReport check_source(std::string_view source);

/// Evaluator-vs-oracle comparison on one generated instance.
struct Agreement {
    bool agree = true;
    bool exhausted = false;  // oracle hit its depth bound; excluded from agreement
    std::string detail;      // counterexample description when !agree
};

Store make_store(const oracle::StateValue& s);

Agreement compare_with_oracle(const oracle::Instance& inst, const oracle::SearchConfig& cfg);

struct SelfcheckReport {
    std::size_t cases = 0;
    std::size_t agreed = 0;
    std::size_t exhausted = 0;
    std::optional<std::string> counterexample;

    bool ok() const { return !counterexample.has_value(); }
    std::string summary() const;
};

/// Instances are gen_program(seed + i, kSelfcheckSize) for i in [0, cases).
inline constexpr std::size_t kSelfcheckSize = 6;
SelfcheckReport selfcheck(std::size_t cases, std::uint64_t seed, std::size_t max_depth);

}  // namespace tasklogic
