#include "tasklogic/driver.hpp"

#include <charconv>
#include <exception>
#include <sstream>
#include <stdexcept>

#include "tasklogic/parser.hpp"

namespace tasklogic {

int exit_code(RunStatus status) {
    switch (status) {
    case RunStatus::Success: return 0;
    case RunStatus::Failure: return 1;
    case RunStatus::ParseError: return 2;
    case RunStatus::InternalError: return 3;
    }
    return 3;
}

std::string RunReport::stdout_text() const {
    std::string out;
    if (status == RunStatus::Success) {
        for (const auto& [name, value] : bindings) {
            out += name + " = " + value.repr() + "\n";
        }
        for (const auto& line : output) {
            out += line + "\n";
        }
    } else if (status == RunStatus::Failure) {
        out += render(*failtree) + "\n";
    }
    return out;
}

std::vector<std::int64_t> parse_input(std::string_view text) {
    std::vector<std::int64_t> out;
    std::size_t i = 0;
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        if (space(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !space(text[j])) {
            ++j;
        }
        std::string_view tok = text.substr(i, j - i);
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw std::invalid_argument("input token is not an integer: '" + std::string(tok) + "'");
        }
        out.push_back(v);
        i = j;
    }
    return out;
}

RunReport run_source(std::string_view source, std::vector<std::int64_t> input, std::uint64_t max_steps, bool trace) {
    RunReport report;
    Program program;
    try {
        program = parse_program(source);
    } catch (const LexError& e) {
        report.status = RunStatus::ParseError;
        report.diagnostic = e.what();
        return report;
    } catch (const ParseError& e) {
        report.status = RunStatus::ParseError;
        report.diagnostic = e.what();
        return report;
    }

    try {
        RunResult r = run_main(program, std::move(input), max_steps, trace);
        report.steps_used = r.steps_used;
        if (r.trace) {
            report.trace = format_trace(*r.trace);
        }
        if (r.outcome.ok()) {
            report.status = RunStatus::Success;
            report.bindings = std::move(r.store.bindings);
            report.output = std::move(r.output);
        } else {
            report.status = RunStatus::Failure;
            report.failtree = r.outcome.tree();
        }
    } catch (const std::exception& e) {
        report = RunReport{};
        report.status = RunStatus::InternalError;
        report.diagnostic = std::string("internal error: ") + e.what();
    }
    return report;
}

CheckReport check_source(std::string_view source) {
    CheckReport report;
    try {
        report.warnings = lint(parse_program(source));
    } catch (const LexError& e) {
        report.status = RunStatus::ParseError;
        report.diagnostic = e.what();
    } catch (const ParseError& e) {
        report.status = RunStatus::ParseError;
        report.diagnostic = e.what();
    }
    return report;
}

// ---------------------------------------------------------------------------
// oracle agreement
// ---------------------------------------------------------------------------

Store make_store(const oracle::StateValue& s) {
    Store store(s.input);
    for (const auto& [name, value] : s.bindings) {
        store.bind(name, value);
    }
    return store;
}

namespace {

std::string describe_state(const std::map<Identifier, Value>& bindings, std::size_t cursor,
                           const std::vector<std::string>& output) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : bindings) {
        out += (first ? "" : ", ") + k + " = " + v.repr();
        first = false;
    }
    out += "} cursor=" + std::to_string(cursor) + " output=[";
    for (std::size_t i = 0; i < output.size(); ++i) {
        out += (i ? ", " : "") + output[i];
    }
    return out + "]";
}

std::string describe_instance(const oracle::Instance& inst) {
    std::string out = "program:\n" + pretty_print(inst.program);
    out += "initial: " + describe_state(inst.state.bindings, 0, {}) + "\ninput: [";
    for (std::size_t i = 0; i < inst.state.input.size(); ++i) {
        out += (i ? ", " : "") + std::to_string(inst.state.input[i]);
    }
    return out + "]\n";
}

}  // namespace

Agreement compare_with_oracle(const oracle::Instance& inst, const oracle::SearchConfig& cfg) {
    Agreement a;
    oracle::Derivation d = oracle::derive_bounded(inst.program, inst.state, inst.program.main, cfg);
    if (d.verdict == oracle::Verdict::DepthExhausted) {
        a.exhausted = true;
        return a;
    }

    Store store = make_store(inst.state);
    Budget budget;
    Outcome out = eval_goal(inst.program, store, inst.program.main, budget);

    std::string eval_side;
    std::string oracle_side;
    if (out.ok()) {
        eval_side = "success " + describe_state(store.bindings(), store.cursor(), store.output());
    } else {
        eval_side = "failure(" + out.tree().joined() + ")";
    }
    if (d.verdict == oracle::Verdict::Derivable) {
        const auto& fs = *d.final_state;
        oracle_side = "derivable " + describe_state(fs.bindings, fs.cursor, fs.output);
        a.agree = out.ok() && fs.bindings == store.bindings() && fs.cursor == store.cursor() &&
                  fs.output == store.output();
    } else {
        oracle_side = "not-derivable(" + d.reason->joined() + ")";
        a.agree = !out.ok() && out.tree() == *d.reason && store.snapshot() == make_store(inst.state).snapshot();
    }
    if (!a.agree) {
        a.detail = describe_instance(inst) + "evaluator: " + eval_side + "\noracle:    " + oracle_side + "\n";
    }
    return a;
}

std::string SelfcheckReport::summary() const {
    std::ostringstream os;
    os << "cases: " << cases << "\n"
       << "agreed: " << agreed << "\n"
       << "depth-exhausted: " << exhausted << "\n"
       << "result: " << (ok() ? "ok" : "DISAGREEMENT") << "\n";
    return os.str();
}

SelfcheckReport selfcheck(std::size_t cases, std::uint64_t seed, std::size_t max_depth) {
    SelfcheckReport report;
    oracle::SearchConfig cfg;
    cfg.max_depth = max_depth;
    for (std::size_t i = 0; i < cases; ++i) {
        oracle::Instance inst = oracle::gen_program(seed + i, kSelfcheckSize);
        Agreement a = compare_with_oracle(inst, cfg);
        ++report.cases;
        if (a.exhausted) {
            ++report.exhausted;
        } else if (a.agree) {
            ++report.agreed;
        } else if (!report.counterexample) {
            report.counterexample = "case " + std::to_string(i) + " (seed " + std::to_string(seed + i) + ")\n" + a.detail;
        }
    }
    return report;
}

}  // namespace tasklogic
