// tlc: run, check and self-test programs in the success/failure language.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tasklogic/driver.hpp"

namespace {

bool slurp(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return false;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

int cmd_run(const std::string& path, const std::string& input_path, bool trace, std::uint64_t max_steps) {
    std::string source;
    if (!slurp(path, source)) {
        std::cerr << path << ": cannot read file\n";
        return 2;
    }
    std::vector<std::int64_t> input;
    if (!input_path.empty()) {
        std::string text;
        if (!slurp(input_path, text)) {
            std::cerr << input_path << ": cannot read file\n";
            return 2;
        }
        try {
            input = tasklogic::parse_input(text);
        } catch (const std::invalid_argument& e) {
            std::cerr << input_path << ": " << e.what() << "\n";
            return 2;
        }
    }

    tasklogic::RunReport report = tasklogic::run_source(source, std::move(input), max_steps, trace);
    if (report.trace) {
        std::cerr << *report.trace;
    }
    if (!report.diagnostic.empty()) {
        std::cerr << (report.status == tasklogic::RunStatus::ParseError ? path + ":" : std::string()) << report.diagnostic
                  << "\n";
    }
    std::cout << report.stdout_text();
    return tasklogic::exit_code(report.status);
}

int cmd_check(const std::string& path) {
    std::string source;
    if (!slurp(path, source)) {
        std::cerr << path << ": cannot read file\n";
        return 2;
    }
    tasklogic::CheckReport report = tasklogic::check_source(source);
    if (report.status != tasklogic::RunStatus::Success) {
        std::cerr << path << ":" << report.diagnostic << "\n";
        return tasklogic::exit_code(report.status);
    }
    for (const auto& w : report.warnings) {
        std::cerr << path << ": warning: " << w.message() << "\n";
    }
    std::cout << "ok\n";
    return 0;
}

int cmd_selfcheck(std::size_t cases, std::uint64_t seed, std::size_t max_depth) {
    tasklogic::SelfcheckReport report = tasklogic::selfcheck(cases, seed, max_depth);
    std::cout << report.summary();
    if (report.counterexample) {
        std::cout << "counterexample: " << *report.counterexample;
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interpreter for an imperative language with success/failure semantics"};
    app.require_subcommand(1);

    std::string run_path;
    std::string input_path;
    bool trace = false;
    std::uint64_t max_steps = tasklogic::kDefaultMaxSteps;
    auto* run = app.add_subcommand("run", "Run a program");
    run->add_option("file", run_path, "Program file (.tc)")->required();
    run->add_option("--input", input_path, "File of whitespace-separated integers read by read()");
    run->add_flag("--trace", trace, "Print the derivation trace to stderr");
    run->add_option("--max-steps", max_steps, "Step budget")->check(CLI::PositiveNumber);

    std::string check_path;
    auto* check = app.add_subcommand("check", "Parse and lint a program");
    check->add_option("file", check_path, "Program file (.tc)")->required();

    std::size_t cases = 1000;
    std::uint64_t seed = 0;
    std::size_t max_depth = 8;
    auto* self = app.add_subcommand("selfcheck", "Cross-check the evaluator against the derivation search");
    self->add_option("--cases", cases, "Number of generated programs")->check(CLI::PositiveNumber);
    self->add_option("--seed", seed, "First generator seed");
    self->add_option("--max-depth", max_depth, "Derivation depth bound")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            return cmd_run(run_path, input_path, trace, max_steps);
        }
        if (*check) {
            return cmd_check(check_path);
        }
        return cmd_selfcheck(cases, seed, max_depth);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
