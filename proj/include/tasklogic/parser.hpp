#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tasklogic/syntax.hpp"

namespace tasklogic {

/// 1-based line and column of a token or error location.
struct SourceSpan {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t length = 0;

    std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
    bool operator==(const SourceSpan&) const = default;
};

enum class TokenKind {
    Ident,
    Int,
    String,
    Path,
    // keywords
    KwTrue,
    KwFail,
    KwElse,
    KwCase,
    KwOf,
    KwMain,
    KwFailtree,
    // punctuation and operators
    Assign,     // =
    EqEq,       // ==
    NotEq,      // !=
    Less,       // <
    LessEq,     // <=
    Greater,    // >
    GreaterEq,  // >=
    Plus,
    Minus,
    Star,
    Slash,
    Semi,
    Bar,
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Underscore,
    End,
};

const char* describe(TokenKind kind);

struct Token {
    TokenKind kind;
    std::string text;  // identifier name, digits, unescaped string, or path text
    SourceSpan span;

    bool operator==(const Token&) const = default;
};

class LexError : public std::runtime_error {
public:
    LexError(SourceSpan span, const std::string& message)
        : std::runtime_error(span.str() + ": lex error: " + message), span_(span) {}
    const SourceSpan& span() const { return span_; }

private:
    SourceSpan span_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, std::set<std::string> expected, const std::string& found);
    ParseError(SourceSpan span, const std::string& message);

    const SourceSpan& span() const { return span_; }
    const std::set<std::string>& expected() const { return expected_; }

private:
    SourceSpan span_;
    std::set<std::string> expected_;
};

class DuplicateDefinition : public ParseError {
public:
    DuplicateDefinition(SourceSpan span, const Identifier& name, std::size_t arity);
};

class MissingMain : public ParseError {
public:
    explicit MissingMain(SourceSpan span);
};

/// Splits source text into tokens; the final token is always End.
/// A `/` starts a failure path when it is directly followed by an identifier
/// character and the previous token cannot end an operand; otherwise it is
/// division.
std::vector<Token> tokenize(std::string_view source);

Program parse_program(std::string_view source);
Goal parse_goal(std::string_view source);
Expr parse_expr(std::string_view source);

}  // namespace tasklogic
