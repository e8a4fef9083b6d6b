#include "tasklogic/parser.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>

namespace tasklogic {

const char* describe(TokenKind kind) {
    switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Int: return "integer";
    case TokenKind::String: return "string";
    case TokenKind::Path: return "failure path";
    case TokenKind::KwTrue: return "'t'";
    case TokenKind::KwFail: return "'f'";
    case TokenKind::KwElse: return "'else'";
    case TokenKind::KwCase: return "'case'";
    case TokenKind::KwOf: return "'of'";
    case TokenKind::KwMain: return "'main'";
    case TokenKind::KwFailtree: return "'Failtree'";
    case TokenKind::Assign: return "'='";
    case TokenKind::EqEq: return "'=='";
    case TokenKind::NotEq: return "'!='";
    case TokenKind::Less: return "'<'";
    case TokenKind::LessEq: return "'<='";
    case TokenKind::Greater: return "'>'";
    case TokenKind::GreaterEq: return "'>='";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Semi: return "';'";
    case TokenKind::Bar: return "'|'";
    case TokenKind::Colon: return "':'";
    case TokenKind::Comma: return "','";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::Underscore: return "'_'";
    case TokenKind::End: return "end of input";
    }
    return "?";
}

namespace {

std::string join_expected(const std::set<std::string>& expected) {
    std::string out;
    for (const auto& e : expected) {
        if (!out.empty()) {
            out += ", ";
        }
        out += e;
    }
    return out;
}

}  // namespace

ParseError::ParseError(SourceSpan span, std::set<std::string> expected, const std::string& found)
    : std::runtime_error(span.str() + ": parse error: expected " + join_expected(expected) + ", found " + found),
      span_(span),
      expected_(std::move(expected)) {}

ParseError::ParseError(SourceSpan span, const std::string& message)
    : std::runtime_error(span.str() + ": parse error: " + message), span_(span) {}

DuplicateDefinition::DuplicateDefinition(SourceSpan span, const Identifier& name, std::size_t arity)
    : ParseError(span, "duplicate definition of " + name + "/" + std::to_string(arity)) {}

MissingMain::MissingMain(SourceSpan span) : ParseError(span, "missing 'main'") {}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            if (pos_ >= src_.size()) {
                out.push_back(Token{TokenKind::End, "", SourceSpan{line_, col_, 0}});
                return out;
            }
            bool after_operand = !out.empty() && ends_operand(out.back().kind);
            out.push_back(next(after_operand));
        }
    }

private:
    static bool ends_operand(TokenKind k) {
        return k == TokenKind::Ident || k == TokenKind::Int || k == TokenKind::String || k == TokenKind::RParen;
    }

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            ++col_;
        }
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') {
                    advance();
                }
            } else {
                return;
            }
        }
    }

    Token make(TokenKind kind, std::string text, std::size_t start, SourceSpan span) const {
        span.length = pos_ - start;
        return Token{kind, std::move(text), span};
    }

    Token next(bool after_operand) {
        SourceSpan span{line_, col_, 0};
        std::size_t start = pos_;
        char c = peek();

        if (ident_start(c)) {
            while (ident_char(peek())) {
                advance();
            }
            std::string word(src_.substr(start, pos_ - start));
            return make(keyword(word), word, start, span);
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                advance();
            }
            return make(TokenKind::Int, std::string(src_.substr(start, pos_ - start)), start, span);
        }
        if (c == '"') {
            return string_literal(start, span);
        }
        if (c == '/' && ident_start(peek(1)) && !after_operand) {
            advance();
            while (true) {
                while (ident_char(peek())) {
                    advance();
                }
                if (peek() == '/' && ident_start(peek(1))) {
                    advance();
                    continue;
                }
                break;
            }
            return make(TokenKind::Path, std::string(src_.substr(start, pos_ - start)), start, span);
        }

        auto single = [&](TokenKind k) {
            advance();
            return make(k, std::string(1, c), start, span);
        };
        auto maybe_double = [&](char second, TokenKind two, TokenKind one) {
            advance();
            if (peek() == second) {
                advance();
                return make(two, std::string(src_.substr(start, 2)), start, span);
            }
            return make(one, std::string(1, c), start, span);
        };

        switch (c) {
        case '=': return maybe_double('=', TokenKind::EqEq, TokenKind::Assign);
        case '<': return maybe_double('=', TokenKind::LessEq, TokenKind::Less);
        case '>': return maybe_double('=', TokenKind::GreaterEq, TokenKind::Greater);
        case '!':
            if (peek(1) == '=') {
                advance();
                advance();
                return make(TokenKind::NotEq, "!=", start, span);
            }
            break;
        case '+': return single(TokenKind::Plus);
        case '-': return single(TokenKind::Minus);
        case '*': return single(TokenKind::Star);
        case '/': return single(TokenKind::Slash);
        case ';': return single(TokenKind::Semi);
        case '|': return single(TokenKind::Bar);
        case ':': return single(TokenKind::Colon);
        case ',': return single(TokenKind::Comma);
        case '(': return single(TokenKind::LParen);
        case ')': return single(TokenKind::RParen);
        case '{': return single(TokenKind::LBrace);
        case '}': return single(TokenKind::RBrace);
        default: break;
        }
        span.length = 1;
        throw LexError(span, std::string("unrecognized character '") + c + "'");
    }

    Token string_literal(std::size_t start, SourceSpan span) {
        advance();  // opening quote
        std::string value;
        while (true) {
            if (pos_ >= src_.size() || peek() == '\n') {
                span.length = pos_ - start;
                throw LexError(span, "unterminated string literal");
            }
            char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                SourceSpan esc{line_, col_, 2};
                advance();
                char e = peek();
                switch (e) {
                case '"': value += '"'; break;
                case '\\': value += '\\'; break;
                case 'n': value += '\n'; break;
                case 't': value += '\t'; break;
                default: throw LexError(esc, "unknown escape sequence");
                }
                advance();
                continue;
            }
            value += c;
            advance();
        }
        return make(TokenKind::String, std::move(value), start, span);
    }

    static TokenKind keyword(const std::string& w) {
        if (w == "t") return TokenKind::KwTrue;
        if (w == "f") return TokenKind::KwFail;
        if (w == "else") return TokenKind::KwElse;
        if (w == "case") return TokenKind::KwCase;
        if (w == "of") return TokenKind::KwOf;
        if (w == "main") return TokenKind::KwMain;
        if (w == "Failtree") return TokenKind::KwFailtree;
        if (w == "_") return TokenKind::Underscore;
        return TokenKind::Ident;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

constexpr int kMaxNesting = 400;

std::optional<RelOp> relop_of(TokenKind k) {
    switch (k) {
    case TokenKind::EqEq: return RelOp::Eq;
    case TokenKind::NotEq: return RelOp::Ne;
    case TokenKind::Less: return RelOp::Lt;
    case TokenKind::LessEq: return RelOp::Le;
    case TokenKind::Greater: return RelOp::Gt;
    case TokenKind::GreaterEq: return RelOp::Ge;
    default: return std::nullopt;
    }
}

const std::set<std::string> kRelops = {"'=='", "'!='", "'<'", "'<='", "'>'", "'>='"};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program program() {
        Program prog{{}, build::truth()};
        while (true) {
            const Token& tok = peek();
            if (tok.kind == TokenKind::KwMain) {
                bump();
                prog.main = goal();
                expect(TokenKind::End);
                return prog;
            }
            if (tok.kind == TokenKind::Ident) {
                SourceSpan span = tok.span;
                Def d = definition();
                DefKey key{d.name, d.arity()};
                if (prog.defs.contains(key)) {
                    throw DuplicateDefinition(span, d.name, d.arity());
                }
                prog.defs.emplace(std::move(key), std::move(d));
                continue;
            }
            if (tok.kind == TokenKind::End) {
                throw MissingMain(tok.span);
            }
            error({describe(TokenKind::Ident), describe(TokenKind::KwMain)});
        }
    }

    Goal whole_goal() {
        Goal g = goal();
        expect(TokenKind::End);
        return g;
    }

    Expr whole_expr() {
        Expr e = expr();
        expect(TokenKind::End);
        return e;
    }

private:
    struct DepthGuard {
        DepthGuard(Parser& p) : parser(p) {
            if (++parser.depth_ > kMaxNesting) {
                throw ParseError(parser.peek().span, "nesting too deep");
            }
        }
        ~DepthGuard() { --parser.depth_; }
        Parser& parser;
    };

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    bool at(TokenKind k) const { return peek().kind == k; }
    const Token& bump() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) {
            ++pos_;
        }
        return t;
    }
    const Token& expect(TokenKind k) {
        if (!at(k)) {
            error({describe(k)});
        }
        return bump();
    }
    [[noreturn]] void error(std::set<std::string> expected) const {
        const Token& t = peek();
        std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
        if (t.kind == TokenKind::String) {
            found = "string literal";
        }
        throw ParseError(t.span, std::move(expected), found);
    }

    Def definition() {
        const Token& name_tok = expect(TokenKind::Ident);
        Def d{name_tok.text, {}, build::truth()};
        SourceSpan head_span = name_tok.span;
        expect(TokenKind::LParen);
        if (!at(TokenKind::RParen)) {
            while (true) {
                const Token& p = expect(TokenKind::Ident);
                for (const auto& existing : d.params) {
                    if (existing == p.text) {
                        throw ParseError(p.span, "duplicate parameter '" + p.text + "'");
                    }
                }
                d.params.push_back(p.text);
                if (!at(TokenKind::Comma)) {
                    break;
                }
                bump();
            }
        }
        expect(TokenKind::RParen);
        if ((d.name == "print" && d.arity() == 1) || (d.name == "read" && d.arity() == 0)) {
            throw ParseError(head_span, "'" + d.name + "/" + std::to_string(d.arity()) + "' is a builtin");
        }
        expect(TokenKind::Assign);
        d.body = goal();
        auto assigned = assigned_vars(d.body);
        for (const auto& p : d.params) {
            if (assigned.contains(p)) {
                throw ParseError(head_span, "parameter '" + p + "' of " + d.name + " is assigned in its body");
            }
        }
        return d;
    }

    // goal := union_g [ "else" goal ]
    Goal goal() {
        DepthGuard guard(*this);
        Goal first = union_goal();
        if (at(TokenKind::KwElse)) {
            bump();
            return build::orelse(std::move(first), goal());
        }
        return first;
    }

    // union_g := seq_g [ "|" union_g ]
    Goal union_goal() {
        DepthGuard guard(*this);
        Goal first = seq_goal();
        if (at(TokenKind::Bar)) {
            bump();
            return build::alt(std::move(first), union_goal());
        }
        return first;
    }

    // seq_g := atom_g [ ";" seq_g ]; a ';' followed by a case arm start belongs to the case.
    Goal seq_goal() {
        DepthGuard guard(*this);
        Goal first = atom_goal();
        if (at(TokenKind::Semi) && peek(1).kind != TokenKind::Path && peek(1).kind != TokenKind::Underscore) {
            bump();
            return build::seq(std::move(first), seq_goal());
        }
        return first;
    }

    Goal atom_goal() {
        DepthGuard guard(*this);
        switch (peek().kind) {
        case TokenKind::KwTrue: bump(); return build::truth();
        case TokenKind::KwFail: return fail_goal();
        case TokenKind::KwCase: return case_goal();
        case TokenKind::LParen: return paren_goal();
        case TokenKind::Ident:
            if (peek(1).kind == TokenKind::Assign) {
                Identifier name = bump().text;
                bump();
                return build::assign(std::move(name), expr());
            }
            return expr_led_goal(true);
        case TokenKind::Int:
        case TokenKind::String:
        case TokenKind::Minus: return expr_led_goal(false);
        default: break;
        }
        error({describe(TokenKind::KwTrue), describe(TokenKind::KwFail), describe(TokenKind::KwCase),
               describe(TokenKind::LParen), describe(TokenKind::Ident), describe(TokenKind::Int),
               describe(TokenKind::String), describe(TokenKind::Minus)});
    }

    // A test, or a procedure call when the expression is a bare call.
    Goal expr_led_goal(bool allow_call) {
        Expr left = expr();
        if (auto op = relop_of(peek().kind)) {
            bump();
            return build::test(std::move(left), *op, expr());
        }
        if (allow_call) {
            if (auto* c = std::get_if<CallExpr>(&left.node)) {
                return build::call(std::move(c->name), std::move(c->args));
            }
        }
        error(kRelops);
    }

    // "(" goal ")" or a test whose left operand is parenthesized.
    Goal paren_goal() {
        std::size_t start = pos_;
        std::optional<ParseError> as_test;
        try {
            Expr left = expr();
            if (auto op = relop_of(peek().kind)) {
                bump();
                return build::test(std::move(left), *op, expr());
            }
        } catch (const ParseError& e) {
            as_test = e;
        }
        pos_ = start;
        try {
            expect(TokenKind::LParen);
            Goal g = goal();
            expect(TokenKind::RParen);
            return g;
        } catch (const ParseError& e) {
            // Report whichever reading got further into the input.
            if (as_test && further(as_test->span(), e.span())) {
                throw *as_test;
            }
            throw;
        }
    }

    static bool further(const SourceSpan& a, const SourceSpan& b) {
        return a.line > b.line || (a.line == b.line && a.column > b.column);
    }

    Goal fail_goal() {
        bump();
        if (!at(TokenKind::LParen)) {
            return build::fail();
        }
        bump();
        FailPath path;
        if (at(TokenKind::Path)) {
            path = path_of(bump());
        } else {
            std::vector<std::string> segs{expect(TokenKind::Ident).text};
            while (at(TokenKind::Slash)) {
                bump();
                segs.push_back(expect(TokenKind::Ident).text);
            }
            path = FailPath::user(std::move(segs));
        }
        expect(TokenKind::RParen);
        return build::fail(std::move(path));
    }

    static FailPath path_of(const Token& tok) {
        try {
            return FailPath::parse(tok.text);
        } catch (const std::invalid_argument&) {
            throw ParseError(tok.span, "failure paths must be rooted at /F: " + tok.text);
        }
    }

    // "case" "Failtree" "of" "{" arm { ";" arm } [ ";" "_" ":" goal ] "}"
    Goal case_goal() {
        bump();
        expect(TokenKind::KwFailtree);
        expect(TokenKind::KwOf);
        expect(TokenKind::LBrace);
        std::vector<CaseArm> arms;
        std::optional<Goal> fallback;
        arms.push_back(arm());
        while (at(TokenKind::Semi)) {
            bump();
            if (at(TokenKind::Underscore)) {
                bump();
                expect(TokenKind::Colon);
                fallback = goal();
                break;
            }
            arms.push_back(arm());
        }
        expect(TokenKind::RBrace);
        return build::case_of(std::move(arms), std::move(fallback));
    }

    CaseArm arm() {
        if (!at(TokenKind::Path)) {
            error({describe(TokenKind::Path)});
        }
        FailPath pattern = path_of(bump());
        expect(TokenKind::Colon);
        return CaseArm{std::move(pattern), goal()};
    }

    // expr := term { ("+"|"-") term }
    Expr expr() {
        DepthGuard guard(*this);
        Expr left = term();
        while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
            ArithOp op = bump().kind == TokenKind::Plus ? ArithOp::Add : ArithOp::Sub;
            left = build::arith(op, std::move(left), term());
        }
        return left;
    }

    // term := factor { ("*"|"/") factor }
    Expr term() {
        Expr left = factor();
        while (at(TokenKind::Star) || at(TokenKind::Slash)) {
            ArithOp op = bump().kind == TokenKind::Star ? ArithOp::Mul : ArithOp::Div;
            left = build::arith(op, std::move(left), factor());
        }
        return left;
    }

    Expr factor() {
        DepthGuard guard(*this);
        switch (peek().kind) {
        case TokenKind::Int: return build::num(integer(bump(), false));
        case TokenKind::Minus: {
            bump();
            if (!at(TokenKind::Int)) {
                error({describe(TokenKind::Int)});
            }
            return build::num(integer(bump(), true));
        }
        case TokenKind::String: return build::str(bump().text);
        case TokenKind::Ident: {
            Identifier name = bump().text;
            if (!at(TokenKind::LParen)) {
                return build::var(std::move(name));
            }
            bump();
            std::vector<Expr> args;
            if (!at(TokenKind::RParen)) {
                args.push_back(expr());
                while (at(TokenKind::Comma)) {
                    bump();
                    args.push_back(expr());
                }
            }
            expect(TokenKind::RParen);
            if (name == "read" && args.empty()) {
                return build::read();
            }
            return build::call_expr(std::move(name), std::move(args));
        }
        case TokenKind::LParen: {
            bump();
            Expr e = expr();
            expect(TokenKind::RParen);
            return e;
        }
        default: break;
        }
        error({describe(TokenKind::Int), describe(TokenKind::Minus), describe(TokenKind::String),
               describe(TokenKind::Ident), describe(TokenKind::LParen)});
    }

    static std::int64_t integer(const Token& tok, bool negative) {
        std::uint64_t magnitude = 0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), magnitude);
        constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
        if (ec != std::errc() || magnitude > max + (negative ? 1 : 0)) {
            throw ParseError(tok.span, "integer literal out of range");
        }
        if (negative) {
            return static_cast<std::int64_t>(~magnitude + 1);
        }
        return static_cast<std::int64_t>(magnitude);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
    return Lexer(source).run();
}

Program parse_program(std::string_view source) {
    return Parser(tokenize(source)).program();
}

Goal parse_goal(std::string_view source) {
    return Parser(tokenize(source)).whole_goal();
}

Expr parse_expr(std::string_view source) {
    return Parser(tokenize(source)).whole_expr();
}

}  // namespace tasklogic
