#include "tasklogic/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <type_traits>

namespace tasklogic {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_identifier(const std::string& text) {
    if (text.empty()) {
        return false;
    }
    auto head = static_cast<unsigned char>(text.front());
    if (!std::isalpha(head) && head != '_') {
        return false;
    }
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && u != '_') {
            return false;
        }
    }
    return true;
}

bool is_reserved_word(const std::string& text) {
    static const std::set<std::string> words = {"t", "f", "else", "case", "of", "main", "Failtree", "_"};
    return words.contains(text);
}

const Def* Program::find(const Identifier& name, std::size_t arity) const {
    auto it = defs.find(DefKey{name, arity});
    return it == defs.end() ? nullptr : &it->second;
}

namespace build {
Expr num(std::int64_t v) { return Expr{IntLit{v}}; }
Expr str(std::string v) { return Expr{StrLit{std::move(v)}}; }
Expr var(Identifier name) { return Expr{Var{std::move(name)}}; }
Expr arith(ArithOp op, Expr l, Expr r) { return Expr{Binary{op, std::move(l), std::move(r)}}; }
Expr call_expr(Identifier name, std::vector<Expr> args) { return Expr{CallExpr{std::move(name), std::move(args)}}; }
Expr read() { return Expr{ReadBuiltin{}}; }

Goal truth() { return Goal{True{}}; }
Goal fail(FailPath path) { return Goal{Fail{std::move(path)}}; }
Goal assign(Identifier var, Expr e) { return Goal{Assign{std::move(var), std::move(e)}}; }
Goal test(Expr l, RelOp op, Expr r) { return Goal{Test{std::move(l), op, std::move(r)}}; }
Goal seq(Goal a, Goal b) { return Goal{Seq{std::move(a), std::move(b)}}; }
Goal alt(Goal a, Goal b) { return Goal{Union{std::move(a), std::move(b)}}; }
Goal orelse(Goal tried, Goal handler) { return Goal{Else{std::move(tried), std::move(handler)}}; }
Goal case_of(std::vector<CaseArm> arms, std::optional<Goal> fallback) {
    Case c{std::move(arms), std::nullopt};
    if (fallback) {
        c.fallback = Box<Goal>(std::move(*fallback));
    }
    return Goal{std::move(c)};
}
Goal call(Identifier name, std::vector<Expr> args) { return Goal{Call{std::move(name), std::move(args)}}; }
}  // namespace build

// ---------------------------------------------------------------------------
// substitution
// ---------------------------------------------------------------------------

Expr substitute(const Expr& expr, const Bindings& bindings) {
    return std::visit(
        overloaded{
            [&](const Var& v) -> Expr {
                auto it = bindings.find(v.name);
                return it == bindings.end() ? expr : it->second;
            },
            [&](const Binary& b) -> Expr {
                return Expr{Binary{b.op, substitute(*b.left, bindings), substitute(*b.right, bindings)}};
            },
            [&](const CallExpr& c) -> Expr {
                CallExpr out{c.name, {}};
                out.args.reserve(c.args.size());
                for (const auto& a : c.args) {
                    out.args.push_back(substitute(a, bindings));
                }
                return Expr{std::move(out)};
            },
            [&](const auto&) -> Expr { return expr; },
        },
        expr.node);
}

Goal substitute(const Goal& body, const Bindings& bindings) {
    return std::visit(
        overloaded{
            [&](const True&) -> Goal { return body; },
            [&](const Fail&) -> Goal { return body; },
            [&](const Assign& a) -> Goal {
                if (bindings.contains(a.var)) {
                    throw SubstitutionIntoAssignTarget(a.var);
                }
                return Goal{Assign{a.var, substitute(a.expr, bindings)}};
            },
            [&](const Test& t) -> Goal {
                return Goal{Test{substitute(t.left, bindings), t.op, substitute(t.right, bindings)}};
            },
            [&](const Seq& s) -> Goal {
                return Goal{Seq{substitute(*s.first, bindings), substitute(*s.second, bindings)}};
            },
            [&](const Union& u) -> Goal {
                return Goal{Union{substitute(*u.first, bindings), substitute(*u.second, bindings)}};
            },
            [&](const Else& e) -> Goal {
                return Goal{Else{substitute(*e.tried, bindings), substitute(*e.handler, bindings)}};
            },
            [&](const Case& c) -> Goal {
                Case out{{}, std::nullopt};
                for (const auto& arm : c.arms) {
                    out.arms.push_back(CaseArm{arm.pattern, substitute(*arm.body, bindings)});
                }
                if (c.fallback) {
                    out.fallback = Box<Goal>(substitute(**c.fallback, bindings));
                }
                return Goal{std::move(out)};
            },
            [&](const Call& c) -> Goal {
                Call out{c.name, {}};
                for (const auto& a : c.args) {
                    out.args.push_back(substitute(a, bindings));
                }
                return Goal{std::move(out)};
            },
        },
        body.node);
}

// ---------------------------------------------------------------------------
// variable scans
// ---------------------------------------------------------------------------

namespace {

void collect(const Expr& e, std::set<Identifier>& out) {
    std::visit(overloaded{
                   [&](const Var& v) { out.insert(v.name); },
                   [&](const Binary& b) {
                       collect(*b.left, out);
                       collect(*b.right, out);
                   },
                   [&](const CallExpr& c) {
                       for (const auto& a : c.args) {
                           collect(a, out);
                       }
                   },
                   [](const auto&) {},
               },
               e.node);
}

void collect(const Goal& g, std::set<Identifier>& out, bool assigned_only) {
    auto expr = [&](const Expr& e) {
        if (!assigned_only) {
            collect(e, out);
        }
    };
    std::visit(overloaded{
                   [](const True&) {},
                   [](const Fail&) {},
                   [&](const Assign& a) {
                       out.insert(a.var);
                       expr(a.expr);
                   },
                   [&](const Test& t) {
                       expr(t.left);
                       expr(t.right);
                   },
                   [&](const Seq& s) {
                       collect(*s.first, out, assigned_only);
                       collect(*s.second, out, assigned_only);
                   },
                   [&](const Union& u) {
                       collect(*u.first, out, assigned_only);
                       collect(*u.second, out, assigned_only);
                   },
                   [&](const Else& e) {
                       collect(*e.tried, out, assigned_only);
                       collect(*e.handler, out, assigned_only);
                   },
                   [&](const Case& c) {
                       for (const auto& arm : c.arms) {
                           collect(*arm.body, out, assigned_only);
                       }
                       if (c.fallback) {
                           collect(**c.fallback, out, assigned_only);
                       }
                   },
                   [&](const Call& c) {
                       for (const auto& a : c.args) {
                           expr(a);
                       }
                   },
               },
               g.node);
}

}  // namespace

std::set<Identifier> free_vars(const Goal& g) {
    std::set<Identifier> out;
    collect(g, out, false);
    return out;
}

std::set<Identifier> free_vars(const Expr& e) {
    std::set<Identifier> out;
    collect(e, out);
    return out;
}

std::set<Identifier> assigned_vars(const Goal& g) {
    std::set<Identifier> out;
    collect(g, out, true);
    return out;
}

std::size_t goal_size(const Goal& g) {
    return std::visit(overloaded{
                          [](const Seq& s) { return 1 + goal_size(*s.first) + goal_size(*s.second); },
                          [](const Union& u) { return 1 + goal_size(*u.first) + goal_size(*u.second); },
                          [](const Else& e) { return 1 + goal_size(*e.tried) + goal_size(*e.handler); },
                          [](const Case& c) {
                              std::size_t n = 1;
                              for (const auto& arm : c.arms) {
                                  n += goal_size(*arm.body);
                              }
                              if (c.fallback) {
                                  n += goal_size(**c.fallback);
                              }
                              return n;
                          },
                          [](const auto&) -> std::size_t { return 1; },
                      },
                      g.node);
}

bool has_unguarded_case(const Goal& g) {
    return std::visit(overloaded{
                          [](const Seq& s) { return has_unguarded_case(*s.first) || has_unguarded_case(*s.second); },
                          [](const Union& u) { return has_unguarded_case(*u.first) || has_unguarded_case(*u.second); },
                          [](const Else& e) { return has_unguarded_case(*e.tried); },
                          [](const Case&) { return true; },
                          [](const auto&) { return false; },
                      },
                      g.node);
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

const char* to_string(RelOp op) {
    switch (op) {
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    }
    return "?";
}

const char* to_string(ArithOp op) {
    switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
    }
    return "?";
}

namespace {

int precedence(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e.node)) {
        return (b->op == ArithOp::Add || b->op == ArithOp::Sub) ? 1 : 2;
    }
    return 3;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string print_args(const std::vector<Expr>& args) {
    std::string out = "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += pretty_print(args[i]);
    }
    return out + ")";
}

bool is_compound(const Goal& g) {
    return std::holds_alternative<Seq>(g.node) || std::holds_alternative<Union>(g.node) ||
           std::holds_alternative<Else>(g.node);
}

std::string wrapped(const Goal& g) {
    return is_compound(g) ? "(" + pretty_print(g) + ")" : pretty_print(g);
}

// Right operand of a right-associative chain stays bare when it repeats the operator.
template <typename Node>
std::string chain_tail(const Goal& g) {
    return std::holds_alternative<Node>(g.node) ? pretty_print(g) : wrapped(g);
}

}  // namespace

std::string pretty_print(const Expr& e) {
    return std::visit(overloaded{
                          [](const IntLit& i) { return std::to_string(i.value); },
                          [](const StrLit& s) { return quote(s.value); },
                          [](const Var& v) { return v.name; },
                          [&](const Binary& b) {
                              int p = precedence(e);
                              std::string l = pretty_print(*b.left);
                              std::string r = pretty_print(*b.right);
                              if (precedence(*b.left) < p) {
                                  l = "(" + l + ")";
                              }
                              if (precedence(*b.right) <= p) {
                                  r = "(" + r + ")";
                              }
                              return l + " " + to_string(b.op) + " " + r;
                          },
                          [](const CallExpr& c) { return c.name + print_args(c.args); },
                          [](const ReadBuiltin&) { return std::string("read()"); },
                      },
                      e.node);
}

std::string pretty_print(const Goal& g) {
    return std::visit(
        overloaded{
            [](const True&) { return std::string("t"); },
            [](const Fail& f) {
                if (f.path.is_root()) {
                    return std::string("f");
                }
                const auto& segs = f.path.segments();
                bool short_form = f.path.is_user() && std::all_of(segs.begin() + 2, segs.end(), [](const auto& s) {
                                      return is_identifier(s) && !is_reserved_word(s);
                                  });
                if (short_form) {
                    std::string out = "f(";
                    for (std::size_t i = 2; i < segs.size(); ++i) {
                        if (i > 2) {
                            out += '/';
                        }
                        out += segs[i];
                    }
                    return out + ")";
                }
                return "f(" + f.path.str() + ")";
            },
            [](const Assign& a) { return a.var + " = " + pretty_print(a.expr); },
            [](const Test& t) { return pretty_print(t.left) + " " + to_string(t.op) + " " + pretty_print(t.right); },
            [](const Seq& s) { return wrapped(*s.first) + "; " + chain_tail<Seq>(*s.second); },
            [](const Union& u) { return wrapped(*u.first) + " | " + chain_tail<Union>(*u.second); },
            [](const Else& e) { return wrapped(*e.tried) + " else " + chain_tail<Else>(*e.handler); },
            [](const Case& c) {
                std::string out = "case Failtree of { ";
                for (std::size_t i = 0; i < c.arms.size(); ++i) {
                    if (i) {
                        out += "; ";
                    }
                    out += c.arms[i].pattern.str() + ": " + wrapped(*c.arms[i].body);
                }
                if (c.fallback) {
                    out += "; _: " + wrapped(**c.fallback);
                }
                return out + " }";
            },
            [](const Call& c) { return c.name + print_args(c.args); },
        },
        g.node);
}

std::string pretty_print(const Def& d) {
    std::string out = d.name + "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += d.params[i];
    }
    return out + ") = " + pretty_print(d.body);
}

std::string pretty_print(const Program& p) {
    std::string out;
    for (const auto& [key, def] : p.defs) {
        out += pretty_print(def) + "\n";
    }
    return out + "main " + pretty_print(p.main) + "\n";
}

}  // namespace tasklogic
