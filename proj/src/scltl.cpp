#include "simcert/scltl.hpp"

#include "simcert/types.hpp"

#include <algorithm>
#include <cctype>

namespace simcert {

namespace {

FormulaPtr node(NodeKind k, std::string atom = {}, FormulaPtr a = nullptr,
                FormulaPtr b = nullptr) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->atom = std::move(atom);
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

}  // namespace

FormulaPtr make_true() { return node(NodeKind::True); }
FormulaPtr make_atom(std::string name) { return node(NodeKind::Atom, std::move(name)); }
FormulaPtr make_neg_atom(std::string name) { return node(NodeKind::NegAtom, std::move(name)); }
FormulaPtr make_and(FormulaPtr a, FormulaPtr b) {
  return node(NodeKind::And, {}, std::move(a), std::move(b));
}
FormulaPtr make_or(FormulaPtr a, FormulaPtr b) {
  return node(NodeKind::Or, {}, std::move(a), std::move(b));
}
FormulaPtr make_next(FormulaPtr a) { return node(NodeKind::Next, {}, std::move(a)); }
FormulaPtr make_until(FormulaPtr a, FormulaPtr b) {
  return node(NodeKind::Until, {}, std::move(a), std::move(b));
}
FormulaPtr make_eventually(FormulaPtr a) {
  return node(NodeKind::Eventually, {}, std::move(a));
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  // Operators X, F, U are single uppercase keywords; everything else
  // identifier-like is an atom.
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
      ++pos;
    }
    return std::string(text.substr(start, pos - start));
  }

  bool peek_keyword(std::string_view kw) {
    skip_ws();
    if (text.substr(pos, kw.size()) != kw) return false;
    const std::size_t after = pos + kw.size();
    if (after < text.size() &&
        (std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_')) {
      return false;
    }
    return true;
  }

  bool consume_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) return false;
    pos += kw.size();
    return true;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (consume('|')) f = make_or(f, parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_until();
    while (consume('&')) f = make_and(f, parse_until());
    return f;
  }

  FormulaPtr parse_until() {
    FormulaPtr f = parse_unary();
    if (consume_keyword("U")) {
      return make_until(f, parse_until());  // right-associative
    }
    return f;
  }

  FormulaPtr parse_unary() {
    skip_ws();
    if (consume('!')) {
      const std::size_t at = pos;
      FormulaPtr inner = parse_unary();
      if (inner->kind != NodeKind::Atom) {
        throw ParseError("negation is only allowed on atoms", at);
      }
      return make_neg_atom(inner->atom);
    }
    if (consume_keyword("X")) return make_next(parse_unary());
    if (consume_keyword("F")) return make_eventually(parse_unary());
    if (consume('(')) {
      FormulaPtr f = parse_or();
      if (!consume(')')) throw ParseError("expected ')'", pos);
      return f;
    }
    if (consume_keyword("true")) return make_true();
    const std::size_t at = pos;
    std::string name = ident();
    if (name.empty()) throw ParseError("expected atom, 'true', '(', '!', 'X' or 'F'", at);
    if (name == "U") throw ParseError("'U' is an operator, not an atom", at);
    return make_atom(std::move(name));
  }
};

}  // namespace

FormulaPtr parse_scltl(std::string_view text) {
  Parser p{text};
  FormulaPtr f = p.parse_or();
  if (!p.at_end()) throw ParseError("unexpected trailing input", p.pos);
  return f;
}

FormulaPtr bounded_always(const FormulaPtr& operand, int horizon) {
  if (horizon < 0) throw InvalidParameterError("bounded_always: negative horizon");
  if (horizon > 64) throw InvalidParameterError("bounded_always: horizon exceeds cap of 64");
  FormulaPtr acc = operand;
  for (int j = horizon; j >= 1; --j) {
    // X^j operand, built innermost-out as operand & X(previous)
    acc = make_and(operand, make_next(acc));
  }
  return acc;
}

namespace {

void collect(const FormulaPtr& f, std::vector<std::string>& out) {
  if (!f) return;
  if (f->kind == NodeKind::Atom || f->kind == NodeKind::NegAtom) {
    if (std::find(out.begin(), out.end(), f->atom) == out.end()) out.push_back(f->atom);
  }
  collect(f->lhs, out);
  collect(f->rhs, out);
}

}  // namespace

std::vector<std::string> collect_atoms(const FormulaPtr& f) {
  std::vector<std::string> out;
  collect(f, out);
  return out;
}

std::string to_string(const FormulaPtr& f) {
  if (!f) return "";
  switch (f->kind) {
    case NodeKind::True:
      return "true";
    case NodeKind::Atom:
      return f->atom;
    case NodeKind::NegAtom:
      return "!" + f->atom;
    case NodeKind::And:
      return "(" + to_string(f->lhs) + " & " + to_string(f->rhs) + ")";
    case NodeKind::Or:
      return "(" + to_string(f->lhs) + " | " + to_string(f->rhs) + ")";
    case NodeKind::Next:
      return "X " + to_string(f->lhs);
    case NodeKind::Until:
      return "(" + to_string(f->lhs) + " U " + to_string(f->rhs) + ")";
    case NodeKind::Eventually:
      return "F " + to_string(f->lhs);
  }
  return "";
}

}  // namespace simcert
