#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simcert {

enum class NodeKind { True, Atom, NegAtom, And, Or, Next, Until, Eventually };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  NodeKind kind = NodeKind::True;
  std::string atom;       // Atom / NegAtom
  FormulaPtr lhs, rhs;    // children (rhs only for And/Or/Until)
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
        pos(position) {}
  std::size_t pos;
};

FormulaPtr make_true();
FormulaPtr make_atom(std::string name);
FormulaPtr make_neg_atom(std::string name);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
FormulaPtr make_next(FormulaPtr a);
FormulaPtr make_until(FormulaPtr a, FormulaPtr b);
FormulaPtr make_eventually(FormulaPtr a);

/// Concrete grammar: atoms are identifiers; operators !, &, |, X, F, U with
/// precedence ! > X/F > U > & > |, U right-associative; parentheses; `true`.
/// Negation is only admitted directly on atoms.
FormulaPtr parse_scltl(std::string_view text);

/// Conjunction over j = 0..horizon of j-fold next applications of `operand`.
FormulaPtr bounded_always(const FormulaPtr& operand, int horizon);

/// Atoms in syntactic order of first appearance.
std::vector<std::string> collect_atoms(const FormulaPtr& f);

std::string to_string(const FormulaPtr& f);

}  // namespace simcert
