#pragma once

#include "simcert/scltl.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace simcert {

/// Fresh letter used by epsilon-deflated labelings; runs hitting it fall
/// into the absorbing location of the modified automaton.
inline constexpr const char* kMarginLetter = "phi_o";

struct UnknownLetterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StateBlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LetterClashError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic finite automaton over finite words. The transition table is
/// total: trans[q][a] is defined for every location and letter.
struct Dfa {
  std::vector<std::string> alphabet;
  std::unordered_map<std::string, int> letter_ids;
  int q0 = 0;
  std::vector<bool> accepting;                // per location
  std::vector<std::vector<int>> trans;        // [location][letter]

  int num_locations() const { return static_cast<int>(trans.size()); }
  int letter(const std::string& name) const;  // throws UnknownLetterError
};

/// Canonical name of a subset of atomic propositions: "{}", "{a}", "{a,b}"
/// with atoms in the order given.
std::string letter_name(const std::vector<std::string>& aps, std::uint32_t mask);

/// Compiles the formula over alphabet 2^AP: a nondeterministic automaton is
/// built by structural expansion of the formula, determinized by subset
/// construction, and pruned to reachable locations. Acceptance is the
/// finite-word satisfaction relation (strong next).
Dfa compile_dfa(const FormulaPtr& f, const std::vector<std::string>& atomic_props);

/// Same, over a restricted alphabet given as subset masks of atomic_props
/// paired with letter names (Example-style renamings such as a/b/c).
Dfa compile_dfa(const FormulaPtr& f, const std::vector<std::string>& atomic_props,
                const std::vector<std::pair<std::string, std::uint32_t>>& letters);

/// Adds the absorbing location reached on the fresh margin letter from every
/// location; the accepting set is unchanged.
Dfa absorb_dfa(const Dfa& dfa, const std::string& margin_letter = kMarginLetter);

/// Whole-word acceptance: the run over the full word ends in an accepting
/// location. The empty word is accepted iff q0 is accepting.
bool run_word(const Dfa& dfa, const std::vector<std::string>& word);

/// Bounded satisfaction: some prefix of length <= horizon+1 is accepted.
bool accepts_within(const Dfa& dfa, const std::vector<std::string>& word, long horizon);

/// Bounded satisfaction under a multi-valued labeling: existential over the
/// letter choices at every position (subset-of-locations run).
bool accepts_within_multi(const Dfa& dfa,
                          const std::vector<std::vector<std::string>>& word,
                          long horizon);

enum class TransferDirection { Lower, Upper };

/// Probability transfer across the abstraction: max(0, p_hat - delta) as a
/// lower bound or min(1, p_hat + delta) as an upper bound.
double transfer_probability(double p_hat, double delta, TransferDirection direction);

std::string to_dot(const Dfa& dfa);

}  // namespace simcert
