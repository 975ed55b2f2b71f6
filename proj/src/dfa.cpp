#include "simcert/dfa.hpp"

#include "simcert/types.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace simcert {

int Dfa::letter(const std::string& name) const {
  auto it = letter_ids.find(name);
  if (it == letter_ids.end()) {
    throw UnknownLetterError("letter '" + name + "' is not in the automaton alphabet");
  }
  return it->second;
}

std::string letter_name(const std::vector<std::string>& aps, std::uint32_t mask) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (mask & (1u << i)) {
      if (!first) out += ",";
      out += aps[i];
      first = false;
    }
  }
  out += "}";
  return out;
}

namespace {

constexpr int kMaxDfaStates = 1 << 16;

/// Structural indexing of subformulas so that identical subtrees share one
/// obligation id regardless of pointer identity.
struct FormulaIndex {
  std::vector<FormulaPtr> nodes;
  std::map<std::string, int> by_key;
  std::map<const Formula*, int> by_ptr;
  std::vector<FormulaPtr> pinned;  // keeps every by_ptr key alive
  int live = -1;

  int id_of(const FormulaPtr& f) {
    auto cached = by_ptr.find(f.get());
    if (cached != by_ptr.end()) return cached->second;
    const int l = f->lhs ? id_of(f->lhs) : -1;
    const int r = f->rhs ? id_of(f->rhs) : -1;
    const std::string key = std::to_string(static_cast<int>(f->kind)) + ":" + f->atom +
                            ":" + std::to_string(l) + ":" + std::to_string(r);
    auto it = by_key.find(key);
    int id;
    if (it != by_key.end()) {
      id = it->second;
    } else {
      id = static_cast<int>(nodes.size());
      nodes.push_back(f);
      by_key.emplace(key, id);
    }
    by_ptr.emplace(f.get(), id);
    pinned.push_back(f);
    return id;
  }

  /// Obligation discharged by any further letter but not by the word end;
  /// tracks strong-next's demand that the next position exists.
  int live_id() {
    if (live < 0) live = id_of(make_eventually(make_true()));
    return live;
  }
};

using Obligations = std::vector<int>;  // sorted, unique formula ids

Obligations merged(const Obligations& a, const Obligations& b) {
  Obligations out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool atom_in(const std::vector<std::string>& aps, const std::string& atom,
             std::uint32_t mask) {
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (aps[i] == atom) return (mask & (1u << i)) != 0;
  }
  return false;  // atom outside AP never holds
}

/// One-step expansion: the ways the obligation `id` can be discharged or
/// continued after reading `mask`. An empty result means no way (failure).
std::vector<Obligations> expand(FormulaIndex& index, int id,
                                const std::vector<std::string>& aps,
                                std::uint32_t mask) {
  const FormulaPtr f = index.nodes[id];
  switch (f->kind) {
    case NodeKind::True:
      return {{}};
    case NodeKind::Atom:
      return atom_in(aps, f->atom, mask) ? std::vector<Obligations>{{}}
                                         : std::vector<Obligations>{};
    case NodeKind::NegAtom:
      return !atom_in(aps, f->atom, mask) ? std::vector<Obligations>{{}}
                                          : std::vector<Obligations>{};
    case NodeKind::Next: {
      Obligations both{index.id_of(f->lhs), index.live_id()};
      std::sort(both.begin(), both.end());
      both.erase(std::unique(both.begin(), both.end()), both.end());
      return {both};
    }
    case NodeKind::And: {
      const auto left = expand(index, index.id_of(f->lhs), aps, mask);
      if (left.empty()) return {};
      const auto right = expand(index, index.id_of(f->rhs), aps, mask);
      if (right.empty()) return {};
      std::set<Obligations> combos;
      for (const auto& a : left) {
        for (const auto& b : right) combos.insert(merged(a, b));
      }
      return {combos.begin(), combos.end()};
    }
    case NodeKind::Or: {
      auto left = expand(index, index.id_of(f->lhs), aps, mask);
      const auto right = expand(index, index.id_of(f->rhs), aps, mask);
      std::set<Obligations> combos(left.begin(), left.end());
      combos.insert(right.begin(), right.end());
      return {combos.begin(), combos.end()};
    }
    case NodeKind::Until: {
      // a U b  =  b  or  (a and next (a U b))
      std::set<Obligations> combos;
      for (const auto& done : expand(index, index.id_of(f->rhs), aps, mask)) {
        combos.insert(done);
      }
      const Obligations self{id};
      for (const auto& cont : expand(index, index.id_of(f->lhs), aps, mask)) {
        combos.insert(merged(cont, self));
      }
      return {combos.begin(), combos.end()};
    }
    case NodeKind::Eventually: {
      std::set<Obligations> combos;
      for (const auto& done : expand(index, index.id_of(f->lhs), aps, mask)) {
        combos.insert(done);
      }
      combos.insert(Obligations{id});
      return {combos.begin(), combos.end()};
    }
  }
  return {};
}

/// Whether the empty word satisfies the formula.
bool nullable(const FormulaPtr& f) {
  switch (f->kind) {
    case NodeKind::True:
      return true;
    case NodeKind::And:
      return nullable(f->lhs) && nullable(f->rhs);
    case NodeKind::Or:
      return nullable(f->lhs) || nullable(f->rhs);
    default:
      return false;
  }
}

/// Nondeterministic automaton over obligation sets, discovered lazily.
struct Nfa {
  FormulaIndex index;
  std::vector<std::string> aps;
  std::vector<std::uint32_t> letter_masks;
  std::map<Obligations, int> state_ids;
  std::vector<Obligations> states;
  std::vector<bool> accepting;
  std::vector<std::vector<std::vector<int>>> trans;  // [state][letter] -> nfa ids

  int intern(const Obligations& s) {
    auto it = state_ids.find(s);
    if (it != state_ids.end()) return it->second;
    const int id = static_cast<int>(states.size());
    state_ids.emplace(s, id);
    states.push_back(s);
    bool acc = true;
    for (int fid : s) acc = acc && nullable(index.nodes[fid]);
    accepting.push_back(acc);
    trans.emplace_back();
    return id;
  }

  void close(int id) {
    if (!trans[id].empty()) return;
    trans[id].resize(letter_masks.size());
    const Obligations state = states[id];
    for (std::size_t li = 0; li < letter_masks.size(); ++li) {
      // Cross product of the per-obligation expansions.
      std::set<Obligations> current{Obligations{}};
      bool dead = false;
      for (int fid : state) {
        const auto choices = expand(index, fid, aps, letter_masks[li]);
        if (choices.empty()) {
          dead = true;
          break;
        }
        std::set<Obligations> next;
        for (const auto& acc : current) {
          for (const auto& c : choices) next.insert(merged(acc, c));
        }
        current = std::move(next);
      }
      if (dead) continue;
      for (const auto& succ : current) {
        const int target = intern(succ);  // may reallocate trans
        trans[id][li].push_back(target);
      }
    }
  }
};

Dfa determinize(Nfa& nfa, const std::vector<std::string>& letter_names) {
  Dfa dfa;
  dfa.alphabet = letter_names;
  for (std::size_t i = 0; i < letter_names.size(); ++i) {
    dfa.letter_ids.emplace(letter_names[i], static_cast<int>(i));
  }

  std::map<std::vector<int>, int> subset_ids;
  std::vector<std::vector<int>> subsets;
  auto intern_subset = [&](std::vector<int> s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    auto it = subset_ids.find(s);
    if (it != subset_ids.end()) return it->second;
    const int id = static_cast<int>(subsets.size());
    if (id >= kMaxDfaStates) {
      throw StateBlowupError("compile_dfa: subset construction exceeded state cap");
    }
    subset_ids.emplace(s, id);
    subsets.push_back(std::move(s));
    return id;
  };

  const int root = nfa.intern(nfa.states.empty() ? Obligations{} : nfa.states[0]);
  dfa.q0 = intern_subset({root});
  // intern_subset appends while we iterate; size() is re-read every pass.
  for (int qi = 0; qi < static_cast<int>(subsets.size()); ++qi) {
    const std::vector<int> subset = subsets[qi];
    dfa.trans.emplace_back(letter_names.size(), -1);
    bool acc = false;
    for (int s : subset) acc = acc || nfa.accepting[s];
    dfa.accepting.push_back(acc);
    for (std::size_t li = 0; li < letter_names.size(); ++li) {
      std::vector<int> next;
      for (int s : subset) {
        nfa.close(s);
        const auto& succ = nfa.trans[s][li];
        next.insert(next.end(), succ.begin(), succ.end());
      }
      dfa.trans[qi][li] = intern_subset(std::move(next));
    }
  }
  return dfa;
}

Dfa compile_impl(const FormulaPtr& f, const std::vector<std::string>& aps,
                 const std::vector<std::string>& letter_names,
                 const std::vector<std::uint32_t>& letter_masks) {
  if (!f) throw InvalidParameterError("compile_dfa: null formula");
  Nfa nfa;
  nfa.aps = aps;
  nfa.letter_masks = letter_masks;
  const int root_id = nfa.index.id_of(f);
  nfa.intern(Obligations{root_id});
  return determinize(nfa, letter_names);
}

}  // namespace

Dfa compile_dfa(const FormulaPtr& f, const std::vector<std::string>& atomic_props) {
  if (atomic_props.size() > 12) {
    throw InvalidParameterError("compile_dfa: alphabet 2^AP too large");
  }
  std::vector<std::string> names;
  std::vector<std::uint32_t> masks;
  const std::uint32_t count = 1u << atomic_props.size();
  for (std::uint32_t m = 0; m < count; ++m) {
    names.push_back(letter_name(atomic_props, m));
    masks.push_back(m);
  }
  return compile_impl(f, atomic_props, names, masks);
}

Dfa compile_dfa(const FormulaPtr& f, const std::vector<std::string>& atomic_props,
                const std::vector<std::pair<std::string, std::uint32_t>>& letters) {
  std::vector<std::string> names;
  std::vector<std::uint32_t> masks;
  for (const auto& [name, mask] : letters) {
    names.push_back(name);
    masks.push_back(mask);
  }
  return compile_impl(f, atomic_props, names, masks);
}

Dfa absorb_dfa(const Dfa& dfa, const std::string& margin_letter) {
  if (dfa.letter_ids.count(margin_letter) > 0) {
    throw LetterClashError("absorb_dfa: letter '" + margin_letter +
                           "' already in the alphabet");
  }
  Dfa out = dfa;
  const int abs_loc = out.num_locations();
  const int abs_letter = static_cast<int>(out.alphabet.size());
  out.alphabet.push_back(margin_letter);
  out.letter_ids.emplace(margin_letter, abs_letter);
  for (auto& row : out.trans) row.push_back(abs_loc);
  out.trans.emplace_back(out.alphabet.size(), abs_loc);
  out.accepting.push_back(false);
  return out;
}

bool run_word(const Dfa& dfa, const std::vector<std::string>& word) {
  int q = dfa.q0;
  for (const auto& a : word) q = dfa.trans[q][dfa.letter(a)];
  return dfa.accepting[q];
}

bool accepts_within(const Dfa& dfa, const std::vector<std::string>& word, long horizon) {
  const long limit = std::min<long>(horizon + 1, static_cast<long>(word.size()));
  int q = dfa.q0;
  if (dfa.accepting[q]) return true;  // empty prefix
  for (long k = 0; k < limit; ++k) {
    q = dfa.trans[q][dfa.letter(word[k])];
    if (dfa.accepting[q]) return true;
  }
  return false;
}

bool accepts_within_multi(const Dfa& dfa,
                          const std::vector<std::vector<std::string>>& word,
                          long horizon) {
  const long limit = std::min<long>(horizon + 1, static_cast<long>(word.size()));
  std::set<int> current{dfa.q0};
  if (dfa.accepting[dfa.q0]) return true;
  for (long k = 0; k < limit; ++k) {
    std::set<int> next;
    for (int q : current) {
      for (const auto& a : word[k]) next.insert(dfa.trans[q][dfa.letter(a)]);
    }
    for (int q : next) {
      if (dfa.accepting[q]) return true;
    }
    current = std::move(next);
    if (current.empty()) return false;
  }
  return false;
}

double transfer_probability(double p_hat, double delta, TransferDirection direction) {
  if (p_hat < 0.0 || p_hat > 1.0 || delta < 0.0 || delta > 1.0) {
    throw InvalidParameterError("transfer_probability: arguments must lie in [0,1]");
  }
  return direction == TransferDirection::Lower ? std::max(0.0, p_hat - delta)
                                               : std::min(1.0, p_hat + delta);
}

std::string to_dot(const Dfa& dfa) {
  std::string out = "digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n";
  out += "  init [shape=point];\n  init -> q" + std::to_string(dfa.q0) + ";\n";
  for (int q = 0; q < dfa.num_locations(); ++q) {
    if (dfa.accepting[q]) {
      out += "  q" + std::to_string(q) + " [shape=doublecircle];\n";
    }
  }
  for (int q = 0; q < dfa.num_locations(); ++q) {
    // group parallel edges by target
    std::map<int, std::string> labels;
    for (std::size_t li = 0; li < dfa.alphabet.size(); ++li) {
      auto& lbl = labels[dfa.trans[q][li]];
      if (!lbl.empty()) lbl += ", ";
      lbl += dfa.alphabet[li];
    }
    for (const auto& [to, lbl] : labels) {
      out += "  q" + std::to_string(q) + " -> q" + std::to_string(to) + " [label=\"" +
             lbl + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace simcert
