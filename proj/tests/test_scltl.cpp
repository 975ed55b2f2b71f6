#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simcert/dfa.hpp"
#include "simcert/scltl.hpp"
#include "support/dfa_tools.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace simcert;
using namespace simcert::testing;

TEST_CASE("parser shapes") {
  const FormulaPtr until = parse_scltl("a U b");
  REQUIRE(until->kind == NodeKind::Until);
  CHECK(until->lhs->kind == NodeKind::Atom);
  CHECK(until->lhs->atom == "a");
  CHECK(until->rhs->atom == "b");

  const FormulaPtr ev = parse_scltl("F b");
  REQUIRE(ev->kind == NodeKind::Eventually);
  CHECK(ev->lhs->atom == "b");

  // precedence: ! > X/F > U > & > |
  const FormulaPtr f = parse_scltl("a | b & c");
  REQUIRE(f->kind == NodeKind::Or);
  CHECK(f->rhs->kind == NodeKind::And);

  const FormulaPtr g = parse_scltl("!a & X b");
  REQUIRE(g->kind == NodeKind::And);
  CHECK(g->lhs->kind == NodeKind::NegAtom);
  CHECK(g->rhs->kind == NodeKind::Next);

  // U is right-associative
  const FormulaPtr h = parse_scltl("a U b U c");
  REQUIRE(h->kind == NodeKind::Until);
  CHECK(h->rhs->kind == NodeKind::Until);

  CHECK(parse_scltl("true")->kind == NodeKind::True);
  CHECK(parse_scltl("(a U b) & F c")->kind == NodeKind::And);
}

TEST_CASE("parser errors carry positions") {
  CHECK_THROWS_AS(parse_scltl("!(a U b)"), ParseError);
  CHECK_THROWS_AS(parse_scltl("a U"), ParseError);
  CHECK_THROWS_AS(parse_scltl("a b"), ParseError);
  CHECK_THROWS_AS(parse_scltl(")"), ParseError);
  try {
    parse_scltl("a & (b | )");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.pos >= 8);
  }
}

TEST_CASE("bounded_always expansion and its cap") {
  const FormulaPtr p = parse_scltl("a");
  const FormulaPtr expanded = bounded_always(p, 2);
  // a & X(a & X a)
  REQUIRE(expanded->kind == NodeKind::And);
  CHECK(expanded->lhs->atom == "a");
  CHECK(expanded->rhs->kind == NodeKind::Next);
  CHECK_THROWS_AS(bounded_always(p, 65), InvalidParameterError);
}

TEST_CASE("compiled until automaton is the reach-avoid diagram") {
  const FormulaPtr f = parse_scltl("a U b");
  const Dfa dfa = compile_dfa(f, {"a", "b"});
  // 2^AP letters: {}, {a}, {b}, {a,b}
  REQUIRE(dfa.alphabet.size() == 4);
  CHECK(dfa.num_locations() == 4);

  const int la = dfa.letter("{a}");
  const int lb = dfa.letter("{b}");
  const int lc = dfa.letter("{}");
  const int q0 = dfa.q0;
  CHECK(dfa.trans[q0][la] == q0);                 // self-loop on a
  CHECK(dfa.accepting[dfa.trans[q0][lb]]);        // b reaches acceptance
  const int sink = dfa.trans[q0][lc];             // empty letter falls off
  CHECK_FALSE(dfa.accepting[sink]);
  for (std::size_t l = 0; l < dfa.alphabet.size(); ++l) CHECK(dfa.trans[sink][l] == sink);

  // the hand-drawn four-location diagram: a redundant waiting state q1
  Dfa fig2;
  fig2.alphabet = dfa.alphabet;
  fig2.letter_ids = dfa.letter_ids;
  fig2.q0 = 0;
  fig2.accepting = {false, false, true, false};
  fig2.trans.assign(4, std::vector<int>(4, -1));
  const int lab = fig2.letter("{a,b}");
  auto set_row = [&](int q, int on_c, int on_a, int on_b, int on_ab) {
    fig2.trans[q][lc] = on_c;
    fig2.trans[q][la] = on_a;
    fig2.trans[q][lb] = on_b;
    fig2.trans[q][lab] = on_ab;
  };
  set_row(0, 3, 1, 2, 2);
  set_row(1, 3, 1, 2, 2);
  set_row(2, 2, 2, 2, 2);
  set_row(3, 3, 3, 3, 3);

  CHECK(isomorphic(minimize_dfa(dfa), minimize_dfa(fig2)));
  CHECK_FALSE(isomorphic(dfa, minimize_dfa(fig2)));  // sizes differ pre-minimization
}

TEST_CASE("single-atom formula: two live locations") {
  const Dfa dfa = compile_dfa(parse_scltl("b"), {"b"});
  // over letters {}, {b}: initial, accept-absorbing, dead
  CHECK(dfa.num_locations() == 3);
  CHECK(dfa.accepting[dfa.trans[dfa.q0][dfa.letter("{b}")]]);
  const int dead = dfa.trans[dfa.q0][dfa.letter("{}")];
  CHECK_FALSE(dfa.accepting[dead]);
  int live = 0;
  for (int q = 0; q < dfa.num_locations(); ++q) {
    if (q != dead) ++live;
  }
  CHECK(live == 2);
}

TEST_CASE("run_word and bounded acceptance on the reach-avoid automaton") {
  const Dfa dfa = compile_dfa(parse_scltl("a U b"), {"a", "b"});
  CHECK(run_word(dfa, {"{a}", "{a}", "{b}"}));
  CHECK_FALSE(run_word(dfa, {"{}", "{a}", "{b}"}));
  CHECK_FALSE(run_word(dfa, {"{a}", "{a}"}));
  CHECK(run_word(dfa, {"{a}", "{b}", "{}"}));  // acceptance is absorbing here
  CHECK_FALSE(run_word(dfa, {}));              // q0 not accepting
  CHECK(run_word(compile_dfa(parse_scltl("true"), {"a"}), {}));

  // some prefix of length <= Td+1 must be accepted
  const std::vector<std::string> word{"{a}", "{a}", "{b}", "{}"};
  CHECK(accepts_within(dfa, word, 3));
  CHECK(accepts_within(dfa, word, 2));
  CHECK_FALSE(accepts_within(dfa, word, 1));

  CHECK_THROWS_AS(run_word(dfa, {"bogus"}), UnknownLetterError);
}

TEST_CASE("absorbing automaton construction") {
  const Dfa dfa = compile_dfa(parse_scltl("a U b"), {"a", "b"});
  const Dfa abs = absorb_dfa(dfa);
  CHECK(abs.num_locations() == dfa.num_locations() + 1);
  CHECK(abs.alphabet.size() == dfa.alphabet.size() + 1);
  const int margin = abs.letter(kMarginLetter);
  const int abs_loc = abs.num_locations() - 1;
  for (int q = 0; q < abs.num_locations(); ++q) CHECK(abs.trans[q][margin] == abs_loc);
  for (std::size_t l = 0; l < abs.alphabet.size(); ++l) {
    CHECK(abs.trans[abs_loc][l] == abs_loc);
  }
  CHECK_FALSE(abs.accepting[abs_loc]);
  CHECK(abs.accepting == std::vector<bool>{dfa.accepting[0], dfa.accepting[1],
                                           dfa.accepting[2], dfa.accepting[3], false});
  CHECK_THROWS_AS(absorb_dfa(abs), LetterClashError);

  const Dfa tiny = compile_dfa(make_true(), {"a"});
  CHECK(minimize_dfa(tiny).num_locations() == 1);
  const Dfa tiny_abs = absorb_dfa(minimize_dfa(tiny));
  CHECK(tiny_abs.num_locations() == 2);
  CHECK(tiny_abs.accepting[tiny_abs.q0]);
}

TEST_CASE("transfer probability arithmetic") {
  CHECK(transfer_probability(0.95, 0.104, TransferDirection::Lower) ==
        doctest::Approx(0.846));
  CHECK(transfer_probability(0.7, 0.0, TransferDirection::Lower) == doctest::Approx(0.7));
  CHECK(transfer_probability(0.7, 0.0, TransferDirection::Upper) == doctest::Approx(0.7));
  CHECK(transfer_probability(0.05, 0.2, TransferDirection::Lower) == 0.0);
  CHECK(transfer_probability(0.95, 0.2, TransferDirection::Upper) == 1.0);
  CHECK_THROWS_AS(transfer_probability(1.2, 0.0, TransferDirection::Lower),
                  InvalidParameterError);
}

namespace {

FormulaPtr random_formula(std::mt19937_64& rng, const std::vector<std::string>& aps,
                          int depth) {
  std::uniform_int_distribution<int> pick(0, depth == 0 ? 2 : 8);
  std::uniform_int_distribution<std::size_t> atom(0, aps.size() - 1);
  switch (pick(rng)) {
    case 0:
      return make_true();
    case 1:
      return make_atom(aps[atom(rng)]);
    case 2:
      return make_neg_atom(aps[atom(rng)]);
    case 3:
      return make_and(random_formula(rng, aps, depth - 1),
                      random_formula(rng, aps, depth - 1));
    case 4:
      return make_or(random_formula(rng, aps, depth - 1),
                     random_formula(rng, aps, depth - 1));
    case 5:
      return make_next(random_formula(rng, aps, depth - 1));
    case 6:
    case 7:
      return make_until(random_formula(rng, aps, depth - 1),
                        random_formula(rng, aps, depth - 1));
    default:
      return make_eventually(random_formula(rng, aps, depth - 1));
  }
}

}  // namespace

TEST_CASE("compiled automata agree with the finite-word oracle (sampled)") {
  // the exhaustive 200-formula sweep runs in the acceptance suite; this is a
  // faster randomized version of the same check
  std::mt19937_64 rng(8080);
  const std::vector<std::string> aps{"p", "q"};
  const std::uint32_t letters = 4;
  int checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const FormulaPtr f = random_formula(rng, aps, 3);
    const Dfa dfa = compile_dfa(f, aps);
    FiniteWordOracle oracle(f, aps);
    std::vector<std::uint32_t> word;
    std::uniform_int_distribution<std::uint32_t> letter(0, letters - 1);
    std::uniform_int_distribution<int> len(0, 7);
    for (int w = 0; w < 200; ++w) {
      word.resize(len(rng));
      for (auto& l : word) l = letter(rng);
      std::vector<std::string> named;
      named.reserve(word.size());
      for (auto l : word) named.push_back(letter_name(aps, l));
      CHECK(run_word(dfa, named) == oracle.satisfies(word));
      ++checked;
    }
  }
  CHECK(checked == 60 * 200);
}

TEST_CASE("transition tables are total under random-word fuzzing") {
  std::mt19937_64 rng(515);
  const std::vector<std::string> aps{"p", "q", "r"};
  const FormulaPtr f = parse_scltl("(p U q) & F r | X !p");
  const Dfa dfa = compile_dfa(f, aps);
  for (int q = 0; q < dfa.num_locations(); ++q) {
    for (std::size_t l = 0; l < dfa.alphabet.size(); ++l) {
      CHECK(dfa.trans[q][l] >= 0);
      CHECK(dfa.trans[q][l] < dfa.num_locations());
    }
  }
  std::uniform_int_distribution<std::uint32_t> letter(0, 7);
  for (int w = 0; w < 1000; ++w) {
    std::vector<std::string> word;
    for (int k = 0; k < 12; ++k) word.push_back(letter_name(aps, letter(rng)));
    CHECK_NOTHROW(run_word(dfa, word));
  }
}

TEST_CASE("state blowup is capped") {
  // F (a & X^17 b) forces the automaton to remember a 17-step window, past
  // the subset-construction cap; the cap must fire rather than exhaust memory.
  FormulaPtr chain = make_atom("b");
  for (int i = 0; i < 17; ++i) chain = make_next(chain);
  const FormulaPtr f = make_eventually(make_and(make_atom("a"), chain));
  CHECK_THROWS_AS(compile_dfa(f, {"a", "b"}), StateBlowupError);
}
