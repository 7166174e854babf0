#include <gtest/gtest.h>

#include <functional>

#include "corhorn/chc.hpp"
#include "corhorn/parser.hpp"
#include "corhorn/translate.hpp"
#include "models.hpp"

using namespace corhorn;

namespace {

class ChcTest : public ::testing::Test {
protected:
  static ChcSystem incMax() {
    Program p = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/inc_max.cor");
    return translateProgram(p, typeProgram(p));
  }

  static std::string wellSortedCode(const std::string& text) {
    try {
      wellSortedSystem(parseSystem(text));
    } catch (const Error& e) {
      return e.code();
    }
    return "ok";
  }

  static bool isTrueValue(const TermP& v) { return v->kind == TermKind::Inj && v->index == 1; }
};

TEST_F(ChcTest, SortsOfTerms) {
  SortContext d{{"x", sMut(tyInt())}, {"p", tyProd(tyInt(), tyUnit())}};
  EXPECT_EQ(printSort(sortOfTerm(d, parseTerm("*x"))), "int");
  EXPECT_EQ(printSort(sortOfTerm(d, parseTerm("^x"))), "int");
  EXPECT_EQ(printSort(sortOfTerm(d, parseTerm("7 + 3"))), "int");
  EXPECT_TRUE(sortEquiv(sortOfTerm(d, parseTerm("7 >= 3")), tyBool()));
  EXPECT_EQ(printSort(sortOfTerm(d, parseTerm("p.1"))), "unit");
  EXPECT_EQ(printSort(sortOfTerm(d, parseTerm("<x>"))), "box mut int");
  EXPECT_THROW(sortOfTerm(d, parseTerm("*7")), ChcError);
}

TEST_F(ChcTest, RecursiveSortsAreEquivalentUpToUnfolding) {
  Sort list = parseSort("mu X. int * box X + unit");
  Sort once = parseSort("int * box (mu X. int * box X + unit) + unit");
  EXPECT_TRUE(sortEquiv(list, once));
  EXPECT_TRUE(sortEquiv(once, list));
  EXPECT_FALSE(sortEquiv(list, parseSort("mu X. int * mut X + unit")));
}

TEST_F(ChcTest, Interpretation) {
  EXPECT_EQ(interpretTerm({}, parseTerm("*<7>"))->num, 7);
  EXPECT_EQ(interpretTerm({}, parseTerm("^<3, 9>"))->num, 9);
  EXPECT_EQ(interpretTerm({}, parseTerm("(4, 5).1"))->num, 5);
  EXPECT_EQ(interpretTerm({{"x", tInt(6)}}, parseTerm("x * 2 - 1"))->num, 11);
  EXPECT_TRUE(termEq(interpretTerm({}, parseTerm("3 != 3")), tBool(false)));
  EXPECT_TRUE(termEq(interpretTerm({}, parseTerm("(-3) < 2")), tBool(true)));
}

TEST_F(ChcTest, WellSortedness) {
  EXPECT_EQ(wellSortedCode("pred p(int)\np(3) <= true"), "ok");
  EXPECT_EQ(wellSortedCode("pred p(int)\np(<3>) <= true"), "IllSorted");
  EXPECT_EQ(wellSortedCode("pred p(int)\np(3) <= q(3)"), "UnknownPredicate");
  EXPECT_EQ(wellSortedCode("pred p(int)\np(3, 4) <= true"), "ArityMismatch");
  EXPECT_EQ(wellSortedCode("pred p(int)\nforall (x: box int). p(*x) <= true"), "HeadNotPattern");
}

TEST_F(ChcTest, TextRoundTrip) {
  std::string text =
      "pred p(mut int, box (unit + unit), int * int)\n"
      "forall (x: int) (y: int). p(<x, y>, <inj1 ()>, (x, (-2))) <= p(<y, x>, <(x > y)>, (x + 1, y))\n"
      "forall (x: int). false <= p(<x, x>, <inj0 ()>, (0, 0))\n";
  ChcSystem s = parseSystem(text);
  wellSortedSystem(s);
  EXPECT_EQ(printSystem(parseSystem(printSystem(s))), printSystem(s));
  EXPECT_FALSE(s.clauses[1].head);
}

TEST_F(ChcTest, UnifyMutPairs) {
  std::vector<TermP> ps{parseTerm("<a, a0>"), parseTerm("r")};
  std::vector<TermP> qs{parseTerm("<xs, xo>"), parseTerm("<xs, xo>")};
  auto u = unify(ps, qs);
  ASSERT_TRUE(u);
  for (std::size_t i = 0; i < ps.size(); ++i)
    EXPECT_TRUE(termEq(substVars(ps[i], u->first), substVars(qs[i], u->second)));
  // Most general: the common instance keeps two distinct variables.
  std::set<std::string> vs;
  varsOf(substVars(ps[1], u->first), vs);
  EXPECT_EQ(vs.size(), 2u);
  EXPECT_FALSE(unify({tInt(7)}, {tInt(8)}));
  EXPECT_FALSE(mgu({parseTerm("x")}, {parseTerm("<x>")}));
}

TEST_F(ChcTest, ResolutionStepOnReturn) {
  ChcSystem s = incMax();
  ResolutiveConfig k;
  k.stack.push_back(Atom{"take_max!L4", {parseTerm("<4, a0>"), parseTerm("r")}});
  k.result = parseTerm("r");
  k.delta = {{"a0", tyInt()}, {"r", sMut(tyInt())}};
  VarSupply vars;
  auto next = sldcStep(s, k, vars);
  ASSERT_EQ(next.size(), 1u);
  ResolutiveConfig want;
  want.result = parseTerm("<4, z>");
  want.delta = {{"z", tyInt()}};
  EXPECT_EQ(canonicalConfig(next[0].config), canonicalConfig(want));
  EXPECT_TRUE(next[0].config.stack.empty());
}

TEST_F(ChcTest, EnumerateWithoutClausesIsEmpty) {
  ChcSystem s = parseSystem("pred p(int, int)\n");
  SldcResult r = sldcEnumerate(s, "p", {tInt(1)});
  EXPECT_TRUE(r.results.empty());
  EXPECT_FALSE(r.budgetExceeded);
}

TEST_F(ChcTest, LoopsTerminateAndDivergenceHitsBudget) {
  ChcSystem loop = parseSystem("pred p(int, int)\nforall (x: int) (r: int). p(x, r) <= p(x, r)\n");
  SldcResult a = sldcEnumerate(loop, "p", {tInt(0)});
  EXPECT_TRUE(a.results.empty());
  EXPECT_FALSE(a.budgetExceeded);

  ChcSystem up = parseSystem("pred p(int, int)\nforall (x: int) (r: int). p(x, r) <= p(x + 1, r)\n");
  SldcOptions o;
  o.depth = 10;
  SldcResult b = sldcEnumerate(up, "p", {tInt(0)}, o);
  EXPECT_TRUE(b.results.empty());
  EXPECT_TRUE(b.budgetExceeded);
}

TEST_F(ChcTest, IncMaxAlwaysTrueBySldcAndOracle) {
  ChcSystem s = incMax();
  for (long long a = -8; a <= 8; ++a)
    for (long long b = -8; b <= 8; ++b) {
      SldcResult r = sldcEnumerate(s, "inc_max!entry", {tBox(tInt(a)), tBox(tInt(b))});
      ASSERT_FALSE(r.budgetExceeded);
      ASSERT_EQ(r.results.size(), 1u) << a << " " << b;
      EXPECT_TRUE(termEq(r.results[0], tBox(tBool(true))));
    }
  // Dropped variables range over every value, so the fact base grows fast; keep the box small.
  OracleOptions o;
  o.bounds = {-4, 4, 4};
  OracleFacts facts = bottomUpOracle(s, o);
  ASSERT_TRUE(facts.saturated);
  for (long long a = -4; a <= 3; ++a)
    for (long long b = -4; b <= 3; ++b) {
      EXPECT_TRUE(facts.holds("inc_max!entry", {tBox(tInt(a)), tBox(tInt(b)), tBox(tBool(true))}));
      EXPECT_FALSE(facts.holds("inc_max!entry", {tBox(tInt(a)), tBox(tInt(b)), tBox(tBool(false))}));
    }
}

TEST_F(ChcTest, TakeMaxFactsMatchDirectDefinition) {
  ChcSystem s = incMax();
  OracleOptions o;
  o.bounds = {-3, 3, 4};
  OracleFacts facts = bottomUpOracle(s, o);
  ASSERT_TRUE(facts.saturated);
  std::size_t n = 0;
  for (long long a = -3; a <= 3; ++a)
    for (long long a0 = -3; a0 <= 3; ++a0)
      for (long long b = -3; b <= 3; ++b)
        for (long long b0 = -3; b0 <= 3; ++b0)
          for (long long c = -3; c <= 3; ++c)
            for (long long c0 = -3; c0 <= 3; ++c0) {
              bool want = (a >= b && b0 == b && c == a && c0 == a0) || (a < b && a0 == a && c == b && c0 == b0);
              bool got = facts.holds("take_max!entry",
                                     {tMut(tInt(a), tInt(a0)), tMut(tInt(b), tInt(b0)), tMut(tInt(c), tInt(c0))});
              EXPECT_EQ(got, want) << a << " " << a0 << " " << b << " " << b0 << " " << c << " " << c0;
              n += want;
            }
  EXPECT_EQ(facts.tuples["take_max!entry"].size(), n);
}

TEST_F(ChcTest, EqualityClause) {
  auto [c, sig] = equalityClause(tyProd(tyInt(), tyBool()), "Eq");
  ChcSystem s;
  s.sigs["Eq"] = sig;
  s.clauses.push_back(c);
  wellSortedSystem(s);
  OracleOptions o;
  o.bounds = {-2, 2, 2};
  OracleFacts f = bottomUpOracle(s, o);
  EXPECT_EQ(f.tuples["Eq"].size(), 10u);
  EXPECT_TRUE(f.holds("Eq", {tPair(tInt(1), tBool(true)), tPair(tInt(1), tBool(true))}));
  EXPECT_FALSE(f.holds("Eq", {tPair(tInt(1), tBool(true)), tPair(tInt(2), tBool(true))}));
}

TEST_F(ChcTest, ValueCounts) {
  ValueBounds b{-8, 8, 2};
  EXPECT_EQ(countValues(tyInt(), b), 17);
  EXPECT_EQ(countValues(tyBool(), b), 2);
  EXPECT_EQ(countValues(sBox(tyProd(tyInt(), tyBool())), b), 34);
  EXPECT_EQ(countValues(sMut(tyInt()), b), 289);
  Sort list = parseSort("mu X. int * box X + unit");
  EXPECT_EQ(static_cast<double>(enumerateValues(list, b).size()), countValues(list, b));
}

TEST_F(ChcTest, ModelOfIncMaxHolds) {
  ChcSystem s = loadSystem(std::string(CORHORN_FIXTURE_DIR) + "/inc_max.model.chc");
  wellSortedSystem(s);
  PredStructure m = models::incMax();
  SampleOptions o;
  o.bounds = {-4, 4, 2};
  ModelVerdict ok = checkModelSampled(s, m, o);
  EXPECT_FALSE(ok.violated) << "clause " << ok.clause;
  EXPECT_TRUE(ok.exhaustive);
  EXPECT_GT(ok.premises, 0u);

  // Always returning the first reference is not a model.
  m["TakeMax"] = [&](const std::vector<TermP>& v) { return v[1]->b->num == v[1]->a->num && termEq(v[2], v[0]); };
  ModelVerdict bad = checkModelSampled(s, m, o);
  EXPECT_TRUE(bad.violated);
  EXPECT_EQ(bad.clause, 3u);
}

TEST_F(ChcTest, ModelOfLingerDecHolds) {
  ChcSystem s = loadSystem(std::string(CORHORN_FIXTURE_DIR) + "/linger_dec.model.chc");
  wellSortedSystem(s);
  PredStructure m = models::lingerDec();
  SampleOptions o;
  o.bounds = {-3, 3, 2};
  ModelVerdict ok = checkModelSampled(s, m, o);
  EXPECT_FALSE(ok.violated) << "clause " << ok.clause;
  EXPECT_TRUE(ok.exhaustive);
  EXPECT_GT(ok.premises, 0u);

  // Without the a >= a0 conjunct the recursive clause fails.
  m["LingerDec"] = [&](const std::vector<TermP>& v) { return models::isTrue(v[1]); };
  ModelVerdict bad = checkModelSampled(s, m, o);
  EXPECT_TRUE(bad.violated);
  EXPECT_EQ(bad.clause, 5u);
}

TEST_F(ChcTest, ModelOfIncSomeHolds) {
  ChcSystem s = loadSystem(std::string(CORHORN_FIXTURE_DIR) + "/inc_some.model.chc");
  wellSortedSystem(s);
  // independent recursive sum, checked against the model's helper
  std::function<long long(const TermP&)> sumf = [&](const TermP& xs) -> long long {
    if (xs->index == 1) return 0;
    return xs->a->a->num + sumf(xs->a->b->a);
  };
  for (const auto& xs : enumerateValues(parseSort("mu X. int * box X + unit"), {-2, 2, 3}))
    ASSERT_EQ(sumf(xs), models::sumList(xs)) << printTerm(xs);
  PredStructure m = models::incSome();
  SampleOptions o;
  o.bounds = {-2, 2, 3};
  ModelVerdict ok = checkModelSampled(s, m, o);
  EXPECT_FALSE(ok.violated) << "clause " << ok.clause;
  EXPECT_TRUE(ok.exhaustive);
  EXPECT_GT(ok.premises, 0u);

  // A reference that never changes its target is not a model of the first take_some clause.
  m["TakeSome"] = [&](const std::vector<TermP>& v) { return v[1]->b->num == v[1]->a->num; };
  ModelVerdict bad = checkModelSampled(s, m, o);
  EXPECT_TRUE(bad.violated);
  EXPECT_EQ(bad.clause, 2u);
}

TEST_F(ChcTest, ValueLiteralSugar) {
  EXPECT_TRUE(termEq(parseTerm("box(4)"), tBox(tInt(4))));
  EXPECT_TRUE(termEq(parseTerm("⟨4, 5⟩"), tMut(tInt(4), tInt(5))));
  EXPECT_TRUE(termEq(parseTerm("true"), tInj(1, tUnit())));
  std::vector<TermP> args = parseTermList("<4>, box(inj0 (1, <inj1 ()>)), (2, false)");
  ASSERT_EQ(args.size(), 3u);
  EXPECT_EQ(printTerm(args[1]), "<inj0 (1, <inj1 ()>)>");
  EXPECT_TRUE(termEq(args[2], tPair(tInt(2), tInj(0, tUnit()))));
  EXPECT_TRUE(parseTermList("").empty());
  EXPECT_THROW(parseTermList("<4>,"), Error);
}

}  // namespace
