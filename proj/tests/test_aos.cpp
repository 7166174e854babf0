#include <gtest/gtest.h>

#include "corhorn/aos.hpp"
#include "corhorn/error.hpp"
#include "corhorn/parser.hpp"
#include "inc_max_goldens.hpp"

using namespace corhorn;
using namespace golden::aos;

class AosTest : public ::testing::Test {
protected:
  Program prog = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/inc_max.cor");
  TypingResult typing = typeProgram(prog);

  AosRunResult run(long long a, long long b) {
    AosRunOptions o;
    o.keepTrace = true;
    o.checkSafety = true;
    return aosRun(prog, typing, "inc_max", {bi(a), bi(b)}, o);
  }
};

TEST_F(AosTest, trace_matches_example) {
  AosRunResult r = run(4, 3);
  ASSERT_EQ(r.status, RunStatus::Returned) << r.reason;
  EXPECT_TRUE(termEq(r.value, bx(tBool(true))));
  auto wps = incMaxWaypoints();
  ASSERT_EQ(wps.size(), 14u);
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const AbstractConfig* c = findWaypoint(r.trace, wps[k]);
    ASSERT_NE(c, nullptr) << "waypoint " << k;
    EXPECT_TRUE(abstractEqual(*c, wps[k])) << "waypoint " << k << "\n got:  " << printAbstract(*c)
                                           << "\n want: " << printAbstract(wps[k]);
  }
}

TEST_F(AosTest, borrowed_value_resolves_to_five) {
  AosRunResult r = run(4, 3);
  // the abstract variable lent by oa is replaced by 5 once mc is released
  long long id = -1;
  for (const auto& c : r.trace) {
    const auto& top = c.stack.back();
    if (c.stack.size() == 1 && top.label == "L3") id = top.vars.at("oa")->a->num;
    if (c.stack.size() == 1 && top.label == "L10") {
      EXPECT_TRUE(termEq(top.vars.at("oa"), bi(5)));
      std::set<long long> ids;
      for (const auto& [x, v] : top.vars) absOf(v, ids);
      EXPECT_FALSE(ids.count(id));
    }
  }
  EXPECT_GE(id, 0);
}

TEST_F(AosTest, equal_inputs) {
  EXPECT_TRUE(termEq(run(3, 3).value, bx(tBool(true))));
}

TEST_F(AosTest, fuel_zero) {
  AosRunOptions o;
  o.fuel = 0;
  EXPECT_EQ(aosRun(prog, typing, "inc_max", {bi(1), bi(2)}, o).status, RunStatus::OutOfFuel);
}

TEST_F(AosTest, mutbor_and_drop_rules) {
  AbstractConfig c = aosInitial(prog, "inc_max", {bi(4), bi(3)});
  RandSource rng(0);
  AbsSupply fresh;
  c = aosStep(prog, typing, c, rng, fresh).next;
  AosStepResult st = aosStep(prog, typing, c, rng, fresh);
  ASSERT_EQ(st.kind, AosStepResult::Next);
  const auto& vars = st.next.stack.back().vars;
  ASSERT_EQ(vars.at("ma")->kind, TermKind::Mut);
  EXPECT_TRUE(termEq(vars.at("ma")->a, tInt(4)));
  EXPECT_TRUE(termEq(vars.at("oa"), tBox(vars.at("ma")->b)));
  EXPECT_EQ(vars.at("oa")->a->kind, TermKind::Abs);
}

TEST_F(AosTest, substitution_hygiene_and_safety_along_trace) {
  AosRunResult r = run(4, 3);
  for (std::size_t k = 0; k + 1 < r.trace.size(); ++k) {
    std::set<long long> before, after;
    for (const auto& fr : r.trace[k].stack)
      for (const auto& [x, v] : fr.vars) absOf(v, before);
    for (const auto& fr : r.trace[k + 1].stack)
      for (const auto& [x, v] : fr.vars) absOf(v, after);
    // an abstract variable that vanishes never comes back
    for (std::size_t j = k + 2; j < r.trace.size(); ++j)
      for (long long id : before)
        if (!after.count(id))
          for (const auto& fr : r.trace[j].stack)
            for (const auto& [x, v] : fr.vars) {
              std::set<long long> s;
              absOf(v, s);
              EXPECT_FALSE(s.count(id));
            }
    EXPECT_TRUE(safeAbstract(prog, typing, r.trace[k]).ok) << printAbstract(r.trace[k]);
  }
}

TEST_F(AosTest, summary_examples) {
  Theta th = {{"a", "a@0"}};
  VarContext g;
  g["x"] = VarItem{{}, parseType("mut<'a> int")};
  Summary s = summaryOfFrame(th, {{"x", mt(4, A())}}, g);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s[0].give);
  EXPECT_EQ(s[0].lft, "a@0");
  EXPECT_EQ(printType(s[0].type), "int");
  g["x"] = VarItem{{true, "a"}, parseType("own int")};
  s = summaryOfFrame(th, {{"x", bx(A())}}, g);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_FALSE(s[0].give);
  EXPECT_EQ(s[0].lft, "a@0");
  g["x"] = VarItem{{}, parseType("own int")};
  EXPECT_TRUE(summaryOfFrame(th, {{"x", bi(4)}}, g).empty());
  // cold access through an immutable reference hides the give
  g["x"] = VarItem{{}, parseType("immut<'a> mut<'a> int")};
  EXPECT_TRUE(summaryOfFrame(th, {{"x", bx(mt(4, bi(2)))}}, g).empty());
  g["x"] = VarItem{{}, parseType("own int")};
  EXPECT_THROW(summaryOfFrame(th, {{"x", bx(A())}}, g), Error);
}

TEST_F(AosTest, two_gives_are_unsafe) {
  AbstractConfig c = incMaxWaypoints()[2];
  c.stack.back().vars["mb"] = mt(3, A());
  c.stack.back().vars["ob"] = bi(3);
  EXPECT_FALSE(safeAbstract(prog, typing, c).ok);
  EXPECT_TRUE(safeAbstract(prog, typing, incMaxWaypoints()[2]).ok);
  EXPECT_TRUE(safeAbstract(prog, typing, aosInitial(prog, "inc_max", {bi(1), bi(2)})).ok);
}

TEST_F(AosTest, lifetime_safety_detects_missing_tag) {
  AbstractConfig c = incMaxWaypoints()[2];
  c.global = LifetimeContext{};
  EXPECT_FALSE(lifetimeSafe(prog, typing, c).ok);
  c = incMaxWaypoints()[2];
  c.stack.back().theta["a"] = "a@3";
  EXPECT_FALSE(lifetimeSafe(prog, typing, c).ok);
}

TEST_F(AosTest, drop_mutation_leaves_abstract_variable) {
  AbstractConfig c = aosInitial(prog, "inc_max", {bi(4), bi(3)});
  RandSource rng(0);
  AbsSupply fresh;
  while (!(c.stack.size() == 1 && c.stack.back().label == "L9")) c = aosStep(prog, typing, c, rng, fresh).next;
  AosStepResult good = aosStep(prog, typing, c, rng, fresh);
  AosStepResult bad = aosStep(prog, typing, c, rng, fresh, AosMutation::DropMutNoSubst);
  EXPECT_TRUE(safeAbstract(prog, typing, good.next).ok);
  EXPECT_FALSE(safeAbstract(prog, typing, bad.next).ok);
}
