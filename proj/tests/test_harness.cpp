#include <gtest/gtest.h>

#include "corhorn/harness.hpp"
#include "corhorn/parser.hpp"
#include "corhorn/translate.hpp"

using namespace corhorn;

namespace {

class HarnessTest : public ::testing::Test {
protected:
  void SetUp() override { load("inc_max.cor"); }

  void load(const std::string& name) {
    prog_ = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/" + name);
    typing_ = typeProgram(prog_);
    sys_ = translateProgram(prog_, typing_);
  }

  static std::vector<TermP> ints(std::initializer_list<long long> xs) {
    std::vector<TermP> out;
    for (long long x : xs) out.push_back(tBox(tInt(x)));
    return out;
  }

  Program prog_;
  TypingResult typing_;
  ChcSystem sys_;
};

TEST_F(HarnessTest, IncMaxLinksCosAndAos) {
  for (auto in : {ints({4, 3}), ints({3, 4}), ints({-2, -2})})
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      LockstepOptions o;
      o.seed = seed;
      LinkReport r = lockstepCosAos(prog_, typing_, "inc_max", in, o);
      ASSERT_TRUE(r.linked) << r.steps.back().diagnostics.front();
      EXPECT_EQ(r.status, "returned");
      EXPECT_TRUE(termEq(r.leftValue, tBox(tBool(true))));
      EXPECT_TRUE(termEq(r.rightValue, tBox(tBool(true))));
    }
}

TEST_F(HarnessTest, IncMaxLinksAosAndSldc) {
  LockstepOptions o;
  o.keepSteps = true;
  LinkReport r = lockstepAosSldc(prog_, typing_, sys_, "inc_max", ints({4, 3}), o);
  ASSERT_TRUE(r.linked) << r.steps.back().diagnostics.front();
  EXPECT_EQ(r.status, "returned");
  // The final resolutive configuration is the empty stack with result <true>.
  std::string last = r.steps.back().right;
  last.erase(0, last.find_first_not_of(' '));
  EXPECT_EQ(last, "| <inj1 ()>");
  EXPECT_TRUE(termEq(r.rightValue, tBox(tBool(true))));
}

TEST_F(HarnessTest, EntryReadoutHasNoAbstractVariables) {
  Allocator alloc;
  ConcreteConfig c = cosInitial(prog_, "inc_max", ints({7, -1}), alloc);
  ExtendedReadout ro = extendedReadout(prog_, typing_, c);
  EXPECT_TRUE(ro.summary.empty());
  EXPECT_EQ(ro.footprint.size(), 2u);
  ASSERT_EQ(ro.config.stack.size(), 1u);
  for (const auto& [x, v] : ro.config.stack[0].vars) EXPECT_FALSE(hasAbs(v)) << x;
  EXPECT_TRUE(abstractEqual(ro.config, aosInitial(prog_, "inc_max", ints({7, -1}))));
}

TEST_F(HarnessTest, MismatchedLabelIsNotLinked) {
  Allocator alloc;
  ConcreteConfig c = cosInitial(prog_, "inc_max", ints({1, 2}), alloc);
  AbstractConfig a = aosInitial(prog_, "inc_max", ints({1, 2}));
  EXPECT_TRUE(safeLink(prog_, typing_, c, a).ok);
  a.stack[0].label = "L1";
  EXPECT_FALSE(safeLink(prog_, typing_, c, a).ok);
  AbstractConfig b = aosInitial(prog_, "inc_max", ints({1, 3}));
  EXPECT_FALSE(safeLink(prog_, typing_, c, b).ok);
}

TEST_F(HarnessTest, CorruptSumTagFailsReadout) {
  load("list.cor");
  Allocator alloc;
  TermP xs = parseTerm("<inj0 (1, <inj1 ()>)>");
  ConcreteConfig c = cosInitial(prog_, "inc_some", {xs}, alloc);
  EXPECT_NO_THROW(extendedReadout(prog_, typing_, c));
  c.heap[c.stack[0].vars.at("oxs")] = 7;
  try {
    extendedReadout(prog_, typing_, c);
    FAIL() << "readout accepted tag 7";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "ReadoutFailure");
  }
  AbstractConfig a = aosInitial(prog_, "inc_some", {xs});
  EXPECT_FALSE(safeLink(prog_, typing_, c, a).ok);
}

TEST_F(HarnessTest, FootprintSafety) {
  LifetimeContext A;
  A.add("a@0");
  A.add("b@1");
  A.relate("b@1", "a@0");
  std::vector<std::string> d;
  FootMark hot;
  hot.addr = 100;
  EXPECT_TRUE(footprintSafe(A, {hot}, d));
  EXPECT_FALSE(footprintSafe(A, {hot, hot}, d));

  FootMark frozen = hot;
  frozen.act = {true, "a@0"};
  FootMark cold;
  cold.hot = false;
  cold.addr = 100;
  cold.lft = "b@1";
  EXPECT_TRUE(footprintSafe(A, {frozen, cold, cold}, d));
  EXPECT_FALSE(footprintSafe(A, {hot, cold}, d));
  cold.lft = "a@0";
  frozen.act.lft = "b@1";
  EXPECT_FALSE(footprintSafe(A, {frozen, cold}, d));
  EXPECT_FALSE(d.empty());
}

TEST_F(HarnessTest, SummarySafety) {
  LifetimeContext A;
  A.add("a@0");
  A.add("b@1");
  A.relate("b@1", "a@0");
  std::vector<std::string> d;
  ExtItem give{true, "b@1", 100, 3, tyInt()};
  ExtItem take{false, "a@0", 100, 3, tyInt()};
  EXPECT_TRUE(extendedSummarySafe(A, {give, take}, d));
  EXPECT_FALSE(extendedSummarySafe(A, {give}, d));
  EXPECT_FALSE(extendedSummarySafe(A, {give, give}, d));
  ExtItem elsewhere = take;
  elsewhere.addr = 101;
  EXPECT_FALSE(extendedSummarySafe(A, {give, elsewhere}, d));
  // give lifetime must be below the take lifetime
  std::swap(give.lft, take.lft);
  EXPECT_FALSE(extendedSummarySafe(A, {give, take}, d));
}

TEST_F(HarnessTest, MutatedSemanticsDiverge) {
  LockstepOptions o;
  o.aosMutation = AosMutation::DropMutNoSubst;
  LinkReport a = lockstepCosAos(prog_, typing_, "inc_max", ints({4, 3}), o);
  EXPECT_FALSE(a.linked);
  EXPECT_GT(a.firstDivergence, 0);
  LinkReport b = lockstepAosSldc(prog_, typing_, sys_, "inc_max", ints({4, 3}), o);
  EXPECT_FALSE(b.linked);

  LockstepOptions s;
  s.cosMutation = CosMutation::SwapNoExchange;
  LinkReport c = lockstepCosAos(prog_, typing_, "inc_max", ints({4, 3}), s);
  EXPECT_FALSE(c.linked);
  EXPECT_EQ(c.status, "diverged");
}

TEST_F(HarnessTest, InitialAbstractMapsToSldcStart) {
  AbstractConfig a = aosInitial(prog_, "inc_max", ints({2, 5}));
  ResolutiveConfig k = abstractToResolutive(prog_, typing_, a);
  ResolutiveConfig k0 = sldcInitial(sys_, "inc_max!entry", ints({2, 5}));
  EXPECT_TRUE(resolutiveInstance(k, k0));
  EXPECT_TRUE(resolutiveInstance(k0, k));
  EXPECT_FALSE(resolutiveInstance(k0, sldcInitial(sys_, "inc_max!entry", ints({2, 6}))));
}

TEST_F(HarnessTest, InstanceOrder) {
  auto cfg = [](std::vector<TermP> args, TermP res) {
    ResolutiveConfig k;
    k.stack.push_back({"p", std::move(args)});
    k.result = std::move(res);
    return k;
  };
  ResolutiveConfig gen = cfg({tVar("x"), tVar("?1")}, tVar("x"));
  EXPECT_TRUE(resolutiveInstance(gen, cfg({tVar("y"), tInt(3)}, tVar("y"))));
  EXPECT_FALSE(resolutiveInstance(gen, cfg({tVar("y"), tInt(3)}, tVar("z"))));
  EXPECT_FALSE(resolutiveInstance(gen, cfg({tInt(1), tInt(3)}, tInt(1))));
  ResolutiveConfig two = cfg({tVar("x"), tVar("y")}, tUnit());
  EXPECT_FALSE(resolutiveInstance(two, cfg({tVar("z"), tVar("z")}, tUnit())));
  EXPECT_TRUE(resolutiveInstance(two, cfg({tVar("u"), tVar("v")}, tUnit())));
}

TEST_F(HarnessTest, JustRecSuite) {
  load("just_rec.cor");
  std::vector<std::vector<TermP>> in = {ints({0}), ints({3}), ints({-5}), ints({8})};
  SuiteReport cos = lockstepSuite(prog_, typing_, "main", in, LockstepKind::CosAos, 100, 1000);
  EXPECT_TRUE(cos.ok()) << (cos.failures.empty() ? "" : cos.failures.front());
  EXPECT_EQ(cos.runs, 100u);
  EXPECT_EQ(cos.returned + cos.outOfFuel, 100u);
  SuiteReport sldc = lockstepSuite(prog_, typing_, "main", in, LockstepKind::AosSldc, 100, 1000);
  EXPECT_TRUE(sldc.ok()) << (sldc.failures.empty() ? "" : sldc.failures.front());
}

TEST_F(HarnessTest, InputDomainIsTheProduct) {
  ValueBounds b{-2, 2, 1};
  auto dom = inputDomain(prog_, "inc_max", b);
  EXPECT_EQ(dom.size(), 25u);
  load("list.cor");
  ValueBounds lb{-1, 1, 3};
  // lists of length at most 2 over {-1, 0, 1}: 1 + 3 + 9
  EXPECT_EQ(inputDomain(prog_, "inc_some", lb).size(), 13u);
}

TEST_F(HarnessTest, OracleAgreesOnIncMax) {
  OracleDiffOptions o;
  o.seeds = 2;
  OracleReport r = oracleDiff(prog_, typing_, "inc_max", inputDomain(prog_, "inc_max", {-3, 3, 1}), o);
  EXPECT_EQ(r.cases, 49u);
  EXPECT_EQ(r.returned, r.runs);
  EXPECT_TRUE(r.misses.empty());
  EXPECT_EQ(r.budgetExceeded, 0u);
}

TEST_F(HarnessTest, OracleAgreesOnSmallLists) {
  load("list.cor");
  OracleDiffOptions o;
  o.seeds = 3;
  OracleReport r = oracleDiff(prog_, typing_, "inc_some", inputDomain(prog_, "inc_some", {-2, 2, 3}), o);
  EXPECT_EQ(r.cases, 31u);
  EXPECT_GT(r.returned, 0u);
  EXPECT_TRUE(r.misses.empty());
}

}  // namespace
