#include <gtest/gtest.h>

#include "corhorn/cos.hpp"
#include "corhorn/error.hpp"
#include "corhorn/parser.hpp"
#include "inc_max_goldens.hpp"

using namespace corhorn;
using namespace golden::cos;

class CosTest : public ::testing::Test {
protected:
  Program prog = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/inc_max.cor");
  TypingResult typing = typeProgram(prog);

  static TermP boxed(long long n) { return tBox(tInt(n)); }

  CosRunResult run(std::vector<TermP> in, AllocPolicy pol = AllocPolicy::Bump) {
    CosRunOptions o;
    o.keepTrace = true;
    o.policy = pol;
    return cosRun(prog, typing, "inc_max", in, o);
  }
};

TEST_F(CosTest, inc_max_returns_true) {
  CosRunResult r = run({boxed(4), boxed(3)});
  ASSERT_EQ(r.status, RunStatus::Returned) << r.reason;
  EXPECT_TRUE(termEq(r.value, tBox(tBool(true))));
  EXPECT_TRUE(r.leakFree);
}

TEST_F(CosTest, trace_matches_example_per_waypoint) {
  CosRunResult r = run({boxed(4), boxed(3)});
  auto wps = incMaxWaypoints();
  ASSERT_EQ(wps.size(), 14u);
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const ConcreteConfig* c = findWaypoint(r.trace, wps[k]);
    ASSERT_NE(c, nullptr) << "waypoint " << k;
    std::map<Addr, Addr> sigma;
    EXPECT_TRUE(matchUnder(wps[k], *c, sigma)) << "waypoint " << k << ": " << configToJson(*c).dump();
  }
}

TEST_F(CosTest, first_fit_trace_matches_literally) {
  // first-fit reuse reproduces the four addresses literally (the unit pointer at D+1 may coincide with C)
  CosRunResult r = run({boxed(4), boxed(3)}, AllocPolicy::FirstFit);
  for (const auto& w : incMaxWaypoints(100, 101, 102, 103)) {
    const ConcreteConfig* c = findWaypoint(r.trace, w);
    ASSERT_NE(c, nullptr);
    std::map<Addr, Addr> sigma = {{100, 100}, {101, 101}, {102, 102}, {103, 103}};
    EXPECT_TRUE(matchUnder(w, *c, sigma)) << configToJson(*c).dump();
  }
}

TEST_F(CosTest, renaming_must_be_injective) {
  CosRunResult r = run({boxed(4), boxed(3)});
  Waypoint w = incMaxWaypoints()[2];
  w.frames[0].vars["mb"] = kS;  // collapse the two borrows
  std::map<Addr, Addr> sigma;
  EXPECT_FALSE(matchUnder(w, *findWaypoint(r.trace, w), sigma));
}

TEST_F(CosTest, other_inputs) {
  EXPECT_TRUE(termEq(run({boxed(3), boxed(3)}).value, tBox(tBool(true))));
  EXPECT_TRUE(termEq(run({boxed(-2), boxed(5)}).value, tBox(tBool(true))));
}

TEST_F(CosTest, fuel_zero) {
  CosRunOptions o;
  o.fuel = 0;
  EXPECT_EQ(cosRun(prog, typing, "inc_max", {boxed(1), boxed(2)}, o).status, RunStatus::OutOfFuel);
}

TEST_F(CosTest, not_simple) {
  EXPECT_THROW(cosRun(prog, typing, "take_max", {boxed(1), boxed(2)}), Error);
}

TEST_F(CosTest, mutbor_step_shares_address) {
  Allocator al;
  ConcreteConfig c = cosInitial(prog, "inc_max", {boxed(4), boxed(3)}, al);
  RandSource rng(0);
  c = cosStep(prog, typing, c, rng, al).next;  // intro
  Heap before = c.heap;
  CosStepResult st = cosStep(prog, typing, c, rng, al);
  ASSERT_EQ(st.kind, StepKind::Next);
  EXPECT_EQ(st.next.stack.back().vars.at("ma"), st.next.stack.back().vars.at("oa"));
  EXPECT_EQ(st.next.heap, before);
}

TEST_F(CosTest, swap_exchanges_blocks) {
  CosRunResult r = run({boxed(4), boxed(3)});
  auto at = [&](const std::string& l) {
    for (const auto& c : r.trace)
      if (c.stack.size() == 1 && c.stack.back().label == l) return c;
    throw std::runtime_error("no " + l);
  };
  ConcreteConfig l7 = at("L7"), l8 = at("L8");
  Addr mc = l7.stack.back().vars.at("mc"), oc = l7.stack.back().vars.at("oc2");
  EXPECT_EQ(l8.heap.at(mc), l7.heap.at(oc));
  EXPECT_EQ(l8.heap.at(oc), l7.heap.at(mc));
}

TEST_F(CosTest, swap_mutation_is_visible) {
  Allocator al;
  RandSource rng(0);
  ConcreteConfig c = cosInitial(prog, "inc_max", {boxed(4), boxed(3)}, al);
  for (int k = 0; k < 40; ++k) {
    if (c.stack.back().label == "L7" && c.stack.size() == 1) break;
    c = cosStep(prog, typing, c, rng, al).next;
  }
  ASSERT_EQ(c.stack.back().label, "L7");
  CosStepResult good = cosStep(prog, typing, c, rng, al);
  CosStepResult bad = cosStep(prog, typing, c, rng, al, CosMutation::SwapNoExchange);
  EXPECT_NE(good.next.heap, bad.next.heap);
}

TEST_F(CosTest, final_only_at_bottom_return) {
  CosRunResult r = run({boxed(4), boxed(3)});
  Allocator al;
  RandSource rng(0);
  EXPECT_EQ(cosStep(prog, typing, r.trace.back(), rng, al).kind, StepKind::Final);
  // take_max's return with a caller below is an ordinary step
  for (const auto& c : r.trace)
    if (c.stack.size() == 2 && c.stack.back().label == "L4")
      EXPECT_EQ(cosStep(prog, typing, c, rng, al).kind, StepKind::Next);
}

TEST_F(CosTest, readout_examples) {
  auto [v, m] = readout({{100, 7}, {101, 5}}, 100, parseType("int * int"));
  EXPECT_EQ(printTerm(v), "(7, 5)");
  EXPECT_EQ(m, (Footprint{100, 101}));
  auto [u, mu] = readout({}, 42, parseType("unit"));
  EXPECT_EQ(printTerm(u), "()");
  EXPECT_TRUE(mu.empty());
  auto [b, mb] = readout({{100, 200}, {200, 9}}, 100, parseType("own int"));
  EXPECT_TRUE(termEq(b, tBox(tInt(9))));
  EXPECT_EQ(std::multiset<Addr>(mb.begin(), mb.end()), (std::multiset<Addr>{100, 200}));
  EXPECT_THROW(readout({{100, 7}}, 100, parseType("int + unit")), Error);
  try {
    readout({{100, 1}, {101, 3}}, 100, parseType("int + unit"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "NonzeroPadding");
  }
}

TEST_F(CosTest, write_then_read) {
  Allocator al;
  Heap h;
  Addr a = writeValue(h, parseType("int * int"), tPair(tInt(7), tInt(5)), al);
  EXPECT_EQ(h, (Heap{{a, 7}, {a + 1, 5}}));
  Heap h2;
  writeValue(h2, parseType("unit"), tUnit(), al);
  EXPECT_TRUE(h2.empty());
  Heap h3;
  Addr b = writeValue(h3, parseType("bool"), tBool(false), al);
  EXPECT_EQ(h3, (Heap{{b, 0}}));
  TypeP list = parseType("mu X. (int * own X) + unit");
  TermP nil = tInj(1, tUnit());
  std::vector<TermP> samples = {nil, tInj(0, tPair(tInt(3), tBox(nil))),
                                tInj(0, tPair(tInt(-1), tBox(tInj(0, tPair(tInt(2), tBox(nil))))))};
  for (const auto& v : samples) {
    Heap hh;
    Addr c = writeValue(hh, list, v, al);
    auto [back, fp] = readout(hh, c, list);
    EXPECT_TRUE(termEq(back, v)) << printTerm(back);
    std::set<Addr> dom;
    for (auto [k, _] : hh) dom.insert(k);
    EXPECT_EQ(std::set<Addr>(fp.begin(), fp.end()), dom);
    EXPECT_EQ(fp.size(), dom.size());
  }
  EXPECT_THROW(writeValue(h, parseType("int"), tUnit(), al), Error);
}

TEST_F(CosTest, safe_readout_frame) {
  ConcreteFrame fr;
  fr.vars = {{"x", 100}, {"y", 100}};
  VarContext g;
  g["x"] = VarItem{{}, parseType("own int")};
  g["y"] = VarItem{{}, parseType("own int")};
  try {
    safeReadoutFrame({{100, 7}}, fr, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "UnsafeReadout");
  }
  fr.vars = {{"x", 100}};
  g.erase("y");
  EXPECT_TRUE(termEq(safeReadoutFrame({{100, 5}}, fr, g).at("x"), tBox(tInt(5))));
  Allocator al;
  ConcreteConfig c = cosInitial(prog, "inc_max", {boxed(4), boxed(3)}, al);
  auto m = safeReadoutFrame(c.heap, c.stack.back(), typing.at("inc_max", "entry").gamma);
  EXPECT_TRUE(termEq(m.at("oa"), boxed(4)));
  EXPECT_TRUE(termEq(m.at("ob"), boxed(3)));
}
