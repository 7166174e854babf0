#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "corhorn/parser.hpp"
#include "corhorn/smtlib.hpp"
#include "corhorn/translate.hpp"

using namespace corhorn;

namespace {

std::size_t countOf(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

class SmtlibTest : public ::testing::Test {
protected:
  static ChcSystem translateFile(const std::string& name) {
    Program p = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/" + name);
    return translateProgram(p, typeProgram(p));
  }

  static bool haveZ3() { return std::system("command -v z3 >/dev/null 2>&1") == 0; }
};

TEST_F(SmtlibTest, EmissionIsDeterministic) {
  ChcSystem s = translateFile("inc_max.cor");
  EXPECT_EQ(emitSmt2(s), emitSmt2(translateFile("inc_max.cor")));
  std::string out = emitSmt2(s);
  EXPECT_EQ(out.rfind("(set-logic HORN)", 0), 0u);
  EXPECT_NE(out.find("(check-sat)"), std::string::npos);
}

TEST_F(SmtlibTest, TakeMaxDeclarationsAndAssertions) {
  ChcSystem full = translateFile("inc_max.cor");
  ChcSystem s;
  for (const auto& [p, sig] : full.sigs)
    if (p.rfind("take_max!", 0) == 0) s.sigs[p] = sig;
  for (const auto& c : full.clauses)
    if (c.head->pred.rfind("take_max!", 0) == 0) s.clauses.push_back(c);
  std::string out = emitSmt2(s);
  EXPECT_EQ(countOf(out, "(declare-fun "), 8u);
  EXPECT_EQ(countOf(out, "(assert "), 9u);
  EXPECT_EQ(countOf(out, "(declare-datatypes "), 1u);
}

TEST_F(SmtlibTest, RecursiveSortGetsOneDatatype) {
  ChcSystem s = parseSystem(
      "pred mem(box (mu X. int * box X + unit), int)\n"
      "forall (x: int) (t: box (mu X. int * box X + unit)). mem(<inj0 (x, t)>, x) <= true\n"
      "forall (x: int) (y: int) (t: box (mu X. int * box X + unit)). mem(<inj0 (x, t)>, y) <= mem(t, y)\n");
  wellSortedSystem(s);
  std::string out = emitSmt2(s);
  std::regex sumDecl(R"(\(Sum_\d+ 0\))");
  std::size_t sums = 0;
  for (auto it = std::sregex_iterator(out.begin(), out.end(), sumDecl); it != std::sregex_iterator(); ++it) ++sums;
  EXPECT_EQ(sums, 1u) << out;
}

TEST_F(SmtlibTest, SolverTimeoutAndMissingTool) {
  // The script path is appended to the command line, so wrap sleep in a script that ignores it.
  std::string sleeper = ::testing::TempDir() + "corhorn_sleeper.sh";
  {
    std::ofstream f(sleeper);
    f << "#!/bin/sh\nsleep 5\n";
  }
  std::filesystem::permissions(sleeper, std::filesystem::perms::owner_all);
  SolverConfig slow = solverFromCommand(sleeper, 0.3);
  SolverVerdict v = runSolver(slow, "(check-sat)\n");
  EXPECT_EQ(v.kind, SolverVerdict::Timeout);
  EXPECT_LT(v.seconds, 3.0);

  SolverVerdict missing = runSolver(solverFromCommand("/nonexistent/solver"), "(check-sat)\n");
  EXPECT_EQ(missing.kind, SolverVerdict::ToolError);
  EXPECT_THROW(solverFromCommand("   "), Error);
}

TEST_F(SmtlibTest, Z3AgreesOnIncMax) {
  if (!haveZ3()) GTEST_SKIP() << "z3 not on PATH";
  Program safe = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/inc_max.cor");
  Program bad = loadProgram(std::string(CORHORN_CORPUS_DIR) + "/inc_max_unsafe.cor");
  GoalSpec g = parseGoal("inc_max returns true");
  SolverConfig z3 = solverFromCommand("z3", 60);
  SolverVerdict a = runSolver(z3, emitSmt2(attachGoal(translateProgram(safe, typeProgram(safe)), safe, g)));
  SolverVerdict b = runSolver(z3, emitSmt2(attachGoal(translateProgram(bad, typeProgram(bad)), bad, g)));
  EXPECT_EQ(a.kind, SolverVerdict::Satisfiable) << a.output;
  EXPECT_EQ(b.kind, SolverVerdict::Unsatisfiable) << b.output;
}

}  // namespace
