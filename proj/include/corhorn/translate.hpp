#pragma once

#include <string>
#include <vector>

#include "corhorn/ast.hpp"
#include "corhorn/chc.hpp"
#include "corhorn/typeck.hpp"

namespace corhorn {

// Lifetimes are erased: own and immut become box, mut becomes mut.
Sort sortOfType(const TypeP& t);

std::string predName(const std::string& f, const std::string& label);  // f!L
std::string resultVar(const FunctionDef& fd);                         // res, unless a variable takes it

struct PredSignature {
  std::string pred;
  std::vector<std::string> vars;  // label variables in name order, then the result variable
  std::vector<Sort> sorts;
  SortContext delta;
  Atom head;
};

PredSignature signatureFor(const Program& prog, const TypingResult& typing, const std::string& f,
                           const std::string& label);

std::vector<Clause> clausesForLabel(const Program& prog, const TypingResult& typing, const std::string& f,
                                    const std::string& label);

ChcSystem translateProgram(const Program& prog, const TypingResult& typing);

struct GoalSpec {
  std::string fn;
  enum Kind { ReturnsTrue, ReturnsInt } kind = ReturnsTrue;
  long long value = 0;
};

inline const char* goalPredicate() { return "goal_violation"; }

// "NAME returns true" or "NAME returns N"
GoalSpec parseGoal(const std::string& text);
// Adds goal_violation, the clauses deriving it from a wrong result, and the query false <= goal_violation().
ChcSystem attachGoal(const ChcSystem& sys, const Program& prog, const GoalSpec& goal);

// Clauses equal up to a consistent renaming of variables; binders are compared when both sides have them.
bool clauseAlphaEqual(const Clause& a, const Clause& b);

}  // namespace corhorn
