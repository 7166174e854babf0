#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "corhorn/ast.hpp"

namespace corhorn {

// One tree type for values, pre-values (with Abs leaves), patterns and CHC terms.
enum class TermKind { Var, Abs, Box, Mut, Inj, Pair, Deref, Proph, Proj, Int, Unit, Op };

struct Term;
using TermP = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;   // Var name, Abs display name
  long long num = 0;  // Int value, Abs id
  int index = 0;      // Inj / Proj
  OpKind op = OpKind::Add;
  TermP a, b;
};

TermP tVar(std::string x);
TermP tAbs(long long id, std::string display);
TermP tBox(TermP t);
TermP tMut(TermP cur, TermP proph);
TermP tInj(int i, TermP t);
TermP tPair(TermP a, TermP b);
TermP tDeref(TermP t);
TermP tProph(TermP t);
TermP tProj(TermP t, int i);
TermP tInt(long long n);
TermP tUnit();
TermP tBool(bool b);
TermP tOp(OpKind op, TermP a, TermP b);

bool termEq(const TermP& a, const TermP& b);
bool isValue(const TermP& t);    // constructors and constants only
bool isPattern(const TermP& t);  // values plus variables
bool hasAbs(const TermP& t);
std::string printTerm(const TermP& t);

void varsOf(const TermP& t, std::set<std::string>& out);
void varOccurrences(const TermP& t, std::map<std::string, int>& out);
void absOf(const TermP& t, std::set<long long>& out);

TermP substVars(const TermP& t, const std::map<std::string, TermP>& s);
TermP substAbs(const TermP& t, long long id, const TermP& by);

// val(<v>) = val(<v, w>) = v
TermP valOf(const TermP& t);

}  // namespace corhorn
