#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corhorn/ast.hpp"
#include "corhorn/error.hpp"
#include "corhorn/term.hpp"

namespace corhorn {

// Sorts reuse Type: Box is an own pointer with no lifetime, Mut a mut pointer with no lifetime.
using Sort = TypeP;
using SortContext = std::map<std::string, Sort>;

Sort sBox(Sort s);
Sort sMut(Sort s);
bool isBoxSort(const Sort& s);
bool isMutSort(const Sort& s);

// Congruence generated by mu X. s ~ s[mu X. s / X].
bool sortEquiv(const Sort& a, const Sort& b);
std::string printSort(const Sort& s);
Sort parseSort(const std::string& text);

class ChcError : public Error {
public:
  using Error::Error;
};

struct Atom {
  std::string pred;
  std::vector<TermP> args;
};

struct Clause {
  std::vector<std::pair<std::string, Sort>> binders;
  std::optional<Atom> head;  // empty: the head is false (a query)
  std::vector<Atom> body;
};

struct ChcSystem {
  std::vector<Clause> clauses;
  std::map<std::string, std::vector<Sort>> sigs;  // Xi
};

Sort sortOfTerm(const SortContext& delta, const TermP& t);
void checkSort(const SortContext& delta, const TermP& t, const Sort& s);
// Valuation I: variables to values.
TermP interpretTerm(const std::map<std::string, TermP>& val, const TermP& t);
void wellSortedSystem(const ChcSystem& sys);

std::string printAtom(const Atom& a);
std::string printClause(const Clause& c);
std::string printSystem(const ChcSystem& sys);
TermP parseTerm(const std::string& text);
// Comma-separated terms, e.g. "<4>, <3>"; also accepts box(v), true/false and angle brackets.
std::vector<TermP> parseTermList(const std::string& text);
ChcSystem parseSystem(const std::string& text);
ChcSystem loadSystem(const std::string& path);

// forall x: s. Eq_s(x, x) <= true
std::pair<Clause, std::vector<Sort>> equalityClause(const Sort& s, const std::string& pred);

// ---- models ----

using PredTest = std::function<bool(const std::vector<TermP>&)>;
using PredStructure = std::map<std::string, PredTest>;

struct ValueBounds {
  long long intLo = -8, intHi = 8;
  int muDepth = 4;  // mu unfoldings per value
};

// Values of sort s within the bounds, in a fixed order.
std::vector<TermP> enumerateValues(const Sort& s, const ValueBounds& b);
double countValues(const Sort& s, const ValueBounds& b);

struct SampleOptions {
  ValueBounds bounds;
  std::uint64_t seed = 0;
  std::size_t budget = 100000;
  double exhaustiveLimit = 1e6;
};

struct ModelVerdict {
  bool violated = false;
  std::size_t clause = 0;
  std::map<std::string, TermP> valuation;
  std::size_t checked = 0;   // valuations tried over all clauses
  std::size_t premises = 0;  // of which the body held
  bool exhaustive = true;    // every clause was enumerated exhaustively
};

ModelVerdict checkModelSampled(const ChcSystem& sys, const PredStructure& m, const SampleOptions& opts = {});

// ---- unification and SLDC resolution ----

using Subst = std::map<std::string, TermP>;

// Most general unifier of two pattern tuples with disjoint variable namespaces.
std::optional<std::pair<Subst, Subst>> unify(const std::vector<TermP>& ps, const std::vector<TermP>& qs);
// Single-namespace mgu, resolved (idempotent).
std::optional<Subst> mgu(const std::vector<TermP>& ps, const std::vector<TermP>& qs);

// Matches pattern p against a term w, treating variables of w as constants.
bool matchPattern(const TermP& p, const TermP& w, Subst& s);

struct ResolutiveConfig {
  std::vector<Atom> stack;
  TermP result;
  SortContext delta;
};

// Don't-care markers stand for any value of their sort.
inline bool isDontCare(const std::string& x) { return !x.empty() && x[0] == '?'; }

struct SldcOptions {
  long long branchLo = -8, branchHi = 8;  // integer enumeration for stalled arithmetic
  std::size_t depth = 4096;
  std::size_t width = 20000;
};

struct SldcSuccessor {
  ResolutiveConfig config;
  std::size_t clause = 0;  // index of the resolved clause
};

class VarSupply {
public:
  std::string fresh(const std::string& base);  // base#n
  std::string dontCare();                      // ?n

private:
  long long next_ = 0;
};

std::vector<SldcSuccessor> sldcStep(const ChcSystem& sys, const ResolutiveConfig& k, VarSupply& vars,
                                    const SldcOptions& opts = {});
// Calculation phase; several results when stalled arithmetic branches.
std::vector<ResolutiveConfig> sldcCalculate(const ResolutiveConfig& k, VarSupply& vars, const SldcOptions& opts);

ResolutiveConfig sldcInitial(const ChcSystem& sys, const std::string& f, const std::vector<TermP>& inputs);

struct SldcResult {
  std::vector<TermP> results;  // canonical result patterns, deduplicated
  bool budgetExceeded = false;
  std::size_t explored = 0;
};

SldcResult sldcEnumerate(const ChcSystem& sys, const std::string& f, const std::vector<TermP>& inputs,
                         const SldcOptions& opts = {});

// Renames variables by first occurrence; every single-occurrence variable prints as `_`.
std::string canonicalConfig(const ResolutiveConfig& k);
std::string printConfig(const ResolutiveConfig& k);
TermP canonicalPattern(const TermP& p);

// ---- bottom-up oracle ----

struct OracleOptions {
  ValueBounds bounds{-10, 10, 4};
  std::size_t maxRounds = 200;
  std::size_t maxFacts = 2000000;
};

struct OracleFacts {
  std::map<std::string, std::set<std::string>> keys;             // printed tuples, for membership
  std::map<std::string, std::vector<std::vector<TermP>>> tuples;  // in derivation order
  bool saturated = false;
  std::size_t rounds = 0;
  bool holds(const std::string& pred, const std::vector<TermP>& args) const;
};

OracleFacts bottomUpOracle(const ChcSystem& sys, const OracleOptions& opts = {});

std::string tupleKey(const std::vector<TermP>& args);

}  // namespace corhorn
