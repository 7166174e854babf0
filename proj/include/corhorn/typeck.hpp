#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "corhorn/ast.hpp"
#include "json.hpp"

namespace corhorn {

struct Activeness {
  bool frozen = false;
  std::string lft;  // when frozen
  bool operator==(const Activeness& o) const { return frozen == o.frozen && lft == o.lft; }
};

struct VarItem {
  Activeness act;
  TypeP type;
};

using VarContext = std::map<std::string, VarItem>;

// Preorder on a finite set of lifetimes. Kept reflexive and transitive.
struct LifetimeContext {
  std::set<std::string> carrier;
  std::set<std::pair<std::string, std::string>> order;

  bool leq(const std::string& a, const std::string& b) const { return order.count({a, b}) > 0; }
  void add(const std::string& a);
  void relate(const std::string& a, const std::string& b);  // adds a<=b and closes
  void close();
  void remove(const std::string& a);
  bool operator==(const LifetimeContext& o) const { return carrier == o.carrier && order == o.order; }
};

struct WholeContext {
  VarContext gamma;
  LifetimeContext lft;
};

bool contextEqual(const WholeContext& a, const WholeContext& b);

using SubtypeAssumptions = std::set<std::pair<std::string, std::string>>;

bool subtype(const SubtypeAssumptions& xi, const LifetimeContext& a, const TypeP& t, const TypeP& u);
bool typeEquiv(const LifetimeContext& a, const TypeP& t, const TypeP& u);
bool isCopy(const TypeP& t);

struct FnTyping {
  std::set<std::string> lftParams;  // A_ex
  std::map<std::string, WholeContext> labels;
};

struct TypingResult {
  std::map<std::string, FnTyping> fns;

  const WholeContext& at(const std::string& f, const std::string& l) const;
  const VarItem& var(const std::string& f, const std::string& l, const std::string& x) const;
  const std::set<std::string>& lftParams(const std::string& f) const { return fns.at(f).lftParams; }
};

WholeContext entryContext(const FunctionDef& f);

WholeContext typeInstruction(const Program& prog, const std::string& f, const Instr& i,
                             const WholeContext& wc);

// Successor contexts keyed by target label; checks them against labelContexts when present.
std::vector<std::pair<std::string, WholeContext>> typeStatement(
    const Program& prog, const std::string& f, const Stmt& s, const WholeContext& wc,
    const std::map<std::string, WholeContext>* labelContexts, const TypeP& returnType);

TypingResult typeProgram(const Program& prog);

nlohmann::json contextToJson(const WholeContext& wc);
nlohmann::json typingToJson(const Program& prog, const TypingResult& tr);

}  // namespace corhorn
