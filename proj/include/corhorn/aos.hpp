#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corhorn/ast.hpp"
#include "corhorn/runtime.hpp"
#include "corhorn/term.hpp"
#include "corhorn/typeck.hpp"
#include "json.hpp"

namespace corhorn {

struct AbstractFrame {
  std::string fn, label;
  std::string receiver;  // set on a caller frame while its callee runs
  std::map<std::string, TermP> vars;
  Theta theta;
};

struct AbstractConfig {
  std::vector<AbstractFrame> stack;  // back() is the top frame
  LifetimeContext global;            // tagged lifetimes
};

// Fresh abstract variables. Ids are unique per supply; names are for display only.
class AbsSupply {
public:
  TermP fresh(const std::string& base);
  long long peek() const { return next_; }
  void reserveAbove(long long id) {
    if (id >= next_) next_ = id + 1;
  }

private:
  long long next_ = 0;
  std::map<std::string, int> uses_;
};

enum class AosMutation { None, DropMutNoSubst };

struct AosStepResult {
  enum Kind { Next, Final, Stuck } kind = Next;
  AbstractConfig next;
  std::string reason;
  std::optional<long long> draw;
};

AosStepResult aosStep(const Program& prog, const TypingResult& typing, const AbstractConfig& c,
                      RandSource& rng, AbsSupply& fresh, AosMutation mutation = AosMutation::None);

bool aosFinal(const Program& prog, const AbstractConfig& c);

struct AosRunOptions {
  std::uint64_t seed = 0;
  std::size_t fuel = 10000;
  long long randLo = -128, randHi = 127;
  bool keepTrace = false;
  bool checkSafety = false;
};

struct AosRunResult {
  RunStatus status = RunStatus::Stuck;
  TermP value;
  std::vector<AbstractConfig> trace;
  std::vector<long long> draws;
  std::size_t steps = 0;
  std::string reason;
};

AbstractConfig aosInitial(const Program& prog, const std::string& f, const std::vector<TermP>& inputs);
AosRunResult aosRun(const Program& prog, const TypingResult& typing, const std::string& f,
                    const std::vector<TermP>& inputs, const AosRunOptions& opts = {});

// ---- safety ----

struct SummaryItem {
  bool give = true;  // give_lft(x : T) or take^lft(x : T)
  std::string lft;   // tagged
  long long abs = 0;
  TypeP type;        // lifetimes tagged
};
using Summary = std::vector<SummaryItem>;

// Variable context in force for a frame: the label context, minus the pending receiver.
VarContext frameGamma(const TypingResult& typing, const AbstractFrame& fr);

Summary summaryOfFrame(const Theta& theta, const std::map<std::string, TermP>& vars, const VarContext& gamma);
Summary summaryOfConfig(const TypingResult& typing, const AbstractConfig& c);

// safe_A over summary items; each abstract variable has no items or exactly one give/take pair.
bool summarySafe(const LifetimeContext& a, const std::vector<SummaryItem>& items, std::vector<std::string>& diags);

struct SafetyReport {
  bool ok = true;
  std::vector<std::string> diagnostics;
};

SafetyReport lifetimeSafe(const Program& prog, const TypingResult& typing, const std::vector<std::string>& fns,
                          const std::vector<std::string>& labels, const std::vector<Theta>& thetas,
                          const LifetimeContext& global);
SafetyReport lifetimeSafe(const Program& prog, const TypingResult& typing, const AbstractConfig& c);
SafetyReport safeAbstract(const Program& prog, const TypingResult& typing, const AbstractConfig& c);

// Renames abstract variables by first occurrence (top frame first, variables in name order).
AbstractConfig canonicalAbs(const AbstractConfig& c);
bool abstractEqual(const AbstractConfig& a, const AbstractConfig& b);  // up to abs renaming
std::string printAbstract(const AbstractConfig& c);
nlohmann::json abstractToJson(const AbstractConfig& c);

}  // namespace corhorn
