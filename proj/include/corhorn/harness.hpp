#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corhorn/aos.hpp"
#include "corhorn/chc.hpp"
#include "corhorn/cos.hpp"
#include "corhorn/typeck.hpp"

namespace corhorn {

// ---- extended readout ----

// give_lft(*a; x : T) or take^lft(*a; x : T)
struct ExtItem {
  bool give = true;
  std::string lft;  // tagged
  Addr addr = 0;
  long long abs = 0;
  TypeP type;
};

// hot^act(a) or cold_lft(a)
struct FootMark {
  bool hot = true;
  Activeness act;   // hot marks; lft tagged
  std::string lft;  // cold marks, tagged
  Addr addr = 0;
};

struct ExtendedReadout {
  AbstractConfig config;
  std::vector<ExtItem> summary;
  std::vector<FootMark> footprint;
  std::size_t coldFrozen = 0;  // times a frozen value was read under a cold mode
};

// Reads the abstract configuration out of c. Choices the rules leave open (prophecies, frozen data read
// as an abstract variable or structurally) follow `guide` when given, otherwise fresh abstract variables.
ExtendedReadout extendedReadout(const Program& prog, const TypingResult& typing, const ConcreteConfig& c,
                                const AbstractConfig* guide = nullptr);

bool extendedSummarySafe(const LifetimeContext& a, const std::vector<ExtItem>& items,
                         std::vector<std::string>& diags);
bool footprintSafe(const LifetimeContext& a, const std::vector<FootMark>& marks, std::vector<std::string>& diags);

struct LinkCheck {
  bool ok = true;
  std::size_t coldFrozen = 0;
  std::vector<std::string> diagnostics;
};

LinkCheck safeLink(const Program& prog, const TypingResult& typing, const ConcreteConfig& c,
                   const AbstractConfig& ac);

// ---- lockstep runs ----

struct LinkStep {
  std::size_t index = 0;
  std::string left, right;  // config digests (COS/AOS) or printed configs (AOS/SLDC)
  bool linked = true;
  std::vector<std::string> diagnostics;
};

struct LinkReport {
  std::vector<LinkStep> steps;
  bool linked = true;
  long long firstDivergence = -1;
  std::string status;  // returned, out-of-fuel, diverged
  TermP leftValue, rightValue;
  std::size_t coldFrozen = 0;
};

struct LockstepOptions {
  std::uint64_t seed = 0;
  std::size_t fuel = 5000;
  AllocPolicy policy = AllocPolicy::Bump;
  long long randLo = -128, randHi = 127;
  CosMutation cosMutation = CosMutation::None;
  AosMutation aosMutation = AosMutation::None;
  SldcOptions sldc;
  bool keepSteps = false;  // keep linked steps too, not just the divergence
};

LinkReport lockstepCosAos(const Program& prog, const TypingResult& typing, const std::string& f,
                          const std::vector<TermP>& inputs, const LockstepOptions& opts = {});

// aC ~> K: frames become atoms top first, abstract variables become logic variables a!N, and the
// receiver of each caller frame is the result variable of the frame above it.
ResolutiveConfig abstractToResolutive(const Program& prog, const TypingResult& typing, const AbstractConfig& ac);

// gen is more general than inst: don't-cares instantiate freely, other variables map injectively to variables.
bool resolutiveInstance(const ResolutiveConfig& gen, const ResolutiveConfig& inst);

LinkReport lockstepAosSldc(const Program& prog, const TypingResult& typing, const ChcSystem& sys,
                           const std::string& f, const std::vector<TermP>& inputs, const LockstepOptions& opts = {});

struct SuiteReport {
  std::size_t runs = 0, linked = 0, returned = 0, outOfFuel = 0, coldFrozen = 0;
  std::vector<std::string> failures;  // one line per diverged run
  bool ok() const { return runs > 0 && linked == runs; }
};

enum class LockstepKind { CosAos, AosSldc };

// Runs `runs` lockstep checks with seeds seed0, seed0+1, ..., cycling through `inputs`.
SuiteReport lockstepSuite(const Program& prog, const TypingResult& typing, const std::string& f,
                          const std::vector<std::vector<TermP>>& inputs, LockstepKind kind, std::size_t runs,
                          std::uint64_t seed0, const LockstepOptions& base = {}, unsigned threads = 0);

// ---- differential oracle ----

struct OracleDiffOptions {
  std::size_t seeds = 4;
  std::size_t fuel = 10000;
  SldcOptions sldc;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct OracleMiss {
  std::vector<TermP> inputs;
  std::uint64_t seed = 0;
  TermP value;
  std::vector<TermP> results;
  bool budgetExceeded = false;
};

struct OracleReport {
  std::size_t cases = 0, runs = 0, returned = 0, budgetExceeded = 0, emptyBoth = 0;
  std::vector<OracleMiss> misses;
};

// Every value cosRun returns must be an instance of some SLDC result for the same inputs.
OracleReport oracleDiff(const Program& prog, const TypingResult& typing, const std::string& f,
                        const std::vector<std::vector<TermP>>& inputs, const OracleDiffOptions& opts = {});

// Cartesian product of the values of f's parameters (pointee sorts), within the bounds.
std::vector<std::vector<TermP>> inputDomain(const Program& prog, const std::string& f, const ValueBounds& b);

}  // namespace corhorn
