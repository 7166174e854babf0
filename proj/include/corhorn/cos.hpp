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

using Addr = long long;
using Heap = std::map<Addr, long long>;
using Footprint = std::vector<Addr>;  // multiset

enum class AllocPolicy { Bump, FirstFit };

// Bump allocation from 100 never reuses addresses; FirstFit takes the lowest free block.
struct Allocator {
  AllocPolicy policy = AllocPolicy::Bump;
  Addr next = 100;
  Addr alloc(const Heap& h, std::size_t n);
};

struct ConcreteFrame {
  std::string fn, label;
  std::string receiver;  // set on a caller frame while its callee runs
  std::map<std::string, Addr> vars;
  Theta theta;           // ghost: lifetime parameters, not used by execution
};

struct ConcreteConfig {
  std::vector<ConcreteFrame> stack;  // back() is the top frame
  Heap heap;
  LifetimeContext ghost;             // ghost: global tagged lifetimes
};

enum class StepKind { Next, Final, Stuck };

// Deliberate rule breakage for harness self-tests.
enum class CosMutation { None, SwapNoExchange, DropKeepsCells };

struct CosStepResult {
  StepKind kind = StepKind::Next;
  ConcreteConfig next;
  std::string reason;
  std::optional<long long> draw;
};

CosStepResult cosStep(const Program& prog, const TypingResult& typing, const ConcreteConfig& c,
                      RandSource& rng, Allocator& alloc, CosMutation mutation = CosMutation::None);

struct CosRunOptions {
  std::uint64_t seed = 0;
  std::size_t fuel = 10000;
  AllocPolicy policy = AllocPolicy::Bump;
  long long randLo = -128, randHi = 127;
  bool keepTrace = false;
};

struct CosRunResult {
  RunStatus status = RunStatus::Stuck;
  TermP value;  // <v> on Returned
  std::vector<ConcreteConfig> trace;
  std::vector<long long> draws;
  std::size_t steps = 0;
  std::string reason;
  bool leakFree = true;
};

ConcreteConfig cosInitial(const Program& prog, const std::string& f, const std::vector<TermP>& inputs,
                          Allocator& alloc);
CosRunResult cosRun(const Program& prog, const TypingResult& typing, const std::string& f,
                    const std::vector<TermP>& inputs, const CosRunOptions& opts = {});

// Reads the data of type t stored at a (t is the pointee type).
std::pair<TermP, Footprint> readout(const Heap& h, Addr a, const TypeP& t);
std::map<std::string, TermP> safeReadoutFrame(const Heap& h, const ConcreteFrame& frame,
                                              const VarContext& gamma);
// Allocates #t cells holding v; returns the block address.
Addr writeValue(Heap& h, const TypeP& t, const TermP& v, Allocator& alloc);

nlohmann::json configToJson(const ConcreteConfig& c);

}  // namespace corhorn
