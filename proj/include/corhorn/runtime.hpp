#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "corhorn/ast.hpp"
#include "corhorn/typeck.hpp"

namespace corhorn {

// Shared draw protocol: both interpreters consume draws in execution order.
class RandSource {
public:
  explicit RandSource(std::uint64_t seed, long long lo = -128, long long hi = 127)
      : gen_(seed), dist_(lo, hi) {}
  long long next() { return dist_(gen_); }

private:
  std::mt19937_64 gen_;
  std::uniform_int_distribution<long long> dist_;
};

// Lifetime parameter map of one frame, into tagged lifetimes "a@k".
using Theta = std::map<std::string, std::string>;

std::string tagLifetime(const std::string& a, int frame);
int tagFrame(const std::string& tagged);

// Lifetime bookkeeping common to the concrete ghost state and the abstract semantics.
void ghostIntro(LifetimeContext& global, Theta& theta, const std::string& a, int frame);
void ghostNow(LifetimeContext& global, Theta& theta, const std::string& a, int frame);
void ghostLe(LifetimeContext& global, const Theta& theta, const std::string& a, const std::string& b);
Theta ghostCall(const FunctionDef& callee, const Instr& call, const Theta& theta);

TypeP applyTheta(const TypeP& t, const Theta& theta);

enum class RunStatus { Returned, OutOfFuel, Stuck };
const char* runStatusName(RunStatus s);

}  // namespace corhorn
