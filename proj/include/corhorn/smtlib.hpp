#pragma once

#include <string>
#include <vector>

#include "corhorn/chc.hpp"

namespace corhorn {

// SMT-LIB 2 script in the HORN logic, with one datatype per sort up to equivalence.
std::string emitSmt2(const ChcSystem& sys);

struct SolverConfig {
  std::vector<std::string> argv;  // executable and arguments; the script path is appended
  double timeoutSec = 180;
  enum Kind { SpacerStyle, HoiceStyle } kind = SpacerStyle;
};

// Splits a command line on whitespace and guesses the kind from the executable name.
SolverConfig solverFromCommand(const std::string& cmd, double timeoutSec = 180);

struct SolverVerdict {
  enum Kind { Satisfiable, Unsatisfiable, Unknown, Timeout, ToolError } kind = Unknown;
  std::string output;
  double seconds = 0;
};

const char* verdictName(SolverVerdict::Kind k);

SolverVerdict runSolver(const SolverConfig& cfg, const std::string& script);

}  // namespace corhorn
