#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "corhorn/aos.hpp"
#include "corhorn/cos.hpp"
#include "corhorn/harness.hpp"
#include "corhorn/parser.hpp"
#include "corhorn/smtlib.hpp"
#include "corhorn/translate.hpp"
#include "corhorn/typeck.hpp"

using namespace corhorn;
using nlohmann::json;

namespace {

constexpr const char* kSchema = "corhorn-cli/1";

// exit codes
constexpr int kOk = 0, kViolated = 1, kToolError = 2;

struct Common {
  std::string file;
  bool asJson = false;
};

void emit(const Common& c, json j, const std::string& human) {
  if (c.asJson) {
    j["schema"] = kSchema;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

json termsJson(const std::vector<TermP>& ts) {
  json a = json::array();
  for (const auto& t : ts) a.push_back(printTerm(t));
  return a;
}

std::string joinTerms(const std::vector<TermP>& ts) {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ", " : "") + printTerm(ts[i]);
  return s;
}

void writeOut(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("Io", "cannot write " + path);
  f << text;
}

std::string defaultManifest() {
#ifdef CORHORN_CORPUS_DIR
  return std::string(CORHORN_CORPUS_DIR) + "/manifest.json";
#else
  return "corpus/manifest.json";
#endif
}

// ---- commands ----

int cmdCheck(const Common& c, const std::string& dump) {
  Program p = loadProgram(c.file);
  TypingResult t;
  try {
    t = typeProgram(p);
  } catch (const TypeError& e) {
    emit(c, {{"command", "check"}, {"ok", false}, {"code", e.code()}, {"message", e.what()}},
         std::string("type error: ") + e.what() + "\n");
    return kViolated;
  }
  if (dump == "json") {
    std::cout << typingToJson(p, t).dump(2) << "\n";
    return kOk;
  }
  std::size_t labels = 0;
  for (const auto& [f, ft] : t.fns) labels += ft.labels.size();
  emit(c, {{"command", "check"}, {"ok", true}, {"functions", p.fns.size()}, {"labels", labels}},
       "ok: " + std::to_string(p.fns.size()) + " functions, " + std::to_string(labels) + " labels\n");
  return kOk;
}

struct RunArgs {
  std::string fn, args, trace, alloc = "bump";
  std::uint64_t seed = 0;
  std::size_t fuel = 10000;
  long long randLo = -128, randHi = 127;
  bool checkSafety = false;
};

int cmdRun(const Common& c, const RunArgs& a) {
  Program p = loadProgram(c.file);
  TypingResult t = typeProgram(p);
  CosRunOptions o;
  o.seed = a.seed;
  o.fuel = a.fuel;
  o.randLo = a.randLo;
  o.randHi = a.randHi;
  o.policy = a.alloc == "first-fit" ? AllocPolicy::FirstFit : AllocPolicy::Bump;
  o.keepTrace = !a.trace.empty();
  CosRunResult r = cosRun(p, t, a.fn, parseTermList(a.args), o);
  if (o.keepTrace) {
    std::ofstream f(a.trace);
    if (!f) throw Error("Io", "cannot write " + a.trace);
    for (const auto& cfg : r.trace) f << configToJson(cfg).dump() << "\n";
  }
  std::string value = r.value ? printTerm(r.value) : "";
  json j{{"command", "run"}, {"status", runStatusName(r.status)}, {"steps", r.steps}, {"draws", r.draws},
         {"leakFree", r.leakFree}};
  if (r.value) j["value"] = value;
  if (!r.reason.empty()) j["reason"] = r.reason;
  std::ostringstream h;
  h << runStatusName(r.status);
  if (r.value) h << " " << value;
  h << " after " << r.steps << " steps";
  if (!r.reason.empty()) h << ": " << r.reason;
  if (!r.leakFree) h << " (heap not freed)";
  h << "\n";
  emit(c, j, h.str());
  return r.status == RunStatus::Stuck || !r.leakFree ? kViolated : kOk;
}

int cmdRunAbstract(const Common& c, const RunArgs& a) {
  Program p = loadProgram(c.file);
  TypingResult t = typeProgram(p);
  AosRunOptions o;
  o.seed = a.seed;
  o.fuel = a.fuel;
  o.randLo = a.randLo;
  o.randHi = a.randHi;
  o.checkSafety = a.checkSafety;
  o.keepTrace = !a.trace.empty();
  AosRunResult r = aosRun(p, t, a.fn, parseTermList(a.args), o);
  if (o.keepTrace) {
    std::ofstream f(a.trace);
    if (!f) throw Error("Io", "cannot write " + a.trace);
    for (const auto& cfg : r.trace) f << abstractToJson(cfg).dump() << "\n";
  }
  json j{{"command", "run-abstract"}, {"status", runStatusName(r.status)}, {"steps", r.steps}, {"draws", r.draws}};
  if (r.value) j["value"] = printTerm(r.value);
  if (!r.reason.empty()) j["reason"] = r.reason;
  std::ostringstream h;
  h << runStatusName(r.status);
  if (r.value) h << " " << printTerm(r.value);
  h << " after " << r.steps << " steps";
  if (!r.reason.empty()) h << ": " << r.reason;
  h << "\n";
  emit(c, j, h.str());
  return r.status == RunStatus::Stuck ? kViolated : kOk;
}

ChcSystem systemFor(const Program& p, const std::string& goal) {
  ChcSystem s = translateProgram(p, typeProgram(p));
  if (!goal.empty()) s = attachGoal(s, p, parseGoal(goal));
  return s;
}

int cmdTranslate(const Common& c, const std::string& out, const std::string& format, const std::string& goal) {
  Program p = loadProgram(c.file);
  ChcSystem s = systemFor(p, goal);
  if (format == "smt2") writeOut(out, emitSmt2(s));
  else writeOut(out, printSystem(s));
  return kOk;
}

int cmdSolve(const Common& c, const std::string& goal, std::string solverCmd, double timeout,
             const std::string& emitPath) {
  Program p = loadProgram(c.file);
  std::string script = emitSmt2(systemFor(p, goal));
  if (!emitPath.empty()) writeOut(emitPath, script);
  if (solverCmd.empty()) {
    const char* env = std::getenv("CORHORN_SOLVER");
    solverCmd = env && *env ? env : "z3";
  }
  SolverVerdict v = runSolver(solverFromCommand(solverCmd, timeout), script);
  const char* meaning = v.kind == SolverVerdict::Satisfiable     ? "verified"
                        : v.kind == SolverVerdict::Unsatisfiable ? "refuted"
                                                                 : "inconclusive";
  json j{{"command", "solve"}, {"goal", goal}, {"solver", solverCmd}, {"verdict", verdictName(v.kind)},
         {"result", meaning}, {"seconds", v.seconds}};
  if (v.kind == SolverVerdict::ToolError || v.kind == SolverVerdict::Unknown) j["output"] = v.output;
  std::ostringstream h;
  h << meaning << " (" << verdictName(v.kind) << ", " << v.seconds << " s)\n";
  if (v.kind == SolverVerdict::ToolError) h << v.output << "\n";
  emit(c, j, h.str());
  if (v.kind == SolverVerdict::Satisfiable) return kOk;
  if (v.kind == SolverVerdict::Unsatisfiable) return kViolated;
  return kToolError;
}

struct HarnessArgs {
  std::string fn, kind = "both";
  std::size_t runs = 100, fuel = 5000, seeds = 4, depth = 4096;
  std::uint64_t seed = 0;
  long long range = 8;
  int muDepth = 3;
  unsigned threads = 0;
};

int cmdBisim(const Common& c, const HarnessArgs& a) {
  Program p = loadProgram(c.file);
  TypingResult t = typeProgram(p);
  auto inputs = inputDomain(p, a.fn, {-a.range, a.range, a.muDepth});
  LockstepOptions o;
  o.fuel = a.fuel;
  o.sldc.depth = a.depth;
  json j{{"command", "bisim"}, {"inputs", inputs.size()}};
  std::ostringstream h;
  bool ok = true;
  auto one = [&](LockstepKind k, const char* name) {
    SuiteReport r = lockstepSuite(p, t, a.fn, inputs, k, a.runs, a.seed, o, a.threads);
    ok = ok && r.ok();
    j[name] = {{"runs", r.runs},           {"linked", r.linked},         {"returned", r.returned},
               {"outOfFuel", r.outOfFuel}, {"coldFrozen", r.coldFrozen}, {"failures", r.failures}};
    h << name << ": " << r.linked << "/" << r.runs << " linked, " << r.returned << " returned, " << r.outOfFuel
      << " out of fuel\n";
    for (const auto& f : r.failures) h << "  " << f << "\n";
  };
  if (a.kind == "both" || a.kind == "cos-aos") one(LockstepKind::CosAos, "cos-aos");
  if (a.kind == "both" || a.kind == "aos-sldc") one(LockstepKind::AosSldc, "aos-sldc");
  j["ok"] = ok;
  emit(c, j, h.str());
  return ok ? kOk : kViolated;
}

int cmdOracle(const Common& c, const HarnessArgs& a) {
  Program p = loadProgram(c.file);
  TypingResult t = typeProgram(p);
  auto inputs = inputDomain(p, a.fn, {-a.range, a.range, a.muDepth});
  OracleDiffOptions o;
  o.seeds = a.seeds;
  o.fuel = a.fuel;
  o.sldc.depth = a.depth;
  o.threads = a.threads;
  OracleReport r = oracleDiff(p, t, a.fn, inputs, o);
  json misses = json::array();
  std::ostringstream h;
  h << r.cases << " cases, " << r.runs << " runs, " << r.returned << " returned, " << r.misses.size()
    << " misses, " << r.budgetExceeded << " over budget\n";
  for (const auto& m : r.misses) {
    misses.push_back({{"inputs", termsJson(m.inputs)},
                      {"seed", m.seed},
                      {"value", printTerm(m.value)},
                      {"sldc", termsJson(m.results)},
                      {"budgetExceeded", m.budgetExceeded}});
    h << "  miss: (" << joinTerms(m.inputs) << ") seed " << m.seed << " returned " << printTerm(m.value) << "\n";
  }
  emit(c,
       {{"command", "oracle"},
        {"cases", r.cases},
        {"runs", r.runs},
        {"returned", r.returned},
        {"budgetExceeded", r.budgetExceeded},
        {"emptyBoth", r.emptyBoth},
        {"misses", misses}},
       h.str());
  return r.misses.empty() ? kOk : kViolated;
}

int cmdCorpusList(const Common& c, const std::string& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("Io", "cannot open " + manifest);
  json m = json::parse(in);
  std::ostringstream h;
  for (const auto& e : m.at("programs"))
    h << e.at("name").get<std::string>() << "\t" << e.at("file").get<std::string>() << "\t"
      << e.at("goal").get<std::string>() << "\t" << e.at("expected").get<std::string>() << "\n";
  emit(c, {{"command", "corpus-list"}, {"programs", m.at("programs")}}, h.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corhorn: COR programs to constrained Horn clauses"};
  app.require_subcommand(1);
  Common common;
  auto addCommon = [&](CLI::App* s, bool needsFile = true) {
    if (needsFile) s->add_option("file", common.file, "COR source file")->required();
    s->add_flag("--json", common.asJson, "machine-readable output");
  };

  std::string dump;
  auto* check = app.add_subcommand("check", "parse and typecheck");
  addCommon(check);
  check->add_option("--dump-contexts", dump, "print per-label contexts")->check(CLI::IsMember({"json"}));

  RunArgs ra;
  auto runOpts = [&](CLI::App* s) {
    addCommon(s);
    s->add_option("--fn", ra.fn, "entry function")->required();
    s->add_option("--args", ra.args, "input values, e.g. \"<4>, <3>\"");
    s->add_option("--seed", ra.seed);
    s->add_option("--fuel", ra.fuel);
    s->add_option("--rand-lo", ra.randLo);
    s->add_option("--rand-hi", ra.randHi);
    s->add_option("--trace", ra.trace, "write one JSON configuration per line");
  };
  auto* run = app.add_subcommand("run", "run the concrete semantics");
  runOpts(run);
  run->add_option("--alloc", ra.alloc)->check(CLI::IsMember({"bump", "first-fit"}));
  auto* runAbs = app.add_subcommand("run-abstract", "run the abstract semantics");
  runOpts(runAbs);
  runAbs->add_flag("--check-safety", ra.checkSafety);

  std::string out, format = "internal", goal;
  auto* translate = app.add_subcommand("translate", "print the CHC system");
  addCommon(translate);
  translate->add_option("-o,--output", out);
  translate->add_option("--format", format)->check(CLI::IsMember({"internal", "smt2"}));
  translate->add_option("--goal", goal, "e.g. \"inc_max returns true\"");

  std::string solverCmd, emitPath;
  double timeout = 180;
  auto* solve = app.add_subcommand("solve", "translate and run a CHC solver");
  addCommon(solve);
  solve->add_option("--goal", goal)->required();
  solve->add_option("--solver-cmd", solverCmd, "default: $CORHORN_SOLVER, else z3");
  solve->add_option("--timeout", timeout, "seconds");
  solve->add_option("--emit", emitPath, "also write the SMT-LIB script here");

  HarnessArgs ha;
  auto harnessOpts = [&](CLI::App* s) {
    addCommon(s);
    s->add_option("--fn", ha.fn)->required();
    s->add_option("--range", ha.range, "integers in [-range, range]");
    s->add_option("--mu-depth", ha.muDepth, "unfoldings of recursive inputs");
    s->add_option("--depth", ha.depth, "SLDC depth limit");
    s->add_option("--fuel", ha.fuel);
    s->add_option("--threads", ha.threads);
  };
  auto* bisim = app.add_subcommand("bisim", "lockstep COS/AOS and AOS/SLDC runs");
  harnessOpts(bisim);
  bisim->add_option("--runs", ha.runs);
  bisim->add_option("--seed", ha.seed);
  bisim->add_option("--kind", ha.kind)->check(CLI::IsMember({"both", "cos-aos", "aos-sldc"}));
  auto* oracle = app.add_subcommand("oracle", "compare concrete results against SLDC");
  harnessOpts(oracle);
  oracle->add_option("--seeds", ha.seeds, "concrete runs per input");

  std::string manifest = defaultManifest();
  auto* corpus = app.add_subcommand("corpus-list", "list the corpus manifest");
  addCommon(corpus, false);
  corpus->add_option("--manifest", manifest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kToolError;
  }

  try {
    if (*check) return cmdCheck(common, dump);
    if (*run) return cmdRun(common, ra);
    if (*runAbs) return cmdRunAbstract(common, ra);
    if (*translate) return cmdTranslate(common, out, format, goal);
    if (*solve) return cmdSolve(common, goal, solverCmd, timeout, emitPath);
    if (*bisim) return cmdBisim(common, ha);
    if (*oracle) return cmdOracle(common, ha);
    if (*corpus) return cmdCorpusList(common, manifest);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return *check ? kViolated : kToolError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kToolError;
  }
  return kToolError;
}
