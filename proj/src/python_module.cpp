#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "corhorn/aos.hpp"
#include "corhorn/cos.hpp"
#include "corhorn/harness.hpp"
#include "corhorn/parser.hpp"
#include "corhorn/smtlib.hpp"
#include "corhorn/translate.hpp"

namespace py = pybind11;
using namespace corhorn;

namespace {

// Results cross the boundary as JSON and come back as plain dicts.
py::object fromJson(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

struct Loaded {
  Program prog;
  TypingResult typing;
  explicit Loaded(const std::string& src) : prog(parseProgram(src)), typing(typeProgram(prog)) {}
};

std::vector<std::string> printed(const std::vector<TermP>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(printTerm(t));
  return out;
}

py::dict run(const std::string& src, const std::string& fn, const std::string& args, std::uint64_t seed,
             std::size_t fuel) {
  Loaded l(src);
  CosRunOptions o;
  o.seed = seed;
  o.fuel = fuel;
  CosRunResult r = cosRun(l.prog, l.typing, fn, parseTermList(args), o);
  py::dict d;
  d["status"] = runStatusName(r.status);
  d["value"] = r.value ? py::object(py::str(printTerm(r.value))) : py::object(py::none());
  d["steps"] = r.steps;
  d["draws"] = r.draws;
  d["leak_free"] = r.leakFree;
  return d;
}

py::dict runAbstract(const std::string& src, const std::string& fn, const std::string& args, std::uint64_t seed,
                     std::size_t fuel, bool checkSafety) {
  Loaded l(src);
  AosRunOptions o;
  o.seed = seed;
  o.fuel = fuel;
  o.checkSafety = checkSafety;
  AosRunResult r = aosRun(l.prog, l.typing, fn, parseTermList(args), o);
  py::dict d;
  d["status"] = runStatusName(r.status);
  d["value"] = r.value ? py::object(py::str(printTerm(r.value))) : py::object(py::none());
  d["steps"] = r.steps;
  d["reason"] = r.reason;
  return d;
}

std::string translate(const std::string& src, const std::string& format, const std::string& goal) {
  Loaded l(src);
  ChcSystem s = translateProgram(l.prog, l.typing);
  if (!goal.empty()) s = attachGoal(s, l.prog, parseGoal(goal));
  if (format == "smt2") return emitSmt2(s);
  if (format != "internal") throw Error("Usage", "unknown format " + format);
  return printSystem(s);
}

py::dict bisim(const std::string& src, const std::string& fn, std::size_t runs, std::uint64_t seed, long long range,
               int muDepth) {
  Loaded l(src);
  auto inputs = inputDomain(l.prog, fn, {-range, range, muDepth});
  py::dict d;
  for (auto [kind, name] : {std::pair{LockstepKind::CosAos, "cos_aos"}, std::pair{LockstepKind::AosSldc, "aos_sldc"}}) {
    SuiteReport r = lockstepSuite(l.prog, l.typing, fn, inputs, kind, runs, seed);
    py::dict s;
    s["runs"] = r.runs;
    s["linked"] = r.linked;
    s["returned"] = r.returned;
    s["failures"] = r.failures;
    d[name] = s;
  }
  return d;
}

py::dict oracle(const std::string& src, const std::string& fn, long long range, int muDepth, std::size_t seeds) {
  Loaded l(src);
  OracleDiffOptions o;
  o.seeds = seeds;
  OracleReport r = oracleDiff(l.prog, l.typing, fn, inputDomain(l.prog, fn, {-range, range, muDepth}), o);
  py::list misses;
  for (const auto& m : r.misses) {
    py::dict x;
    x["inputs"] = printed(m.inputs);
    x["seed"] = m.seed;
    x["value"] = printTerm(m.value);
    misses.append(x);
  }
  py::dict d;
  d["cases"] = r.cases;
  d["runs"] = r.runs;
  d["returned"] = r.returned;
  d["budget_exceeded"] = r.budgetExceeded;
  d["misses"] = misses;
  return d;
}

}  // namespace

PYBIND11_MODULE(corhorn, m) {
  m.doc() = "COR programs: typing, interpreters, CHC translation and harness checks";
  py::register_exception<Error>(m, "CorhornError");

  m.def("parse_values", [](const std::string& text) { return printed(parseTermList(text)); }, py::arg("text"));
  m.def("check", [](const std::string& src) {
    Loaded l(src);
    return fromJson(typingToJson(l.prog, l.typing));
  }, py::arg("source"), "Typecheck; returns the per-label contexts.");
  m.def("run", &run, py::arg("source"), py::arg("fn"), py::arg("args") = "", py::arg("seed") = 0,
        py::arg("fuel") = 10000);
  m.def("run_abstract", &runAbstract, py::arg("source"), py::arg("fn"), py::arg("args") = "", py::arg("seed") = 0,
        py::arg("fuel") = 10000, py::arg("check_safety") = false);
  m.def("translate", &translate, py::arg("source"), py::arg("format") = "internal", py::arg("goal") = "");
  m.def("bisim", &bisim, py::arg("source"), py::arg("fn"), py::arg("runs") = 100, py::arg("seed") = 0,
        py::arg("range") = 8, py::arg("mu_depth") = 3);
  m.def("oracle", &oracle, py::arg("source"), py::arg("fn"), py::arg("range") = 4, py::arg("mu_depth") = 3,
        py::arg("seeds") = 2);
}
