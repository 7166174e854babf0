#include "corhorn/smtlib.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <sstream>

namespace corhorn {

namespace {

std::string sym(const std::string& x) { return "|" + x + "|"; }

class Emitter {
public:
  explicit Emitter(const ChcSystem& sys) : sys_(sys) {}

  std::string run() {
    std::vector<std::string> decls, asserts;
    for (const auto& [p, sorts] : sys_.sigs) {
      std::string d = "(declare-fun " + sym(p) + " (";
      for (std::size_t i = 0; i < sorts.size(); ++i) d += (i ? " " : "") + sortName(sorts[i]);
      decls.push_back(d + ") Bool)");
    }
    for (std::size_t i = 0; i < sys_.clauses.size(); ++i) asserts.push_back(clause(sys_.clauses[i], i));

    std::ostringstream o;
    o << "(set-logic HORN)\n";
    for (std::size_t k = 0; k < decl_.size(); ++k) o << "; " << names_[k] << " = " << printSort(decl_[k]) << "\n";
    if (!decl_.empty()) {
      o << "(declare-datatypes (";
      for (std::size_t k = 0; k < decl_.size(); ++k) o << (k ? " " : "") << "(" << names_[k] << " 0)";
      o << ")\n  (";
      for (std::size_t k = 0; k < decl_.size(); ++k) o << (k ? "\n   " : "") << constructors(k);
      o << "))\n";
    }
    for (const auto& d : decls) o << d << "\n";
    for (const auto& a : asserts) o << a << "\n";
    o << "(check-sat)\n";
    return o.str();
  }

private:
  const ChcSystem& sys_;
  std::vector<Sort> decl_;  // head is never mu
  std::vector<std::string> names_;
  std::vector<std::string> pending_;

  std::size_t indexOf(const Sort& s0) {
    Sort s = unfoldTop(s0);
    for (std::size_t k = 0; k < decl_.size(); ++k)
      if (sortEquiv(decl_[k], s)) return k;
    std::size_t k = decl_.size();
    const char* base = "Unit";
    switch (s->kind) {
      case TypeKind::Ptr: base = isMutSort(s) ? "Mut" : "Box"; break;
      case TypeKind::Sum: base = "Sum"; break;
      case TypeKind::Prod: base = "Prod"; break;
      case TypeKind::Unit: break;
      default: throw ChcError("IllSorted", "no datatype for " + printSort(s));
    }
    decl_.push_back(s);
    names_.push_back(std::string(base) + "_" + std::to_string(k));
    if (s->a) sortName(s->a);
    if (s->b) sortName(s->b);
    return k;
  }

  std::string sortName(const Sort& s) {
    if (unfoldTop(s)->kind == TypeKind::Int) return "Int";
    return names_[indexOf(s)];
  }

  std::string constructors(std::size_t k) {
    const Sort& s = decl_[k];
    std::string n = std::to_string(k);
    switch (s->kind) {
      case TypeKind::Unit: return "((unit_" + n + "))";
      case TypeKind::Ptr:
        if (isMutSort(s))
          return "((mut_" + n + " (mut_" + n + "_cur " + sortName(s->a) + ") (mut_" + n + "_proph " + sortName(s->a) + ")))";
        return "((box_" + n + " (box_" + n + "_cur " + sortName(s->a) + ")))";
      case TypeKind::Sum:
        return "((inj0_" + n + " (inj0_" + n + "_val " + sortName(s->a) + ")) (inj1_" + n + " (inj1_" + n + "_val " +
               sortName(s->b) + ")))";
      case TypeKind::Prod:
        return "((pair_" + n + " (pair_" + n + "_fst " + sortName(s->a) + ") (pair_" + n + "_snd " + sortName(s->b) +
               ")))";
      default: return "";
    }
  }

  std::string term(const TermP& t, const Sort& expected, const SortContext& delta) {
    auto sortHere = [&]() { return unfoldTop(expected ? expected : sortOfTerm(delta, t)); };
    switch (t->kind) {
      case TermKind::Var: return sym(t->name);
      case TermKind::Int: return t->num < 0 ? "(- " + std::to_string(-t->num) + ")" : std::to_string(t->num);
      case TermKind::Unit: return "unit_" + std::to_string(indexOf(tyUnit()));
      case TermKind::Box: {
        Sort s = sortHere();
        return "(box_" + std::to_string(indexOf(s)) + " " + term(t->a, s->a, delta) + ")";
      }
      case TermKind::Mut: {
        Sort s = sortHere();
        return "(mut_" + std::to_string(indexOf(s)) + " " + term(t->a, s->a, delta) + " " + term(t->b, s->a, delta) + ")";
      }
      case TermKind::Inj: {
        if (!expected) throw ChcError("IllSorted", "injection without an expected sort");
        Sort s = unfoldTop(expected);
        std::string i = std::to_string(t->index);
        return "(inj" + i + "_" + std::to_string(indexOf(s)) + " " + term(t->a, t->index ? s->b : s->a, delta) + ")";
      }
      case TermKind::Pair: {
        Sort s = sortHere();
        return "(pair_" + std::to_string(indexOf(s)) + " " + term(t->a, s->a, delta) + " " + term(t->b, s->b, delta) +
               ")";
      }
      case TermKind::Deref: {
        Sort s = unfoldTop(sortOfTerm(delta, t->a));
        std::string k = std::to_string(indexOf(s));
        std::string sel = isMutSort(s) ? "mut_" + k + "_cur" : "box_" + k + "_cur";
        return "(" + sel + " " + term(t->a, s, delta) + ")";
      }
      case TermKind::Proph: {
        Sort s = unfoldTop(sortOfTerm(delta, t->a));
        return "(mut_" + std::to_string(indexOf(s)) + "_proph " + term(t->a, s, delta) + ")";
      }
      case TermKind::Proj: {
        Sort s = unfoldTop(sortOfTerm(delta, t->a));
        std::string k = std::to_string(indexOf(s));
        return "(pair_" + k + (t->index ? "_snd " : "_fst ") + term(t->a, s, delta) + ")";
      }
      case TermKind::Op: {
        std::string a = term(t->a, tyInt(), delta), b = term(t->b, tyInt(), delta);
        if (!opIsBool(t->op)) return std::string("(") + opText(t->op) + " " + a + " " + b + ")";
        std::string cond = t->op == OpKind::Ne ? "(not (= " + a + " " + b + "))"
                           : t->op == OpKind::Eq ? "(= " + a + " " + b + ")"
                                                 : std::string("(") + opText(t->op) + " " + a + " " + b + ")";
        std::string k = std::to_string(indexOf(tyBool()));
        std::string u = term(tUnit(), nullptr, delta);
        return "(ite " + cond + " (inj1_" + k + " " + u + ") (inj0_" + k + " " + u + "))";
      }
      case TermKind::Abs: break;
    }
    throw ChcError("IllSorted", "cannot emit " + printTerm(t));
  }

  std::string app(const std::string& p, const std::vector<std::string>& args) {
    if (args.empty()) return sym(p);
    std::string o = "(" + sym(p);
    for (const auto& a : args) o += " " + a;
    return o + ")";
  }

  std::string clause(const Clause& c, std::size_t idx) {
    SortContext delta(c.binders.begin(), c.binders.end());
    std::vector<std::pair<std::string, std::string>> binders;
    for (const auto& [x, s] : c.binders) binders.emplace_back(sym(x), sortName(s));
    std::vector<std::string> conj, eqs;
    for (const auto& a : c.body) {
      const auto& sig = sys_.sigs.at(a.pred);
      std::vector<std::string> args;
      for (std::size_t i = 0; i < a.args.size(); ++i) args.push_back(term(a.args[i], sig[i], delta));
      conj.push_back(app(a.pred, args));
    }
    std::string head = "false";
    if (c.head) {
      const auto& sig = sys_.sigs.at(c.head->pred);
      std::vector<std::string> args;
      std::set<std::string> used;
      for (std::size_t i = 0; i < c.head->args.size(); ++i) {
        const TermP& t = c.head->args[i];
        if (t->kind == TermKind::Var && used.insert(t->name).second) {
          args.push_back(sym(t->name));
          continue;
        }
        std::string h = sym("h!" + std::to_string(i));
        binders.emplace_back(h, sortName(sig[i]));
        eqs.push_back("(= " + h + " " + term(t, sig[i], delta) + ")");
        args.push_back(h);
      }
      head = app(c.head->pred, args);
    }
    for (auto& e : eqs) conj.push_back(std::move(e));
    std::string body = conj.empty() ? "" : conj.size() == 1 ? conj[0] : "(and";
    if (conj.size() > 1) {
      for (const auto& x : conj) body += " " + x;
      body += ")";
    }
    std::string f = body.empty() ? head : "(=> " + body + " " + head + ")";
    if (!binders.empty()) {
      std::string q = "(forall (";
      for (std::size_t i = 0; i < binders.size(); ++i)
        q += (i ? " " : "") + std::string("(") + binders[i].first + " " + binders[i].second + ")";
      f = q + ") " + f + ")";
    }
    return "; clause " + std::to_string(idx) + "\n(assert " + f + ")";
  }
};

}  // namespace

std::string emitSmt2(const ChcSystem& sys) { return Emitter(sys).run(); }

const char* verdictName(SolverVerdict::Kind k) {
  switch (k) {
    case SolverVerdict::Satisfiable: return "sat";
    case SolverVerdict::Unsatisfiable: return "unsat";
    case SolverVerdict::Unknown: return "unknown";
    case SolverVerdict::Timeout: return "timeout";
    case SolverVerdict::ToolError: return "error";
  }
  return "?";
}

SolverConfig solverFromCommand(const std::string& cmd, double timeoutSec) {
  SolverConfig c;
  std::istringstream in(cmd);
  for (std::string w; in >> w;) c.argv.push_back(w);
  if (c.argv.empty()) throw Error("NoSolver", "empty solver command");
  c.timeoutSec = timeoutSec;
  if (c.argv[0].find("hoice") != std::string::npos) c.kind = SolverConfig::HoiceStyle;
  return c;
}

SolverVerdict runSolver(const SolverConfig& cfg, const std::string& script) {
  if (cfg.argv.empty()) throw Error("NoSolver", "empty solver command");
  if (cfg.timeoutSec <= 0) throw Error("BadTimeout", "solver timeout must be positive");
  SolverVerdict v;
  char path[] = "/tmp/corhorn-XXXXXX.smt2";
  int fd = mkstemps(path, 5);
  if (fd < 0) throw Error("Io", "cannot create a temporary file");
  if (write(fd, script.data(), script.size()) != static_cast<ssize_t>(script.size())) {
    close(fd);
    unlink(path);
    throw Error("Io", "cannot write the solver script");
  }
  close(fd);

  int pipefd[2];
  if (pipe(pipefd) != 0) {
    unlink(path);
    throw Error("Io", "pipe failed");
  }
  std::vector<char*> argv;
  for (const auto& a : cfg.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(path);
  argv.push_back(nullptr);
  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    unlink(path);
    throw Error("Io", "fork failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(pipefd[1], 1);
    dup2(pipefd[1], 2);
    close(pipefd[0]);
    close(pipefd[1]);
    execvp(argv[0], argv.data());
    std::fprintf(stderr, "cannot execute %s: %s\n", argv[0], std::strerror(errno));
    _exit(127);
  }
  setpgid(pid, pid);  // the child does the same; whichever runs first wins
  close(pipefd[1]);
  bool timedOut = false;
  char buf[4096];
  while (true) {
    double left = cfg.timeoutSec - std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (left <= 0) {
      timedOut = true;
      break;
    }
    pollfd p{pipefd[0], POLLIN, 0};
    int r = poll(&p, 1, static_cast<int>(std::min(left, 1.0) * 1000) + 1);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) continue;
    ssize_t n = read(pipefd[0], buf, sizeof buf);
    if (n <= 0) break;
    v.output.append(buf, static_cast<std::size_t>(n));
  }
  if (timedOut) kill(-pid, SIGKILL);
  close(pipefd[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  unlink(path);
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (timedOut) {
    v.kind = SolverVerdict::Timeout;
    return v;
  }
  std::istringstream in(v.output);
  for (std::string line; std::getline(in, line);) {
    std::istringstream ws(line);
    std::string w;
    ws >> w;
    if (w == "sat") v.kind = SolverVerdict::Satisfiable;
    else if (w == "unsat") v.kind = SolverVerdict::Unsatisfiable;
    else if (w == "unknown") v.kind = SolverVerdict::Unknown;
    else continue;
    return v;
  }
  v.kind = SolverVerdict::ToolError;
  return v;
}

}  // namespace corhorn
