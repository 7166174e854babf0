#include "corhorn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "corhorn/translate.hpp"

namespace corhorn {

namespace {

std::string digest(const std::string& s) {
  std::ostringstream o;
  o << std::hex << std::hash<std::string>{}(s);
  return o.str();
}

std::string tagOf(const Theta& theta, const std::string& a) {
  auto it = theta.find(a);
  return it == theta.end() ? a : it->second;
}

VarContext concreteGamma(const TypingResult& typing, const ConcreteFrame& fr) {
  VarContext g = typing.at(fr.fn, fr.label).gamma;
  if (!fr.receiver.empty()) g.erase(fr.receiver);
  return g;
}

struct ReadoutFailure : Error {
  explicit ReadoutFailure(const std::string& m) : Error("ReadoutFailure", m) {}
};

struct Mode {
  bool hot = true;
  std::string lft;  // cold_lft, tagged
};

class Reader {
public:
  Reader(const Heap& h, ExtendedReadout& out, AbsSupply& fresh) : h_(h), out_(out), fresh_(fresh) {}

  Theta theta;
  std::string where;

  // a : P T, read as <v> or <v, x>
  TermP ptr(Addr a, const TypeP& t, const Mode& d, const Activeness& ac, const TermP& g) {
    switch (t->ptr) {
      case PtrKind::Own: return tBox(data(a, t->a, d, ac, sub(g, TermKind::Box)));
      case PtrKind::Immut: {
        Mode d2 = d.hot ? Mode{false, tagOf(theta, t->lft)} : d;
        return tBox(data(a, t->a, d2, ac, sub(g, TermKind::Box)));
      }
      case PtrKind::Mut: {
        TermP gm = g && g->kind == TermKind::Mut ? g : nullptr;
        TermP v = data(a, t->a, d, ac, gm ? gm->a : nullptr);
        if (!d.hot) return tMut(v, gm ? gm->b : fresh_.fresh("w"));
        TermP x = gm && gm->b->kind == TermKind::Abs ? gm->b : fresh_.fresh("x");
        out_.summary.push_back({true, tagOf(theta, t->lft), a, x->num, applyTheta(t->a, theta)});
        return tMut(v, x);
      }
    }
    throw ReadoutFailure(where + ": bad pointer kind");
  }

  // *a : T
  TermP data(Addr a, const TypeP& t0, const Mode& d, const Activeness& ac, const TermP& g) {
    if (ac.frozen && (!g || g->kind == TermKind::Abs)) {
      TermP x = g ? g : fresh_.fresh("y");
      out_.summary.push_back({false, tagOf(theta, ac.lft), a, x->num, applyTheta(t0, theta)});
      if (!d.hot) ++out_.coldFrozen;
      return x;
    }
    TypeP t = t0->kind == TypeKind::Mu ? unfoldTop(t0) : t0;
    switch (t->kind) {
      case TypeKind::Int: {
        long long n = cell(a);
        mark(a, d, ac);
        return tInt(n);
      }
      case TypeKind::Unit: return tUnit();
      case TypeKind::Ptr: {
        Addr to = cell(a);
        mark(a, d, ac);
        return ptr(to, t, d, ac, g);
      }
      case TypeKind::Sum: {
        long long tag = cell(a);
        if (tag != 0 && tag != 1)
          throw ReadoutFailure(where + ": sum tag " + std::to_string(tag) + " at " + std::to_string(a));
        mark(a, d, ac);
        TypeP ti = tag ? t->b : t->a;
        std::size_t total = sizeOf(t), ni = sizeOf(ti);
        for (std::size_t k = 1 + ni; k < total; ++k) {
          Addr p = a + static_cast<Addr>(k);
          if (cell(p) != 0) throw ReadoutFailure(where + ": nonzero padding at " + std::to_string(p));
          mark(p, d, ac);
        }
        TermP gi = g && g->kind == TermKind::Inj && g->index == tag ? g->a : nullptr;
        return tInj(static_cast<int>(tag), data(a + 1, ti, d, ac, gi));
      }
      case TypeKind::Prod: {
        TermP gp = g && g->kind == TermKind::Pair ? g : nullptr;
        TermP v0 = data(a, t->a, d, ac, gp ? gp->a : nullptr);
        TermP v1 = data(a + static_cast<Addr>(sizeOf(t->a)), t->b, d, ac, gp ? gp->b : nullptr);
        return tPair(v0, v1);
      }
      default: break;
    }
    throw ReadoutFailure(where + ": cannot read type " + printType(t));
  }

private:
  const Heap& h_;
  ExtendedReadout& out_;
  AbsSupply& fresh_;

  static TermP sub(const TermP& g, TermKind k) { return g && g->kind == k ? g->a : nullptr; }

  long long cell(Addr a) const {
    auto it = h_.find(a);
    if (it == h_.end()) throw ReadoutFailure(where + ": no cell at " + std::to_string(a));
    return it->second;
  }

  void mark(Addr a, const Mode& d, const Activeness& ac) {
    FootMark m;
    m.addr = a;
    if (d.hot) {
      m.act = ac;
      if (ac.frozen) m.act.lft = tagOf(theta, ac.lft);
    } else {
      m.hot = false;
      m.lft = d.lft;
    }
    out_.footprint.push_back(m);
  }
};

long long maxAbs(const AbstractConfig& c) {
  long long m = -1;
  for (const auto& fr : c.stack)
    for (const auto& [x, v] : fr.vars) {
      std::set<long long> ids;
      absOf(v, ids);
      if (!ids.empty()) m = std::max(m, *ids.rbegin());
    }
  return m;
}

}  // namespace

ExtendedReadout extendedReadout(const Program& prog, const TypingResult& typing, const ConcreteConfig& c,
                                const AbstractConfig* guide) {
  (void)prog;
  ExtendedReadout out;
  AbsSupply fresh;
  if (guide) {
    fresh.reserveAbove(maxAbs(*guide));
    if (guide->stack.size() != c.stack.size()) guide = nullptr;
  }
  out.config.global = c.ghost;
  Reader r(c.heap, out, fresh);
  for (std::size_t i = 0; i < c.stack.size(); ++i) {
    const ConcreteFrame& cf = c.stack[i];
    const AbstractFrame* gf = guide ? &guide->stack[i] : nullptr;
    AbstractFrame af;
    af.fn = cf.fn;
    af.label = cf.label;
    af.receiver = cf.receiver;
    af.theta = cf.theta;
    r.theta = cf.theta;
    VarContext gamma = concreteGamma(typing, cf);
    if (cf.vars.size() != gamma.size())
      throw ReadoutFailure("[" + cf.fn + "," + cf.label + "]: frame domain differs from its context");
    for (const auto& [x, item] : gamma) {
      auto it = cf.vars.find(x);
      if (it == cf.vars.end()) throw ReadoutFailure("[" + cf.fn + "," + cf.label + "]: " + x + " missing");
      r.where = "[" + cf.fn + "," + cf.label + "] " + x;
      TermP g;
      if (gf) {
        auto gi = gf->vars.find(x);
        if (gi != gf->vars.end()) g = gi->second;
      }
      af.vars[x] = r.ptr(it->second, item.type, Mode{}, item.act, g);
    }
    out.config.stack.push_back(std::move(af));
  }
  return out;
}

bool extendedSummarySafe(const LifetimeContext& a, const std::vector<ExtItem>& items,
                         std::vector<std::string>& diags) {
  std::map<long long, std::vector<const ExtItem*>> by;
  for (const auto& it : items) by[it.abs].push_back(&it);
  bool ok = true;
  for (const auto& [id, xs] : by) {
    std::string name = "abstract variable #" + std::to_string(id);
    const ExtItem *g = nullptr, *t = nullptr;
    for (const ExtItem* x : xs) (x->give ? g : t) = x;
    if (xs.size() != 2 || !g || !t) {
      diags.push_back(name + ": expected one give and one take, found " + std::to_string(xs.size()) + " items");
      ok = false;
      continue;
    }
    if (g->addr != t->addr) {
      diags.push_back(name + ": give and take at different addresses");
      ok = false;
    }
    if (!typeEquiv(a, g->type, t->type)) {
      diags.push_back(name + ": give and take types differ");
      ok = false;
    }
    if (!a.leq(g->lft, t->lft)) {
      diags.push_back(name + ": give lifetime " + g->lft + " is not below take lifetime " + t->lft);
      ok = false;
    }
  }
  return ok;
}

bool footprintSafe(const LifetimeContext& a, const std::vector<FootMark>& marks, std::vector<std::string>& diags) {
  std::map<Addr, std::vector<const FootMark*>> by;
  for (const auto& m : marks) by[m.addr].push_back(&m);
  bool ok = true;
  for (const auto& [addr, ms] : by) {
    std::vector<const FootMark*> hot, cold;
    for (const FootMark* m : ms) (m->hot ? hot : cold).push_back(m);
    bool good = false;
    if (hot.size() == 1 && cold.empty()) good = true;
    else if (hot.size() == 1 && hot[0]->act.frozen) {
      good = std::all_of(cold.begin(), cold.end(), [&](const FootMark* m) { return a.leq(m->lft, hot[0]->act.lft); });
    }
    if (!good) {
      diags.push_back("cell " + std::to_string(addr) + ": " + std::to_string(hot.size()) + " hot and " +
                      std::to_string(cold.size()) + " cold accesses");
      ok = false;
    }
  }
  return ok;
}

LinkCheck safeLink(const Program& prog, const TypingResult& typing, const ConcreteConfig& c,
                   const AbstractConfig& ac) {
  LinkCheck r;
  auto fail = [&](const std::string& m) {
    r.ok = false;
    r.diagnostics.push_back(m);
  };
  if (c.stack.size() != ac.stack.size()) {
    fail("stack depths differ");
    return r;
  }
  for (std::size_t i = 0; i < c.stack.size(); ++i)
    if (c.stack[i].fn != ac.stack[i].fn || c.stack[i].label != ac.stack[i].label)
      fail("frame " + std::to_string(i) + ": [" + c.stack[i].fn + "," + c.stack[i].label + "] vs [" +
           ac.stack[i].fn + "," + ac.stack[i].label + "]");
  if (!r.ok) return r;
  ExtendedReadout ro;
  try {
    ro = extendedReadout(prog, typing, c, &ac);
  } catch (const Error& e) {
    fail(e.what());
    return r;
  }
  r.coldFrozen = ro.coldFrozen;
  if (!abstractEqual(ro.config, ac)) fail("readout differs: " + printAbstract(ro.config) + " vs " + printAbstract(ac));
  if (!extendedSummarySafe(ac.global, ro.summary, r.diagnostics)) r.ok = false;
  if (!footprintSafe(ac.global, ro.footprint, r.diagnostics)) r.ok = false;
  SafetyReport ls = lifetimeSafe(prog, typing, ac);
  if (!ls.ok) {
    r.ok = false;
    for (auto& d : ls.diagnostics) r.diagnostics.push_back("lifetime: " + d);
  }
  return r;
}

// ---------------- COS <-> AOS ----------------

namespace {

TermP cosReturnValue(const Program& prog, const TypingResult& typing, const ConcreteConfig& c) {
  const ConcreteFrame& top = c.stack.back();
  const Stmt& s = prog.fn(top.fn).at(top.label);
  TypeP t = typing.var(top.fn, top.label, s.x).type;
  return tBox(readout(c.heap, top.vars.at(s.x), t->a).first);
}

TermP aosReturnValue(const Program& prog, const AbstractConfig& a) {
  const AbstractFrame& top = a.stack.back();
  return top.vars.at(prog.fn(top.fn).at(top.label).x);
}

void diverge(LinkReport& rep, LinkStep st, const std::string& why) {
  st.linked = false;
  st.diagnostics.push_back(why);
  rep.linked = false;
  if (rep.firstDivergence < 0) rep.firstDivergence = static_cast<long long>(st.index);
  rep.status = "diverged";
  rep.steps.push_back(std::move(st));
}

bool labelsTyped(const TypingResult& typing, const std::vector<std::pair<std::string, std::string>>& frames,
                 std::string& bad) {
  for (const auto& [f, l] : frames) {
    auto fi = typing.fns.find(f);
    if (fi == typing.fns.end() || !fi->second.labels.count(l)) {
      bad = f + "!" + l;
      return false;
    }
  }
  return true;
}

}  // namespace

LinkReport lockstepCosAos(const Program& prog, const TypingResult& typing, const std::string& f,
                          const std::vector<TermP>& inputs, const LockstepOptions& opts) {
  LinkReport rep;
  Allocator alloc;
  alloc.policy = opts.policy;
  RandSource rc(opts.seed, opts.randLo, opts.randHi), ra(opts.seed, opts.randLo, opts.randHi);
  AbsSupply fresh;
  ConcreteConfig c = cosInitial(prog, f, inputs, alloc);
  AbstractConfig a = aosInitial(prog, f, inputs);
  auto check = [&](std::size_t k) {
    LinkStep st;
    st.index = k;
    st.left = digest(configToJson(c).dump());
    st.right = digest(printAbstract(a));
    LinkCheck lc = safeLink(prog, typing, c, a);
    rep.coldFrozen += lc.coldFrozen;
    SafetyReport sa = safeAbstract(prog, typing, a);
    std::vector<std::pair<std::string, std::string>> labels;
    for (const auto& fr : a.stack) labels.emplace_back(fr.fn, fr.label);
    std::string bad;
    if (!lc.ok) {
      st.diagnostics = lc.diagnostics;
      diverge(rep, st, "safe link fails");
      return false;
    }
    if (!sa.ok) {
      st.diagnostics = sa.diagnostics;
      diverge(rep, st, "abstract configuration unsafe");
      return false;
    }
    if (!labelsTyped(typing, labels, bad)) {
      diverge(rep, st, "no typing context for " + bad);
      return false;
    }
    if (opts.keepSteps) rep.steps.push_back(std::move(st));
    return true;
  };
  if (!check(0)) return rep;
  for (std::size_t k = 1; k <= opts.fuel; ++k) {
    CosStepResult cs = cosStep(prog, typing, c, rc, alloc, opts.cosMutation);
    AosStepResult as = aosStep(prog, typing, a, ra, fresh, opts.aosMutation);
    LinkStep st;
    st.index = k;
    bool cf = cs.kind == StepKind::Final, af = as.kind == AosStepResult::Final;
    bool cstuck = cs.kind == StepKind::Stuck, astuck = as.kind == AosStepResult::Stuck;
    if (cstuck || astuck) {
      diverge(rep, st, std::string("stuck: ") + (cstuck ? "cos " + cs.reason : "") +
                           (astuck ? " aos " + as.reason : ""));
      return rep;
    }
    if (cf != af) {
      diverge(rep, st, cf ? "cos final, aos continues" : "aos final, cos continues");
      return rep;
    }
    if (cf) {
      try {
        rep.leftValue = cosReturnValue(prog, typing, c);
      } catch (const Error& e) {
        diverge(rep, st, e.what());
        return rep;
      }
      rep.rightValue = aosReturnValue(prog, a);
      if (!termEq(rep.leftValue, rep.rightValue)) {
        diverge(rep, st, "results differ: " + printTerm(rep.leftValue) + " vs " + printTerm(rep.rightValue));
        return rep;
      }
      rep.status = "returned";
      return rep;
    }
    if (cs.draw != as.draw) {
      diverge(rep, st, "random draws differ");
      return rep;
    }
    c = std::move(cs.next);
    a = std::move(as.next);
    if (!check(k)) return rep;
  }
  rep.status = "out-of-fuel";
  return rep;
}

// ---------------- AOS <-> SLDC ----------------

namespace {

std::string absVarName(long long id) { return "a!" + std::to_string(id); }
std::string resultVarName(std::size_t depth) { return "r!" + std::to_string(depth); }

TermP absToVars(const TermP& t) {
  if (!t) return t;
  if (t->kind == TermKind::Abs) return tVar(absVarName(t->num));
  if (!t->a && !t->b) return t;
  TermP a = absToVars(t->a), b = absToVars(t->b);
  if (a == t->a && b == t->b) return t;
  auto n = std::make_shared<Term>(*t);
  n->a = a;
  n->b = b;
  return n;
}

void absSorts(const TermP& v, const Sort& s0, SortContext& out) {
  if (v->kind == TermKind::Abs) {
    out[absVarName(v->num)] = s0;
    return;
  }
  Sort s = unfoldTop(s0);
  switch (v->kind) {
    case TermKind::Box: absSorts(v->a, s->a, out); return;
    case TermKind::Mut:
      absSorts(v->a, s->a, out);
      absSorts(v->b, s->a, out);
      return;
    case TermKind::Inj: absSorts(v->a, v->index ? s->b : s->a, out); return;
    case TermKind::Pair:
      absSorts(v->a, s->a, out);
      absSorts(v->b, s->b, out);
      return;
    default: return;
  }
}

class InstanceMatcher {
public:
  bool term(const TermP& g, const TermP& w) {
    if (g->kind == TermKind::Var) {
      auto it = sub_.find(g->name);
      if (it != sub_.end()) return termEq(it->second, w);
      if (!isDontCare(g->name)) {
        if (w->kind != TermKind::Var) return false;
        if (!used_.insert(w->name).second) return false;
      }
      sub_[g->name] = w;
      return true;
    }
    if (g->kind != w->kind || g->index != w->index || g->op != w->op) return false;
    if (g->kind == TermKind::Int && g->num != w->num) return false;
    if (g->a && !term(g->a, w->a)) return false;
    if (g->b && !term(g->b, w->b)) return false;
    return true;
  }

private:
  std::map<std::string, TermP> sub_;
  std::set<std::string> used_;
};

}  // namespace

ResolutiveConfig abstractToResolutive(const Program& prog, const TypingResult& typing, const AbstractConfig& ac) {
  ResolutiveConfig k;
  std::size_t n = ac.stack.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = n - 1 - i;  // top first
    const AbstractFrame& fr = ac.stack[idx];
    PredSignature sig = signatureFor(prog, typing, fr.fn, fr.label);
    Atom atom{sig.pred, {}};
    for (std::size_t j = 0; j + 1 < sig.vars.size(); ++j) {
      const std::string& x = sig.vars[j];
      if (x == fr.receiver) {
        atom.args.push_back(tVar(resultVarName(idx + 1)));
        continue;
      }
      auto it = fr.vars.find(x);
      if (it == fr.vars.end()) throw Error("ShapeMismatch", "[" + fr.fn + "," + fr.label + "]: " + x + " missing");
      absSorts(it->second, sig.sorts[j], k.delta);
      atom.args.push_back(absToVars(it->second));
    }
    atom.args.push_back(tVar(resultVarName(idx)));
    k.delta[resultVarName(idx)] = sig.sorts.back();
    k.stack.push_back(std::move(atom));
  }
  k.result = tVar(resultVarName(0));
  return k;
}

bool resolutiveInstance(const ResolutiveConfig& gen, const ResolutiveConfig& inst) {
  if (gen.stack.size() != inst.stack.size()) return false;
  InstanceMatcher m;
  for (std::size_t i = 0; i < gen.stack.size(); ++i) {
    const Atom &a = gen.stack[i], &b = inst.stack[i];
    if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
    for (std::size_t j = 0; j < a.args.size(); ++j)
      if (!m.term(a.args[j], b.args[j])) return false;
  }
  return m.term(gen.result, inst.result);
}

LinkReport lockstepAosSldc(const Program& prog, const TypingResult& typing, const ChcSystem& sys,
                           const std::string& f, const std::vector<TermP>& inputs, const LockstepOptions& opts) {
  LinkReport rep;
  RandSource ra(opts.seed, opts.randLo, opts.randHi);
  AbsSupply fresh;
  VarSupply vars;
  AbstractConfig a = aosInitial(prog, f, inputs);
  ResolutiveConfig k0 = sldcInitial(sys, predName(f, "entry"), inputs);
  ResolutiveConfig k = abstractToResolutive(prog, typing, a);
  {
    LinkStep st;
    st.left = printAbstract(a);
    st.right = printConfig(k);
    if (!resolutiveInstance(k0, k) || !resolutiveInstance(k, k0)) {
      diverge(rep, st, "initial configurations differ: " + printConfig(k0));
      return rep;
    }
    if (opts.keepSteps) rep.steps.push_back(st);
  }
  for (std::size_t step = 1; step <= opts.fuel; ++step) {
    LinkStep st;
    st.index = step;
    const AbstractFrame& top = a.stack.back();
    std::string expectPred = predName(top.fn, top.label);
    AosStepResult as = aosStep(prog, typing, a, ra, fresh, opts.aosMutation);
    if (as.kind == AosStepResult::Stuck) {
      diverge(rep, st, "aos stuck: " + as.reason);
      return rep;
    }
    ResolutiveConfig target;
    if (as.kind == AosStepResult::Final) {
      rep.leftValue = aosReturnValue(prog, a);
      target.result = absToVars(rep.leftValue);
    } else {
      try {
        target = abstractToResolutive(prog, typing, as.next);
      } catch (const Error& e) {
        diverge(rep, st, e.what());
        return rep;
      }
    }
    st.left = printAbstract(as.kind == AosStepResult::Final ? a : as.next);
    st.right = printConfig(target);
    std::vector<SldcSuccessor> succ = sldcStep(sys, k, vars, opts.sldc);
    bool found = false;
    for (const auto& s : succ) {
      if (!sys.clauses[s.clause].head || sys.clauses[s.clause].head->pred != expectPred) continue;
      if (resolutiveInstance(s.config, target)) {
        found = true;
        break;
      }
    }
    if (!found) {
      std::string alts;
      for (const auto& s : succ) alts += "\n  candidate: " + printConfig(s.config);
      diverge(rep, st, "no SLDC successor of " + printConfig(k) + " matches" + alts);
      return rep;
    }
    if (opts.keepSteps) rep.steps.push_back(st);
    if (as.kind == AosStepResult::Final) {
      rep.rightValue = target.result;
      rep.status = "returned";
      return rep;
    }
    a = std::move(as.next);
    k = std::move(target);
  }
  rep.status = "out-of-fuel";
  return rep;
}

// ---------------- suites ----------------

namespace {

void parallelFor(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex errMu;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(errMu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::string describeInputs(const std::vector<TermP>& in) {
  std::string s = "(";
  for (std::size_t i = 0; i < in.size(); ++i) s += (i ? ", " : "") + printTerm(in[i]);
  return s + ")";
}

}  // namespace

SuiteReport lockstepSuite(const Program& prog, const TypingResult& typing, const std::string& f,
                          const std::vector<std::vector<TermP>>& inputs, LockstepKind kind, std::size_t runs,
                          std::uint64_t seed0, const LockstepOptions& base, unsigned threads) {
  SuiteReport rep;
  if (inputs.empty()) return rep;
  ChcSystem sys;
  if (kind == LockstepKind::AosSldc) sys = translateProgram(prog, typing);
  std::vector<LinkReport> out(runs);
  parallelFor(runs, threads, [&](std::size_t i) {
    LockstepOptions o = base;
    o.seed = seed0 + i;
    const auto& in = inputs[i % inputs.size()];
    out[i] = kind == LockstepKind::CosAos ? lockstepCosAos(prog, typing, f, in, o)
                                          : lockstepAosSldc(prog, typing, sys, f, in, o);
  });
  rep.runs = runs;
  for (std::size_t i = 0; i < runs; ++i) {
    const LinkReport& r = out[i];
    rep.coldFrozen += r.coldFrozen;
    if (r.linked) {
      ++rep.linked;
      if (r.status == "returned") ++rep.returned;
      else ++rep.outOfFuel;
      continue;
    }
    std::string line = "seed " + std::to_string(seed0 + i) + " inputs " + describeInputs(inputs[i % inputs.size()]) +
                       ": step " + std::to_string(r.firstDivergence);
    if (!r.steps.empty())
      for (const auto& d : r.steps.back().diagnostics) line += "; " + d;
    rep.failures.push_back(line);
  }
  return rep;
}

OracleReport oracleDiff(const Program& prog, const TypingResult& typing, const std::string& f,
                        const std::vector<std::vector<TermP>>& inputs, const OracleDiffOptions& opts) {
  OracleReport rep;
  ChcSystem sys = translateProgram(prog, typing);
  std::string pred = predName(f, "entry");
  struct CaseOut {
    std::size_t runs = 0, returned = 0;
    bool budget = false, emptyBoth = false;
    std::vector<OracleMiss> misses;
  };
  std::vector<CaseOut> out(inputs.size());
  parallelFor(inputs.size(), opts.threads, [&](std::size_t i) {
    CaseOut& co = out[i];
    SldcResult sr = sldcEnumerate(sys, pred, inputs[i], opts.sldc);
    co.budget = sr.budgetExceeded;
    bool anyReturn = false;
    for (std::size_t s = 0; s < opts.seeds; ++s) {
      CosRunOptions ro;
      ro.seed = s;
      ro.fuel = opts.fuel;
      CosRunResult cr = cosRun(prog, typing, f, inputs[i], ro);
      ++co.runs;
      if (cr.status != RunStatus::Returned) continue;
      ++co.returned;
      anyReturn = true;
      bool refined = std::any_of(sr.results.begin(), sr.results.end(), [&](const TermP& p) {
        Subst sub;
        return matchPattern(p, cr.value, sub);
      });
      if (!refined) co.misses.push_back({inputs[i], s, cr.value, sr.results, sr.budgetExceeded});
    }
    co.emptyBoth = !anyReturn && sr.results.empty() && !sr.budgetExceeded;
  });
  rep.cases = inputs.size();
  for (auto& co : out) {
    rep.runs += co.runs;
    rep.returned += co.returned;
    rep.budgetExceeded += co.budget;
    rep.emptyBoth += co.emptyBoth;
    for (auto& m : co.misses) rep.misses.push_back(std::move(m));
  }
  return rep;
}

std::vector<std::vector<TermP>> inputDomain(const Program& prog, const std::string& f, const ValueBounds& b) {
  const FunctionDef& fd = prog.fn(f);
  std::vector<std::vector<TermP>> out{{}};
  for (const auto& [x, t] : fd.params) {
    std::vector<TermP> vs = enumerateValues(sortOfType(t), b);
    std::vector<std::vector<TermP>> next;
    for (const auto& prefix : out)
      for (const auto& v : vs) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace corhorn
