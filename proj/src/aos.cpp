#include "corhorn/aos.hpp"

#include <algorithm>
#include <functional>

#include "corhorn/error.hpp"

namespace corhorn {

TermP AbsSupply::fresh(const std::string& base) {
  int k = uses_[base]++;
  std::string name = base + "◦";
  if (k > 0) name += std::to_string(k);
  return tAbs(next_++, name);
}

namespace {

struct Stuck : Error {
  explicit Stuck(const std::string& m) : Error("Stuck", m) {}
};

const TermP& need(const TermP& t, TermKind k, const std::string& what) {
  if (!t || t->kind != k) throw Stuck("unexpected pre-value " + (t ? printTerm(t) : "null") + " for " + what);
  return t;
}

void substConfig(AbstractConfig& c, long long id, const TermP& by) {
  for (auto& fr : c.stack)
    for (auto& [x, v] : fr.vars) v = substAbs(v, id, by);
}

}  // namespace

bool aosFinal(const Program& prog, const AbstractConfig& c) {
  if (c.stack.size() != 1) return false;
  const AbstractFrame& top = c.stack.back();
  return prog.fn(top.fn).at(top.label).kind == StmtKind::Return;
}

AosStepResult aosStep(const Program& prog, const TypingResult& typing, const AbstractConfig& c,
                      RandSource& rng, AbsSupply& fresh, AosMutation mutation) {
  AosStepResult r;
  if (c.stack.empty()) {
    r.kind = AosStepResult::Stuck;
    r.reason = "empty stack";
    return r;
  }
  try {
    AbstractConfig n = c;
    AbstractFrame& top = n.stack.back();
    const int frameIdx = static_cast<int>(n.stack.size()) - 1;
    const FunctionDef& fd = prog.fn(top.fn);
    const Stmt& s = fd.at(top.label);
    auto ty = [&](const std::string& x) { return typing.var(top.fn, top.label, x).type; };
    auto take = [&](const std::string& x) {
      auto it = top.vars.find(x);
      if (it == top.vars.end()) throw Stuck("variable " + x + " not in frame");
      TermP v = it->second;
      top.vars.erase(it);
      return v;
    };
    auto get = [&](const std::string& x) {
      auto it = top.vars.find(x);
      if (it == top.vars.end()) throw Stuck("variable " + x + " not in frame");
      return it->second;
    };
    std::vector<std::pair<long long, TermP>> substs;

    if (s.kind == StmtKind::Return) {
      if (n.stack.size() == 1) {
        r.kind = AosStepResult::Final;
        r.next = c;
        return r;
      }
      TermP v = get(s.x);
      n.stack.pop_back();
      AbstractFrame& caller = n.stack.back();
      caller.vars[caller.receiver] = v;
      caller.receiver.clear();
      r.next = std::move(n);
      return r;
    }
    if (s.kind == StmtKind::Match) {
      TypeP t = ty(s.x);
      TermP v = take(s.x);
      need(v, t->ptr == PtrKind::Mut ? TermKind::Mut : TermKind::Box, s.x);
      const TermP& inj = need(v->a, TermKind::Inj, s.x);
      const MatchArm& arm = s.arm(inj->index);
      if (t->ptr == PtrKind::Mut) {
        const TermP& xo = need(v->b, TermKind::Abs, s.x);
        TermP nx = fresh.fresh(arm.y);
        top.vars[arm.y] = tMut(inj->a, nx);
        substs.push_back({xo->num, tInj(inj->index, nx)});
      } else {
        top.vars[arm.y] = tBox(inj->a);
      }
      top.label = arm.label;
      for (auto& [id, by] : substs) substConfig(n, id, by);
      r.next = std::move(n);
      return r;
    }

    const Instr& i = s.instr;
    switch (i.kind) {
      case InstrKind::MutBor: {
        TermP v = take(i.x);
        TermP xo = fresh.fresh(i.x);
        if (v->kind == TermKind::Box) {
          top.vars[i.y] = tMut(v->a, xo);
          top.vars[i.x] = tBox(xo);
        } else {
          need(v, TermKind::Mut, i.x);
          top.vars[i.y] = tMut(v->a, xo);
          top.vars[i.x] = tMut(xo, v->b);
        }
        break;
      }
      case InstrKind::Drop: {
        TypeP t = ty(i.x);
        TermP v = take(i.x);
        if (t->ptr == PtrKind::Mut && mutation != AosMutation::DropMutNoSubst) {
          need(v, TermKind::Mut, i.x);
          substs.push_back({need(v->b, TermKind::Abs, i.x)->num, v->a});
        }
        break;
      }
      case InstrKind::Immut: {
        TermP v = take(i.x);
        need(v, TermKind::Mut, i.x);
        top.vars[i.x] = tBox(v->a);
        substs.push_back({need(v->b, TermKind::Abs, i.x)->num, v->a});
        break;
      }
      case InstrKind::Swap: {
        TermP vx = need(get(i.x), TermKind::Mut, i.x);
        TermP vy = get(i.x1);
        top.vars[i.x] = tMut(vy->a, vx->b);
        top.vars[i.x1] = vy->kind == TermKind::Mut ? tMut(vx->a, vy->b) : tBox(vx->a);
        break;
      }
      case InstrKind::MakePtr: top.vars[i.y] = tBox(take(i.x)); break;
      case InstrKind::Deref: {
        TypeP t = ty(i.x);
        TermP v = take(i.x);
        if (t->ptr == PtrKind::Own) {
          top.vars[i.y] = need(v, TermKind::Box, i.x)->a;
          break;
        }
        if (t->ptr == PtrKind::Immut) {
          top.vars[i.y] = tBox(valOf(need(v, TermKind::Box, i.x)->a));
          break;
        }
        need(v, TermKind::Mut, i.x);
        long long xo = need(v->b, TermKind::Abs, i.x)->num;
        TypeP inner = unfoldTop(t->a);
        if (inner->ptr == PtrKind::Own) {
          TermP vv = need(v->a, TermKind::Box, i.x)->a;
          TermP nx = fresh.fresh(i.y);
          top.vars[i.y] = tMut(vv, nx);
          substs.push_back({xo, tBox(nx)});
        } else if (inner->ptr == PtrKind::Immut) {
          TermP vv = need(v->a, TermKind::Box, i.x)->a;
          top.vars[i.y] = tBox(vv);
          substs.push_back({xo, tBox(vv)});
        } else {
          const TermP& m = need(v->a, TermKind::Mut, i.x);
          TermP nx = fresh.fresh(i.y);
          top.vars[i.y] = tMut(m->a, nx);
          substs.push_back({xo, tMut(nx, m->b)});
        }
        break;
      }
      case InstrKind::Copy: top.vars[i.y] = tBox(valOf(get(i.x))); break;
      case InstrKind::As: break;
      case InstrKind::Call: {
        const FunctionDef& g = prog.fn(i.fn);
        AbstractFrame callee;
        callee.fn = g.name;
        callee.label = "entry";
        for (std::size_t k = 0; k < i.args.size(); ++k) callee.vars[g.params[k].first] = take(i.args[k]);
        callee.theta = ghostCall(g, i, top.theta);
        top.receiver = i.y;
        top.label = s.target;
        n.stack.push_back(std::move(callee));
        r.next = std::move(n);
        return r;
      }
      case InstrKind::Intro: ghostIntro(n.global, top.theta, i.lft, frameIdx); break;
      case InstrKind::Now: ghostNow(n.global, top.theta, i.lft, frameIdx); break;
      case InstrKind::LftLeq: ghostLe(n.global, top.theta, i.lft, i.lft1); break;
      case InstrKind::Const: top.vars[i.y] = tBox(i.unitConst ? tUnit() : tInt(i.num)); break;
      case InstrKind::BinOp: {
        TermP a = valOf(get(i.x)), b = valOf(get(i.x1));
        need(a, TermKind::Int, i.x);
        need(b, TermKind::Int, i.x1);
        long long v = applyIntOp(i.op, a->num, b->num);
        top.vars[i.y] = tBox(opIsBool(i.op) ? tBool(v != 0) : tInt(v));
        break;
      }
      case InstrKind::Rand: {
        long long v = rng.next();
        r.draw = v;
        top.vars[i.y] = tBox(tInt(v));
        break;
      }
      case InstrKind::Inj:
        top.vars[i.y] = tBox(tInj(i.index, need(take(i.x), TermKind::Box, i.x)->a));
        break;
      case InstrKind::Pair: {
        TermP a = need(take(i.x), TermKind::Box, i.x)->a;
        TermP b = need(take(i.x1), TermKind::Box, i.x1)->a;
        top.vars[i.y] = tBox(tPair(a, b));
        break;
      }
      case InstrKind::Destruct: {
        TypeP t = ty(i.x);
        TermP v = take(i.x);
        if (t->ptr == PtrKind::Mut) {
          need(v, TermKind::Mut, i.x);
          const TermP& p = need(v->a, TermKind::Pair, i.x);
          TermP n0 = fresh.fresh(i.y), n1 = fresh.fresh(i.y1);
          top.vars[i.y] = tMut(p->a, n0);
          top.vars[i.y1] = tMut(p->b, n1);
          substs.push_back({need(v->b, TermKind::Abs, i.x)->num, tPair(n0, n1)});
        } else {
          const TermP& p = need(need(v, TermKind::Box, i.x)->a, TermKind::Pair, i.x);
          top.vars[i.y] = tBox(p->a);
          top.vars[i.y1] = tBox(p->b);
        }
        break;
      }
    }
    top.label = s.target;
    for (auto& [id, by] : substs) substConfig(n, id, by);
    r.next = std::move(n);
    return r;
  } catch (const Error& e) {
    r.kind = AosStepResult::Stuck;
    r.reason = e.what();
    return r;
  }
}

AbstractConfig aosInitial(const Program& prog, const std::string& f, const std::vector<TermP>& inputs) {
  const FunctionDef& fd = prog.fn(f);
  if (!fd.isSimple()) throw Error("NotSimple", f + " has lifetime parameters");
  if (inputs.size() != fd.params.size()) throw Error("ArityMismatch", "wrong number of inputs for " + f);
  AbstractConfig c;
  AbstractFrame fr;
  fr.fn = f;
  fr.label = "entry";
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (hasAbs(inputs[k]) || !isValue(inputs[k]) || inputs[k]->kind != TermKind::Box)
      throw Error("SortMismatch", "input " + printTerm(inputs[k]) + " for " + fd.params[k].first);
    fr.vars[fd.params[k].first] = inputs[k];
  }
  c.stack.push_back(std::move(fr));
  return c;
}

AosRunResult aosRun(const Program& prog, const TypingResult& typing, const std::string& f,
                    const std::vector<TermP>& inputs, const AosRunOptions& opts) {
  AosRunResult res;
  AbsSupply fresh;
  RandSource rng(opts.seed, opts.randLo, opts.randHi);
  AbstractConfig c = aosInitial(prog, f, inputs);
  if (opts.keepTrace) res.trace.push_back(c);
  auto check = [&](const AbstractConfig& k) {
    if (!opts.checkSafety) return true;
    SafetyReport sr = safeAbstract(prog, typing, k);
    if (!sr.ok) {
      res.status = RunStatus::Stuck;
      res.reason = "unsafe configuration: " + (sr.diagnostics.empty() ? "" : sr.diagnostics[0]);
    }
    return sr.ok;
  };
  if (!check(c)) return res;
  for (;;) {
    if (res.steps >= opts.fuel) {
      res.status = RunStatus::OutOfFuel;
      return res;
    }
    AosStepResult st = aosStep(prog, typing, c, rng, fresh);
    if (st.kind == AosStepResult::Stuck) {
      res.status = RunStatus::Stuck;
      res.reason = st.reason;
      return res;
    }
    if (st.kind == AosStepResult::Final) break;
    ++res.steps;
    if (st.draw) res.draws.push_back(*st.draw);
    c = std::move(st.next);
    if (opts.keepTrace) res.trace.push_back(c);
    if (!check(c)) return res;
  }
  const AbstractFrame& top = c.stack.back();
  TermP v = top.vars.at(prog.fn(top.fn).at(top.label).x);
  if (hasAbs(v)) {
    res.status = RunStatus::Stuck;
    res.reason = "result still mentions an abstract variable";
    return res;
  }
  res.value = v;
  res.status = RunStatus::Returned;
  return res;
}

// ---- safety ----

VarContext frameGamma(const TypingResult& typing, const AbstractFrame& fr) {
  VarContext g = typing.at(fr.fn, fr.label).gamma;
  if (!fr.receiver.empty()) g.erase(fr.receiver);
  return g;
}

namespace {

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& m) : Error("ShapeMismatch", m) {}
};

void summaryRec(const TermP& v, const TypeP& t0, bool hot, const Activeness& ac, const Theta& theta,
                Summary& out) {
  TypeP t = unfoldTop(t0);
  auto bad = [&]() { throw ShapeMismatch(printTerm(v) + " does not fit " + printType(t)); };
  if (v->kind == TermKind::Abs) {
    if (!ac.frozen) bad();
    out.push_back({false, theta.count(ac.lft) ? theta.at(ac.lft) : ac.lft, v->num, applyTheta(t, theta)});
    return;
  }
  switch (t->kind) {
    case TypeKind::Int:
      if (v->kind != TermKind::Int) bad();
      return;
    case TypeKind::Unit:
      if (v->kind != TermKind::Unit) bad();
      return;
    case TypeKind::Sum:
      if (v->kind != TermKind::Inj) bad();
      summaryRec(v->a, v->index ? t->b : t->a, hot, ac, theta, out);
      return;
    case TypeKind::Prod:
      if (v->kind != TermKind::Pair) bad();
      summaryRec(v->a, t->a, hot, ac, theta, out);
      summaryRec(v->b, t->b, hot, ac, theta, out);
      return;
    case TypeKind::Ptr:
      if (t->ptr == PtrKind::Mut) {
        if (v->kind != TermKind::Mut) bad();
        summaryRec(v->a, t->a, hot, ac, theta, out);
        if (hot) {
          if (v->b->kind != TermKind::Abs) bad();
          std::string l = theta.count(t->lft) ? theta.at(t->lft) : t->lft;
          out.push_back({true, l, v->b->num, applyTheta(t->a, theta)});
        }
        return;
      }
      if (v->kind != TermKind::Box) bad();
      summaryRec(v->a, t->a, hot && t->ptr == PtrKind::Own, ac, theta, out);
      return;
    default: bad();
  }
}

}  // namespace

Summary summaryOfFrame(const Theta& theta, const std::map<std::string, TermP>& vars, const VarContext& gamma) {
  Summary out;
  if (vars.size() != gamma.size()) throw ShapeMismatch("frame domain differs from the variable context");
  for (const auto& [x, it] : gamma) {
    auto f = vars.find(x);
    if (f == vars.end()) throw ShapeMismatch("variable " + x + " missing from frame");
    summaryRec(f->second, it.type, true, it.act, theta, out);
  }
  return out;
}

Summary summaryOfConfig(const TypingResult& typing, const AbstractConfig& c) {
  Summary all;
  for (const auto& fr : c.stack) {
    Summary s = summaryOfFrame(fr.theta, fr.vars, frameGamma(typing, fr));
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

bool summarySafe(const LifetimeContext& a, const std::vector<SummaryItem>& items, std::vector<std::string>& diags) {
  std::map<long long, std::vector<const SummaryItem*>> by;
  for (const auto& it : items) by[it.abs].push_back(&it);
  bool ok = true;
  for (const auto& [id, xs] : by) {
    auto fail = [&](const std::string& m) {
      diags.push_back("abstract variable #" + std::to_string(id) + ": " + m);
      ok = false;
    };
    if (xs.size() != 2 || xs[0]->give == xs[1]->give) {
      fail("expected exactly one give and one take, found " + std::to_string(xs.size()) + " items");
      continue;
    }
    const SummaryItem* g = xs[0]->give ? xs[0] : xs[1];
    const SummaryItem* t = xs[0]->give ? xs[1] : xs[0];
    if (!typeEquiv(a, g->type, t->type))
      fail("give type " + printType(g->type) + " differs from take type " + printType(t->type));
    if (!a.leq(g->lft, t->lft)) fail("give lifetime " + g->lft + " does not end before take lifetime " + t->lft);
  }
  return ok;
}

SafetyReport lifetimeSafe(const Program&, const TypingResult& typing, const std::vector<std::string>& fns,
                          const std::vector<std::string>& labels, const std::vector<Theta>& thetas,
                          const LifetimeContext& global) {
  SafetyReport rep;
  auto fail = [&](const std::string& m) {
    rep.ok = false;
    rep.diagnostics.push_back(m);
  };
  std::size_t expected = 0;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const LifetimeContext& local = typing.at(fns[i], labels[i]).lft;
    const auto& aex = typing.lftParams(fns[i]);
    const Theta& th = thetas[i];
    std::string where = "frame " + std::to_string(i) + " (" + fns[i] + ", " + labels[i] + ")";
    std::set<std::string> dom;
    for (const auto& [a, _] : th) dom.insert(a);
    if (dom != local.carrier) {
      fail(where + ": lifetime map domain differs from the static lifetime context");
      continue;
    }
    for (const auto& a : local.carrier) {
      if (aex.count(a)) {
        if (tagFrame(th.at(a)) >= static_cast<int>(i)) fail(where + ": parameter '" + a + " tagged too high");
      } else {
        ++expected;
        if (th.at(a) != tagLifetime(a, static_cast<int>(i))) fail(where + ": local '" + a + " has a wrong tag");
      }
      if (!global.carrier.count(th.at(a))) fail(where + ": " + th.at(a) + " missing from the global context");
    }
    for (const auto& a : local.carrier)
      for (const auto& b : local.carrier) {
        bool l = local.leq(a, b), g = global.leq(th.at(a), th.at(b));
        bool bothParams = aex.count(a) && aex.count(b);
        if (bothParams ? (l && !g) : (l != g)) fail(where + ": order mismatch on '" + a + " <= '" + b);
      }
  }
  if (global.carrier.size() != expected) fail("global lifetime count does not match the local lifetimes");
  return rep;
}

SafetyReport lifetimeSafe(const Program& prog, const TypingResult& typing, const AbstractConfig& c) {
  std::vector<std::string> fns, labels;
  std::vector<Theta> thetas;
  for (const auto& fr : c.stack) {
    fns.push_back(fr.fn);
    labels.push_back(fr.label);
    thetas.push_back(fr.theta);
  }
  return lifetimeSafe(prog, typing, fns, labels, thetas, c.global);
}

SafetyReport safeAbstract(const Program& prog, const TypingResult& typing, const AbstractConfig& c) {
  SafetyReport rep;
  try {
    Summary s = summaryOfConfig(typing, c);
    if (!summarySafe(c.global, s, rep.diagnostics)) rep.ok = false;
  } catch (const Error& e) {
    rep.ok = false;
    rep.diagnostics.push_back(e.what());
  }
  SafetyReport l = lifetimeSafe(prog, typing, c);
  if (!l.ok) {
    rep.ok = false;
    rep.diagnostics.insert(rep.diagnostics.end(), l.diagnostics.begin(), l.diagnostics.end());
  }
  return rep;
}

namespace {

TermP renameAbs(const TermP& t, std::map<long long, long long>& m) {
  if (!t) return t;
  if (t->kind == TermKind::Abs) {
    auto it = m.find(t->num);
    long long k = it == m.end() ? (m[t->num] = static_cast<long long>(m.size())) : it->second;
    return tAbs(k, "◦" + std::to_string(k));
  }
  TermP a = renameAbs(t->a, m), b = renameAbs(t->b, m);
  if (a == t->a && b == t->b) return t;
  auto n = std::make_shared<Term>(*t);
  n->a = a;
  n->b = b;
  return n;
}

}  // namespace

AbstractConfig canonicalAbs(const AbstractConfig& c) {
  AbstractConfig out = c;
  std::map<long long, long long> m;
  for (auto it = out.stack.rbegin(); it != out.stack.rend(); ++it)
    for (auto& [x, v] : it->vars) v = renameAbs(v, m);
  return out;
}

bool abstractEqual(const AbstractConfig& a0, const AbstractConfig& b0) {
  AbstractConfig a = canonicalAbs(a0), b = canonicalAbs(b0);
  if (a.stack.size() != b.stack.size() || !(a.global == b.global)) return false;
  for (std::size_t i = 0; i < a.stack.size(); ++i) {
    const auto &x = a.stack[i], &y = b.stack[i];
    if (x.fn != y.fn || x.label != y.label || x.receiver != y.receiver || x.theta != y.theta) return false;
    if (x.vars.size() != y.vars.size()) return false;
    for (const auto& [k, v] : x.vars) {
      auto f = y.vars.find(k);
      if (f == y.vars.end() || !termEq(v, f->second)) return false;
    }
  }
  return true;
}

std::string printAbstract(const AbstractConfig& c) {
  std::string o;
  for (auto it = c.stack.rbegin(); it != c.stack.rend(); ++it) {
    if (!o.empty()) o += "; ";
    o += "[" + it->fn + ", " + it->label + "]";
    if (!it->receiver.empty()) o += " " + it->receiver + ",";
    o += " {";
    bool first = true;
    for (const auto& [x, v] : it->vars) {
      o += (first ? "" : ", ") + x + " = " + printTerm(v);
      first = false;
    }
    o += "}";
  }
  o += " | {";
  bool first = true;
  for (const auto& a : c.global.carrier) {
    o += (first ? "" : ", ") + a;
    first = false;
  }
  return o + "}";
}

nlohmann::json abstractToJson(const AbstractConfig& c) {
  nlohmann::json st = nlohmann::json::array();
  for (auto it = c.stack.rbegin(); it != c.stack.rend(); ++it) {
    nlohmann::json vars = nlohmann::json::object();
    for (const auto& [x, v] : it->vars) vars[x] = printTerm(v);
    nlohmann::json fr = {{"fn", it->fn}, {"label", it->label}, {"vars", vars}, {"theta", it->theta}};
    if (!it->receiver.empty()) fr["receiver"] = it->receiver;
    st.push_back(fr);
  }
  nlohmann::json ord = nlohmann::json::array();
  for (const auto& [a, b] : c.global.order) ord.push_back({a, b});
  return {{"stack", st}, {"lifetimes", c.global.carrier}, {"order", ord}};
}

}  // namespace corhorn
