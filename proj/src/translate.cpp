#include "corhorn/translate.hpp"

#include <regex>

namespace corhorn {

Sort sortOfType(const TypeP& t) {
  switch (t->kind) {
    case TypeKind::Var: return tyVar(t->name);
    case TypeKind::Mu: return tyMu(t->name, sortOfType(t->a));
    case TypeKind::Ptr: return t->ptr == PtrKind::Mut ? sMut(sortOfType(t->a)) : sBox(sortOfType(t->a));
    case TypeKind::Sum: return tySum(sortOfType(t->a), sortOfType(t->b));
    case TypeKind::Prod: return tyProd(sortOfType(t->a), sortOfType(t->b));
    case TypeKind::Int: return tyInt();
    case TypeKind::Unit: return tyUnit();
  }
  return t;
}

std::string predName(const std::string& f, const std::string& label) { return f + "!" + label; }

std::string resultVar(const FunctionDef& fd) {
  bool taken = false;
  for (const auto& [x, t] : fd.params) taken |= x == "res";
  for (const auto& [l, s] : fd.body) {
    taken |= s.instr.y == "res" || s.instr.y1 == "res";
    if (s.kind == StmtKind::Match) taken |= s.arms[0].y == "res" || s.arms[1].y == "res";
  }
  return taken ? "res!" : "res";
}

PredSignature signatureFor(const Program& prog, const TypingResult& typing, const std::string& f,
                           const std::string& label) {
  const FunctionDef& fd = prog.fn(f);
  const WholeContext& wc = typing.at(f, label);
  PredSignature p;
  p.pred = predName(f, label);
  for (const auto& [x, item] : wc.gamma) {
    p.vars.push_back(x);
    p.sorts.push_back(sortOfType(item.type));
    p.delta[x] = p.sorts.back();
  }
  std::string res = resultVar(fd);
  p.vars.push_back(res);
  p.sorts.push_back(sortOfType(fd.ret));
  p.delta[res] = p.sorts.back();
  p.head.pred = p.pred;
  for (const auto& x : p.vars) p.head.args.push_back(tVar(x));
  return p;
}

namespace {

TermP V(const std::string& x) { return tVar(x); }
TermP cur(const std::string& x) { return tDeref(tVar(x)); }
TermP pro(const std::string& x) { return tProph(tVar(x)); }

class RuleBuilder {
public:
  RuleBuilder(const Program& prog, const TypingResult& typing, const std::string& f, const std::string& label)
      : prog_(prog), typing_(typing), f_(f), label_(label), wc_(typing.at(f, label)) {}

  TypeP ty(const std::string& x) const { return unfoldTop(wc_.gamma.at(x).type); }

  // phi_{f,L}[s]
  Atom phi(const std::string& label, const Subst& s = {}) {
    PredSignature p = signatureFor(prog_, typing_, f_, label);
    for (const auto& [x, so] : p.delta) sorts_.emplace(x, so);
    Atom a{p.pred, {}};
    for (const auto& x : p.vars) {
      auto it = s.find(x);
      a.args.push_back(it == s.end() ? tVar(x) : it->second);
    }
    return a;
  }

  std::string fresh(const std::string& x, const std::string& role, const Sort& s) {
    std::string n = x + "!" + role;
    extra_[n] = s;
    return n;
  }

  Clause make(Atom head, std::vector<Atom> body) {
    Clause c;
    std::vector<std::string> order;
    std::set<std::string> seen;
    auto collect = [&](const Atom& a) {
      for (const auto& t : a.args) {
        std::vector<std::string> vs;
        collectOrdered(t, vs);
        for (const auto& x : vs)
          if (seen.insert(x).second) order.push_back(x);
      }
    };
    collect(head);
    for (const auto& a : body) collect(a);
    for (const auto& x : order) {
      auto e = extra_.find(x);
      if (e != extra_.end()) {
        c.binders.emplace_back(x, e->second);
        continue;
      }
      auto it = sorts_.find(x);
      if (it == sorts_.end()) throw Error("Internal", "no sort for " + x + " at " + f_ + ":" + label_);
      c.binders.emplace_back(x, it->second);
    }
    c.head = std::move(head);
    c.body = std::move(body);
    return c;
  }

private:
  const Program& prog_;
  const TypingResult& typing_;
  std::string f_, label_;
  const WholeContext& wc_;
  SortContext sorts_, extra_;

  static void collectOrdered(const TermP& t, std::vector<std::string>& out) {
    if (!t) return;
    if (t->kind == TermKind::Var) out.push_back(t->name);
    collectOrdered(t->a, out);
    collectOrdered(t->b, out);
  }
};

}  // namespace

std::vector<Clause> clausesForLabel(const Program& prog, const TypingResult& typing, const std::string& f,
                                    const std::string& label) {
  const FunctionDef& fd = prog.fn(f);
  const Stmt& s = fd.at(label);
  RuleBuilder rb(prog, typing, f, label);
  const std::string& L = label;

  if (s.kind == StmtKind::Return) return {rb.make(rb.phi(L, {{resultVar(fd), V(s.x)}}), {})};

  if (s.kind == StmtKind::Match) {
    const std::string& x = s.x;
    TypeP t = rb.ty(x);
    TypeP sum = unfoldTop(t->a);
    std::vector<Clause> out;
    for (const auto& arm : s.arms) {
      Sort si = sortOfType(arm.inj ? sum->b : sum->a);
      std::string xc = rb.fresh(x, "c", si);
      if (t->ptr == PtrKind::Mut) {
        std::string xp = rb.fresh(x, "p", si);
        out.push_back(rb.make(rb.phi(L, {{x, tMut(tInj(arm.inj, V(xc)), tInj(arm.inj, V(xp)))}}),
                              {rb.phi(arm.label, {{arm.y, tMut(V(xc), V(xp))}})}));
      } else {
        out.push_back(rb.make(rb.phi(L, {{x, tBox(tInj(arm.inj, V(xc)))}}), {rb.phi(arm.label, {{arm.y, tBox(V(xc))}})}));
      }
    }
    return out;
  }

  const Instr& i = s.instr;
  const std::string& Lp = s.target;
  auto plain = [&](Subst next) { return std::vector<Clause>{rb.make(rb.phi(L), {rb.phi(Lp, next)})}; };

  switch (i.kind) {
    case InstrKind::MutBor: {
      TypeP t = rb.ty(i.x);
      std::string xp = rb.fresh(i.x, "p", sortOfType(t->a));
      TermP xNew = t->ptr == PtrKind::Mut ? tMut(V(xp), pro(i.x)) : tBox(V(xp));
      return plain({{i.y, tMut(cur(i.x), V(xp))}, {i.x, xNew}});
    }
    case InstrKind::Drop: {
      TypeP t = rb.ty(i.x);
      if (t->ptr != PtrKind::Mut) return plain({});
      std::string xc = rb.fresh(i.x, "c", sortOfType(t->a));
      return {rb.make(rb.phi(L, {{i.x, tMut(V(xc), V(xc))}}), {rb.phi(Lp)})};
    }
    case InstrKind::Immut: {
      TypeP t = rb.ty(i.x);
      std::string xc = rb.fresh(i.x, "c", sortOfType(t->a));
      return {rb.make(rb.phi(L, {{i.x, tMut(V(xc), V(xc))}}), {rb.phi(Lp, {{i.x, tBox(V(xc))}})})};
    }
    case InstrKind::Swap: {
      TypeP ty = rb.ty(i.x1);
      TermP yNew = ty->ptr == PtrKind::Mut ? tMut(cur(i.x), pro(i.x1)) : tBox(cur(i.x));
      return plain({{i.x, tMut(cur(i.x1), pro(i.x))}, {i.x1, yNew}});
    }
    case InstrKind::MakePtr: return plain({{i.y, tBox(V(i.x))}});
    case InstrKind::Deref: {
      TypeP t = rb.ty(i.x);
      TypeP inner = unfoldTop(t->a);
      if (t->ptr == PtrKind::Own) return plain({{i.y, cur(i.x)}});
      if (t->ptr == PtrKind::Immut) return plain({{i.y, tBox(tDeref(cur(i.x)))}});
      if (inner->ptr == PtrKind::Own) return plain({{i.y, tMut(tDeref(cur(i.x)), tDeref(pro(i.x)))}});
      if (inner->ptr == PtrKind::Immut) {
        std::string xc = rb.fresh(i.x, "c", sortOfType(inner));
        return {rb.make(rb.phi(L, {{i.x, tMut(V(xc), V(xc))}}), {rb.phi(Lp, {{i.y, V(xc)}})})};
      }
      Sort s0 = sortOfType(inner->a);
      std::string xcc = rb.fresh(i.x, "cc", s0), xcp = rb.fresh(i.x, "cp", s0), xpc = rb.fresh(i.x, "pc", s0);
      return {rb.make(rb.phi(L, {{i.x, tMut(tMut(V(xcc), V(xcp)), tMut(V(xpc), V(xcp)))}}),
                      {rb.phi(Lp, {{i.y, tMut(V(xcc), V(xpc))}})})};
    }
    case InstrKind::Copy: return plain({{i.y, tBox(cur(i.x))}});
    case InstrKind::As:
    case InstrKind::Intro:
    case InstrKind::Now:
    case InstrKind::LftLeq:
    case InstrKind::Rand: return plain({});
    case InstrKind::Call: {
      Atom call{predName(i.fn, "entry"), {}};
      for (const auto& a : i.args) call.args.push_back(V(a));
      call.args.push_back(V(i.y));
      Atom next = rb.phi(Lp);
      return {rb.make(rb.phi(L), {call, next})};
    }
    case InstrKind::Const: return plain({{i.y, tBox(i.unitConst ? tUnit() : tInt(i.num))}});
    case InstrKind::BinOp: return plain({{i.y, tBox(tOp(i.op, cur(i.x), cur(i.x1)))}});
    case InstrKind::Inj: return plain({{i.y, tBox(tInj(i.index, cur(i.x)))}});
    case InstrKind::Pair: return plain({{i.y, tBox(tPair(cur(i.x), cur(i.x1)))}});
    case InstrKind::Destruct: {
      TypeP t = rb.ty(i.x);
      if (t->ptr == PtrKind::Mut)
        return plain({{i.y, tMut(tProj(cur(i.x), 0), tProj(pro(i.x), 0))},
                      {i.y1, tMut(tProj(cur(i.x), 1), tProj(pro(i.x), 1))}});
      return plain({{i.y, tBox(tProj(cur(i.x), 0))}, {i.y1, tBox(tProj(cur(i.x), 1))}});
    }
  }
  throw Error("Internal", "unhandled instruction at " + f + ":" + label);
}

ChcSystem translateProgram(const Program& prog, const TypingResult& typing) {
  ChcSystem sys;
  for (const auto& fd : prog.fns) {
    const auto& labels = typing.fns.at(fd.name).labels;
    for (const auto& [l, s] : fd.body) {
      if (!labels.count(l)) continue;  // unreachable label
      PredSignature p = signatureFor(prog, typing, fd.name, l);
      sys.sigs[p.pred] = p.sorts;
      for (auto& c : clausesForLabel(prog, typing, fd.name, l)) sys.clauses.push_back(std::move(c));
    }
  }
  return sys;
}

GoalSpec parseGoal(const std::string& text) {
  static const std::regex re(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s+returns\s+(true|-?[0-9]+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    throw Error("UnsupportedGoalShape", "expected `NAME returns true` or `NAME returns N`, got `" + text + "`");
  GoalSpec g;
  g.fn = m[1];
  if (m[2] == "true") {
    g.kind = GoalSpec::ReturnsTrue;
  } else {
    g.kind = GoalSpec::ReturnsInt;
    g.value = std::stoll(m[2]);
  }
  return g;
}

ChcSystem attachGoal(const ChcSystem& sys, const Program& prog, const GoalSpec& goal) {
  if (!prog.hasFn(goal.fn)) throw Error("UnsupportedGoalShape", "unknown function " + goal.fn);
  const FunctionDef& fd = prog.fn(goal.fn);
  if (!fd.isSimple()) throw Error("UnsupportedGoalShape", goal.fn + " takes lifetime parameters");
  ChcSystem out = sys;
  Clause c;
  Atom entry{predName(fd.name, "entry"), {}};
  for (const auto& [x, t] : fd.params) {
    c.binders.emplace_back(x, sortOfType(t));
    entry.args.push_back(V(x));
  }
  Sort ret = sortOfType(fd.ret);
  if (goal.kind == GoalSpec::ReturnsTrue) {
    if (!sortEquiv(ret, sBox(tyBool())))
      throw Error("UnsupportedGoalShape", goal.fn + " does not return own bool");
    entry.args.push_back(tBox(tBool(false)));
    c.body = {entry};
  } else {
    if (!sortEquiv(ret, sBox(tyInt()))) throw Error("UnsupportedGoalShape", goal.fn + " does not return own int");
    const std::string r = "r!g", holds = "goal!holds";
    c.binders.emplace_back(r, tyInt());
    entry.args.push_back(tBox(V(r)));
    c.body = {entry, Atom{holds, {tBox(tOp(OpKind::Ne, V(r), tInt(goal.value)))}}};
    out.sigs[holds] = {sBox(tyBool())};
    Clause t;
    t.head = Atom{holds, {tBox(tBool(true))}};
    out.clauses.push_back(t);
  }
  c.head = Atom{goalPredicate(), {}};
  out.sigs[goalPredicate()] = {};
  out.clauses.push_back(c);
  Clause q;
  q.body = {Atom{goalPredicate(), {}}};
  out.clauses.push_back(q);
  return out;
}

namespace {

bool alphaTerm(const TermP& a, const TermP& b, std::map<std::string, std::string>& ab,
               std::map<std::string, std::string>& ba) {
  if (a->kind != b->kind || a->index != b->index) return false;
  if (a->kind == TermKind::Var) {
    auto i = ab.find(a->name);
    auto j = ba.find(b->name);
    if (i == ab.end() && j == ba.end()) {
      ab[a->name] = b->name;
      ba[b->name] = a->name;
      return true;
    }
    return i != ab.end() && i->second == b->name && j != ba.end() && j->second == a->name;
  }
  if ((a->kind == TermKind::Int || a->kind == TermKind::Abs) && a->num != b->num) return false;
  if (a->kind == TermKind::Op && a->op != b->op) return false;
  if (a->a && !alphaTerm(a->a, b->a, ab, ba)) return false;
  if (a->b && !alphaTerm(a->b, b->b, ab, ba)) return false;
  return true;
}

bool alphaAtom(const Atom& a, const Atom& b, std::map<std::string, std::string>& ab,
               std::map<std::string, std::string>& ba) {
  if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
  for (std::size_t k = 0; k < a.args.size(); ++k)
    if (!alphaTerm(a.args[k], b.args[k], ab, ba)) return false;
  return true;
}

}  // namespace

bool clauseAlphaEqual(const Clause& a, const Clause& b) {
  std::map<std::string, std::string> ab, ba;
  if (a.head.has_value() != b.head.has_value()) return false;
  if (a.head && !alphaAtom(*a.head, *b.head, ab, ba)) return false;
  if (a.body.size() != b.body.size()) return false;
  for (std::size_t k = 0; k < a.body.size(); ++k)
    if (!alphaAtom(a.body[k], b.body[k], ab, ba)) return false;
  if (a.binders.empty() || b.binders.empty()) return true;
  SortContext sb(b.binders.begin(), b.binders.end());
  for (const auto& [x, s] : a.binders) {
    auto m = ab.find(x);
    if (m == ab.end()) continue;
    auto it = sb.find(m->second);
    if (it == sb.end() || !sortEquiv(s, it->second)) return false;
  }
  return true;
}

}  // namespace corhorn
