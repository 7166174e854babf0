#include "corhorn/typeck.hpp"

#include <deque>
#include <functional>

#include "corhorn/error.hpp"
#include "corhorn/parser.hpp"

namespace corhorn {

void LifetimeContext::add(const std::string& a) {
  carrier.insert(a);
  order.insert({a, a});
}

void LifetimeContext::relate(const std::string& a, const std::string& b) {
  order.insert({a, b});
  close();
}

void LifetimeContext::close() {
  for (const auto& c : carrier) order.insert({c, c});
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [a, b] : std::set<std::pair<std::string, std::string>>(order))
      for (const auto& c : carrier)
        if (order.count({b, c}) && order.insert({a, c}).second) changed = true;
  }
}

void LifetimeContext::remove(const std::string& a) {
  carrier.erase(a);
  for (auto it = order.begin(); it != order.end();)
    it = (it->first == a || it->second == a) ? order.erase(it) : std::next(it);
}

bool contextEqual(const WholeContext& a, const WholeContext& b) {
  if (!(a.lft == b.lft) || a.gamma.size() != b.gamma.size()) return false;
  for (const auto& [x, it] : a.gamma) {
    auto j = b.gamma.find(x);
    if (j == b.gamma.end() || !(j->second.act == it.act) || !typeAlphaEq(j->second.type, it.type))
      return false;
  }
  return true;
}

namespace {

bool subRec(const SubtypeAssumptions& xi, const LifetimeContext& A, const TypeP& t, const TypeP& u,
            std::set<std::pair<std::string, std::string>>& seen) {
  std::string kt = typeKey(t), ku = typeKey(u);
  if (kt == ku) return true;
  if (!seen.insert({kt, ku}).second) return true;
  if (t->kind == TypeKind::Mu) return subRec(xi, A, unfold(t), u, seen);
  if (u->kind == TypeKind::Mu) return subRec(xi, A, t, unfold(u), seen);
  if (t->kind != u->kind) return false;
  switch (t->kind) {
    case TypeKind::Var: return xi.count({t->name, u->name}) > 0;
    case TypeKind::Ptr:
      if (t->ptr != u->ptr) return false;
      if (t->ptr == PtrKind::Own) return subRec(xi, A, t->a, u->a, seen);
      if (!A.leq(u->lft, t->lft)) return false;
      if (t->ptr == PtrKind::Immut) return subRec(xi, A, t->a, u->a, seen);
      return subRec(xi, A, t->a, u->a, seen) && subRec(xi, A, u->a, t->a, seen);
    case TypeKind::Sum:
    case TypeKind::Prod: return subRec(xi, A, t->a, u->a, seen) && subRec(xi, A, t->b, u->b, seen);
    default: return true;
  }
}

bool copyRec(const TypeP& t, std::set<std::string>& bound) {
  switch (t->kind) {
    case TypeKind::Var: return bound.count(t->name) > 0;
    case TypeKind::Mu: {
      bool had = bound.count(t->name);
      bound.insert(t->name);
      bool r = copyRec(t->a, bound);
      if (!had) bound.erase(t->name);
      return r;
    }
    case TypeKind::Ptr: return t->ptr == PtrKind::Immut;
    case TypeKind::Sum:
    case TypeKind::Prod: return copyRec(t->a, bound) && copyRec(t->b, bound);
    default: return true;
  }
}

// every own / mut reachable in t without passing an immut
bool ownGuarded(const TypeP& t) {
  switch (t->kind) {
    case TypeKind::Mu: return ownGuarded(t->a);
    case TypeKind::Ptr: return t->ptr == PtrKind::Immut;
    case TypeKind::Sum:
    case TypeKind::Prod: return ownGuarded(t->a) && ownGuarded(t->b);
    default: return true;
  }
}

[[noreturn]] void err(const std::string& code, const std::string& msg) { throw TypeError(code, msg); }

const VarItem& getVar(const WholeContext& wc, const std::string& x) {
  auto it = wc.gamma.find(x);
  if (it == wc.gamma.end()) err("UnknownVariable", "variable " + x + " not in context");
  return it->second;
}

const VarItem& getActive(const WholeContext& wc, const std::string& x) {
  const VarItem& v = getVar(wc, x);
  if (v.act.frozen) err("UseOfFrozen", "variable " + x + " is frozen until '" + v.act.lft);
  return v;
}

void addVar(WholeContext& wc, const std::string& y, VarItem it) {
  if (wc.gamma.count(y)) err("DuplicateVariable", "variable " + y + " already in context");
  wc.gamma[y] = std::move(it);
}

VarItem active(TypeP t) { return VarItem{Activeness{}, std::move(t)}; }

TypeP pointee(const TypeP& ptr) { return unfoldTop(ptr->a); }

void checkLifetimesKnown(const WholeContext& wc, const TypeP& t) {
  std::set<std::string> ls;
  lifetimesOf(t, ls);
  for (const auto& l : ls)
    if (!wc.lft.carrier.count(l)) err("UnknownLifetime", "lifetime '" + l + " not in context");
}

}  // namespace

bool subtype(const SubtypeAssumptions& xi, const LifetimeContext& a, const TypeP& t, const TypeP& u) {
  std::set<std::pair<std::string, std::string>> seen;
  return subRec(xi, a, t, u, seen);
}

bool typeEquiv(const LifetimeContext& a, const TypeP& t, const TypeP& u) {
  return subtype({}, a, t, u) && subtype({}, a, u, t);
}

bool isCopy(const TypeP& t) {
  std::set<std::string> bound;
  return copyRec(t, bound);
}

const WholeContext& TypingResult::at(const std::string& f, const std::string& l) const {
  auto it = fns.find(f);
  if (it == fns.end()) throw Error("UnknownFunction", "no typing for " + f);
  auto j = it->second.labels.find(l);
  if (j == it->second.labels.end()) throw Error("UndefinedLabel", "no typing for " + f + ":" + l);
  return j->second;
}

const VarItem& TypingResult::var(const std::string& f, const std::string& l, const std::string& x) const {
  const auto& wc = at(f, l);
  auto it = wc.gamma.find(x);
  if (it == wc.gamma.end()) throw Error("UnknownVariable", x + " not typed at " + f + ":" + l);
  return it->second;
}

WholeContext entryContext(const FunctionDef& f) {
  WholeContext wc;
  for (const auto& l : f.lftParams) wc.lft.add(l);
  for (const auto& c : f.constraints) wc.lft.order.insert({c.a, c.b});
  wc.lft.close();
  for (const auto& [x, t] : f.params) {
    checkLifetimesKnown(wc, t);
    wc.gamma[x] = active(t);
  }
  checkLifetimesKnown(wc, f.ret);
  return wc;
}

WholeContext typeInstruction(const Program& prog, const std::string& fname, const Instr& i,
                             const WholeContext& wc) {
  const FunctionDef& fd = prog.fn(fname);
  std::set<std::string> aex(fd.lftParams.begin(), fd.lftParams.end());
  WholeContext out = wc;
  auto& G = out.gamma;
  switch (i.kind) {
    case InstrKind::MutBor: {
      if (!wc.lft.carrier.count(i.lft)) err("UnknownLifetime", "lifetime '" + i.lft + " not in context");
      if (aex.count(i.lft)) err("LifetimeParamBorrow", "cannot borrow with lifetime parameter '" + i.lft);
      const VarItem& x = getVar(wc, i.x);
      if (x.act.frozen) err("BorrowOfFrozen", "variable " + i.x + " is frozen");
      if (x.type->kind != TypeKind::Ptr || x.type->ptr == PtrKind::Immut)
        err("BorrowOfImmutable", "mutbor needs an own or mut pointer, got " + printType(x.type));
      std::set<std::string> ls;
      lifetimesOf(x.type, ls);
      for (const auto& g : ls)
        if (!wc.lft.leq(i.lft, g))
          err("BorrowOutlivesLender", "'" + i.lft + " is not known to end before '" + g);
      TypeP t = x.type->a;
      G[i.x] = VarItem{Activeness{true, i.lft}, x.type};
      addVar(out, i.y, active(tyMut(i.lft, t)));
      return out;
    }
    case InstrKind::Drop: {
      const VarItem& x = getActive(wc, i.x);
      if (x.type->ptr == PtrKind::Own && !ownGuarded(x.type->a))
        err("DropOfBorrowGuardedOwn", "dropping " + i.x + " would leak an unguarded own/mut pointer");
      G.erase(i.x);
      return out;
    }
    case InstrKind::Immut: {
      const VarItem& x = getActive(wc, i.x);
      if (x.type->ptr != PtrKind::Mut) err("NotMutable", i.x + " is not a mutable reference");
      G[i.x] = active(tyImmut(x.type->lft, x.type->a));
      return out;
    }
    case InstrKind::Swap: {
      const VarItem& x = getActive(wc, i.x);
      const VarItem& y = getActive(wc, i.x1);
      if (x.type->ptr != PtrKind::Mut) err("SwapMismatch", i.x + " must be a mutable reference");
      if (y.type->ptr == PtrKind::Immut) err("SwapMismatch", i.x1 + " must be own or mut");
      if (!typeAlphaEq(x.type->a, y.type->a)) err("SwapMismatch", "swap of different target types");
      return out;
    }
    case InstrKind::MakePtr: {
      const VarItem& x = getActive(wc, i.x);
      TypeP t = x.type;
      G.erase(i.x);
      addVar(out, i.y, active(tyOwn(t)));
      return out;
    }
    case InstrKind::Deref: {
      const VarItem& x = getActive(wc, i.x);
      TypeP inner = pointee(x.type);
      if (inner->kind != TypeKind::Ptr) err("DerefOfNonPointer", i.x + " does not point to a pointer");
      TypeP res;
      if (x.type->ptr == PtrKind::Own) res = inner;
      else if (inner->ptr == PtrKind::Own) res = tyPtr(x.type->ptr, x.type->lft, inner->a);
      else {
        bool mut = x.type->ptr == PtrKind::Mut && inner->ptr == PtrKind::Mut;
        res = tyPtr(mut ? PtrKind::Mut : PtrKind::Immut, x.type->lft, inner->a);
      }
      G.erase(i.x);
      addVar(out, i.y, active(res));
      return out;
    }
    case InstrKind::Copy: {
      const VarItem& x = getActive(wc, i.x);
      if (!isCopy(x.type->a)) err("NotCopyable", printType(x.type->a) + " is not Copy");
      addVar(out, i.y, active(tyOwn(x.type->a)));
      return out;
    }
    case InstrKind::As: {
      const VarItem& x = getActive(wc, i.x);
      if (!isComplete(i.type) || !isPointer(i.type)) err("BadType", "target of as must be a complete pointer type");
      checkLifetimesKnown(wc, i.type);
      if (!subtype({}, wc.lft, x.type, i.type))
        err("SubtypeMismatch", printType(x.type) + " is not a subtype of " + printType(i.type));
      G[i.x] = active(i.type);
      return out;
    }
    case InstrKind::Call: {
      if (!prog.hasFn(i.fn)) err("UnknownFunction", "no function " + i.fn);
      const FunctionDef& g = prog.fn(i.fn);
      if (g.params.size() != i.args.size() || g.lftParams.size() != i.lfts.size())
        err("ArityMismatch", "call of " + i.fn + " with wrong number of arguments or lifetimes");
      std::map<std::string, std::string> sub;
      for (std::size_t k = 0; k < i.lfts.size(); ++k) {
        if (!wc.lft.carrier.count(i.lfts[k])) err("UnknownLifetime", "lifetime '" + i.lfts[k] + " not in context");
        sub[g.lftParams[k]] = i.lfts[k];
      }
      for (const auto& c : g.constraints)
        if (!wc.lft.leq(sub[c.a], sub[c.b]))
          err("ConstraintUnsatisfied", "'" + sub[c.a] + " <= '" + sub[c.b] + " does not hold");
      std::set<std::string> used;
      for (std::size_t k = 0; k < i.args.size(); ++k) {
        if (!used.insert(i.args[k]).second) err("DuplicateArgument", i.args[k] + " passed twice");
        const VarItem& a = getActive(wc, i.args[k]);
        TypeP want = renameLifetimes(g.params[k].second, sub);
        if (!typeAlphaEq(a.type, want))
          err("ArgumentTypeMismatch", i.args[k] + ": expected " + printType(want) + ", got " + printType(a.type));
      }
      for (const auto& a : i.args) G.erase(a);
      addVar(out, i.y, active(renameLifetimes(g.ret, sub)));
      return out;
    }
    case InstrKind::Intro: {
      if (wc.lft.carrier.count(i.lft)) err("LifetimeExists", "lifetime '" + i.lft + " already in context");
      out.lft.add(i.lft);
      for (const auto& b : aex) out.lft.order.insert({i.lft, b});
      out.lft.close();
      return out;
    }
    case InstrKind::Now: {
      if (!wc.lft.carrier.count(i.lft)) err("UnknownLifetime", "lifetime '" + i.lft + " not in context");
      if (aex.count(i.lft)) err("NowOfLifetimeParam", "cannot end lifetime parameter '" + i.lft);
      for (auto& [x, it] : G) {
        if (it.act.frozen && it.act.lft == i.lft) it.act = Activeness{};
        std::set<std::string> ls;
        lifetimesOf(it.type, ls);
        if (ls.count(i.lft)) err("LifetimeStillInUse", x + " still has lifetime '" + i.lft + " in its type");
      }
      out.lft.remove(i.lft);
      return out;
    }
    case InstrKind::LftLeq: {
      for (const auto& l : {i.lft, i.lft1}) {
        if (!wc.lft.carrier.count(l)) err("UnknownLifetime", "lifetime '" + l + " not in context");
        if (aex.count(l)) err("LifetimeParamConstraint", "cannot constrain lifetime parameter '" + l);
      }
      out.lft.relate(i.lft, i.lft1);
      return out;
    }
    case InstrKind::Const:
      addVar(out, i.y, active(tyOwn(i.unitConst ? tyUnit() : tyInt())));
      return out;
    case InstrKind::BinOp: {
      for (const auto& v : {i.x, i.x1}) {
        const VarItem& x = getActive(wc, v);
        if (pointee(x.type)->kind != TypeKind::Int) err("OperandNotInt", v + " does not point to an int");
      }
      addVar(out, i.y, active(tyOwn(opIsBool(i.op) ? tyBool() : tyInt())));
      return out;
    }
    case InstrKind::Rand: addVar(out, i.y, active(tyOwn(tyInt()))); return out;
    case InstrKind::Inj: {
      const VarItem& x = getActive(wc, i.x);
      TypeP comp = i.index ? i.type->b : i.type->a;
      if (x.type->ptr != PtrKind::Own || !typeAlphaEq(x.type->a, comp))
        err("InjectionMismatch", i.x + " is not own " + printType(comp));
      if (!isComplete(i.type)) err("BadType", "injection type is not complete");
      checkLifetimesKnown(wc, i.type);
      G.erase(i.x);
      addVar(out, i.y, active(tyOwn(i.type)));
      return out;
    }
    case InstrKind::Pair: {
      if (i.x == i.x1) err("DuplicateArgument", "pair of a variable with itself");
      const VarItem& a = getActive(wc, i.x);
      const VarItem& b = getActive(wc, i.x1);
      if (a.type->ptr != PtrKind::Own || b.type->ptr != PtrKind::Own)
        err("PairOfBorrow", "pair components must be owning pointers");
      TypeP t = tyProd(a.type->a, b.type->a);
      G.erase(i.x);
      G.erase(i.x1);
      addVar(out, i.y, active(tyOwn(t)));
      return out;
    }
    case InstrKind::Destruct: {
      const VarItem& x = getActive(wc, i.x);
      TypeP inner = pointee(x.type);
      if (inner->kind != TypeKind::Prod) err("DestructOnNonProduct", i.x + " does not point to a pair");
      PtrKind k = x.type->ptr;
      std::string l = x.type->lft;
      G.erase(i.x);
      addVar(out, i.y, active(tyPtr(k, l, inner->a)));
      addVar(out, i.y1, active(tyPtr(k, l, inner->b)));
      return out;
    }
  }
  err("Internal", "unhandled instruction");
}

std::vector<std::pair<std::string, WholeContext>> typeStatement(
    const Program& prog, const std::string& f, const Stmt& s, const WholeContext& wc,
    const std::map<std::string, WholeContext>* labelContexts, const TypeP& returnType) {
  std::vector<std::pair<std::string, WholeContext>> outs;
  const FunctionDef& fd = prog.fn(f);
  switch (s.kind) {
    case StmtKind::Goto: outs.push_back({s.target, typeInstruction(prog, f, s.instr, wc)}); break;
    case StmtKind::Return: {
      const VarItem& x = getActive(wc, s.x);
      if (wc.gamma.size() != 1)
        err("ReturnLeftovers", "variables other than " + s.x + " remain at return");
      std::set<std::string> aex(fd.lftParams.begin(), fd.lftParams.end());
      if (wc.lft.carrier != aex) err("ReturnLeftovers", "local lifetimes remain at return");
      if (!typeAlphaEq(x.type, returnType))
        err("ReturnTypeMismatch", "returning " + printType(x.type) + ", expected " + printType(returnType));
      break;
    }
    case StmtKind::Match: {
      const VarItem& x = getActive(wc, s.x);
      TypeP inner = pointee(x.type);
      if (inner->kind != TypeKind::Sum) err("MatchOnNonSum", s.x + " does not point to a sum");
      for (const auto& arm : s.arms) {
        WholeContext b = wc;
        b.gamma.erase(s.x);
        addVar(b, arm.y, active(tyPtr(x.type->ptr, x.type->lft, arm.inj ? inner->b : inner->a)));
        outs.push_back({arm.label, std::move(b)});
      }
      break;
    }
  }
  if (labelContexts)
    for (const auto& [l, c] : outs) {
      auto it = labelContexts->find(l);
      if (it != labelContexts->end() && !contextEqual(it->second, c))
        err("ContextMismatchAtJoin", "context flowing into " + l + " differs from its assigned context");
    }
  return outs;
}

TypingResult typeProgram(const Program& prog) {
  TypingResult tr;
  for (const auto& fd : prog.fns) {
    FnTyping ft;
    ft.lftParams.insert(fd.lftParams.begin(), fd.lftParams.end());
    try {
      ft.labels["entry"] = entryContext(fd);
    } catch (const TypeError& e) {
      throw TypeError(e.code(), "bad signature", fd.name, "entry");
    }
    std::deque<std::string> work{"entry"};
    while (!work.empty()) {
      std::string l = work.front();
      work.pop_front();
      const Stmt& s = fd.at(l);
      std::vector<std::pair<std::string, WholeContext>> outs;
      try {
        outs = typeStatement(prog, fd.name, s, ft.labels.at(l), nullptr, fd.ret);
      } catch (const TypeError& e) {
        std::string what = e.what();
        auto p = what.find(": ");
        throw TypeError(e.code(), p == std::string::npos ? what : what.substr(p + 2), fd.name, l,
                        s.kind == StmtKind::Goto ? printInstr(s.instr) : printStmt(s));
      }
      for (auto& [t, c] : outs) {
        auto it = ft.labels.find(t);
        if (it == ft.labels.end()) {
          ft.labels.emplace(t, std::move(c));
          work.push_back(t);
        } else if (!contextEqual(it->second, c)) {
          throw TypeError("InconsistentJoin", "two different contexts flow into " + t, fd.name, l,
                          printStmt(s));
        }
      }
    }
    tr.fns[fd.name] = std::move(ft);
  }
  return tr;
}

nlohmann::json contextToJson(const WholeContext& wc) {
  nlohmann::json g = nlohmann::json::object();
  for (const auto& [x, it] : wc.gamma)
    g[x] = {{"activeness", it.act.frozen ? "frozen '" + it.act.lft : std::string("active")},
            {"type", printType(it.type)}};
  nlohmann::json order = nlohmann::json::array();
  for (const auto& [a, b] : wc.lft.order) order.push_back({a, b});
  return {{"gamma", g}, {"lifetimes", wc.lft.carrier}, {"order", order}};
}

nlohmann::json typingToJson(const Program& prog, const TypingResult& tr) {
  nlohmann::json fns = nlohmann::json::object();
  for (const auto& fd : prog.fns) {
    const auto& ft = tr.fns.at(fd.name);
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [l, wc] : ft.labels) labels[l] = contextToJson(wc);
    fns[fd.name] = {{"lifetime_params", fd.lftParams}, {"labels", labels}};
  }
  return {{"version", 1}, {"functions", fns}};
}

}  // namespace corhorn
