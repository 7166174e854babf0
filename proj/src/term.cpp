#include "corhorn/term.hpp"

#include "corhorn/error.hpp"

namespace corhorn {

namespace {
TermP mk(Term t) { return std::make_shared<const Term>(std::move(t)); }
}  // namespace

TermP tVar(std::string x) { return mk({TermKind::Var, std::move(x)}); }
TermP tAbs(long long id, std::string display) {
  Term t{TermKind::Abs, std::move(display)};
  t.num = id;
  return mk(std::move(t));
}
TermP tBox(TermP x) {
  Term t{TermKind::Box};
  t.a = std::move(x);
  return mk(std::move(t));
}
TermP tMut(TermP c, TermP p) {
  Term t{TermKind::Mut};
  t.a = std::move(c);
  t.b = std::move(p);
  return mk(std::move(t));
}
TermP tInj(int i, TermP x) {
  Term t{TermKind::Inj};
  t.index = i;
  t.a = std::move(x);
  return mk(std::move(t));
}
TermP tPair(TermP a, TermP b) {
  Term t{TermKind::Pair};
  t.a = std::move(a);
  t.b = std::move(b);
  return mk(std::move(t));
}
TermP tDeref(TermP x) {
  Term t{TermKind::Deref};
  t.a = std::move(x);
  return mk(std::move(t));
}
TermP tProph(TermP x) {
  Term t{TermKind::Proph};
  t.a = std::move(x);
  return mk(std::move(t));
}
TermP tProj(TermP x, int i) {
  Term t{TermKind::Proj};
  t.index = i;
  t.a = std::move(x);
  return mk(std::move(t));
}
TermP tInt(long long n) {
  Term t{TermKind::Int};
  t.num = n;
  return mk(std::move(t));
}
TermP tUnit() {
  static TermP u = mk({TermKind::Unit});
  return u;
}
TermP tBool(bool b) { return tInj(b ? 1 : 0, tUnit()); }
TermP tOp(OpKind op, TermP a, TermP b) {
  Term t{TermKind::Op};
  t.op = op;
  t.a = std::move(a);
  t.b = std::move(b);
  return mk(std::move(t));
}

bool termEq(const TermP& a, const TermP& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: return a->name == b->name;
    case TermKind::Abs:
    case TermKind::Int: return a->num == b->num;
    case TermKind::Unit: return true;
    case TermKind::Inj:
    case TermKind::Proj: return a->index == b->index && termEq(a->a, b->a);
    case TermKind::Box:
    case TermKind::Deref:
    case TermKind::Proph: return termEq(a->a, b->a);
    case TermKind::Op: return a->op == b->op && termEq(a->a, b->a) && termEq(a->b, b->b);
    case TermKind::Mut:
    case TermKind::Pair: return termEq(a->a, b->a) && termEq(a->b, b->b);
  }
  return false;
}

bool isValue(const TermP& t) {
  switch (t->kind) {
    case TermKind::Int:
    case TermKind::Unit: return true;
    case TermKind::Box:
    case TermKind::Inj: return isValue(t->a);
    case TermKind::Mut:
    case TermKind::Pair: return isValue(t->a) && isValue(t->b);
    default: return false;
  }
}

bool isPattern(const TermP& t) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Int:
    case TermKind::Unit: return true;
    case TermKind::Box:
    case TermKind::Inj: return isPattern(t->a);
    case TermKind::Mut:
    case TermKind::Pair: return isPattern(t->a) && isPattern(t->b);
    default: return false;
  }
}

bool hasAbs(const TermP& t) {
  if (!t) return false;
  if (t->kind == TermKind::Abs) return true;
  return hasAbs(t->a) || hasAbs(t->b);
}

namespace {
bool atomic(const TermP& t) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Abs:
    case TermKind::Box:
    case TermKind::Mut:
    case TermKind::Pair:
    case TermKind::Unit: return true;
    case TermKind::Int: return t->num >= 0;
    default: return false;
  }
}

void printRec(const TermP& t, std::string& o, bool inAngle) {
  auto sub = [&](const TermP& c) {
    if (atomic(c)) printRec(c, o, false);
    else {
      o += "(";
      printRec(c, o, false);
      o += ")";
    }
  };
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Abs: o += t->name; return;
    case TermKind::Int: o += std::to_string(t->num); return;
    case TermKind::Unit: o += "()"; return;
    case TermKind::Box:
      o += "<";
      printRec(t->a, o, true);
      o += ">";
      return;
    case TermKind::Mut:
      o += "<";
      printRec(t->a, o, true);
      o += ", ";
      printRec(t->b, o, true);
      o += ">";
      return;
    case TermKind::Pair:
      o += "(";
      printRec(t->a, o, false);
      o += ", ";
      printRec(t->b, o, false);
      o += ")";
      return;
    case TermKind::Inj:
      o += "inj" + std::to_string(t->index) + " ";
      sub(t->a);
      return;
    case TermKind::Deref:
      o += "*";
      sub(t->a);
      return;
    case TermKind::Proph:
      o += "^";
      sub(t->a);
      return;
    case TermKind::Proj:
      sub(t->a);
      o += "." + std::to_string(t->index);
      return;
    case TermKind::Op: {
      bool paren = inAngle && t->op == OpKind::Gt;
      if (paren) o += "(";
      sub(t->a);
      o += std::string(" ") + opText(t->op) + " ";
      sub(t->b);
      if (paren) o += ")";
      return;
    }
  }
}
}  // namespace

std::string printTerm(const TermP& t) {
  std::string o;
  printRec(t, o, false);
  return o;
}

void varsOf(const TermP& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->kind == TermKind::Var) out.insert(t->name);
  varsOf(t->a, out);
  varsOf(t->b, out);
}

void varOccurrences(const TermP& t, std::map<std::string, int>& out) {
  if (!t) return;
  if (t->kind == TermKind::Var) ++out[t->name];
  varOccurrences(t->a, out);
  varOccurrences(t->b, out);
}

void absOf(const TermP& t, std::set<long long>& out) {
  if (!t) return;
  if (t->kind == TermKind::Abs) out.insert(t->num);
  absOf(t->a, out);
  absOf(t->b, out);
}

namespace {
TermP rebuild(const TermP& t, TermP a, TermP b) {
  if (a == t->a && b == t->b) return t;
  Term n = *t;
  n.a = std::move(a);
  n.b = std::move(b);
  return std::make_shared<const Term>(std::move(n));
}
}  // namespace

TermP substVars(const TermP& t, const std::map<std::string, TermP>& s) {
  if (!t) return t;
  if (t->kind == TermKind::Var) {
    auto it = s.find(t->name);
    return it == s.end() ? t : it->second;
  }
  if (!t->a) return t;
  return rebuild(t, substVars(t->a, s), t->b ? substVars(t->b, s) : nullptr);
}

TermP substAbs(const TermP& t, long long id, const TermP& by) {
  if (!t) return t;
  if (t->kind == TermKind::Abs) return t->num == id ? by : t;
  if (!t->a) return t;
  return rebuild(t, substAbs(t->a, id, by), t->b ? substAbs(t->b, id, by) : nullptr);
}

TermP valOf(const TermP& t) {
  if (t->kind != TermKind::Box && t->kind != TermKind::Mut)
    throw Error("ShapeMismatch", "val of a non-pointer pre-value " + printTerm(t));
  return t->a;
}

}  // namespace corhorn
