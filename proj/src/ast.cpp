#include "corhorn/ast.hpp"

#include <functional>

#include "corhorn/error.hpp"

namespace corhorn {

namespace {
TypeP mk(Type t) { return std::make_shared<const Type>(std::move(t)); }
}  // namespace

TypeP tyVar(std::string x) { return mk({TypeKind::Var, std::move(x)}); }
TypeP tyMu(std::string x, TypeP body) {
  Type t{TypeKind::Mu, std::move(x)};
  t.a = std::move(body);
  return mk(std::move(t));
}
TypeP tyPtr(PtrKind k, std::string lft, TypeP t) {
  Type r{TypeKind::Ptr};
  r.ptr = k;
  r.lft = k == PtrKind::Own ? std::string() : std::move(lft);
  r.a = std::move(t);
  return mk(std::move(r));
}
TypeP tyOwn(TypeP t) { return tyPtr(PtrKind::Own, "", std::move(t)); }
TypeP tyMut(std::string lft, TypeP t) { return tyPtr(PtrKind::Mut, std::move(lft), std::move(t)); }
TypeP tyImmut(std::string lft, TypeP t) { return tyPtr(PtrKind::Immut, std::move(lft), std::move(t)); }
TypeP tySum(TypeP a, TypeP b) {
  Type t{TypeKind::Sum};
  t.a = std::move(a);
  t.b = std::move(b);
  return mk(std::move(t));
}
TypeP tyProd(TypeP a, TypeP b) {
  Type t{TypeKind::Prod};
  t.a = std::move(a);
  t.b = std::move(b);
  return mk(std::move(t));
}
TypeP tyInt() {
  static TypeP t = mk({TypeKind::Int});
  return t;
}
TypeP tyUnit() {
  static TypeP t = mk({TypeKind::Unit});
  return t;
}
TypeP tyBool() {
  static TypeP t = tySum(tyUnit(), tyUnit());
  return t;
}

bool typeSame(const TypeP& a, const TypeP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Var: return a->name == b->name;
    case TypeKind::Mu: return a->name == b->name && typeSame(a->a, b->a);
    case TypeKind::Ptr: return a->ptr == b->ptr && a->lft == b->lft && typeSame(a->a, b->a);
    case TypeKind::Sum:
    case TypeKind::Prod: return typeSame(a->a, b->a) && typeSame(a->b, b->b);
    default: return true;
  }
}

namespace {
void keyRec(const TypeP& t, std::vector<std::string>& env, std::string& out) {
  switch (t->kind) {
    case TypeKind::Var: {
      for (std::size_t i = env.size(); i-- > 0;)
        if (env[i] == t->name) {
          out += "#" + std::to_string(env.size() - 1 - i);
          return;
        }
      out += "$" + t->name;
      return;
    }
    case TypeKind::Mu:
      env.push_back(t->name);
      out += "mu(";
      keyRec(t->a, env, out);
      out += ")";
      env.pop_back();
      return;
    case TypeKind::Ptr:
      out += t->ptr == PtrKind::Own ? "own(" : (t->ptr == PtrKind::Mut ? "mut'" : "imm'");
      if (t->ptr != PtrKind::Own) out += t->lft + "(";
      keyRec(t->a, env, out);
      out += ")";
      return;
    case TypeKind::Sum:
    case TypeKind::Prod:
      out += t->kind == TypeKind::Sum ? "+(" : "*(";
      keyRec(t->a, env, out);
      out += ",";
      keyRec(t->b, env, out);
      out += ")";
      return;
    case TypeKind::Int: out += "i"; return;
    case TypeKind::Unit: out += "u"; return;
  }
}
}  // namespace

std::string typeKey(const TypeP& t) {
  std::vector<std::string> env;
  std::string out;
  keyRec(t, env, out);
  return out;
}

TypeP substType(const TypeP& t, const std::string& x, const TypeP& u) {
  switch (t->kind) {
    case TypeKind::Var: return t->name == x ? u : t;
    case TypeKind::Mu: return t->name == x ? t : tyMu(t->name, substType(t->a, x, u));
    case TypeKind::Ptr: return tyPtr(t->ptr, t->lft, substType(t->a, x, u));
    case TypeKind::Sum: return tySum(substType(t->a, x, u), substType(t->b, x, u));
    case TypeKind::Prod: return tyProd(substType(t->a, x, u), substType(t->b, x, u));
    default: return t;
  }
}

TypeP unfold(const TypeP& t) {
  if (t->kind != TypeKind::Mu) return t;
  return substType(t->a, t->name, t);
}

TypeP unfoldTop(const TypeP& t) {
  TypeP r = t;
  for (int i = 0; r->kind == TypeKind::Mu; ++i) {
    if (i > 64) throw Error("IncompleteType", "unguarded mu: " + printType(t));
    r = unfold(r);
  }
  return r;
}

TypeP renameLifetimes(const TypeP& t, const std::map<std::string, std::string>& m) {
  switch (t->kind) {
    case TypeKind::Mu: return tyMu(t->name, renameLifetimes(t->a, m));
    case TypeKind::Ptr: {
      std::string l = t->lft;
      if (auto it = m.find(l); it != m.end()) l = it->second;
      return tyPtr(t->ptr, l, renameLifetimes(t->a, m));
    }
    case TypeKind::Sum: return tySum(renameLifetimes(t->a, m), renameLifetimes(t->b, m));
    case TypeKind::Prod: return tyProd(renameLifetimes(t->a, m), renameLifetimes(t->b, m));
    default: return t;
  }
}

void lifetimesOf(const TypeP& t, std::set<std::string>& out) {
  switch (t->kind) {
    case TypeKind::Mu: lifetimesOf(t->a, out); return;
    case TypeKind::Ptr:
      if (t->ptr != PtrKind::Own) out.insert(t->lft);
      lifetimesOf(t->a, out);
      return;
    case TypeKind::Sum:
    case TypeKind::Prod:
      lifetimesOf(t->a, out);
      lifetimesOf(t->b, out);
      return;
    default: return;
  }
}

std::size_t sizeOf(const TypeP& t) {
  switch (t->kind) {
    case TypeKind::Var: throw Error("IncompleteType", "unguarded type variable " + t->name);
    case TypeKind::Mu: return sizeOf(unfoldTop(t));
    case TypeKind::Ptr:
    case TypeKind::Int: return 1;
    case TypeKind::Unit: return 0;
    case TypeKind::Sum: return 1 + std::max(sizeOf(t->a), sizeOf(t->b));
    case TypeKind::Prod: return sizeOf(t->a) + sizeOf(t->b);
  }
  return 0;
}

bool isComplete(const TypeP& t) {
  // env: bound variable -> guarded by a pointer since its binder
  std::function<bool(const TypeP&, std::vector<std::pair<std::string, bool>>&)> go =
      [&](const TypeP& u, std::vector<std::pair<std::string, bool>>& env) -> bool {
    switch (u->kind) {
      case TypeKind::Var:
        for (std::size_t i = env.size(); i-- > 0;)
          if (env[i].first == u->name) return env[i].second;
        return false;
      case TypeKind::Mu: {
        env.push_back({u->name, false});
        bool ok = go(u->a, env);
        env.pop_back();
        return ok;
      }
      case TypeKind::Ptr: {
        auto guarded = env;
        for (auto& e : guarded) e.second = true;
        return go(u->a, guarded);
      }
      case TypeKind::Sum:
      case TypeKind::Prod: return go(u->a, env) && go(u->b, env);
      default: return true;
    }
  };
  std::vector<std::pair<std::string, bool>> env;
  return go(t, env);
}

bool isPointer(const TypeP& t) { return t->kind == TypeKind::Ptr; }

namespace {
// precedence: 0 top, 1 sum operand, 2 prod operand, 3 prefix operand
void printRec(const TypeP& t, int ctx, std::string& out) {
  switch (t->kind) {
    case TypeKind::Var: out += t->name; return;
    case TypeKind::Int: out += "int"; return;
    case TypeKind::Unit: out += "unit"; return;
    case TypeKind::Mu:
      if (ctx > 0) out += "(";
      out += "mu " + t->name + ". ";
      printRec(t->a, 0, out);
      if (ctx > 0) out += ")";
      return;
    case TypeKind::Ptr:
      if (t->ptr == PtrKind::Own) out += "own ";
      else out += std::string(t->ptr == PtrKind::Mut ? "mut<'" : "immut<'") + t->lft + "> ";
      printRec(t->a, 3, out);
      return;
    case TypeKind::Sum:
      if (t->a->kind == TypeKind::Unit && t->b->kind == TypeKind::Unit) {
        out += "bool";
        return;
      }
      if (ctx > 1) out += "(";
      printRec(t->a, 1, out);
      out += " + ";
      printRec(t->b, 2, out);  // left-assoc: a right operand sum needs parens
      if (ctx > 1) out += ")";
      return;
    case TypeKind::Prod:
      if (ctx > 2) out += "(";
      printRec(t->a, 2, out);
      out += " * ";
      printRec(t->b, 3, out);
      if (ctx > 2) out += ")";
      return;
  }
}
}  // namespace

std::string printType(const TypeP& t) {
  std::string out;
  printRec(t, 0, out);
  return out;
}

bool opIsBool(OpKind op) { return op != OpKind::Add && op != OpKind::Sub && op != OpKind::Mul; }

const char* opText(OpKind op) {
  switch (op) {
    case OpKind::Add: return "+";
    case OpKind::Sub: return "-";
    case OpKind::Mul: return "*";
    case OpKind::Ge: return ">=";
    case OpKind::Eq: return "==";
    case OpKind::Ne: return "!=";
    case OpKind::Lt: return "<";
    case OpKind::Le: return "<=";
    case OpKind::Gt: return ">";
  }
  return "?";
}

long long applyIntOp(OpKind op, long long a, long long b) {
  switch (op) {
    case OpKind::Add: return a + b;
    case OpKind::Sub: return a - b;
    case OpKind::Mul: return a * b;
    case OpKind::Ge: return a >= b;
    case OpKind::Eq: return a == b;
    case OpKind::Ne: return a != b;
    case OpKind::Lt: return a < b;
    case OpKind::Le: return a <= b;
    case OpKind::Gt: return a > b;
  }
  return 0;
}

const Stmt& FunctionDef::at(const std::string& label) const {
  auto it = labelIndex.find(label);
  if (it == labelIndex.end()) throw Error("UndefinedLabel", name + ": no label " + label);
  return body[it->second].second;
}

const FunctionDef& Program::fn(const std::string& f) const {
  auto it = fnIndex.find(f);
  if (it == fnIndex.end()) throw Error("UnknownFunction", "no function " + f);
  return fns[it->second];
}

bool instrSame(const Instr& a, const Instr& b) {
  if (a.kind != b.kind || a.y != b.y || a.y1 != b.y1 || a.x != b.x || a.x1 != b.x1 ||
      a.lft != b.lft || a.lft1 != b.lft1 || a.fn != b.fn || a.lfts != b.lfts || a.args != b.args ||
      a.index != b.index || a.unitConst != b.unitConst || a.num != b.num || a.op != b.op)
    return false;
  if (bool(a.type) != bool(b.type)) return false;
  return !a.type || typeSame(a.type, b.type);
}

bool stmtSame(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StmtKind::Goto: return a.target == b.target && instrSame(a.instr, b.instr);
    case StmtKind::Return: return a.x == b.x;
    case StmtKind::Match:
      for (int i = 0; i < 2; ++i)
        if (a.arms[i].inj != b.arms[i].inj || a.arms[i].y != b.arms[i].y ||
            a.arms[i].label != b.arms[i].label)
          return false;
      return a.x == b.x;
  }
  return false;
}

bool programSame(const Program& a, const Program& b) {
  if (a.fns.size() != b.fns.size()) return false;
  for (std::size_t i = 0; i < a.fns.size(); ++i) {
    const auto& f = a.fns[i];
    const auto& g = b.fns[i];
    if (f.name != g.name || f.lftParams != g.lftParams || f.params.size() != g.params.size() ||
        f.constraints.size() != g.constraints.size() || f.body.size() != g.body.size() ||
        !typeSame(f.ret, g.ret))
      return false;
    for (std::size_t j = 0; j < f.constraints.size(); ++j)
      if (f.constraints[j].a != g.constraints[j].a || f.constraints[j].b != g.constraints[j].b)
        return false;
    for (std::size_t j = 0; j < f.params.size(); ++j)
      if (f.params[j].first != g.params[j].first || !typeSame(f.params[j].second, g.params[j].second))
        return false;
    for (std::size_t j = 0; j < f.body.size(); ++j)
      if (f.body[j].first != g.body[j].first || !stmtSame(f.body[j].second, g.body[j].second))
        return false;
  }
  return true;
}

std::vector<std::string> successors(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Goto: return {s.target};
    case StmtKind::Return: return {};
    case StmtKind::Match: return {s.arms[0].label, s.arms[1].label};
  }
  return {};
}

}  // namespace corhorn
