#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace corhorn {

enum class TypeKind { Var, Mu, Ptr, Sum, Prod, Int, Unit };
enum class PtrKind { Own, Mut, Immut };

struct Type;
using TypeP = std::shared_ptr<const Type>;

// Also used for sorts: Ptr Own with empty lifetime is Box, Ptr Mut is Mut.
struct Type {
  TypeKind kind;
  std::string name;  // Var name, or Mu binder
  PtrKind ptr = PtrKind::Own;
  std::string lft;   // lifetime of Mut / Immut
  TypeP a, b;        // Mu body / Ptr target / Sum and Prod parts
};

TypeP tyVar(std::string x);
TypeP tyMu(std::string x, TypeP body);
TypeP tyPtr(PtrKind k, std::string lft, TypeP t);
TypeP tyOwn(TypeP t);
TypeP tyMut(std::string lft, TypeP t);
TypeP tyImmut(std::string lft, TypeP t);
TypeP tySum(TypeP a, TypeP b);
TypeP tyProd(TypeP a, TypeP b);
TypeP tyInt();
TypeP tyUnit();
TypeP tyBool();

// Nominal structural equality (binder names matter).
bool typeSame(const TypeP& a, const TypeP& b);
// De Bruijn key: equal keys iff alpha-equivalent.
std::string typeKey(const TypeP& t);
inline bool typeAlphaEq(const TypeP& a, const TypeP& b) { return typeKey(a) == typeKey(b); }

// T[u/x]; u is expected closed so no capture can happen.
TypeP substType(const TypeP& t, const std::string& x, const TypeP& u);
TypeP unfold(const TypeP& t);     // one step, t must be Mu
TypeP unfoldTop(const TypeP& t);  // until the head is not Mu
TypeP renameLifetimes(const TypeP& t, const std::map<std::string, std::string>& m);
void lifetimesOf(const TypeP& t, std::set<std::string>& out);

std::size_t sizeOf(const TypeP& t);
bool isComplete(const TypeP& t);
bool isPointer(const TypeP& t);

std::string printType(const TypeP& t);

// ---- instructions and statements ----

enum class InstrKind {
  MutBor, Drop, Immut, Swap, MakePtr, Deref, Copy, As, Call, Intro, Now, LftLeq,
  Const, BinOp, Rand, Inj, Pair, Destruct
};

enum class OpKind { Add, Sub, Mul, Ge, Eq, Ne, Lt, Le, Gt };
bool opIsBool(OpKind op);
const char* opText(OpKind op);
long long applyIntOp(OpKind op, long long a, long long b);

struct Instr {
  InstrKind kind;
  std::string y, y1;          // receivers (Destruct uses y, y1)
  std::string x, x1;          // operands (Swap: x, x1; BinOp: x op x1; Pair: (x, x1))
  std::string lft, lft1;      // MutBor / Intro / Now use lft; LftLeq: lft <= lft1
  std::string fn;             // Call
  std::vector<std::string> lfts, args;  // Call
  TypeP type;                 // As target, Inj sum type
  int index = 0;              // Inj
  bool unitConst = false;     // Const: () when true, else `num`
  long long num = 0;
  OpKind op = OpKind::Add;
};

enum class StmtKind { Goto, Return, Match };

struct MatchArm {
  int inj = 0;
  std::string y;
  std::string label;
};

struct Stmt {
  StmtKind kind = StmtKind::Goto;
  Instr instr{};
  std::string target;  // Goto
  std::string x;       // Return / Match
  MatchArm arms[2];    // in source order
  const MatchArm& arm(int inj) const { return arms[0].inj == inj ? arms[0] : arms[1]; }
};

struct LftConstraint {
  std::string a, b;  // a <= b
};

struct FunctionDef {
  std::string name;
  std::vector<std::string> lftParams;
  std::vector<LftConstraint> constraints;
  std::vector<std::pair<std::string, TypeP>> params;
  TypeP ret;
  std::vector<std::pair<std::string, Stmt>> body;  // in source order
  std::map<std::string, std::size_t> labelIndex;

  const Stmt& at(const std::string& label) const;
  bool hasLabel(const std::string& l) const { return labelIndex.count(l) > 0; }
  bool isSimple() const { return lftParams.empty(); }
};

struct Program {
  std::vector<FunctionDef> fns;
  std::map<std::string, std::size_t> fnIndex;

  const FunctionDef& fn(const std::string& f) const;
  bool hasFn(const std::string& f) const { return fnIndex.count(f) > 0; }
};

bool instrSame(const Instr& a, const Instr& b);
bool stmtSame(const Stmt& a, const Stmt& b);
bool programSame(const Program& a, const Program& b);

std::vector<std::string> successors(const Stmt& s);

}  // namespace corhorn
