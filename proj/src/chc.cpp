#include "corhorn/chc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace corhorn {

// ---------------- sorts ----------------

Sort sBox(Sort s) { return tyOwn(std::move(s)); }
Sort sMut(Sort s) { return tyPtr(PtrKind::Mut, "", std::move(s)); }
bool isBoxSort(const Sort& s) { return s->kind == TypeKind::Ptr && s->ptr != PtrKind::Mut; }
bool isMutSort(const Sort& s) { return s->kind == TypeKind::Ptr && s->ptr == PtrKind::Mut; }

namespace {

bool equivRec(const Sort& a, const Sort& b, std::set<std::pair<std::string, std::string>>& assumed) {
  std::pair<std::string, std::string> key{typeKey(a), typeKey(b)};
  if (key.first == key.second || assumed.count(key)) return true;
  if (a->kind == TypeKind::Mu || b->kind == TypeKind::Mu) {
    assumed.insert(key);
    return equivRec(a->kind == TypeKind::Mu ? unfold(a) : a, b->kind == TypeKind::Mu ? unfold(b) : b, assumed);
  }
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Ptr:
      return isMutSort(a) == isMutSort(b) && equivRec(a->a, b->a, assumed);
    case TypeKind::Sum:
    case TypeKind::Prod: return equivRec(a->a, b->a, assumed) && equivRec(a->b, b->b, assumed);
    case TypeKind::Var: return a->name == b->name;
    default: return true;
  }
}

void printSortRec(const Sort& s, int prec, std::string& o) {
  auto paren = [&](bool p, auto f) {
    if (p) o += "(";
    f();
    if (p) o += ")";
  };
  switch (s->kind) {
    case TypeKind::Var: o += s->name; return;
    case TypeKind::Int: o += "int"; return;
    case TypeKind::Unit: o += "unit"; return;
    case TypeKind::Mu:
      paren(prec > 0, [&] {
        o += "mu " + s->name + ". ";
        printSortRec(s->a, 0, o);
      });
      return;
    case TypeKind::Sum:
      paren(prec > 0, [&] {
        printSortRec(s->a, 1, o);
        o += " + ";
        printSortRec(s->b, 1, o);
      });
      return;
    case TypeKind::Prod:
      paren(prec > 1, [&] {
        printSortRec(s->a, 2, o);
        o += " * ";
        printSortRec(s->b, 2, o);
      });
      return;
    case TypeKind::Ptr:
      o += isMutSort(s) ? "mut " : "box ";
      printSortRec(s->a, 2, o);
      return;
  }
}

// ---------------- lexer / parser for the internal text format ----------------

struct Tok {
  enum Kind { Ident, Int, Punct, End } kind = End;
  std::string text;
  long long num = 0;
  int line = 1;
};

std::vector<Tok> lex(const std::string& s) {
  std::vector<Tok> out;
  int line = 1;
  std::size_t i = 0;
  auto identChar = [&](std::size_t k) {
    char c = s[k];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '\'') return true;
    return c == '!' && !(k + 1 < s.size() && s[k + 1] == '=');
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    Tok t;
    t.line = line;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Tok::Int;
      t.text = s.substr(i, j - i);
      t.num = std::stoll(t.text);
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '?') {
      std::size_t j = i + 1;
      while (j < s.size() && identChar(j)) ++j;
      t.kind = Tok::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (s.compare(i, 3, "\u27e8") == 0 || s.compare(i, 3, "\u27e9") == 0) {
      // angle brackets as in the value notation
      t.kind = Tok::Punct;
      t.text = s.compare(i, 3, "\u27e8") == 0 ? "<" : ">";
      i += 3;
    } else {
      static const char* two[] = {"<=", ">=", "==", "!=", "/\\"};
      t.kind = Tok::Punct;
      for (const char* p : two)
        if (s.compare(i, 2, p) == 0) t.text = p;
      if (t.text.empty()) t.text = std::string(1, c);
      i += t.text.size();
    }
    out.push_back(t);
  }
  Tok end;
  end.line = line;
  out.push_back(end);
  return out;
}

class TextParser {
public:
  explicit TextParser(const std::string& s) : toks_(lex(s)) {}

  bool atEnd() const { return cur().kind == Tok::End; }
  bool skipComma() {
    if (!isPunct(",")) return false;
    ++pos_;
    return true;
  }

  Sort sort() {
    if (isWord("mu")) {
      ++pos_;
      std::string x = ident();
      expect(".");
      return tyMu(x, sort());
    }
    Sort s = prod();
    while (isPunct("+")) {
      ++pos_;
      s = tySum(s, prod());
    }
    return s;
  }

  TermP term(bool inAngle = false) {
    TermP a = additive();
    static const std::map<std::string, OpKind> cmp = {{">=", OpKind::Ge}, {"<=", OpKind::Le}, {"==", OpKind::Eq},
                                                      {"!=", OpKind::Ne}, {"<", OpKind::Lt},  {">", OpKind::Gt}};
    if (cur().kind == Tok::Punct) {
      auto it = cmp.find(cur().text);
      if (it != cmp.end() && !(inAngle && it->second == OpKind::Gt)) {
        ++pos_;
        return tOp(it->second, a, additive());
      }
    }
    return a;
  }

  Atom atom() {
    Atom a;
    a.pred = ident();
    expect("(");
    if (!isPunct(")")) {
      a.args.push_back(term());
      while (isPunct(",")) {
        ++pos_;
        a.args.push_back(term());
      }
    }
    expect(")");
    return a;
  }

  Clause clause() {
    Clause c;
    if (isWord("forall")) {
      ++pos_;
      while (isPunct("(")) {
        ++pos_;
        std::string x = ident();
        expect(":");
        c.binders.emplace_back(x, sort());
        expect(")");
      }
      expect(".");
    }
    if (isWord("false")) ++pos_;
    else c.head = atom();
    expect("<=");
    if (isWord("true")) {
      ++pos_;
      return c;
    }
    c.body.push_back(atom());
    while (isPunct("/\\")) {
      ++pos_;
      c.body.push_back(atom());
    }
    return c;
  }

  ChcSystem system() {
    ChcSystem sys;
    while (!atEnd()) {
      if (isWord("pred")) {
        ++pos_;
        std::string p = ident();
        expect("(");
        std::vector<Sort> sorts;
        if (!isPunct(")")) {
          sorts.push_back(sort());
          while (isPunct(",")) {
            ++pos_;
            sorts.push_back(sort());
          }
        }
        expect(")");
        sys.sigs[p] = sorts;
      } else {
        sys.clauses.push_back(clause());
      }
    }
    return sys;
  }

  void expectEnd() {
    if (!atEnd()) fail("trailing input");
  }

private:
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;

  const Tok& cur() const { return toks_[pos_]; }
  bool isPunct(const char* p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool isWord(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }
  [[noreturn]] void fail(const std::string& what) const {
    throw ChcError("ChcSyntax", what + " near `" + cur().text + "` on line " + std::to_string(cur().line));
  }
  void expect(const char* p) {
    if (!isPunct(p)) fail(std::string("expected ") + p);
    ++pos_;
  }
  std::string ident() {
    if (cur().kind != Tok::Ident) fail("expected identifier");
    return toks_[pos_++].text;
  }

  Sort prod() {
    Sort s = unarySort();
    while (isPunct("*")) {
      ++pos_;
      s = tyProd(s, unarySort());
    }
    return s;
  }

  Sort unarySort() {
    if (isPunct("(")) {
      ++pos_;
      Sort s = sort();
      expect(")");
      return s;
    }
    std::string w = ident();
    if (w == "box") return sBox(unarySort());
    if (w == "mut") return sMut(unarySort());
    if (w == "int") return tyInt();
    if (w == "unit") return tyUnit();
    if (w == "bool") return tyBool();
    return tyVar(w);
  }

  TermP additive() {
    TermP a = multiplicative();
    while (isPunct("+") || isPunct("-")) {
      OpKind op = cur().text == "+" ? OpKind::Add : OpKind::Sub;
      ++pos_;
      a = tOp(op, a, multiplicative());
    }
    return a;
  }

  TermP multiplicative() {
    TermP a = unary();
    while (isPunct("*")) {
      ++pos_;
      a = tOp(OpKind::Mul, a, unary());
    }
    return a;
  }

  TermP unary() {
    if (isPunct("*")) {
      ++pos_;
      return tDeref(unary());
    }
    if (isPunct("^")) {
      ++pos_;
      return tProph(unary());
    }
    if (isWord("inj0") || isWord("inj1")) {
      int i = cur().text == "inj1";
      ++pos_;
      return tInj(i, unary());
    }
    TermP t = primary();
    while (isPunct(".")) {
      ++pos_;
      if (cur().kind != Tok::Int) fail("expected projection index");
      t = tProj(t, static_cast<int>(toks_[pos_++].num));
    }
    return t;
  }

  TermP primary() {
    if (cur().kind == Tok::Int) return tInt(toks_[pos_++].num);
    if (isPunct("-") && toks_[pos_ + 1].kind == Tok::Int) {
      ++pos_;
      return tInt(-toks_[pos_++].num);
    }
    if (isWord("true") || isWord("false")) return tBool(toks_[pos_++].text == "true");
    if (isWord("box") && toks_[pos_ + 1].kind == Tok::Punct && toks_[pos_ + 1].text == "(") {
      ++pos_;
      expect("(");
      TermP a = term();
      expect(")");
      return tBox(a);
    }
    if (cur().kind == Tok::Ident) return tVar(toks_[pos_++].text);
    if (isPunct("(")) {
      ++pos_;
      if (isPunct(")")) {
        ++pos_;
        return tUnit();
      }
      TermP a = term();
      if (isPunct(",")) {
        ++pos_;
        TermP b = term();
        expect(")");
        return tPair(a, b);
      }
      expect(")");
      return a;
    }
    if (isPunct("<")) {
      ++pos_;
      TermP a = term(true);
      if (isPunct(",")) {
        ++pos_;
        TermP b = term(true);
        expect(">");
        return tMut(a, b);
      }
      expect(">");
      return tBox(a);
    }
    fail("expected term");
  }
};

}  // namespace

bool sortEquiv(const Sort& a, const Sort& b) {
  std::set<std::pair<std::string, std::string>> assumed;
  return equivRec(a, b, assumed);
}

std::string printSort(const Sort& s) {
  std::string o;
  printSortRec(s, 0, o);
  return o;
}

Sort parseSort(const std::string& text) {
  TextParser p(text);
  Sort s = p.sort();
  p.expectEnd();
  return s;
}

TermP parseTerm(const std::string& text) {
  TextParser p(text);
  TermP t = p.term();
  p.expectEnd();
  return t;
}

std::vector<TermP> parseTermList(const std::string& text) {
  TextParser p(text);
  std::vector<TermP> out;
  if (p.atEnd()) return out;
  out.push_back(p.term());
  while (p.skipComma()) out.push_back(p.term());
  p.expectEnd();
  return out;
}

ChcSystem parseSystem(const std::string& text) { return TextParser(text).system(); }

ChcSystem loadSystem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ChcError("Io", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseSystem(ss.str());
}

std::string printAtom(const Atom& a) {
  std::string o = a.pred + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) o += ", ";
    o += printTerm(a.args[i]);
  }
  return o + ")";
}

std::string printClause(const Clause& c) {
  std::string o;
  if (!c.binders.empty()) {
    o += "forall";
    for (const auto& [x, s] : c.binders) o += " (" + x + ": " + printSort(s) + ")";
    o += ". ";
  }
  o += c.head ? printAtom(*c.head) : "false";
  o += " <= ";
  if (c.body.empty()) return o + "true";
  for (std::size_t i = 0; i < c.body.size(); ++i) {
    if (i) o += " /\\ ";
    o += printAtom(c.body[i]);
  }
  return o;
}

std::string printSystem(const ChcSystem& sys) {
  std::string o;
  for (const auto& [p, sorts] : sys.sigs) {
    o += "pred " + p + "(";
    for (std::size_t i = 0; i < sorts.size(); ++i) {
      if (i) o += ", ";
      o += printSort(sorts[i]);
    }
    o += ")\n";
  }
  for (const auto& c : sys.clauses) o += printClause(c) + "\n";
  return o;
}

// ---------------- sort system and semantics ----------------

Sort sortOfTerm(const SortContext& delta, const TermP& t) {
  auto bad = [&](const std::string& why) -> Sort {
    throw ChcError("IllSorted", why + " in `" + printTerm(t) + "`");
  };
  switch (t->kind) {
    case TermKind::Var: {
      auto it = delta.find(t->name);
      if (it == delta.end()) return bad("unbound variable " + t->name);
      return it->second;
    }
    case TermKind::Int: return tyInt();
    case TermKind::Unit: return tyUnit();
    case TermKind::Box: return sBox(sortOfTerm(delta, t->a));
    case TermKind::Mut: {
      Sort s = sortOfTerm(delta, t->a);
      checkSort(delta, t->b, s);
      return sMut(s);
    }
    case TermKind::Pair: return tyProd(sortOfTerm(delta, t->a), sortOfTerm(delta, t->b));
    case TermKind::Deref: {
      Sort s = unfoldTop(sortOfTerm(delta, t->a));
      if (s->kind != TypeKind::Ptr) return bad("dereference of a non-pointer");
      return s->a;
    }
    case TermKind::Proph: {
      Sort s = unfoldTop(sortOfTerm(delta, t->a));
      if (!isMutSort(s)) return bad("prophecy of a non-mut term");
      return s->a;
    }
    case TermKind::Proj: {
      Sort s = unfoldTop(sortOfTerm(delta, t->a));
      if (s->kind != TypeKind::Prod) return bad("projection from a non-product");
      return t->index == 0 ? s->a : s->b;
    }
    case TermKind::Op:
      checkSort(delta, t->a, tyInt());
      checkSort(delta, t->b, tyInt());
      return opIsBool(t->op) ? tyBool() : tyInt();
    case TermKind::Inj: return bad("injection needs an expected sort");
    case TermKind::Abs: return bad("abstract variable");
  }
  return bad("unknown term");
}

void checkSort(const SortContext& delta, const TermP& t, const Sort& s) {
  Sort u = unfoldTop(s);
  auto bad = [&]() {
    throw ChcError("IllSorted", "`" + printTerm(t) + "` does not have sort " + printSort(s));
  };
  switch (t->kind) {
    case TermKind::Inj:
      if (u->kind != TypeKind::Sum) bad();
      checkSort(delta, t->a, t->index == 0 ? u->a : u->b);
      return;
    case TermKind::Pair:
      if (u->kind != TypeKind::Prod) bad();
      checkSort(delta, t->a, u->a);
      checkSort(delta, t->b, u->b);
      return;
    case TermKind::Box:
      if (!isBoxSort(u)) bad();
      checkSort(delta, t->a, u->a);
      return;
    case TermKind::Mut:
      if (!isMutSort(u)) bad();
      checkSort(delta, t->a, u->a);
      checkSort(delta, t->b, u->a);
      return;
    default:
      if (!sortEquiv(sortOfTerm(delta, t), s)) bad();
  }
}

TermP interpretTerm(const std::map<std::string, TermP>& val, const TermP& t) {
  auto undef = [&]() -> TermP { throw ChcError("Undefined", "cannot interpret `" + printTerm(t) + "`"); };
  switch (t->kind) {
    case TermKind::Var: {
      auto it = val.find(t->name);
      return it == val.end() ? undef() : it->second;
    }
    case TermKind::Int:
    case TermKind::Unit: return t;
    case TermKind::Box: return tBox(interpretTerm(val, t->a));
    case TermKind::Mut: return tMut(interpretTerm(val, t->a), interpretTerm(val, t->b));
    case TermKind::Inj: return tInj(t->index, interpretTerm(val, t->a));
    case TermKind::Pair: return tPair(interpretTerm(val, t->a), interpretTerm(val, t->b));
    case TermKind::Deref: {
      TermP v = interpretTerm(val, t->a);
      if (v->kind != TermKind::Box && v->kind != TermKind::Mut) return undef();
      return v->a;
    }
    case TermKind::Proph: {
      TermP v = interpretTerm(val, t->a);
      if (v->kind != TermKind::Mut) return undef();
      return v->b;
    }
    case TermKind::Proj: {
      TermP v = interpretTerm(val, t->a);
      if (v->kind != TermKind::Pair) return undef();
      return t->index == 0 ? v->a : v->b;
    }
    case TermKind::Op: {
      TermP a = interpretTerm(val, t->a), b = interpretTerm(val, t->b);
      if (a->kind != TermKind::Int || b->kind != TermKind::Int) return undef();
      long long r = applyIntOp(t->op, a->num, b->num);
      return opIsBool(t->op) ? tBool(r != 0) : tInt(r);
    }
    case TermKind::Abs: return undef();
  }
  return undef();
}

void wellSortedSystem(const ChcSystem& sys) {
  for (std::size_t i = 0; i < sys.clauses.size(); ++i) {
    const Clause& c = sys.clauses[i];
    std::string where = "clause " + std::to_string(i) + " `" + printClause(c) + "`";
    SortContext delta;
    for (const auto& [x, s] : c.binders)
      if (!delta.emplace(x, s).second) throw ChcError("IllSorted", "duplicate binder " + x + " in " + where);
    auto atomOk = [&](const Atom& a, bool head) {
      auto it = sys.sigs.find(a.pred);
      if (it == sys.sigs.end()) throw ChcError("UnknownPredicate", a.pred + " in " + where);
      if (it->second.size() != a.args.size())
        throw ChcError("ArityMismatch", printAtom(a) + " in " + where);
      for (std::size_t k = 0; k < a.args.size(); ++k) {
        if (head && !isPattern(a.args[k]))
          throw ChcError("HeadNotPattern", printTerm(a.args[k]) + " in " + where);
        try {
          checkSort(delta, a.args[k], it->second[k]);
        } catch (const ChcError& e) {
          throw ChcError("IllSorted", std::string(e.what()) + " at " + printAtom(a) + " in " + where);
        }
      }
    };
    if (c.head) atomOk(*c.head, true);
    for (const auto& a : c.body) atomOk(a, false);
  }
}

std::pair<Clause, std::vector<Sort>> equalityClause(const Sort& s, const std::string& pred) {
  Clause c;
  c.binders = {{"x", s}};
  c.head = Atom{pred, {tVar("x"), tVar("x")}};
  return {c, {s, s}};
}

// ---------------- value enumeration and model checking ----------------

namespace {

void enumRec(const Sort& s, int d, const ValueBounds& b, std::vector<TermP>& out) {
  switch (s->kind) {
    case TypeKind::Mu:
      if (d > 0) enumRec(unfold(s), d - 1, b, out);
      return;
    case TypeKind::Int:
      for (long long n = b.intLo; n <= b.intHi; ++n) out.push_back(tInt(n));
      return;
    case TypeKind::Unit: out.push_back(tUnit()); return;
    case TypeKind::Ptr: {
      std::vector<TermP> xs;
      enumRec(s->a, d, b, xs);
      if (isMutSort(s)) {
        for (const auto& x : xs)
          for (const auto& y : xs) out.push_back(tMut(x, y));
      } else {
        for (const auto& x : xs) out.push_back(tBox(x));
      }
      return;
    }
    case TypeKind::Sum:
      for (int i = 0; i < 2; ++i) {
        std::vector<TermP> xs;
        enumRec(i ? s->b : s->a, d, b, xs);
        for (const auto& x : xs) out.push_back(tInj(i, x));
      }
      return;
    case TypeKind::Prod: {
      std::vector<TermP> xs, ys;
      enumRec(s->a, d, b, xs);
      enumRec(s->b, d, b, ys);
      for (const auto& x : xs)
        for (const auto& y : ys) out.push_back(tPair(x, y));
      return;
    }
    case TypeKind::Var: throw ChcError("IllSorted", "free sort variable " + s->name);
  }
}

double countRec(const Sort& s, int d, const ValueBounds& b) {
  switch (s->kind) {
    case TypeKind::Mu: return d > 0 ? countRec(unfold(s), d - 1, b) : 0;
    case TypeKind::Int: return static_cast<double>(b.intHi - b.intLo + 1);
    case TypeKind::Unit: return 1;
    case TypeKind::Ptr: {
      double n = countRec(s->a, d, b);
      return isMutSort(s) ? n * n : n;
    }
    case TypeKind::Sum: return countRec(s->a, d, b) + countRec(s->b, d, b);
    case TypeKind::Prod: return countRec(s->a, d, b) * countRec(s->b, d, b);
    case TypeKind::Var: throw ChcError("IllSorted", "free sort variable " + s->name);
  }
  return 0;
}

TermP sampleRec(const Sort& s, int d, const ValueBounds& b, std::mt19937_64& rng) {
  switch (s->kind) {
    case TypeKind::Mu: return d > 0 ? sampleRec(unfold(s), d - 1, b, rng) : nullptr;
    case TypeKind::Int: return tInt(std::uniform_int_distribution<long long>(b.intLo, b.intHi)(rng));
    case TypeKind::Unit: return tUnit();
    case TypeKind::Ptr: {
      TermP x = sampleRec(s->a, d, b, rng);
      if (!x) return nullptr;
      if (!isMutSort(s)) return tBox(x);
      TermP y = sampleRec(s->a, d, b, rng);
      return y ? tMut(x, y) : nullptr;
    }
    case TypeKind::Sum: {
      int first = static_cast<int>(rng() & 1);
      for (int k = 0; k < 2; ++k) {
        int i = first ^ k;
        if (TermP x = sampleRec(i ? s->b : s->a, d, b, rng)) return tInj(i, x);
      }
      return nullptr;
    }
    case TypeKind::Prod: {
      TermP x = sampleRec(s->a, d, b, rng);
      TermP y = x ? sampleRec(s->b, d, b, rng) : nullptr;
      return y ? tPair(x, y) : nullptr;
    }
    case TypeKind::Var: throw ChcError("IllSorted", "free sort variable " + s->name);
  }
  return nullptr;
}

bool withinRec(const TermP& v, const Sort& s, int d, const ValueBounds& b) {
  if (s->kind == TypeKind::Mu) return d > 0 && withinRec(v, unfold(s), d - 1, b);
  switch (v->kind) {
    case TermKind::Int: return v->num >= b.intLo && v->num <= b.intHi;
    case TermKind::Unit: return true;
    case TermKind::Box: return s->kind == TypeKind::Ptr && withinRec(v->a, s->a, d, b);
    case TermKind::Mut:
      return s->kind == TypeKind::Ptr && withinRec(v->a, s->a, d, b) && withinRec(v->b, s->a, d, b);
    case TermKind::Inj: return s->kind == TypeKind::Sum && withinRec(v->a, v->index ? s->b : s->a, d, b);
    case TermKind::Pair: return s->kind == TypeKind::Prod && withinRec(v->a, s->a, d, b) && withinRec(v->b, s->b, d, b);
    default: return false;
  }
}

const PredTest& modelOf(const PredStructure& m, const std::string& p) {
  auto it = m.find(p);
  if (it == m.end()) throw ChcError("ModelNotTotal", "no interpretation for " + p);
  return it->second;
}

std::vector<TermP> interpretArgs(const std::map<std::string, TermP>& val, const Atom& a) {
  std::vector<TermP> out;
  out.reserve(a.args.size());
  for (const auto& t : a.args) out.push_back(interpretTerm(val, t));
  return out;
}

}  // namespace

std::vector<TermP> enumerateValues(const Sort& s, const ValueBounds& b) {
  std::vector<TermP> out;
  enumRec(s, b.muDepth, b, out);
  return out;
}

double countValues(const Sort& s, const ValueBounds& b) { return countRec(s, b.muDepth, b); }

ModelVerdict checkModelSampled(const ChcSystem& sys, const PredStructure& m, const SampleOptions& opts) {
  ModelVerdict v;
  std::mt19937_64 rng(opts.seed);
  for (std::size_t ci = 0; ci < sys.clauses.size(); ++ci) {
    const Clause& c = sys.clauses[ci];
    // returns true on violation
    auto check = [&](const std::map<std::string, TermP>& val) {
      ++v.checked;
      for (const auto& a : c.body)
        if (!modelOf(m, a.pred)(interpretArgs(val, a))) return false;
      ++v.premises;
      if (c.head && modelOf(m, c.head->pred)(interpretArgs(val, *c.head))) return false;
      v.violated = true;
      v.clause = ci;
      v.valuation = val;
      return true;
    };
    double total = 1;
    for (const auto& [x, s] : c.binders) total *= countValues(s, opts.bounds);
    if (total <= opts.exhaustiveLimit) {
      std::vector<std::vector<TermP>> doms;
      for (const auto& [x, s] : c.binders) doms.push_back(enumerateValues(s, opts.bounds));
      if (std::any_of(doms.begin(), doms.end(), [](const auto& d) { return d.empty(); })) continue;
      std::vector<std::size_t> idx(doms.size(), 0);
      while (true) {
        std::map<std::string, TermP> val;
        for (std::size_t k = 0; k < doms.size(); ++k) val[c.binders[k].first] = doms[k][idx[k]];
        if (check(val)) return v;
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == doms[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    } else {
      v.exhaustive = false;
      for (std::size_t n = 0; n < opts.budget; ++n) {
        std::map<std::string, TermP> val;
        bool ok = true;
        for (const auto& [x, s] : c.binders) {
          TermP t = sampleRec(s, opts.bounds.muDepth, opts.bounds, rng);
          if (!t) ok = false;
          val[x] = t;
        }
        if (ok && check(val)) return v;
      }
    }
  }
  return v;
}

// ---------------- unification ----------------

namespace {

TermP walk(TermP t, const Subst& s) {
  while (t->kind == TermKind::Var) {
    auto it = s.find(t->name);
    if (it == s.end()) break;
    t = it->second;
  }
  return t;
}

bool occurs(const std::string& x, const TermP& t, const Subst& s) {
  TermP u = walk(t, s);
  if (u->kind == TermKind::Var) return u->name == x;
  return (u->a && occurs(x, u->a, s)) || (u->b && occurs(x, u->b, s));
}

bool unifyRec(const TermP& x, const TermP& y, Subst& s) {
  TermP a = walk(x, s), b = walk(y, s);
  if (a->kind == TermKind::Var && b->kind == TermKind::Var && a->name == b->name) return true;
  if (a->kind == TermKind::Var) {
    if (occurs(a->name, b, s)) return false;
    s[a->name] = b;
    return true;
  }
  if (b->kind == TermKind::Var) return unifyRec(b, a, s);
  if (a->kind != b->kind || a->index != b->index) return false;
  switch (a->kind) {
    case TermKind::Int: return a->num == b->num;
    case TermKind::Abs: return a->num == b->num;
    case TermKind::Op:
      if (a->op != b->op) return false;
      break;
    default: break;
  }
  if (a->a && !unifyRec(a->a, b->a, s)) return false;
  if (a->b && !unifyRec(a->b, b->b, s)) return false;
  return true;
}

TermP resolve(const TermP& t, const Subst& s) {
  TermP u = walk(t, s);
  if (!u->a) return u;
  Term n = *u;
  n.a = resolve(u->a, s);
  if (u->b) n.b = resolve(u->b, s);
  return std::make_shared<const Term>(std::move(n));
}

Subst resolveAll(const Subst& s) {
  Subst out;
  for (const auto& [x, t] : s) out[x] = resolve(t, s);
  return out;
}

}  // namespace

std::optional<Subst> mgu(const std::vector<TermP>& ps, const std::vector<TermP>& qs) {
  if (ps.size() != qs.size()) return std::nullopt;
  Subst s;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (!unifyRec(ps[i], qs[i], s)) return std::nullopt;
  return resolveAll(s);
}

std::optional<std::pair<Subst, Subst>> unify(const std::vector<TermP>& ps, const std::vector<TermP>& qs) {
  std::set<std::string> pv, qv;
  for (const auto& p : ps) varsOf(p, pv);
  for (const auto& q : qs) varsOf(q, qv);
  std::string suffix = "'";
  auto clashes = [&] {
    for (const auto& x : qv)
      if (pv.count(x + suffix)) return true;
    return false;
  };
  while (clashes()) suffix += "'";
  Subst ren;
  std::map<std::string, std::string> back;
  for (const auto& x : qv) {
    ren[x] = tVar(x + suffix);
    back[x + suffix] = x;
  }
  std::vector<TermP> qs2;
  for (const auto& q : qs) qs2.push_back(substVars(q, ren));
  auto s = mgu(ps, qs2);
  if (!s) return std::nullopt;
  Subst th, th2;
  for (const auto& [x, t] : *s) {
    if (pv.count(x)) th[x] = t;
    auto it = back.find(x);
    if (it != back.end()) th2[it->second] = t;
  }
  // q-side variables left free are renamed apart as well
  for (const auto& x : qv)
    if (!th2.count(x)) th2[x] = tVar(x + suffix);
  return std::make_pair(th, th2);
}

bool matchPattern(const TermP& p, const TermP& w, Subst& s) {
  if (p->kind == TermKind::Var) {
    auto it = s.find(p->name);
    if (it != s.end()) return termEq(it->second, w);
    s[p->name] = w;
    return true;
  }
  if (p->kind != w->kind || p->index != w->index) return false;
  if ((p->kind == TermKind::Int || p->kind == TermKind::Abs) && p->num != w->num) return false;
  if (p->kind == TermKind::Op && p->op != w->op) return false;
  if (p->a && !matchPattern(p->a, w->a, s)) return false;
  if (p->b && !matchPattern(p->b, w->b, s)) return false;
  return true;
}

// ---------------- SLDC resolution ----------------

std::string VarSupply::fresh(const std::string& base) {
  std::string b = base.substr(0, base.find('#'));
  if (!b.empty() && b[0] == '?') b = "v";
  if (b.empty()) b = "v";
  return b + "#" + std::to_string(next_++);
}

std::string VarSupply::dontCare() { return "?" + std::to_string(next_++); }

namespace {

template <class F>
ResolutiveConfig mapTerms(const ResolutiveConfig& k, F f) {
  ResolutiveConfig out;
  out.delta = k.delta;
  for (const auto& a : k.stack) {
    Atom b{a.pred, {}};
    for (const auto& t : a.args) b.args.push_back(f(t));
    out.stack.push_back(std::move(b));
  }
  out.result = f(k.result);
  return out;
}

TermP reduce(const TermP& t) {
  if (!t->a) return t;
  Term n = *t;
  n.a = reduce(t->a);
  if (t->b) n.b = reduce(t->b);
  const TermP& a = n.a;
  switch (t->kind) {
    case TermKind::Deref:
      if (a->kind == TermKind::Box || a->kind == TermKind::Mut) return a->a;
      break;
    case TermKind::Proph:
      if (a->kind == TermKind::Mut) return a->b;
      break;
    case TermKind::Proj:
      if (a->kind == TermKind::Pair) return t->index == 0 ? a->a : a->b;
      break;
    case TermKind::Op:
      if (a->kind == TermKind::Int && n.b->kind == TermKind::Int) {
        long long r = applyIntOp(t->op, a->num, n.b->num);
        return opIsBool(t->op) ? tBool(r != 0) : tInt(r);
      }
      break;
    default: break;
  }
  if (n.a == t->a && n.b == t->b) return t;
  return std::make_shared<const Term>(std::move(n));
}

// A variable under *, ^ or .i
const Term* stuckVar(const TermP& t) {
  if (!t->a) return nullptr;
  if ((t->kind == TermKind::Deref || t->kind == TermKind::Proph || t->kind == TermKind::Proj) &&
      t->a->kind == TermKind::Var)
    return t->a.get();
  if (const Term* x = stuckVar(t->a)) return x;
  return t->b ? stuckVar(t->b) : nullptr;
}

const Term* opVar(const TermP& t) {
  if (!t->a) return nullptr;
  if (t->kind == TermKind::Op) {
    if (t->a->kind == TermKind::Var) return t->a.get();
    if (t->b->kind == TermKind::Var) return t->b.get();
  }
  if (const Term* x = opVar(t->a)) return x;
  return t->b ? opVar(t->b) : nullptr;
}

template <class F>
const Term* findIn(const ResolutiveConfig& k, F f) {
  for (const auto& a : k.stack)
    for (const auto& t : a.args)
      if (const Term* x = f(t)) return x;
  return f(k.result);
}

ResolutiveConfig substConfig(const ResolutiveConfig& k, const Subst& s) {
  ResolutiveConfig out = mapTerms(k, [&](const TermP& t) { return substVars(t, s); });
  for (const auto& [x, t] : s) out.delta.erase(x);
  return out;
}

void calcRec(ResolutiveConfig k, VarSupply& vars, const SldcOptions& opts, std::vector<ResolutiveConfig>& out) {
  while (true) {
    k = mapTerms(k, reduce);
    if (const Term* x = findIn(k, stuckVar)) {
      std::string name = x->name;
      auto it = k.delta.find(name);
      if (it == k.delta.end()) throw ChcError("IllSorted", "unsorted variable " + name);
      Sort s = unfoldTop(it->second);
      TermP repl;
      auto mk = [&](const Sort& so) {
        std::string y = vars.fresh(name);
        k.delta[y] = so;
        return tVar(y);
      };
      if (isMutSort(s)) {
        TermP c = mk(s->a);
        repl = tMut(c, mk(s->a));
      } else if (isBoxSort(s)) {
        repl = tBox(mk(s->a));
      } else if (s->kind == TypeKind::Prod) {
        TermP c = mk(s->a);
        repl = tPair(c, mk(s->b));
      } else {
        throw ChcError("IllSorted", "cannot decompose " + name + " : " + printSort(s));
      }
      k = substConfig(k, {{name, repl}});
      continue;
    }
    if (const Term* x = findIn(k, opVar)) {
      std::string name = x->name;
      for (long long n = opts.branchLo; n <= opts.branchHi; ++n) calcRec(substConfig(k, {{name, tInt(n)}}), vars, opts, out);
      return;
    }
    break;
  }
  std::map<std::string, int> occ;
  for (const auto& a : k.stack)
    for (const auto& t : a.args) varOccurrences(t, occ);
  varOccurrences(k.result, occ);
  Subst dc;
  for (const auto& [x, n] : occ)
    if (n == 1 && !isDontCare(x)) {
      std::string y = vars.dontCare();
      k.delta[y] = k.delta.count(x) ? k.delta[x] : tyUnit();
      dc[x] = tVar(y);
    }
  if (!dc.empty()) k = substConfig(k, dc);
  // keep sorts only for variables that still occur
  std::set<std::string> live;
  for (const auto& a : k.stack)
    for (const auto& t : a.args) varsOf(t, live);
  varsOf(k.result, live);
  for (auto it = k.delta.begin(); it != k.delta.end();) it = live.count(it->first) ? std::next(it) : k.delta.erase(it);
  out.push_back(std::move(k));
}

}  // namespace

std::vector<ResolutiveConfig> sldcCalculate(const ResolutiveConfig& k, VarSupply& vars, const SldcOptions& opts) {
  std::vector<ResolutiveConfig> out;
  calcRec(k, vars, opts, out);
  return out;
}

std::vector<SldcSuccessor> sldcStep(const ChcSystem& sys, const ResolutiveConfig& k, VarSupply& vars,
                                    const SldcOptions& opts) {
  std::vector<SldcSuccessor> out;
  if (k.stack.empty()) return out;
  const Atom& top = k.stack.front();
  for (std::size_t ci = 0; ci < sys.clauses.size(); ++ci) {
    const Clause& c = sys.clauses[ci];
    if (!c.head || c.head->pred != top.pred) continue;
    Subst ren;
    SortContext delta = k.delta;
    for (const auto& [x, s] : c.binders) {
      std::string y = vars.fresh(x);
      ren[x] = tVar(y);
      delta[y] = s;
    }
    std::vector<TermP> head;
    for (const auto& t : c.head->args) head.push_back(substVars(t, ren));
    auto th = mgu(top.args, head);
    if (!th) continue;
    ResolutiveConfig pre;
    pre.delta = delta;
    for (const auto& a : c.body) {
      Atom b{a.pred, {}};
      for (const auto& t : a.args) b.args.push_back(substVars(substVars(t, ren), *th));
      pre.stack.push_back(std::move(b));
    }
    for (std::size_t j = 1; j < k.stack.size(); ++j) {
      Atom b{k.stack[j].pred, {}};
      for (const auto& t : k.stack[j].args) b.args.push_back(substVars(t, *th));
      pre.stack.push_back(std::move(b));
    }
    pre.result = substVars(k.result, *th);
    for (const auto& [x, t] : *th) pre.delta.erase(x);
    for (auto& r : sldcCalculate(pre, vars, opts)) out.push_back({std::move(r), ci});
  }
  return out;
}

ResolutiveConfig sldcInitial(const ChcSystem& sys, const std::string& f, const std::vector<TermP>& inputs) {
  auto it = sys.sigs.find(f);
  if (it == sys.sigs.end()) throw ChcError("UnknownPredicate", f);
  if (it->second.size() != inputs.size() + 1)
    throw ChcError("ArityMismatch", f + " expects " + std::to_string(it->second.size() - 1) + " inputs");
  ResolutiveConfig k;
  Atom a{f, inputs};
  a.args.push_back(tVar("r"));
  k.stack.push_back(a);
  k.result = tVar("r");
  k.delta["r"] = it->second.back();
  return k;
}

namespace {

struct Canon {
  std::map<std::string, int> occ;
  std::map<std::string, std::string> names;
  int next = 0, dc = 0;

  void count(const TermP& t) { varOccurrences(t, occ); }
  TermP rename(const TermP& t) {
    if (t->kind == TermKind::Var) {
      auto it = names.find(t->name);
      if (it == names.end())
        it = names.emplace(t->name, occ[t->name] == 1 ? "_" + std::to_string(dc++) : "v" + std::to_string(next++))
                 .first;
      return tVar(it->second);
    }
    if (!t->a) return t;
    Term n = *t;
    n.a = rename(t->a);
    if (t->b) n.b = rename(t->b);
    return std::make_shared<const Term>(std::move(n));
  }
};

std::string blankDontCares(std::string s) {
  std::string o;
  for (std::size_t i = 0; i < s.size(); ++i) {
    o += s[i];
    if (s[i] == '_' && (i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]))))
      while (i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) ++i;
  }
  return o;
}

}  // namespace

std::string printConfig(const ResolutiveConfig& k) {
  std::string o;
  for (std::size_t i = 0; i < k.stack.size(); ++i) {
    if (i) o += ", ";
    o += printAtom(k.stack[i]);
  }
  return o + " | " + printTerm(k.result);
}

std::string canonicalConfig(const ResolutiveConfig& k) {
  Canon c;
  for (const auto& a : k.stack)
    for (const auto& t : a.args) c.count(t);
  c.count(k.result);
  ResolutiveConfig r = mapTerms(k, [&](const TermP& t) { return c.rename(t); });
  return blankDontCares(printConfig(r));
}

TermP canonicalPattern(const TermP& p) {
  Canon c;
  c.count(p);
  return c.rename(p);
}

SldcResult sldcEnumerate(const ChcSystem& sys, const std::string& f, const std::vector<TermP>& inputs,
                         const SldcOptions& opts) {
  SldcResult res;
  VarSupply vars;
  std::set<std::string> seen, found;
  std::vector<ResolutiveConfig> frontier{sldcInitial(sys, f, inputs)};
  seen.insert(canonicalConfig(frontier[0]));
  for (std::size_t d = 0; d <= opts.depth && !frontier.empty(); ++d) {
    std::vector<ResolutiveConfig> next;
    for (const auto& k : frontier) {
      ++res.explored;
      if (k.stack.empty()) {
        TermP p = canonicalPattern(k.result);
        if (found.insert(blankDontCares(printTerm(p))).second) res.results.push_back(p);
        continue;
      }
      if (d == opts.depth) {
        res.budgetExceeded = true;
        continue;
      }
      for (auto& s : sldcStep(sys, k, vars, opts)) {
        if (!seen.insert(canonicalConfig(s.config)).second) continue;
        if (next.size() >= opts.width) {
          res.budgetExceeded = true;
          continue;
        }
        next.push_back(std::move(s.config));
      }
    }
    frontier = std::move(next);
  }
  return res;
}

// ---------------- bottom-up oracle ----------------

std::string tupleKey(const std::vector<TermP>& args) {
  std::string o;
  for (const auto& a : args) o += printTerm(a) + ";";
  return o;
}

bool OracleFacts::holds(const std::string& pred, const std::vector<TermP>& args) const {
  auto it = keys.find(pred);
  return it != keys.end() && it->second.count(tupleKey(args));
}

namespace {

bool isPatternShape(const TermP& t) {
  switch (t->kind) {
    case TermKind::Deref:
    case TermKind::Proph:
    case TermKind::Proj:
    case TermKind::Op:
    case TermKind::Abs: return false;
    default: return true;
  }
}

struct Pending {
  TermP term;
  TermP value;
};

// Matches a body term against a fact value; non-pattern subterms are deferred.
bool matchBody(const TermP& t, const TermP& v, Subst& s, std::vector<Pending>& pend) {
  if (!isPatternShape(t)) {
    pend.push_back({t, v});
    return true;
  }
  if (t->kind == TermKind::Var) {
    auto it = s.find(t->name);
    if (it != s.end()) return termEq(it->second, v);
    s[t->name] = v;
    return true;
  }
  if (t->kind != v->kind || t->index != v->index) return false;
  if (t->kind == TermKind::Int && t->num != v->num) return false;
  if (t->a && !matchBody(t->a, v->a, s, pend)) return false;
  if (t->b && !matchBody(t->b, v->b, s, pend)) return false;
  return true;
}

class Oracle {
public:
  Oracle(const ChcSystem& sys, const OracleOptions& opts) : sys_(sys), opts_(opts) {}

  OracleFacts run() {
    for (std::size_t round = 0; round < opts_.maxRounds; ++round) {
      out_.rounds = round + 1;
      std::vector<std::pair<std::string, std::vector<TermP>>> fresh;
      for (const auto& c : sys_.clauses) {
        if (!c.head) continue;
        if (c.body.empty()) {
          if (round == 0) derive(c, 0, round, 0, {}, {}, fresh);
          continue;
        }
        if (round == 0) continue;
        for (std::size_t j = 0; j < c.body.size(); ++j) derive(c, 0, round, j, {}, {}, fresh);
      }
      std::size_t added = 0;
      for (auto& [p, args] : fresh) added += add(p, std::move(args), round);
      if (added == 0 && round > 0) {
        out_.saturated = true;
        break;
      }
      if (factCount_ > opts_.maxFacts) break;
    }
    return std::move(out_);
  }

private:
  const ChcSystem& sys_;
  OracleOptions opts_;
  OracleFacts out_;
  std::map<std::string, std::vector<std::size_t>> rounds_;
  std::unordered_map<std::string, std::vector<std::size_t>> index_;  // pred|pos|value -> fact ids
  std::map<std::string, std::vector<TermP>> domains_;
  std::size_t factCount_ = 0;

  std::size_t add(const std::string& p, std::vector<TermP> args, std::size_t round) {
    std::string key = tupleKey(args);
    if (!out_.keys[p].insert(key).second) return 0;
    auto& tu = out_.tuples[p];
    std::size_t id = tu.size();
    for (std::size_t k = 0; k < args.size(); ++k)
      index_[p + "|" + std::to_string(k) + "|" + printTerm(args[k])].push_back(id);
    tu.push_back(std::move(args));
    rounds_[p].push_back(round);
    ++factCount_;
    return 1;
  }

  const std::vector<TermP>& domain(const Sort& s) {
    std::string k = typeKey(s);
    auto it = domains_.find(k);
    if (it == domains_.end()) it = domains_.emplace(k, enumerateValues(s, opts_.bounds)).first;
    return it->second;
  }

  // Atom i ranges over facts of round < r-1 (i < j), round r-1 (i == j), round <= r-1 (i > j).
  bool usable(std::size_t factRound, std::size_t round, std::size_t i, std::size_t j) {
    if (i < j) return factRound + 1 < round;
    if (i == j) return factRound + 1 == round;
    return factRound + 1 <= round;
  }

  void derive(const Clause& c, std::size_t i, std::size_t round, std::size_t j, Subst s, std::vector<Pending> pend,
              std::vector<std::pair<std::string, std::vector<TermP>>>& fresh) {
    if (i == c.body.size()) {
      finish(c, 0, s, pend, fresh);
      return;
    }
    const Atom& a = c.body[i];
    auto tu = out_.tuples.find(a.pred);
    if (tu == out_.tuples.end()) return;
    const auto& facts = tu->second;
    const auto& rds = rounds_[a.pred];
    // look for an argument already determined by the bindings
    const std::vector<std::size_t>* cand = nullptr;
    for (std::size_t k = 0; k < a.args.size() && !cand; ++k) {
      std::set<std::string> fv;
      varsOf(a.args[k], fv);
      bool bound = std::all_of(fv.begin(), fv.end(), [&](const std::string& x) { return s.count(x) > 0; });
      if (!bound) continue;
      TermP v;
      try {
        v = interpretTerm(s, a.args[k]);
      } catch (const ChcError&) {
        return;
      }
      auto it = index_.find(a.pred + "|" + std::to_string(k) + "|" + printTerm(v));
      if (it == index_.end()) return;
      cand = &it->second;
    }
    auto tryFact = [&](std::size_t id) {
      if (!usable(rds[id], round, i, j)) return;
      Subst s2 = s;
      std::vector<Pending> p2 = pend;
      for (std::size_t k = 0; k < a.args.size(); ++k)
        if (!matchBody(a.args[k], facts[id][k], s2, p2)) return;
      derive(c, i + 1, round, j, std::move(s2), std::move(p2), fresh);
    };
    if (cand) {
      std::vector<std::size_t> ids = *cand;
      for (std::size_t id : ids) tryFact(id);
    } else {
      for (std::size_t id = 0, n = facts.size(); id < n; ++id) tryFact(id);
    }
  }

  // Enumerates binders left unbound, then checks deferred terms and emits the head.
  void finish(const Clause& c, std::size_t b, Subst& s, const std::vector<Pending>& pend,
              std::vector<std::pair<std::string, std::vector<TermP>>>& fresh) {
    while (b < c.binders.size() && s.count(c.binders[b].first)) ++b;
    if (b < c.binders.size()) {
      for (const auto& v : domain(c.binders[b].second)) {
        s[c.binders[b].first] = v;
        finish(c, b + 1, s, pend, fresh);
      }
      s.erase(c.binders[b].first);
      return;
    }
    for (const auto& p : pend) {
      try {
        if (!termEq(interpretTerm(s, p.term), p.value)) return;
      } catch (const ChcError&) {
        return;
      }
    }
    std::vector<TermP> args = interpretArgs(s, *c.head);
    const auto& sig = sys_.sigs.at(c.head->pred);
    for (std::size_t k = 0; k < args.size(); ++k)
      if (!withinRec(args[k], sig[k], opts_.bounds.muDepth, opts_.bounds)) return;
    fresh.emplace_back(c.head->pred, std::move(args));
  }
};

}  // namespace

OracleFacts bottomUpOracle(const ChcSystem& sys, const OracleOptions& opts) { return Oracle(sys, opts).run(); }

}  // namespace corhorn
