#include "corhorn/parser.hpp"

#include <cctype>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "corhorn/error.hpp"

namespace corhorn {

namespace {

enum class Tok { Ident, Int, Lft, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  long long num = 0;
  int line = 1, col = 1;
};

const std::set<std::string> kKeywords = {
    "let", "drop", "immut", "swap", "intro", "now", "as", "copy", "rand", "inj0", "inj1",
    "mutbor", "return", "match", "goto", "fn", "type", "own", "mut", "mu", "int", "unit", "bool"};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto isId = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    Token t{Tok::Punct, "", 0, line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && isId(src[j])) ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      adv(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = src.substr(i, j - i);
      try {
        t.num = std::stoll(t.text);
      } catch (const std::exception&) {
        throw ParseError("SyntaxError", "integer literal out of range", line, col);
      }
      adv(j - i);
    } else if (c == '\'') {
      std::size_t j = i + 1;
      if (j >= src.size() || !(std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        throw ParseError("SyntaxError", "malformed lifetime", line, col);
      while (j < src.size() && isId(src[j])) ++j;
      t.kind = Tok::Lft;
      t.text = src.substr(i + 1, j - i - 1);
      adv(j - i);
    } else {
      static const char* two[] = {"<=", ">=", "==", "!=", "=>", "->"};
      std::string s;
      for (const char* p : two)
        if (src.compare(i, 2, p) == 0) s = p;
      if (s.empty()) {
        if (std::string("{}()<>,;:=*+-.|").find(c) == std::string::npos) {
          if (c == '!') throw ParseError("SyntaxError", "'!' is reserved", line, col);
          throw ParseError("SyntaxError", std::string("unexpected character '") + c + "'", line, col);
        }
        s = std::string(1, c);
      }
      t.text = s;
      adv(s.size());
    }
    out.push_back(t);
  }
  out.push_back(Token{Tok::End, "<eof>", 0, line, col});
  return out;
}

class Parser {
public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  Program program() {
    Program p;
    while (!atEnd()) {
      if (isKw("type")) {
        typeDecl();
        continue;
      }
      FunctionDef f = function();
      if (p.fnIndex.count(f.name))
        fail("DuplicateFunction", "function " + f.name + " defined twice", fnTok_);
      p.fnIndex[f.name] = p.fns.size();
      p.fns.push_back(std::move(f));
    }
    return p;
  }

  TypeP typeOnly() {
    TypeP t = type();
    if (!atEnd()) fail("SyntaxError", "trailing input after type", cur());
    return t;
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, TypeP> aliases_;
  Token fnTok_{};

  const Token& cur() const { return toks_[pos_]; }
  bool atEnd() const { return cur().kind == Tok::End; }
  [[noreturn]] void fail(const std::string& code, const std::string& msg, const Token& t) const {
    throw ParseError(code, msg, t.line, t.col);
  }
  bool isP(const char* p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool isKw(const char* k) const { return cur().kind == Tok::Ident && cur().text == k; }
  bool peekP(std::size_t k, const char* p) const {
    const Token& t = toks_[std::min(pos_ + k, toks_.size() - 1)];
    return t.kind == Tok::Punct && t.text == p;
  }
  void expectP(const char* p) {
    if (!isP(p)) fail("SyntaxError", std::string("expected '") + p + "', found '" + cur().text + "'", cur());
    ++pos_;
  }
  void expectKw(const char* k) {
    if (!isKw(k)) fail("SyntaxError", std::string("expected '") + k + "', found '" + cur().text + "'", cur());
    ++pos_;
  }
  std::string ident() {
    if (cur().kind != Tok::Ident || kKeywords.count(cur().text))
      fail("SyntaxError", "expected identifier, found '" + cur().text + "'", cur());
    return toks_[pos_++].text;
  }
  std::string lifetime() {
    if (cur().kind != Tok::Lft) fail("SyntaxError", "expected lifetime, found '" + cur().text + "'", cur());
    return toks_[pos_++].text;
  }

  void typeDecl() {
    expectKw("type");
    std::string n = ident();
    expectP("=");
    TypeP t = type();
    expectP(";");
    aliases_[n] = t;
  }

  // type := sum ; sum := prod ('+' prod)* ; prod := prefix ('*' prefix)*
  TypeP type() {
    TypeP t = prod();
    while (isP("+")) {
      ++pos_;
      t = tySum(t, prod());
    }
    return t;
  }
  TypeP prod() {
    TypeP t = prefix();
    while (isP("*")) {
      ++pos_;
      t = tyProd(t, prefix());
    }
    return t;
  }
  TypeP prefix() {
    if (isKw("own")) {
      ++pos_;
      return tyOwn(prefix());
    }
    if (isKw("mut") || isKw("immut")) {
      bool m = isKw("mut");
      ++pos_;
      expectP("<");
      std::string l = lifetime();
      expectP(">");
      TypeP t = prefix();
      return m ? tyMut(l, t) : tyImmut(l, t);
    }
    if (isKw("mu")) {
      ++pos_;
      std::string x = ident();
      expectP(".");
      return tyMu(x, type());
    }
    if (isKw("int")) return ++pos_, tyInt();
    if (isKw("unit")) return ++pos_, tyUnit();
    if (isKw("bool")) return ++pos_, tyBool();
    if (isP("(")) {
      ++pos_;
      TypeP t = type();
      expectP(")");
      return t;
    }
    std::string n = ident();
    if (auto it = aliases_.find(n); it != aliases_.end()) return it->second;
    return tyVar(n);
  }

  FunctionDef function() {
    fnTok_ = cur();
    expectKw("fn");
    FunctionDef f;
    f.name = ident();
    if (isP("<")) {
      ++pos_;
      while (cur().kind == Tok::Lft) {
        f.lftParams.push_back(lifetime());
        if (!isP(",")) break;
        ++pos_;
      }
      if (isP("|")) {
        ++pos_;
        while (cur().kind == Tok::Lft) {
          std::string a = lifetime();
          expectP("<=");
          std::string b = lifetime();
          f.constraints.push_back({a, b});
          if (!isP(",")) break;
          ++pos_;
        }
      }
      expectP(">");
    }
    expectP("(");
    std::set<std::string> seen;
    while (!isP(")")) {
      Token pt = cur();
      std::string x = ident();
      expectP(":");
      TypeP t = type();
      if (!seen.insert(x).second) fail("DuplicateVariable", "parameter " + x + " repeated", pt);
      if (!isPointer(t) || !isComplete(t))
        fail("BadSignature", "parameter " + x + " must have a complete pointer type", pt);
      f.params.push_back({x, t});
      if (!isP(",")) break;
      ++pos_;
    }
    expectP(")");
    expectP("->");
    Token rt = cur();
    f.ret = type();
    if (!isPointer(f.ret) || !isComplete(f.ret))
      fail("BadSignature", "return type must be a complete pointer type", rt);
    std::set<std::string> lp(f.lftParams.begin(), f.lftParams.end());
    for (const auto& c : f.constraints)
      if (!lp.count(c.a) || !lp.count(c.b))
        fail("BadSignature", "constraint on undeclared lifetime", rt);
    expectP("{");
    std::map<std::string, Token> labelTok;
    while (!isP("}")) {
      Token lt = cur();
      std::string l = ident();
      expectP(":");
      Stmt s = statement();
      if (f.labelIndex.count(l)) fail("DuplicateLabel", "label " + l + " defined twice in " + f.name, lt);
      f.labelIndex[l] = f.body.size();
      f.body.push_back({l, std::move(s)});
      labelTok[l] = lt;
    }
    expectP("}");
    validate(f, labelTok);
    return f;
  }

  void validate(const FunctionDef& f, std::map<std::string, Token>& labelTok) {
    if (!f.hasLabel("entry")) fail("MissingEntry", "function " + f.name + " has no entry label", fnTok_);
    for (const auto& [l, s] : f.body)
      for (const auto& t : successors(s))
        if (!f.hasLabel(t)) fail("UndefinedLabel", "goto undefined label " + t, labelTok[l]);
    std::set<std::string> reach{"entry"};
    std::deque<std::string> q{"entry"};
    while (!q.empty()) {
      std::string l = q.front();
      q.pop_front();
      for (const auto& t : successors(f.at(l)))
        if (reach.insert(t).second) q.push_back(t);
    }
    for (const auto& [l, s] : f.body)
      if (!reach.count(l)) fail("UnreachableLabel", "label " + l + " is unreachable from entry", labelTok[l]);
  }

  Stmt statement() {
    Stmt s;
    if (isKw("return")) {
      ++pos_;
      s.kind = StmtKind::Return;
      s.x = ident();
      expectP(";");
      return s;
    }
    if (isKw("match")) {
      ++pos_;
      s.kind = StmtKind::Match;
      expectP("*");
      s.x = ident();
      expectP("{");
      for (int k = 0; k < 2; ++k) {
        Token at = cur();
        if (isKw("inj0")) s.arms[k].inj = 0;
        else if (isKw("inj1")) s.arms[k].inj = 1;
        else fail("SyntaxError", "expected inj0 or inj1", cur());
        ++pos_;
        expectP("*");
        s.arms[k].y = ident();
        expectP("=>");
        expectKw("goto");
        s.arms[k].label = ident();
        if (k == 0) expectP(",");
        if (k == 1 && s.arms[0].inj == s.arms[1].inj) fail("SyntaxError", "duplicate match arm", at);
      }
      if (isP(",")) ++pos_;
      expectP("}");
      if (isP(";")) ++pos_;
      return s;
    }
    s.kind = StmtKind::Goto;
    Token it = cur();
    s.instr = instruction();
    expectP(";");
    expectKw("goto");
    s.target = ident();
    expectP(";");
    return s;
  }

  std::string starIdent() {
    expectP("*");
    return ident();
  }

  Instr instruction() {
    Instr i{};
    Token t0 = cur();
    if (cur().kind == Tok::Lft) {
      i.kind = InstrKind::LftLeq;
      i.lft = lifetime();
      expectP("<=");
      i.lft1 = lifetime();
      return i;
    }
    if (isKw("drop") || isKw("immut")) {
      i.kind = isKw("drop") ? InstrKind::Drop : InstrKind::Immut;
      ++pos_;
      i.x = ident();
      return i;
    }
    if (isKw("swap")) {
      ++pos_;
      i.kind = InstrKind::Swap;
      expectP("(");
      i.x = starIdent();
      expectP(",");
      i.x1 = starIdent();
      expectP(")");
      if (i.x == i.x1) fail("SyntaxError", "swap operands must differ", t0);
      return i;
    }
    if (isKw("intro") || isKw("now")) {
      i.kind = isKw("intro") ? InstrKind::Intro : InstrKind::Now;
      ++pos_;
      i.lft = lifetime();
      return i;
    }
    if (isKw("let")) {
      ++pos_;
      if (isP("(")) {
        ++pos_;
        i.kind = InstrKind::Destruct;
        i.y = starIdent();
        expectP(",");
        i.y1 = starIdent();
        expectP(")");
        expectP("=");
        i.x = starIdent();
        if (i.y == i.y1) fail("SyntaxError", "left-hand variables must be distinct", t0);
        return i;
      }
      if (isP("*")) {
        ++pos_;
        i.y = ident();
        expectP("=");
        letStar(i);
        return i;
      }
      i.y = ident();
      expectP("=");
      if (isKw("mutbor")) {
        ++pos_;
        i.kind = InstrKind::MutBor;
        i.lft = lifetime();
        i.x = ident();
        return i;
      }
      if (isP("*")) {
        ++pos_;
        i.kind = InstrKind::Deref;
        i.x = ident();
        return i;
      }
      i.kind = InstrKind::Call;
      i.fn = ident();
      if (isP("<")) {
        ++pos_;
        while (cur().kind == Tok::Lft) {
          i.lfts.push_back(lifetime());
          if (!isP(",")) break;
          ++pos_;
        }
        expectP(">");
      }
      expectP("(");
      while (!isP(")")) {
        i.args.push_back(ident());
        if (!isP(",")) break;
        ++pos_;
      }
      expectP(")");
      return i;
    }
    // x as T
    i.x = ident();
    expectKw("as");
    i.kind = InstrKind::As;
    i.type = type();
    return i;
  }

  void letStar(Instr& i) {
    if (isKw("copy")) {
      ++pos_;
      i.kind = InstrKind::Copy;
      i.x = starIdent();
      return;
    }
    if (isKw("rand")) {
      ++pos_;
      expectP("(");
      expectP(")");
      i.kind = InstrKind::Rand;
      return;
    }
    if (isKw("inj0") || isKw("inj1")) {
      i.kind = InstrKind::Inj;
      i.index = isKw("inj1") ? 1 : 0;
      ++pos_;
      expectP("<");
      Token tt = cur();
      i.type = type();
      if (i.type->kind != TypeKind::Sum) fail("SyntaxError", "injection needs a sum type", tt);
      expectP(">");
      i.x = starIdent();
      return;
    }
    if (cur().kind == Tok::Int || isP("-")) {
      bool neg = isP("-");
      if (neg) ++pos_;
      if (cur().kind != Tok::Int) fail("SyntaxError", "expected integer literal", cur());
      i.kind = InstrKind::Const;
      i.num = neg ? -cur().num : cur().num;
      ++pos_;
      return;
    }
    if (isP("(")) {
      ++pos_;
      if (isP(")")) {
        ++pos_;
        i.kind = InstrKind::Const;
        i.unitConst = true;
        return;
      }
      i.kind = InstrKind::Pair;
      i.x = starIdent();
      expectP(",");
      i.x1 = starIdent();
      expectP(")");
      return;
    }
    if (isP("*")) {
      ++pos_;
      i.kind = InstrKind::BinOp;
      i.x = ident();
      static const std::map<std::string, OpKind> ops = {
          {"+", OpKind::Add}, {"-", OpKind::Sub}, {"*", OpKind::Mul}, {">=", OpKind::Ge},
          {"==", OpKind::Eq}, {"!=", OpKind::Ne}, {"<", OpKind::Lt},  {"<=", OpKind::Le},
          {">", OpKind::Gt}};
      auto it = ops.find(cur().text);
      if (cur().kind != Tok::Punct || it == ops.end()) fail("SyntaxError", "expected operator", cur());
      i.op = it->second;
      ++pos_;
      i.x1 = starIdent();
      return;
    }
    i.kind = InstrKind::MakePtr;
    i.x = ident();
  }
};

std::string lftList(const std::vector<std::string>& ls) {
  std::string s;
  for (std::size_t k = 0; k < ls.size(); ++k) s += (k ? ", '" : "'") + ls[k];
  return s;
}

}  // namespace

Program parseProgram(const std::string& source) { return Parser(source).program(); }

TypeP parseType(const std::string& source) { return Parser(source).typeOnly(); }

std::string printInstr(const Instr& i) {
  switch (i.kind) {
    case InstrKind::MutBor: return "let " + i.y + " = mutbor '" + i.lft + " " + i.x;
    case InstrKind::Drop: return "drop " + i.x;
    case InstrKind::Immut: return "immut " + i.x;
    case InstrKind::Swap: return "swap(*" + i.x + ", *" + i.x1 + ")";
    case InstrKind::MakePtr: return "let *" + i.y + " = " + i.x;
    case InstrKind::Deref: return "let " + i.y + " = *" + i.x;
    case InstrKind::Copy: return "let *" + i.y + " = copy *" + i.x;
    case InstrKind::As: return i.x + " as " + printType(i.type);
    case InstrKind::Call: {
      std::string s = "let " + i.y + " = " + i.fn;
      if (!i.lfts.empty()) s += "<" + lftList(i.lfts) + ">";
      s += "(";
      for (std::size_t k = 0; k < i.args.size(); ++k) s += (k ? ", " : "") + i.args[k];
      return s + ")";
    }
    case InstrKind::Intro: return "intro '" + i.lft;
    case InstrKind::Now: return "now '" + i.lft;
    case InstrKind::LftLeq: return "'" + i.lft + " <= '" + i.lft1;
    case InstrKind::Const:
      return "let *" + i.y + " = " + (i.unitConst ? std::string("()") : std::to_string(i.num));
    case InstrKind::BinOp: return "let *" + i.y + " = *" + i.x + " " + opText(i.op) + " *" + i.x1;
    case InstrKind::Rand: return "let *" + i.y + " = rand()";
    case InstrKind::Inj:
      return "let *" + i.y + " = inj" + std::to_string(i.index) + "<" + printType(i.type) + "> *" + i.x;
    case InstrKind::Pair: return "let *" + i.y + " = (*" + i.x + ", *" + i.x1 + ")";
    case InstrKind::Destruct: return "let (*" + i.y + ", *" + i.y1 + ") = *" + i.x;
  }
  return "?";
}

std::string printStmt(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Goto: return printInstr(s.instr) + "; goto " + s.target + ";";
    case StmtKind::Return: return "return " + s.x + ";";
    case StmtKind::Match: {
      std::string r = "match *" + s.x + " { ";
      for (int k = 0; k < 2; ++k)
        r += (k ? ", inj" : "inj") + std::to_string(s.arms[k].inj) + " *" + s.arms[k].y + " => goto " +
             s.arms[k].label;
      return r + " }";
    }
  }
  return "?";
}

std::string prettyPrint(const Program& p) {
  std::ostringstream o;
  for (std::size_t k = 0; k < p.fns.size(); ++k) {
    const auto& f = p.fns[k];
    if (k) o << "\n";
    o << "fn " << f.name;
    if (!f.lftParams.empty() || !f.constraints.empty()) {
      o << "<" << lftList(f.lftParams);
      if (!f.constraints.empty()) {
        o << " | ";
        for (std::size_t c = 0; c < f.constraints.size(); ++c)
          o << (c ? ", '" : "'") << f.constraints[c].a << " <= '" << f.constraints[c].b;
      }
      o << ">";
    }
    o << "(";
    for (std::size_t j = 0; j < f.params.size(); ++j)
      o << (j ? ", " : "") << f.params[j].first << ": " << printType(f.params[j].second);
    o << ") -> " << printType(f.ret) << " {\n";
    for (const auto& [l, s] : f.body) o << "  " << l << ": " << printStmt(s) << "\n";
    o << "}\n";
  }
  return o.str();
}

Program loadProgram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileNotFound", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseProgram(ss.str());
}

}  // namespace corhorn
