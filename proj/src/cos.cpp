#include "corhorn/cos.hpp"

#include <algorithm>
#include <set>

#include "corhorn/error.hpp"

namespace corhorn {

Addr Allocator::alloc(const Heap& h, std::size_t n) {
  if (policy == AllocPolicy::Bump) {
    Addr a = next;
    next += static_cast<Addr>(n);
    return a;
  }
  for (Addr a = 100;; ++a) {
    bool free = true;
    for (std::size_t k = 0; k < n && free; ++k) free = !h.count(a + static_cast<Addr>(k));
    if (free) return a;
  }
}

namespace {

struct Stuck : Error {
  explicit Stuck(const std::string& m) : Error("Stuck", m) {}
};

long long cell(const Heap& h, Addr a) {
  auto it = h.find(a);
  if (it == h.end()) throw Stuck("read of unallocated cell " + std::to_string(a));
  return it->second;
}

void freeCells(Heap& h, Addr a, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (!h.erase(a + static_cast<Addr>(k))) throw Stuck("free of unallocated cell " + std::to_string(a + k));
  }
}

std::vector<long long> readCells(const Heap& h, Addr a, std::size_t n) {
  std::vector<long long> v;
  for (std::size_t k = 0; k < n; ++k) v.push_back(cell(h, a + static_cast<Addr>(k)));
  return v;
}

void writeCells(Heap& h, Addr a, const std::vector<long long>& v) {
  for (std::size_t k = 0; k < v.size(); ++k) h[a + static_cast<Addr>(k)] = v[k];
}

void readRec(const Heap& h, Addr a, const TypeP& t, TermP& out, Footprint& m) {
  switch (t->kind) {
    case TypeKind::Mu: readRec(h, a, unfoldTop(t), out, m); return;
    case TypeKind::Int:
      out = tInt(cell(h, a));
      m.push_back(a);
      return;
    case TypeKind::Unit: out = tUnit(); return;
    case TypeKind::Ptr: {
      if (t->ptr != PtrKind::Own) throw Error("ReadoutFailure", "reference inside a value at " + std::to_string(a));
      TermP v;
      readRec(h, cell(h, a), t->a, v, m);
      m.push_back(a);
      out = tBox(v);
      return;
    }
    case TypeKind::Sum: {
      long long tag = cell(h, a);
      if (tag != 0 && tag != 1) throw Error("BadTag", "tag " + std::to_string(tag) + " at " + std::to_string(a));
      TypeP ti = tag ? t->b : t->a;
      std::size_t total = sizeOf(t), ni = sizeOf(ti);
      m.push_back(a);
      for (std::size_t k = 1 + ni; k < total; ++k) {
        if (cell(h, a + static_cast<Addr>(k)) != 0)
          throw Error("NonzeroPadding", "padding cell " + std::to_string(a + k) + " is not zero");
        m.push_back(a + static_cast<Addr>(k));
      }
      TermP v;
      readRec(h, a + 1, ti, v, m);
      out = tInj(static_cast<int>(tag), v);
      return;
    }
    case TypeKind::Prod: {
      TermP v0, v1;
      readRec(h, a, t->a, v0, m);
      readRec(h, a + static_cast<Addr>(sizeOf(t->a)), t->b, v1, m);
      out = tPair(v0, v1);
      return;
    }
    case TypeKind::Var: throw Error("IncompleteType", "unguarded variable in readout");
  }
}

void writeRec(Heap& h, Addr a, const TypeP& t, const TermP& v, Allocator& alloc) {
  auto bad = [&]() {
    throw Error("SortMismatch", "value " + printTerm(v) + " does not fit type " + printType(t));
  };
  switch (t->kind) {
    case TypeKind::Mu: writeRec(h, a, unfoldTop(t), v, alloc); return;
    case TypeKind::Int:
      if (v->kind != TermKind::Int) bad();
      h[a] = v->num;
      return;
    case TypeKind::Unit:
      if (v->kind != TermKind::Unit) bad();
      return;
    case TypeKind::Ptr: {
      if (t->ptr != PtrKind::Own || v->kind != TermKind::Box) bad();
      h[a] = writeValue(h, t->a, v->a, alloc);
      return;
    }
    case TypeKind::Sum: {
      if (v->kind != TermKind::Inj) bad();
      TypeP ti = v->index ? t->b : t->a;
      std::size_t total = sizeOf(t), ni = sizeOf(ti);
      h[a] = v->index;
      for (std::size_t k = 1 + ni; k < total; ++k) h[a + static_cast<Addr>(k)] = 0;
      writeRec(h, a + 1, ti, v->a, alloc);
      return;
    }
    case TypeKind::Prod:
      if (v->kind != TermKind::Pair) bad();
      writeRec(h, a, t->a, v->a, alloc);
      writeRec(h, a + static_cast<Addr>(sizeOf(t->a)), t->b, v->b, alloc);
      return;
    case TypeKind::Var: bad();
  }
}

}  // namespace

Addr writeValue(Heap& h, const TypeP& t, const TermP& v, Allocator& alloc) {
  std::size_t n = sizeOf(t);
  Addr a = alloc.alloc(h, n);
  // reserve the block before nested allocations
  for (std::size_t k = 0; k < n; ++k) h[a + static_cast<Addr>(k)] = 0;
  writeRec(h, a, t, v, alloc);
  return a;
}

std::pair<TermP, Footprint> readout(const Heap& h, Addr a, const TypeP& t) {
  TermP v;
  Footprint m;
  readRec(h, a, t, v, m);
  return {v, m};
}

std::map<std::string, TermP> safeReadoutFrame(const Heap& h, const ConcreteFrame& frame,
                                              const VarContext& gamma) {
  std::map<std::string, TermP> out;
  std::multiset<Addr> all;
  for (const auto& [x, it] : gamma) {
    if (it.type->ptr != PtrKind::Own) throw Error("ReadoutFailure", x + " is not an owning pointer");
    auto f = frame.vars.find(x);
    if (f == frame.vars.end()) throw Error("ReadoutFailure", x + " missing from frame");
    auto [v, m] = readout(h, f->second, it.type->a);
    for (Addr a : m) {
      if (all.count(a)) throw Error("UnsafeReadout", "cell " + std::to_string(a) + " read twice");
      all.insert(a);
    }
    out[x] = tBox(v);
  }
  return out;
}

CosStepResult cosStep(const Program& prog, const TypingResult& typing, const ConcreteConfig& c,
                      RandSource& rng, Allocator& alloc, CosMutation mutation) {
  CosStepResult r;
  if (c.stack.empty()) {
    r.kind = StepKind::Stuck;
    r.reason = "empty stack";
    return r;
  }
  try {
    ConcreteConfig n = c;
    Heap& h = n.heap;
    ConcreteFrame& top = n.stack.back();
    const int frameIdx = static_cast<int>(n.stack.size()) - 1;
    const FunctionDef& fd = prog.fn(top.fn);
    const Stmt& s = fd.at(top.label);
    auto ty = [&](const std::string& x) { return typing.var(top.fn, top.label, x).type; };
    auto addr = [&](const std::string& x) {
      auto it = top.vars.find(x);
      if (it == top.vars.end()) throw Stuck("variable " + x + " not in frame");
      return it->second;
    };
    if (s.kind == StmtKind::Return) {
      if (n.stack.size() == 1) {
        r.kind = StepKind::Final;
        r.next = c;
        return r;
      }
      Addr v = addr(s.x);
      n.stack.pop_back();
      ConcreteFrame& caller = n.stack.back();
      caller.vars[caller.receiver] = v;
      caller.receiver.clear();
      r.next = std::move(n);
      return r;
    }
    if (s.kind == StmtKind::Match) {
      TypeP t = ty(s.x);
      TypeP sum = unfoldTop(t->a);
      Addr a = addr(s.x);
      long long tag = cell(h, a);
      if (tag != 0 && tag != 1) throw Stuck("bad tag " + std::to_string(tag));
      const MatchArm& arm = s.arm(static_cast<int>(tag));
      if (t->ptr == PtrKind::Own) {
        std::size_t total = sizeOf(sum), ni = sizeOf(tag ? sum->b : sum->a);
        h.erase(a);
        for (std::size_t k = 1 + ni; k < total; ++k) h.erase(a + static_cast<Addr>(k));
      }
      top.vars.erase(s.x);
      top.vars[arm.y] = a + 1;
      top.label = arm.label;
      r.next = std::move(n);
      return r;
    }
    const Instr& i = s.instr;
    switch (i.kind) {
      case InstrKind::MutBor: top.vars[i.y] = addr(i.x); break;
      case InstrKind::Drop: {
        TypeP t = ty(i.x);
        if (t->ptr == PtrKind::Own && mutation != CosMutation::DropKeepsCells)
          freeCells(h, addr(i.x), sizeOf(t->a));
        top.vars.erase(i.x);
        break;
      }
      case InstrKind::Immut:
      case InstrKind::As: break;
      case InstrKind::Swap: {
        std::size_t k = sizeOf(ty(i.x)->a);
        Addr a = addr(i.x), b = addr(i.x1);
        auto va = readCells(h, a, k), vb = readCells(h, b, k);
        if (mutation != CosMutation::SwapNoExchange) {
          writeCells(h, a, vb);
          writeCells(h, b, va);
        }
        break;
      }
      case InstrKind::MakePtr: {
        Addr target = addr(i.x);
        Addr a = alloc.alloc(h, 1);
        h[a] = target;
        top.vars.erase(i.x);
        top.vars[i.y] = a;
        break;
      }
      case InstrKind::Deref: {
        TypeP t = ty(i.x);
        Addr a = addr(i.x);
        Addr target = cell(h, a);
        if (t->ptr == PtrKind::Own) h.erase(a);
        top.vars.erase(i.x);
        top.vars[i.y] = target;
        break;
      }
      case InstrKind::Copy: {
        std::size_t k = sizeOf(ty(i.x)->a);
        auto v = readCells(h, addr(i.x), k);
        Addr b = alloc.alloc(h, k);
        writeCells(h, b, v);
        top.vars[i.y] = b;
        break;
      }
      case InstrKind::Call: {
        const FunctionDef& g = prog.fn(i.fn);
        ConcreteFrame callee;
        callee.fn = g.name;
        callee.label = "entry";
        for (std::size_t k = 0; k < i.args.size(); ++k) callee.vars[g.params[k].first] = addr(i.args[k]);
        callee.theta = ghostCall(g, i, top.theta);
        for (const auto& x : i.args) top.vars.erase(x);
        top.receiver = i.y;
        top.label = s.target;
        n.stack.push_back(std::move(callee));
        r.next = std::move(n);
        return r;
      }
      case InstrKind::Intro: ghostIntro(n.ghost, top.theta, i.lft, frameIdx); break;
      case InstrKind::Now: ghostNow(n.ghost, top.theta, i.lft, frameIdx); break;
      case InstrKind::LftLeq: ghostLe(n.ghost, top.theta, i.lft, i.lft1); break;
      case InstrKind::Const: {
        Addr a = alloc.alloc(h, i.unitConst ? 0 : 1);
        if (!i.unitConst) h[a] = i.num;
        top.vars[i.y] = a;
        break;
      }
      case InstrKind::BinOp: {
        long long v = applyIntOp(i.op, cell(h, addr(i.x)), cell(h, addr(i.x1)));
        Addr a = alloc.alloc(h, 1);
        h[a] = v;
        top.vars[i.y] = a;
        break;
      }
      case InstrKind::Rand: {
        long long v = rng.next();
        r.draw = v;
        Addr a = alloc.alloc(h, 1);
        h[a] = v;
        top.vars[i.y] = a;
        break;
      }
      case InstrKind::Inj: {
        TypeP ti = i.index ? i.type->b : i.type->a;
        std::size_t ni = sizeOf(ti), total = sizeOf(i.type);
        Addr a = addr(i.x);
        auto payload = readCells(h, a, ni);
        freeCells(h, a, ni);
        Addr b = alloc.alloc(h, total);
        h[b] = i.index;
        writeCells(h, b + 1, payload);
        for (std::size_t k = 1 + ni; k < total; ++k) h[b + static_cast<Addr>(k)] = 0;
        top.vars.erase(i.x);
        top.vars[i.y] = b;
        break;
      }
      case InstrKind::Pair: {
        std::size_t n0 = sizeOf(ty(i.x)->a), n1 = sizeOf(ty(i.x1)->a);
        Addr a0 = addr(i.x), a1 = addr(i.x1);
        auto v0 = readCells(h, a0, n0), v1 = readCells(h, a1, n1);
        freeCells(h, a0, n0);
        freeCells(h, a1, n1);
        Addr b = alloc.alloc(h, n0 + n1);
        writeCells(h, b, v0);
        writeCells(h, b + static_cast<Addr>(n0), v1);
        top.vars.erase(i.x);
        top.vars.erase(i.x1);
        top.vars[i.y] = b;
        break;
      }
      case InstrKind::Destruct: {
        TypeP prod = unfoldTop(ty(i.x)->a);
        Addr a = addr(i.x);
        top.vars.erase(i.x);
        top.vars[i.y] = a;
        top.vars[i.y1] = a + static_cast<Addr>(sizeOf(prod->a));
        break;
      }
    }
    top.label = s.target;
    r.next = std::move(n);
    return r;
  } catch (const Error& e) {
    r.kind = StepKind::Stuck;
    r.reason = e.what();
    return r;
  }
}

ConcreteConfig cosInitial(const Program& prog, const std::string& f, const std::vector<TermP>& inputs,
                          Allocator& alloc) {
  const FunctionDef& fd = prog.fn(f);
  if (!fd.isSimple()) throw Error("NotSimple", f + " has lifetime parameters");
  if (inputs.size() != fd.params.size()) throw Error("ArityMismatch", "wrong number of inputs for " + f);
  ConcreteConfig c;
  ConcreteFrame fr;
  fr.fn = f;
  fr.label = "entry";
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const TypeP& t = fd.params[k].second;
    if (t->ptr != PtrKind::Own || inputs[k]->kind != TermKind::Box)
      throw Error("SortMismatch", "input " + printTerm(inputs[k]) + " for " + fd.params[k].first);
    fr.vars[fd.params[k].first] = writeValue(c.heap, t->a, inputs[k]->a, alloc);
  }
  c.stack.push_back(std::move(fr));
  return c;
}

CosRunResult cosRun(const Program& prog, const TypingResult& typing, const std::string& f,
                    const std::vector<TermP>& inputs, const CosRunOptions& opts) {
  CosRunResult res;
  Allocator alloc;
  alloc.policy = opts.policy;
  RandSource rng(opts.seed, opts.randLo, opts.randHi);
  ConcreteConfig c = cosInitial(prog, f, inputs, alloc);
  if (opts.keepTrace) res.trace.push_back(c);
  for (;;) {
    if (res.steps >= opts.fuel) {
      res.status = RunStatus::OutOfFuel;
      return res;
    }
    CosStepResult st = cosStep(prog, typing, c, rng, alloc);
    if (st.kind == StepKind::Stuck) {
      res.status = RunStatus::Stuck;
      res.reason = st.reason;
      return res;
    }
    if (st.kind == StepKind::Final) break;
    ++res.steps;
    if (st.draw) res.draws.push_back(*st.draw);
    c = std::move(st.next);
    if (opts.keepTrace) res.trace.push_back(c);
  }
  const ConcreteFrame& top = c.stack.back();
  const Stmt& s = prog.fn(top.fn).at(top.label);
  TypeP t = typing.var(top.fn, top.label, s.x).type;
  try {
    auto [v, m] = readout(c.heap, top.vars.at(s.x), t->a);
    std::set<Addr> fp(m.begin(), m.end());
    if (fp.size() != m.size()) throw Error("UnsafeReadout", "result footprint has duplicates");
    std::set<Addr> dom;
    for (const auto& [a, _] : c.heap) dom.insert(a);
    res.leakFree = dom == fp;
    res.value = tBox(v);
    res.status = RunStatus::Returned;
  } catch (const Error& e) {
    res.status = RunStatus::Stuck;
    res.reason = e.what();
  }
  return res;
}

nlohmann::json configToJson(const ConcreteConfig& c) {
  nlohmann::json st = nlohmann::json::array();
  for (auto it = c.stack.rbegin(); it != c.stack.rend(); ++it) {
    nlohmann::json fr = {{"fn", it->fn}, {"label", it->label}, {"vars", it->vars}};
    if (!it->receiver.empty()) fr["receiver"] = it->receiver;
    st.push_back(fr);
  }
  nlohmann::json h = nlohmann::json::object();
  for (const auto& [a, v] : c.heap) h[std::to_string(a)] = v;
  return {{"stack", st}, {"heap", h}};
}

}  // namespace corhorn
