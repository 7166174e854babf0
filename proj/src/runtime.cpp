#include "corhorn/runtime.hpp"

#include "corhorn/error.hpp"

namespace corhorn {

std::string tagLifetime(const std::string& a, int frame) { return a + "@" + std::to_string(frame); }

int tagFrame(const std::string& tagged) {
  auto p = tagged.rfind('@');
  if (p == std::string::npos) throw Error("Internal", "untagged lifetime " + tagged);
  return std::stoi(tagged.substr(p + 1));
}

void ghostIntro(LifetimeContext& global, Theta& theta, const std::string& a, int frame) {
  std::string t = tagLifetime(a, frame);
  std::vector<std::string> lower;
  for (const auto& c : global.carrier)
    if (tagFrame(c) < frame) lower.push_back(c);
  global.add(t);
  for (const auto& c : lower) global.order.insert({t, c});
  global.close();
  theta[a] = t;
}

void ghostNow(LifetimeContext& global, Theta& theta, const std::string& a, int frame) {
  auto it = theta.find(a);
  if (it == theta.end()) throw Error("Stuck", "now of unmapped lifetime '" + a);
  if (tagFrame(it->second) != frame) throw Error("Stuck", "now of a lifetime owned by another frame");
  global.remove(it->second);
  theta.erase(it);
}

void ghostLe(LifetimeContext& global, const Theta& theta, const std::string& a, const std::string& b) {
  global.relate(theta.at(a), theta.at(b));
}

Theta ghostCall(const FunctionDef& callee, const Instr& call, const Theta& theta) {
  Theta t;
  for (std::size_t j = 0; j < callee.lftParams.size(); ++j) t[callee.lftParams[j]] = theta.at(call.lfts[j]);
  return t;
}

TypeP applyTheta(const TypeP& t, const Theta& theta) { return renameLifetimes(t, theta); }

const char* runStatusName(RunStatus s) {
  switch (s) {
    case RunStatus::Returned: return "Returned";
    case RunStatus::OutOfFuel: return "OutOfFuel";
    case RunStatus::Stuck: return "Stuck";
  }
  return "?";
}

}  // namespace corhorn
