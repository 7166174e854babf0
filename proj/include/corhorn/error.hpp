#pragma once

#include <stdexcept>
#include <string>

namespace corhorn {

// Base of every error raised by the library. `code` is a stable identifier.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

class ParseError : public Error {
public:
  ParseError(std::string code, const std::string& msg, int line, int col)
      : Error(std::move(code), msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line(line), col(col) {}
  int line, col;
};

class TypeError : public Error {
public:
  TypeError(std::string code, const std::string& msg, std::string fn = {},
            std::string label = {}, std::string instr = {})
      : Error(std::move(code), msg + where(fn, label, instr)),
        fn(std::move(fn)), label(std::move(label)), instr(std::move(instr)) {}
  std::string fn, label, instr;

private:
  static std::string where(const std::string& f, const std::string& l, const std::string& i) {
    if (f.empty()) return {};
    std::string s = " [" + f;
    if (!l.empty()) s += ":" + l;
    if (!i.empty()) s += " `" + i + "`";
    return s + "]";
  }
};

}  // namespace corhorn
