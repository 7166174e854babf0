#pragma once

#include <string>

#include "corhorn/ast.hpp"

namespace corhorn {

Program parseProgram(const std::string& source);
TypeP parseType(const std::string& source);

std::string prettyPrint(const Program& p);
std::string printInstr(const Instr& i);
std::string printStmt(const Stmt& s);

Program loadProgram(const std::string& path);

}  // namespace corhorn
