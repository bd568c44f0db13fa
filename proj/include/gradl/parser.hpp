#pragma once

#include <string>
#include <vector>

#include "gradl/ast.hpp"
#include "gradl/coercion.hpp"
#include "gradl/types.hpp"

namespace gradl {

// S-expression reader, shared by the program parser and by tests that want to
// compare printed outputs structurally.
struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> list;
  Span span;
};

std::vector<SExpr> read_sexprs(const std::string& text);

// Parses a whole source file. The ref mode resolves the single surface
// constructors (Ref T) and (Vect T) to their proxied or monotonic internal
// types; a program is compiled wholly in one mode. Throws CompileError.
Program parse_program(TypeTable& types, const std::string& text,
                      const std::string& file, RefRep ref_rep);

TypeId parse_type(TypeTable& types, const SExpr& s, RefRep ref_rep);

}  // namespace gradl
