#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gradl/types.hpp"

namespace gradl {

struct Span {
  uint32_t line = 0;
  uint32_t col = 0;
};

struct CompileError {
  Span span;
  std::string message;
};

enum class PrimOp : uint8_t {
  AddI, SubI, MulI, DivI, ModI,
  AddF, SubF, MulF, DivF,
  Eq, Lt, Gt, Le, Ge,
  Not,
};

inline bool prim_is_cmp(PrimOp p) {
  return p == PrimOp::Eq || p == PrimOp::Lt || p == PrimOp::Gt ||
         p == PrimOp::Le || p == PrimOp::Ge;
}

enum class AstKind : uint8_t {
  IntLit, FloatLit, BoolLit, UnitLit, Var,
  Lambda,     // params, optional ret_anno, kids[0] = body
  App,        // kids[0] = operator, kids[1..] = operands
  Let,        // binds, kids[0] = body
  If,         // kids = cond, then, else
  Prim,       // prim, kids = operands
  TupleMake,  // kids = elements (arity >= 2)
  TupleProj,  // kids[0] = tuple, proj_index
  Ascribe,    // kids[0] = expr, anno
  RefMake, RefRead, RefWrite,
  VectMake,   // kids = {count, init}
  VectRead,   // kids = {vect, index}
  VectWrite,  // kids = {vect, index, value}
  VectLen,
  Begin,      // kids = exprs (>= 1)
  While,      // kids = {cond, body}
};

struct AstNode;
using AstPtr = std::shared_ptr<AstNode>;

struct Param {
  std::string name;
  std::optional<TypeId> anno;  // missing annotation means Dyn
  Span span;
};

struct Binding {
  std::string name;
  std::optional<TypeId> anno;
  AstPtr init;
  Span span;
};

struct AstNode {
  AstKind kind{};
  Span span{};
  std::vector<AstPtr> kids;

  int64_t ival = 0;
  double fval = 0;
  bool bval = false;
  std::string name;  // Var
  PrimOp prim{};
  int proj_index = 0;
  std::optional<TypeId> anno;      // Ascribe
  std::vector<Param> params;       // Lambda
  std::optional<TypeId> ret_anno;  // Lambda
  std::vector<Binding> binds;      // Let

  TypeId type{};  // filled in by the typechecker
};

// Top-level definition. Function defines are recursive (in scope inside every
// define body); an unannotated return type means Dyn, so recursion through an
// unannotated function stays dynamically typed.
struct Define {
  bool is_fun = false;
  std::string name;
  std::vector<Param> params;
  std::optional<TypeId> ret_anno;
  AstPtr body;  // function body, or the initializer of a value define
  Span span;
  TypeId type{};
};

struct Program {
  std::string file;
  std::vector<Define> defines;
  std::vector<AstPtr> exprs;  // the last one is the program result
};

AstPtr clone_ast(const AstPtr& n);
Program clone_program(const Program& p);

inline std::string blame_label(const std::string& file, Span s, const char* tag) {
  return file + ":" + std::to_string(s.line) + ":" + std::to_string(s.col) +
         ":" + tag;
}

}  // namespace gradl
