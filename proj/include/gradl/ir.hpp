#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gradl/ast.hpp"
#include "gradl/coercion.hpp"
#include "gradl/types.hpp"

namespace gradl {

// Explicitly cast intermediate form. Every implicit conversion of the surface
// program is a Cast node, and reference operations are lowered to the forms
// of the selected reference semantics: proxied make/read/write, or monotonic
// make plus static (fully static element type) and typed (carrying a TypeId)
// reads and writes.
//
// The *Dyn forms are the inline check-and-use nodes produced by the
// dynamic-code optimization: they perform what a proxy would do without
// allocating one. InlineProject/InlineInject and ApplyCoercionConst are
// produced by cast specialization.
enum class IrKind : uint8_t {
  IntLit, FloatLit, BoolLit, UnitLit,
  LocalRef,   // hops, index
  GlobalRef,  // index
  Lambda,     // kids[0] = body; arity; type is the Fun type
  App,        // kids[0] = fn, rest = args
  AppDyn,     // fn at Dyn applied directly; label
  Let,        // kids[0..n-1] = inits, kids[n] = body; arity = n
  If, Begin, While,
  Prim,        // prim; operands already cast to the operand type
  PrimCmpDyn,  // comparison dispatching on runtime types; label
  TupleMake,
  TupleProj,     // index
  TupleProjDyn,  // index, label
  Cast,                // kids[0]; src, tgt, label
  ApplyCoercionConst,  // kids[0]; coercion from the constant pool
  InlineProject,       // kids[0]; tgt is a base type; label
  InlineInject,        // kids[0]; src is the recorded runtime type
  RefMake, RefRead, RefWrite,
  VectMake, VectRead, VectWrite, VectLen,
  RefReadDyn, RefWriteDyn, VectReadDyn, VectWriteDyn, VectLenDyn,  // label
  MonoRefMake,        // tgt = element rtti
  MonoRead,           // fully static element type
  MonoReadTyped,      // tgt = expected type; label
  MonoWrite,
  MonoWriteTyped,     // src = stated type; label
  MonoVectMake,       // kids = {count, init}; tgt = element rtti
  MonoVectRead, MonoVectReadTyped, MonoVectWrite, MonoVectWriteTyped,
  MonoVectLen,
};

struct IrNode;
using IrPtr = std::shared_ptr<const IrNode>;

struct IrNode {
  IrKind kind{};
  TypeId type{};  // static type of this expression
  Span span{};
  std::vector<IrPtr> kids;

  int64_t ival = 0;
  double fval = 0;
  bool bval = false;
  uint32_t hops = 0;
  uint32_t index = 0;
  uint32_t arity = 0;
  PrimOp prim{};
  TypeId src{}, tgt{};
  std::string label;
  Coercion coercion;
  std::string name;  // debug: lambda / global name
};

struct IrDefine {
  std::string name;
  TypeId type{};
  IrPtr init;
};

struct IrProgram {
  std::string file;
  RefRep ref_rep = RefRep::Monotonic;
  std::vector<IrDefine> defines;
  std::vector<IrPtr> exprs;
  // Compile-time-known coercions, deduplicated; allocated once per program.
  std::vector<Coercion> coercion_pool;
};

size_t count_ir_nodes(const IrProgram& p, IrKind kind);

}  // namespace gradl
