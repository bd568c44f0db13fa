#pragma once

#include "gradl/ast.hpp"
#include "gradl/coercion.hpp"
#include "gradl/types.hpp"

namespace gradl {

// Standard gradually-typed lambda calculus rules: implicit conversions are
// allowed exactly between consistent types, applications at Dyn are allowed,
// and if joins its branch types with the meet. Annotates every node (and
// every define) with its TypeId in place. Throws CompileError on the first
// inconsistency, carrying the span and the two offending types.
void typecheck(TypeTable& types, Program& program, RefRep ref_rep);

}  // namespace gradl
