#pragma once

#include "gradl/ir.hpp"
#include "gradl/typecheck.hpp"

namespace gradl {

// Reifies every implicit conversion of the typechecked program as an explicit
// Cast node and lowers reference operations for the chosen reference
// representation. Blame labels are file:line:column:tag strings minted from
// source spans; identical inputs produce identical labels.
IrProgram insert_casts(TypeTable& types, const Program& program, RefRep ref_rep);

// Rewrites cast-then-immediately-eliminate patterns over Dyn (applying a
// value cast to an all-Dyn function type and calling it at once; reading or
// writing through a reference or vector cast to its all-Dyn type) into inline
// check-and-use nodes. Outcomes and blame are unchanged; proxy allocations
// never increase.
IrProgram optimize_dyn(TypeTable& types, IrProgram program);

// Partially evaluates casts whose source and target are compile-time known
// (coercion representation only): identity casts vanish, Dyn-to-base
// projections and injections become inline tag checks, everything else
// applies an interned constant coercion. Runtime coercion construction
// remains only where a type is known solely at runtime.
IrProgram specialize_casts(TypeTable& types, IrProgram program);

}  // namespace gradl
