#pragma once

#include <memory>
#include <string>

#include "gradl/elaborate.hpp"
#include "gradl/parser.hpp"
#include "gradl/printer.hpp"
#include "gradl/runtime.hpp"

namespace gradl {

struct PipelineOpts {
  CastRep cast_rep = CastRep::Coercions;
  RefRep ref_rep = RefRep::Monotonic;
  bool lazy_coercions = false;
  bool specialize = false;
  bool optimize_dyn = false;

  EvalMode eval_mode() const { return EvalMode{cast_rep, ref_rep, lazy_coercions}; }
};

// A compiled program owns its type table; evaluators borrow both.
struct Compiled {
  TypeTable types;
  Program ast;
  IrProgram ir;
};

// parse -> typecheck -> insert_casts -> optional optimize_dyn/specialize.
// Throws CompileError.
std::unique_ptr<Compiled> compile_text(const std::string& text,
                                       const std::string& file,
                                       const PipelineOpts& opts);

Outcome run_compiled(Compiled& c, const PipelineOpts& opts, EvalLimits limits = {});

Outcome run_text(const std::string& text, const std::string& file,
                 const PipelineOpts& opts, EvalLimits limits = {});

// Outcome plus its printed form (the heap is gone once the evaluator is).
struct RunResult {
  Outcome outcome;
  std::string printed;
};

RunResult run_text_printed(const std::string& text, const std::string& file,
                           const PipelineOpts& opts, EvalLimits limits = {});

}  // namespace gradl
