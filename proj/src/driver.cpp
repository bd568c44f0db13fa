#include "gradl/driver.hpp"

namespace gradl {

std::unique_ptr<Compiled> compile_text(const std::string& text,
                                       const std::string& file,
                                       const PipelineOpts& opts) {
  auto c = std::make_unique<Compiled>();
  c->ast = parse_program(c->types, text, file, opts.ref_rep);
  typecheck(c->types, c->ast, opts.ref_rep);
  c->ir = insert_casts(c->types, c->ast, opts.ref_rep);
  if (opts.optimize_dyn) c->ir = optimize_dyn(c->types, std::move(c->ir));
  if (opts.specialize && opts.cast_rep == CastRep::Coercions)
    c->ir = specialize_casts(c->types, std::move(c->ir));
  return c;
}

Outcome run_compiled(Compiled& c, const PipelineOpts& opts, EvalLimits limits) {
  Evaluator ev(c.types, c.ir, opts.eval_mode(), limits);
  return ev.run();
}

Outcome run_text(const std::string& text, const std::string& file,
                 const PipelineOpts& opts, EvalLimits limits) {
  auto c = compile_text(text, file, opts);
  return run_compiled(*c, opts, limits);
}

RunResult run_text_printed(const std::string& text, const std::string& file,
                           const PipelineOpts& opts, EvalLimits limits) {
  auto c = compile_text(text, file, opts);
  Evaluator ev(c->types, c->ir, opts.eval_mode(), limits);
  Outcome o = ev.run();
  return RunResult{o, show_outcome(c->types, ev.heap(), o)};
}

}  // namespace gradl
