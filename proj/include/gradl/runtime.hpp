#pragma once

#include <stdexcept>

#include "gradl/value.hpp"

namespace gradl {

enum class CastRep : uint8_t { TypeBased, Coercions };

struct EvalMode {
  CastRep cast_rep = CastRep::Coercions;
  RefRep ref_rep = RefRep::Monotonic;
  bool lazy_coercions = false;
};

struct EvalLimits {
  uint64_t max_eval_depth = 1'000'000;
  uint64_t max_evolve_steps = 100'000'000;
  size_t stack_bytes = 1ull << 30;
};

// Raised for resource exhaustion and similar implementation limits; clearly
// distinguished from program outcomes (blame, dynamic errors).
struct EvalLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BlameSignal {
  std::string label;
};
struct DynErrorSignal {
  std::string message;
};

// One evaluator instance per program run; strictly single threaded. Between
// program steps the evolving-heap worklist is drained, so a settled heap is
// all an expression can observe.
class Evaluator {
 public:
  Evaluator(TypeTable& types, const IrProgram& prog, EvalMode mode,
            EvalLimits limits = {});

  // Runs the program on a dedicated big-stack thread.
  Outcome run();
  // Runs on the calling thread (unit tests, shallow programs).
  Outcome run_here();

  // Cast machinery, also exposed to tests. These settle the heap before
  // returning; blame and dynamic errors propagate as signals.
  Value apply_cast(Value v, TypeId src, TypeId tgt, const std::string& label);
  Value apply_coercion(Value v, const Coercion& c);
  Value ref_read(const Value& r);
  Value ref_write(const Value& r, Value v);
  Value vect_read(const Value& r, int64_t idx);
  Value vect_write(const Value& r, int64_t idx, Value v);
  int64_t vect_len(const Value& r);
  uint32_t mono_cast_address(uint32_t addr, TypeId target, const std::string& label);
  Value mono_read(uint32_t addr, size_t slot = 0);
  Value mono_read_typed(uint32_t addr, TypeId expect, const std::string& label,
                        size_t slot = 0);
  void mono_write(uint32_t addr, Value v, size_t slot = 0);
  void mono_write_typed(uint32_t addr, Value v, TypeId stated,
                        const std::string& label, size_t slot = 0);
  // One state-reduction step on the evolving heap; true if a pending cast was
  // applied (more work may remain), false if nothing was pending.
  bool heap_evolve_step();
  // Schedules without draining; unit tests drive heap_evolve_step directly.
  void schedule_mono_cast(uint32_t addr, TypeId target, const std::string& label);
  void settle_heap();

  Value apply_closure(const Value& f, std::vector<Value> args);

  // Building blocks for tests that construct heaps by hand.
  Value make_closure(const IrNode* lambda, std::shared_ptr<Frame> env);

  Heap& heap() { return heap_; }
  Counters& counters() { return counters_; }
  TypeTable& types() { return types_; }
  EvalMode mode() const { return mode_; }

 private:
  Value eval(const IrNode& n, const std::shared_ptr<Frame>& env);
  Value cast_value(const Value& v, TypeId src, TypeId tgt, const std::string& label);
  Value coerce_value(const Value& v, const Coercion& c);
  Value fun_coerce(const Value& v, const Coercion& c);
  Value ref_coerce(const Value& v, const Coercion& c);
  Value make_fun_proxy_tb(const Value& v, TypeId src, TypeId tgt, const std::string& label);
  Value make_ref_proxy_tb(const Value& v, TypeId selem, TypeId telem,
                          const std::string& label, bool vect);
  Value inject(Value v, TypeId rt);
  Value unwrap(Value v);
  Value cast_or_coerce(const Value& v, TypeId src, TypeId tgt,
                       const std::string& label, bool force_type_path);
  Value read_through(const Value& r, int64_t idx, Span span);
  void write_through(const Value& r, int64_t idx, Value v, Span span);
  Value dyn_ref_read(const Value& v, const std::string& label, int64_t idx,
                     bool vect, Span span);
  void dyn_ref_write(const Value& r, Value v, const std::string& label,
                     int64_t idx, bool vect, Span span);
  void bounds_check(const HeapCell& c, int64_t idx, Span span);
  [[noreturn]] void position_error(const char* what, Span span);
  void note_fun_proxy_depth(uint32_t d);
  void note_ref_proxy_depth(uint32_t d);

  TypeTable& types_;
  const IrProgram& prog_;
  EvalMode mode_;
  EvalLimits limits_;
  Heap heap_;
  Counters counters_;
  std::shared_ptr<Frame> globals_;
  uint64_t depth_ = 0;
  uint64_t evolve_steps_total_ = 0;
  bool ran_ = false;
};

}  // namespace gradl
