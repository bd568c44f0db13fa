#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gradl/coercion.hpp"
#include "gradl/counters.hpp"
#include "gradl/ir.hpp"
#include "gradl/types.hpp"

namespace gradl {

struct Boxed;
struct Frame;

enum class ValueKind : uint8_t {
  Unit, Bool, Int, Float,
  Addr,      // heap address (plain or monotonic cell)
  Tuple,
  Closure,
  FunProxy,  // function that has been cast
  RefProxy,  // proxied reference or vector that has been cast
};

// Runtime value. Injection into Dyn sets the dyn flag and records the
// payload's runtime type; the payload itself is never Dyn, and immediates
// stay unboxed, so injection and projection allocate nothing.
struct Value {
  ValueKind kind = ValueKind::Unit;
  bool dyn = false;
  TypeId dyn_type{};
  union {
    bool b;
    int64_t i;
    double f;
    uint32_t addr;
  } s{};
  std::shared_ptr<const Boxed> box;

  static Value unit() { return Value{}; }
  static Value boolean(bool b) {
    Value v;
    v.kind = ValueKind::Bool;
    v.s.b = b;
    return v;
  }
  static Value integer(int64_t i) {
    Value v;
    v.kind = ValueKind::Int;
    v.s.i = i;
    return v;
  }
  static Value real(double f) {
    Value v;
    v.kind = ValueKind::Float;
    v.s.f = f;
    return v;
  }
  static Value address(uint32_t a) {
    Value v;
    v.kind = ValueKind::Addr;
    v.s.addr = a;
    return v;
  }
  static Value boxed(ValueKind k, std::shared_ptr<const Boxed> b) {
    Value v;
    v.kind = k;
    v.box = std::move(b);
    return v;
  }
};

struct TupleData {
  std::vector<Value> elems;
};

struct ClosureData {
  const IrNode* lambda;  // IrKind::Lambda
  std::shared_ptr<Frame> env;
};

// Type-based proxy payload: the source and target of the cast that built the
// proxy. For function proxies these are whole Fun types; for reference
// proxies the referred-to element types.
struct TbPayload {
  TypeId src{}, tgt{};
  std::string label;
};

struct FunProxyData {
  Value fn;  // bare closure in coercion mode; may itself be a proxy in type-based mode
  std::optional<TbPayload> tb;
  Coercion co;  // Fun coercion, coercion mode
  uint32_t depth = 1;
};

struct RefProxyData {
  Value ref;  // bare address in coercion mode; may nest in type-based mode
  std::optional<TbPayload> tb;
  Coercion co;  // RefProxy coercion, coercion mode
  uint32_t depth = 1;
  bool vect = false;
};

struct Boxed {
  std::variant<TupleData, ClosureData, FunProxyData, RefProxyData> v;
};

inline const TupleData& as_tuple(const Value& v) { return std::get<TupleData>(v.box->v); }
inline const ClosureData& as_closure(const Value& v) { return std::get<ClosureData>(v.box->v); }
inline const FunProxyData& as_fun_proxy(const Value& v) { return std::get<FunProxyData>(v.box->v); }
inline const RefProxyData& as_ref_proxy(const Value& v) { return std::get<RefProxyData>(v.box->v); }

struct Frame {
  std::shared_ptr<Frame> parent;
  std::vector<Value> slots;
};

// A scheduled heap cast: the stored value still has to be converted to track
// an rtti update. In coercion mode the pending coercion composes when more
// casts stack up; in type-based mode the requests queue in order. expect is
// the rtti written when the cast was (last) scheduled; the evolve step
// commits only if the cell's rtti still matches it.
struct PendingTb {
  TypeId src{}, tgt{};
  std::string label;
};

struct Pending {
  Coercion co;
  std::vector<PendingTb> chain;
  TypeId expect{};
};

struct HeapCell {
  bool mono = false;
  bool vect = false;
  std::vector<Value> slots;
  TypeId rtti{};  // monotonic cells only: the element type
  std::unique_ptr<Pending> pending;
};

struct RttiEvent {
  uint32_t addr;
  TypeId from, to;
};

class Heap {
 public:
  uint32_t alloc_plain(std::vector<Value> slots, bool vect) {
    HeapCell c;
    c.vect = vect;
    c.slots = std::move(slots);
    cells_.push_back(std::move(c));
    return static_cast<uint32_t>(cells_.size() - 1);
  }
  uint32_t alloc_mono(std::vector<Value> slots, TypeId rtti, bool vect) {
    HeapCell c;
    c.mono = true;
    c.vect = vect;
    c.slots = std::move(slots);
    c.rtti = rtti;
    cells_.push_back(std::move(c));
    return static_cast<uint32_t>(cells_.size() - 1);
  }
  HeapCell& cell(uint32_t a) { return cells_.at(a); }
  const HeapCell& cell(uint32_t a) const { return cells_.at(a); }
  size_t size() const { return cells_.size(); }

  std::deque<uint32_t> worklist;

  // Test instrumentation: record every rtti overwrite.
  bool trace_rtti = false;
  std::vector<RttiEvent> rtti_events;

 private:
  std::deque<HeapCell> cells_;
};

struct Outcome {
  enum class Kind : uint8_t { Result, Blame, DynError };
  Kind kind = Kind::Result;
  Value value;
  std::string label;    // Blame
  std::string message;  // DynError
  Counters counters;
};

}  // namespace gradl
