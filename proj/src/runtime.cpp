#include "gradl/runtime.hpp"

#include <pthread.h>

#include <cassert>
#include <cstring>
#include <functional>
#include <limits>

namespace gradl {

namespace {

struct DepthGuard {
  uint64_t& d;
  explicit DepthGuard(uint64_t& depth, uint64_t cap) : d(depth) {
    if (++d > cap) throw EvalLimitError("evaluation depth limit exceeded");
  }
  ~DepthGuard() { --d; }
};

int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

}  // namespace

Evaluator::Evaluator(TypeTable& types, const IrProgram& prog, EvalMode mode,
                     EvalLimits limits)
    : types_(types), prog_(prog), mode_(mode), limits_(limits) {
  globals_ = std::make_shared<Frame>();
  globals_->slots.resize(prog.defines.size());
}

[[noreturn]] void Evaluator::position_error(const char* what, Span span) {
  throw DynErrorSignal{std::string(what) + " at " + prog_.file + ":" +
                       std::to_string(span.line) + ":" + std::to_string(span.col)};
}

void Evaluator::bounds_check(const HeapCell& c, int64_t idx, Span span) {
  if (idx < 0 || static_cast<size_t>(idx) >= c.slots.size())
    position_error("index out of range", span);
}

Value Evaluator::inject(Value v, TypeId rt) {
  assert(!v.dyn && rt != kDyn);
  v.dyn = true;
  v.dyn_type = rt;
  return v;
}

Value Evaluator::unwrap(Value v) {
  assert(v.dyn);
  v.dyn = false;
  v.dyn_type = TypeId{};
  return v;
}

void Evaluator::note_fun_proxy_depth(uint32_t d) {
  if (d > counters_.max_fun_proxy_depth) counters_.max_fun_proxy_depth = d;
}

void Evaluator::note_ref_proxy_depth(uint32_t d) {
  if (d > counters_.max_ref_proxy_depth) counters_.max_ref_proxy_depth = d;
}

Value Evaluator::make_closure(const IrNode* lambda, std::shared_ptr<Frame> env) {
  auto b = std::make_shared<Boxed>();
  b->v = ClosureData{lambda, std::move(env)};
  return Value::boxed(ValueKind::Closure, std::move(b));
}

Value Evaluator::make_fun_proxy_tb(const Value& v, TypeId src, TypeId tgt,
                                   const std::string& label) {
  uint32_t d = v.kind == ValueKind::FunProxy ? as_fun_proxy(v).depth + 1 : 1;
  counters_.proxies_allocated++;
  note_fun_proxy_depth(d);
  auto b = std::make_shared<Boxed>();
  b->v = FunProxyData{v, TbPayload{src, tgt, label}, Coercion(), d};
  return Value::boxed(ValueKind::FunProxy, std::move(b));
}

Value Evaluator::make_ref_proxy_tb(const Value& v, TypeId selem, TypeId telem,
                                   const std::string& label, bool vect) {
  uint32_t d = v.kind == ValueKind::RefProxy ? as_ref_proxy(v).depth + 1 : 1;
  counters_.proxies_allocated++;
  note_ref_proxy_depth(d);
  auto b = std::make_shared<Boxed>();
  b->v = RefProxyData{v, TbPayload{selem, telem, label}, Coercion(), d, vect};
  return Value::boxed(ValueKind::RefProxy, std::move(b));
}

Value Evaluator::fun_coerce(const Value& v, const Coercion& c) {
  assert(c.kind() == CoercionKind::Fun);
  auto b = std::make_shared<Boxed>();
  if (v.kind == ValueKind::Closure) {
    b->v = FunProxyData{v, std::nullopt, c, 1};
  } else {
    // Compose onto the existing proxy and rebuild from the bare closure, so
    // there is only ever one proxy.
    const FunProxyData& fp = as_fun_proxy(v);
    assert(fp.depth == 1 && !fp.tb);
    Coercion c2 = compose(types_, fp.co, c, mode_.ref_rep, &counters_);
    b->v = FunProxyData{fp.fn, std::nullopt, std::move(c2), 1};
  }
  counters_.proxies_allocated++;
  note_fun_proxy_depth(1);
  return Value::boxed(ValueKind::FunProxy, std::move(b));
}

Value Evaluator::ref_coerce(const Value& v, const Coercion& c) {
  assert(c.kind() == CoercionKind::RefProxy);
  auto b = std::make_shared<Boxed>();
  if (v.kind == ValueKind::Addr) {
    b->v = RefProxyData{v, std::nullopt, c, 1, c.n().vect};
  } else {
    const RefProxyData& rp = as_ref_proxy(v);
    assert(rp.depth == 1 && !rp.tb);
    Coercion c2 = compose(types_, rp.co, c, mode_.ref_rep, &counters_);
    b->v = RefProxyData{rp.ref, std::nullopt, std::move(c2), 1, c.n().vect};
  }
  counters_.proxies_allocated++;
  note_ref_proxy_depth(1);
  return Value::boxed(ValueKind::RefProxy, std::move(b));
}

Value Evaluator::cast_value(const Value& v, TypeId src, TypeId tgt,
                            const std::string& label) {
  counters_.casts_executed++;
  if (src == tgt) return v;
  if (src == kDyn) {
    TypeId rt = v.dyn_type;
    return cast_value(unwrap(v), rt, tgt, label);
  }
  if (tgt == kDyn) return inject(v, src);
  TypeHead hs = types_.head(src);
  TypeHead ht = types_.head(tgt);
  if (hs != ht) throw BlameSignal{label};
  switch (hs) {
    case TypeHead::Fun: {
      if (types_.fun_arity(src) != types_.fun_arity(tgt))
        throw BlameSignal{label};
      if (mode_.cast_rep == CastRep::TypeBased)
        return make_fun_proxy_tb(v, src, tgt, label);
      Coercion c = make_coercion(types_, src, tgt, label, mode_.ref_rep,
                                 &counters_);
      return fun_coerce(v, c);
    }
    case TypeHead::Tuple: {
      const std::vector<TypeId>& ks = types_.node(src).kids;
      const std::vector<TypeId>& kt = types_.node(tgt).kids;
      if (ks.size() != kt.size()) throw BlameSignal{label};
      const TupleData& td = as_tuple(v);
      TupleData out;
      out.elems.reserve(td.elems.size());
      for (size_t i = 0; i < td.elems.size(); ++i)
        out.elems.push_back(cast_value(td.elems[i], ks[i], kt[i], label));
      auto b = std::make_shared<Boxed>();
      b->v = std::move(out);
      return Value::boxed(ValueKind::Tuple, std::move(b));
    }
    case TypeHead::RefP: {
      if (mode_.cast_rep == CastRep::TypeBased)
        return make_ref_proxy_tb(v, types_.elem(src), types_.elem(tgt), label,
                                 false);
      Coercion c = make_coercion(types_, src, tgt, label, mode_.ref_rep,
                                 &counters_);
      return ref_coerce(v, c);
    }
    case TypeHead::Vect: {
      if (mode_.ref_rep == RefRep::Proxied) {
        if (mode_.cast_rep == CastRep::TypeBased)
          return make_ref_proxy_tb(v, types_.elem(src), types_.elem(tgt),
                                   label, true);
        Coercion c = make_coercion(types_, src, tgt, label, mode_.ref_rep,
                                   &counters_);
        return ref_coerce(v, c);
      }
      schedule_mono_cast(v.s.addr, types_.elem(tgt), label);
      return v;
    }
    case TypeHead::RefM: {
      schedule_mono_cast(v.s.addr, types_.elem(tgt), label);
      return v;
    }
    default:
      // Distinct base types.
      throw BlameSignal{label};
  }
}

Value Evaluator::coerce_value(const Value& v, const Coercion& c) {
  counters_.casts_executed++;
  switch (c.kind()) {
    case CoercionKind::Identity:
      return v;
    case CoercionKind::Project: {
      TypeId rt = v.dyn_type;
      Coercion c2 = make_coercion(types_, rt, c.n().type_a, c.n().label,
                                  mode_.ref_rep, &counters_);
      Value u = coerce_value(unwrap(v), c2);
      return coerce_value(u, c.n().a);
    }
    case CoercionKind::Fail:
      if (c.n().mono_conflict)
        throw DynErrorSignal{"inconsistent types at " + c.n().label};
      throw BlameSignal{c.n().label};
    case CoercionKind::Inject:
      return inject(coerce_value(v, c.n().a), c.n().type_a);
    case CoercionKind::Fun:
      return fun_coerce(v, c);
    case CoercionKind::Tuple: {
      const TupleData& td = as_tuple(v);
      assert(td.elems.size() == c.n().parts.size());
      TupleData out;
      out.elems.reserve(td.elems.size());
      for (size_t i = 0; i < td.elems.size(); ++i)
        out.elems.push_back(coerce_value(td.elems[i], c.n().parts[i]));
      auto b = std::make_shared<Boxed>();
      b->v = std::move(out);
      return Value::boxed(ValueKind::Tuple, std::move(b));
    }
    case CoercionKind::RefProxy:
      return ref_coerce(v, c);
    case CoercionKind::RefMono:
      schedule_mono_cast(v.s.addr, c.n().type_a, c.n().label);
      return v;
  }
  throw std::logic_error("unreachable coercion kind");
}

Value Evaluator::cast_or_coerce(const Value& v, TypeId src, TypeId tgt,
                                const std::string& label, bool force_type_path) {
  if (mode_.cast_rep == CastRep::TypeBased || mode_.lazy_coercions ||
      force_type_path)
    return cast_value(v, src, tgt, label);
  Coercion c = make_coercion(types_, src, tgt, label, mode_.ref_rep, &counters_);
  return coerce_value(v, c);
}

Value Evaluator::apply_closure(const Value& f, std::vector<Value> args) {
  if (f.kind == ValueKind::Closure) {
    const ClosureData& cd = as_closure(f);
    assert(cd.lambda->arity == args.size());
    auto frame = std::make_shared<Frame>();
    frame->parent = cd.env;
    frame->slots = std::move(args);
    return eval(*cd.lambda->kids[0], frame);
  }
  if (f.kind == ValueKind::FunProxy) {
    const FunProxyData& fp = as_fun_proxy(f);
    if (fp.tb) {
      TypeId s = fp.tb->src;
      TypeId t = fp.tb->tgt;
      for (size_t i = 0; i < args.size(); ++i)
        args[i] = cast_value(args[i], types_.fun_param(t, i),
                             types_.fun_param(s, i), fp.tb->label);
      Value r = apply_closure(fp.fn, std::move(args));
      return cast_value(r, types_.fun_ret(s), types_.fun_ret(t), fp.tb->label);
    }
    const CoercionNode& c = fp.co.n();
    assert(c.parts.size() == args.size());
    for (size_t i = 0; i < args.size(); ++i)
      args[i] = coerce_value(args[i], c.parts[i]);
    Value r = apply_closure(fp.fn, std::move(args));
    return coerce_value(r, c.a);
  }
  throw std::logic_error("apply of a non-function value");
}

Value Evaluator::read_through(const Value& r, int64_t idx, Span span) {
  if (r.kind == ValueKind::Addr) {
    const HeapCell& c = heap_.cell(r.s.addr);
    assert(!c.mono);
    bounds_check(c, idx, span);
    return c.slots[idx];
  }
  const RefProxyData& rp = as_ref_proxy(r);
  Value v = read_through(rp.ref, idx, span);
  if (rp.tb) return cast_value(v, rp.tb->src, rp.tb->tgt, rp.tb->label);
  return coerce_value(v, rp.co.n().b);
}

void Evaluator::write_through(const Value& r, int64_t idx, Value v, Span span) {
  if (r.kind == ValueKind::Addr) {
    HeapCell& c = heap_.cell(r.s.addr);
    assert(!c.mono);
    bounds_check(c, idx, span);
    c.slots[idx] = std::move(v);
    return;
  }
  const RefProxyData& rp = as_ref_proxy(r);
  Value w = rp.tb ? cast_value(v, rp.tb->tgt, rp.tb->src, rp.tb->label)
                  : coerce_value(v, rp.co.n().a);
  write_through(rp.ref, idx, std::move(w), span);
}

void Evaluator::schedule_mono_cast(uint32_t addr, TypeId target,
                                   const std::string& label) {
  HeapCell& cell = heap_.cell(addr);
  assert(cell.mono);
  TypeId t1 = cell.rtti;
  if (t1 == target) return;
  auto m = types_.meet(t1, target);
  if (!m) throw DynErrorSignal{"inconsistent types at " + label};
  if (*m == t1) return;
  if (heap_.trace_rtti) heap_.rtti_events.push_back({addr, t1, *m});
  cell.rtti = *m;
  counters_.rtti_updates++;
  if (!cell.pending) cell.pending = std::make_unique<Pending>();
  if (mode_.cast_rep == CastRep::Coercions) {
    Coercion step =
        make_coercion(types_, t1, *m, label, mode_.ref_rep, &counters_);
    cell.pending->co =
        cell.pending->co.is_identity()
            ? step
            : compose(types_, cell.pending->co, step, mode_.ref_rep, &counters_);
  } else {
    cell.pending->chain.push_back({t1, *m, label});
  }
  cell.pending->expect = *m;
  heap_.worklist.push_back(addr);
}

bool Evaluator::heap_evolve_step() {
  while (!heap_.worklist.empty()) {
    uint32_t a = heap_.worklist.front();
    heap_.worklist.pop_front();
    if (!heap_.cell(a).pending) continue;
    counters_.heap_evolve_steps++;
    if (++evolve_steps_total_ > limits_.max_evolve_steps)
      throw EvalLimitError("evolving-heap step limit exceeded");
    TypeId expect0 = heap_.cell(a).pending->expect;
    Coercion co = heap_.cell(a).pending->co;
    std::vector<PendingTb> chain = heap_.cell(a).pending->chain;
    std::vector<Value> slots = heap_.cell(a).slots;
    // Applying the pending cast may re-enter schedule_mono_cast, including on
    // this very cell; rtti is re-checked before committing.
    if (mode_.cast_rep == CastRep::Coercions) {
      for (Value& s : slots) s = coerce_value(s, co);
    } else {
      for (const PendingTb& link : chain)
        for (Value& s : slots) s = cast_value(s, link.src, link.tgt, link.label);
    }
    HeapCell& cell = heap_.cell(a);
    if (cell.rtti == expect0) {
      cell.slots = std::move(slots);
      cell.pending.reset();
    } else {
      // Stale: drop the casted value. The pending entry grew to cover the
      // newer rtti and reruns from the still-committed old value.
      heap_.worklist.push_back(a);
    }
    return true;
  }
  return false;
}

void Evaluator::settle_heap() {
  while (heap_evolve_step()) {
  }
}

uint32_t Evaluator::mono_cast_address(uint32_t addr, TypeId target,
                                      const std::string& label) {
  schedule_mono_cast(addr, target, label);
  settle_heap();
  return addr;
}

Value Evaluator::mono_read(uint32_t addr, size_t slot) {
  const HeapCell& c = heap_.cell(addr);
  assert(c.mono);
  return c.slots.at(slot);
}

Value Evaluator::mono_read_typed(uint32_t addr, TypeId expect,
                                 const std::string& label, size_t slot) {
  const HeapCell& c = heap_.cell(addr);
  assert(c.mono);
  Value v = cast_or_coerce(c.slots.at(slot), c.rtti, expect, label, false);
  settle_heap();
  return v;
}

void Evaluator::mono_write(uint32_t addr, Value v, size_t slot) {
  HeapCell& c = heap_.cell(addr);
  assert(c.mono);
  c.slots.at(slot) = std::move(v);
}

void Evaluator::mono_write_typed(uint32_t addr, Value v, TypeId stated,
                                 const std::string& label, size_t slot) {
  TypeId rtti = heap_.cell(addr).rtti;
  Value w = cast_or_coerce(v, stated, rtti, label, false);
  HeapCell& c = heap_.cell(addr);
  // The cast can make this cell's rtti more precise; then a more precise
  // write already landed and this one is dropped.
  if (c.rtti == rtti) c.slots.at(slot) = std::move(w);
  settle_heap();
}

Value Evaluator::dyn_ref_read(const Value& v, const std::string& label,
                              int64_t idx, bool vect, Span span) {
  assert(v.dyn);
  TypeId rt = v.dyn_type;
  TypeHead h = types_.head(rt);
  bool ok = vect ? h == TypeHead::Vect
                 : (h == TypeHead::RefP || h == TypeHead::RefM);
  if (!ok) throw BlameSignal{label};
  Value u = unwrap(v);
  counters_.ref_reads++;
  if (u.kind == ValueKind::Addr && heap_.cell(u.s.addr).mono) {
    const HeapCell& c = heap_.cell(u.s.addr);
    bounds_check(c, idx, span);
    Value r = cast_value(c.slots[idx], c.rtti, kDyn, label);
    settle_heap();
    return r;
  }
  Value raw = read_through(u, idx, span);
  return cast_value(raw, types_.elem(rt), kDyn, label);
}

void Evaluator::dyn_ref_write(const Value& r, Value v, const std::string& label,
                              int64_t idx, bool vect, Span span) {
  assert(r.dyn);
  TypeId rt = r.dyn_type;
  TypeHead h = types_.head(rt);
  bool ok = vect ? h == TypeHead::Vect
                 : (h == TypeHead::RefP || h == TypeHead::RefM);
  if (!ok) throw BlameSignal{label};
  Value u = unwrap(r);
  counters_.ref_writes++;
  if (u.kind == ValueKind::Addr && heap_.cell(u.s.addr).mono) {
    HeapCell& c = heap_.cell(u.s.addr);
    bounds_check(c, idx, span);
    TypeId rtti = c.rtti;
    Value w = cast_value(std::move(v), kDyn, rtti, label);
    HeapCell& c2 = heap_.cell(u.s.addr);
    if (c2.rtti == rtti) c2.slots[idx] = std::move(w);
    settle_heap();
    return;
  }
  Value w = cast_value(std::move(v), kDyn, types_.elem(rt), label);
  write_through(u, idx, std::move(w), span);
}

// Public wrappers used by tests; they settle the heap on the way out.
Value Evaluator::apply_cast(Value v, TypeId src, TypeId tgt,
                            const std::string& label) {
  Value r = cast_value(v, src, tgt, label);
  settle_heap();
  return r;
}

Value Evaluator::apply_coercion(Value v, const Coercion& c) {
  Value r = coerce_value(v, c);
  settle_heap();
  return r;
}

Value Evaluator::ref_read(const Value& r) {
  counters_.ref_reads++;
  Value v = read_through(r, 0, Span{});
  settle_heap();
  return v;
}

Value Evaluator::ref_write(const Value& r, Value v) {
  counters_.ref_writes++;
  write_through(r, 0, std::move(v), Span{});
  settle_heap();
  return Value::unit();
}

Value Evaluator::vect_read(const Value& r, int64_t idx) {
  counters_.ref_reads++;
  Value v = read_through(r, idx, Span{});
  settle_heap();
  return v;
}

Value Evaluator::vect_write(const Value& r, int64_t idx, Value v) {
  counters_.ref_writes++;
  write_through(r, idx, std::move(v), Span{});
  settle_heap();
  return Value::unit();
}

int64_t Evaluator::vect_len(const Value& r) {
  if (r.kind == ValueKind::Addr)
    return static_cast<int64_t>(heap_.cell(r.s.addr).slots.size());
  return vect_len(as_ref_proxy(r).ref);
}

Value Evaluator::eval(const IrNode& n, const std::shared_ptr<Frame>& env) {
  DepthGuard guard(depth_, limits_.max_eval_depth);
  switch (n.kind) {
    case IrKind::IntLit: return Value::integer(n.ival);
    case IrKind::FloatLit: return Value::real(n.fval);
    case IrKind::BoolLit: return Value::boolean(n.bval);
    case IrKind::UnitLit: return Value::unit();
    case IrKind::LocalRef: {
      Frame* f = env.get();
      for (uint32_t i = 0; i < n.hops; ++i) f = f->parent.get();
      return f->slots[n.index];
    }
    case IrKind::GlobalRef:
      return globals_->slots[n.index];
    case IrKind::Lambda:
      return make_closure(&n, env);
    case IrKind::App: {
      Value f = eval(*n.kids[0], env);
      std::vector<Value> args;
      args.reserve(n.kids.size() - 1);
      for (size_t i = 1; i < n.kids.size(); ++i)
        args.push_back(eval(*n.kids[i], env));
      Value r = apply_closure(f, std::move(args));
      settle_heap();
      return r;
    }
    case IrKind::AppDyn: {
      Value fv = eval(*n.kids[0], env);
      assert(fv.dyn);
      TypeId rt = fv.dyn_type;
      size_t n_args = n.kids.size() - 1;
      if (types_.head(rt) != TypeHead::Fun || types_.fun_arity(rt) != n_args)
        throw BlameSignal{n.label};
      Value u = unwrap(fv);
      std::vector<Value> args;
      args.reserve(n_args);
      for (size_t i = 1; i < n.kids.size(); ++i)
        args.push_back(cast_value(eval(*n.kids[i], env), kDyn,
                                  types_.fun_param(rt, i - 1), n.label));
      Value r = apply_closure(u, std::move(args));
      r = cast_value(r, types_.fun_ret(rt), kDyn, n.label);
      settle_heap();
      return r;
    }
    case IrKind::Let: {
      auto frame = std::make_shared<Frame>();
      frame->parent = env;
      frame->slots.reserve(n.arity);
      for (uint32_t i = 0; i < n.arity; ++i)
        frame->slots.push_back(eval(*n.kids[i], env));
      return eval(*n.kids[n.arity], frame);
    }
    case IrKind::If: {
      Value c = eval(*n.kids[0], env);
      return eval(c.s.b ? *n.kids[1] : *n.kids[2], env);
    }
    case IrKind::Begin: {
      Value v = Value::unit();
      for (const IrPtr& k : n.kids) v = eval(*k, env);
      return v;
    }
    case IrKind::While: {
      while (true) {
        Value c = eval(*n.kids[0], env);
        if (!c.s.b) return Value::unit();
        eval(*n.kids[1], env);
      }
    }
    case IrKind::Prim: {
      Value a = eval(*n.kids[0], env);
      switch (n.prim) {
        case PrimOp::Not: return Value::boolean(!a.s.b);
        default: break;
      }
      Value b = eval(*n.kids[1], env);
      switch (n.prim) {
        case PrimOp::AddI: return Value::integer(wrap_add(a.s.i, b.s.i));
        case PrimOp::SubI: return Value::integer(wrap_sub(a.s.i, b.s.i));
        case PrimOp::MulI: return Value::integer(wrap_mul(a.s.i, b.s.i));
        case PrimOp::DivI:
          if (b.s.i == 0) position_error("division by zero", n.span);
          if (a.s.i == std::numeric_limits<int64_t>::min() && b.s.i == -1)
            return Value::integer(a.s.i);
          return Value::integer(a.s.i / b.s.i);
        case PrimOp::ModI:
          if (b.s.i == 0) position_error("division by zero", n.span);
          if (a.s.i == std::numeric_limits<int64_t>::min() && b.s.i == -1)
            return Value::integer(0);
          return Value::integer(a.s.i % b.s.i);
        case PrimOp::AddF: return Value::real(a.s.f + b.s.f);
        case PrimOp::SubF: return Value::real(a.s.f - b.s.f);
        case PrimOp::MulF: return Value::real(a.s.f * b.s.f);
        case PrimOp::DivF: return Value::real(a.s.f / b.s.f);
        case PrimOp::Eq:
          return Value::boolean(a.kind == ValueKind::Float ? a.s.f == b.s.f
                                                           : a.s.i == b.s.i);
        case PrimOp::Lt:
          return Value::boolean(a.kind == ValueKind::Float ? a.s.f < b.s.f
                                                           : a.s.i < b.s.i);
        case PrimOp::Gt:
          return Value::boolean(a.kind == ValueKind::Float ? a.s.f > b.s.f
                                                           : a.s.i > b.s.i);
        case PrimOp::Le:
          return Value::boolean(a.kind == ValueKind::Float ? a.s.f <= b.s.f
                                                           : a.s.i <= b.s.i);
        case PrimOp::Ge:
          return Value::boolean(a.kind == ValueKind::Float ? a.s.f >= b.s.f
                                                           : a.s.i >= b.s.i);
        default:
          throw std::logic_error("unreachable prim");
      }
    }
    case IrKind::PrimCmpDyn: {
      Value a = eval(*n.kids[0], env);
      Value b = eval(*n.kids[1], env);
      assert(a.dyn && b.dyn);
      auto cmp = [&](auto x, auto y) {
        switch (n.prim) {
          case PrimOp::Eq: return x == y;
          case PrimOp::Lt: return x < y;
          case PrimOp::Gt: return x > y;
          case PrimOp::Le: return x <= y;
          default: return x >= y;
        }
      };
      if (a.dyn_type == kInt && b.dyn_type == kInt)
        return Value::boolean(cmp(a.s.i, b.s.i));
      if (a.dyn_type == kFloat && b.dyn_type == kFloat)
        return Value::boolean(cmp(a.s.f, b.s.f));
      throw BlameSignal{n.label};
    }
    case IrKind::TupleMake: {
      TupleData td;
      td.elems.reserve(n.kids.size());
      for (const IrPtr& k : n.kids) td.elems.push_back(eval(*k, env));
      auto b = std::make_shared<Boxed>();
      b->v = std::move(td);
      return Value::boxed(ValueKind::Tuple, std::move(b));
    }
    case IrKind::TupleProj:
      return as_tuple(eval(*n.kids[0], env)).elems[n.index];
    case IrKind::TupleProjDyn: {
      Value v = eval(*n.kids[0], env);
      assert(v.dyn);
      TypeId rt = v.dyn_type;
      if (types_.head(rt) != TypeHead::Tuple ||
          n.index >= types_.node(rt).kids.size())
        throw BlameSignal{n.label};
      Value u = unwrap(v);
      Value e = as_tuple(u).elems[n.index];
      return cast_value(e, types_.node(rt).kids[n.index], kDyn, n.label);
    }
    case IrKind::Cast: {
      Value v = eval(*n.kids[0], env);
      Value r;
      if (mode_.cast_rep == CastRep::TypeBased) {
        r = cast_value(v, n.src, n.tgt, n.label);
      } else {
        Coercion c = make_coercion(types_, n.src, n.tgt, n.label, mode_.ref_rep,
                                   &counters_);
        r = coerce_value(v, c);
      }
      settle_heap();
      return r;
    }
    case IrKind::ApplyCoercionConst: {
      Value r = coerce_value(eval(*n.kids[0], env), n.coercion);
      settle_heap();
      return r;
    }
    case IrKind::InlineProject: {
      Value v = eval(*n.kids[0], env);
      counters_.casts_executed++;
      assert(v.dyn);
      if (v.dyn_type != n.tgt) throw BlameSignal{n.label};
      return unwrap(v);
    }
    case IrKind::InlineInject: {
      Value v = eval(*n.kids[0], env);
      counters_.casts_executed++;
      return inject(std::move(v), n.src);
    }
    case IrKind::RefMake:
      return Value::address(heap_.alloc_plain({eval(*n.kids[0], env)}, false));
    case IrKind::RefRead: {
      Value r = eval(*n.kids[0], env);
      counters_.ref_reads++;
      return read_through(r, 0, n.span);
    }
    case IrKind::RefWrite: {
      Value r = eval(*n.kids[0], env);
      Value v = eval(*n.kids[1], env);
      counters_.ref_writes++;
      write_through(r, 0, std::move(v), n.span);
      return Value::unit();
    }
    case IrKind::VectMake: {
      Value c = eval(*n.kids[0], env);
      if (c.s.i < 0) position_error("negative vector size", n.span);
      Value init = eval(*n.kids[1], env);
      std::vector<Value> slots(static_cast<size_t>(c.s.i), init);
      return Value::address(heap_.alloc_plain(std::move(slots), true));
    }
    case IrKind::VectRead: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      counters_.ref_reads++;
      return read_through(r, i.s.i, n.span);
    }
    case IrKind::VectWrite: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      Value v = eval(*n.kids[2], env);
      counters_.ref_writes++;
      write_through(r, i.s.i, std::move(v), n.span);
      return Value::unit();
    }
    case IrKind::VectLen:
      return Value::integer(vect_len(eval(*n.kids[0], env)));
    case IrKind::RefReadDyn: {
      Value r = eval(*n.kids[0], env);
      Value v = dyn_ref_read(r, n.label, 0, false, n.span);
      settle_heap();
      return v;
    }
    case IrKind::RefWriteDyn: {
      Value r = eval(*n.kids[0], env);
      Value v = eval(*n.kids[1], env);
      dyn_ref_write(r, std::move(v), n.label, 0, false, n.span);
      settle_heap();
      return Value::unit();
    }
    case IrKind::VectReadDyn: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      Value v = dyn_ref_read(r, n.label, i.s.i, true, n.span);
      settle_heap();
      return v;
    }
    case IrKind::VectWriteDyn: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      Value v = eval(*n.kids[2], env);
      dyn_ref_write(r, std::move(v), n.label, i.s.i, true, n.span);
      settle_heap();
      return Value::unit();
    }
    case IrKind::VectLenDyn: {
      Value r = eval(*n.kids[0], env);
      assert(r.dyn);
      if (types_.head(r.dyn_type) != TypeHead::Vect) throw BlameSignal{n.label};
      Value u = unwrap(r);
      if (u.kind == ValueKind::Addr && heap_.cell(u.s.addr).mono)
        return Value::integer(
            static_cast<int64_t>(heap_.cell(u.s.addr).slots.size()));
      return Value::integer(vect_len(u));
    }
    case IrKind::MonoRefMake:
      return Value::address(
          heap_.alloc_mono({eval(*n.kids[0], env)}, n.tgt, false));
    case IrKind::MonoRead: {
      Value r = eval(*n.kids[0], env);
      counters_.ref_reads++;
      return mono_read(r.s.addr);
    }
    case IrKind::MonoReadTyped: {
      Value r = eval(*n.kids[0], env);
      counters_.ref_reads++;
      return mono_read_typed(r.s.addr, n.tgt, n.label);
    }
    case IrKind::MonoWrite: {
      Value r = eval(*n.kids[0], env);
      Value v = eval(*n.kids[1], env);
      counters_.ref_writes++;
      mono_write(r.s.addr, std::move(v));
      return Value::unit();
    }
    case IrKind::MonoWriteTyped: {
      Value r = eval(*n.kids[0], env);
      Value v = eval(*n.kids[1], env);
      counters_.ref_writes++;
      mono_write_typed(r.s.addr, std::move(v), n.src, n.label);
      return Value::unit();
    }
    case IrKind::MonoVectMake: {
      Value c = eval(*n.kids[0], env);
      if (c.s.i < 0) position_error("negative vector size", n.span);
      Value init = eval(*n.kids[1], env);
      std::vector<Value> slots(static_cast<size_t>(c.s.i), init);
      return Value::address(heap_.alloc_mono(std::move(slots), n.tgt, true));
    }
    case IrKind::MonoVectRead: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      counters_.ref_reads++;
      bounds_check(heap_.cell(r.s.addr), i.s.i, n.span);
      return mono_read(r.s.addr, static_cast<size_t>(i.s.i));
    }
    case IrKind::MonoVectReadTyped: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      counters_.ref_reads++;
      bounds_check(heap_.cell(r.s.addr), i.s.i, n.span);
      return mono_read_typed(r.s.addr, n.tgt, n.label,
                             static_cast<size_t>(i.s.i));
    }
    case IrKind::MonoVectWrite: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      Value v = eval(*n.kids[2], env);
      counters_.ref_writes++;
      bounds_check(heap_.cell(r.s.addr), i.s.i, n.span);
      mono_write(r.s.addr, std::move(v), static_cast<size_t>(i.s.i));
      return Value::unit();
    }
    case IrKind::MonoVectWriteTyped: {
      Value r = eval(*n.kids[0], env);
      Value i = eval(*n.kids[1], env);
      Value v = eval(*n.kids[2], env);
      counters_.ref_writes++;
      bounds_check(heap_.cell(r.s.addr), i.s.i, n.span);
      mono_write_typed(r.s.addr, std::move(v), n.src, n.label,
                       static_cast<size_t>(i.s.i));
      return Value::unit();
    }
    case IrKind::MonoVectLen: {
      Value r = eval(*n.kids[0], env);
      return Value::integer(
          static_cast<int64_t>(heap_.cell(r.s.addr).slots.size()));
    }
  }
  throw std::logic_error("unhandled IR node");
}

Outcome Evaluator::run_here() {
  assert(!ran_);
  ran_ = true;
  Outcome out;
  try {
    for (size_t i = 0; i < prog_.defines.size(); ++i) {
      globals_->slots[i] = eval(*prog_.defines[i].init, nullptr);
      settle_heap();
    }
    Value last = Value::unit();
    for (const IrPtr& e : prog_.exprs) {
      last = eval(*e, nullptr);
      settle_heap();
    }
    out.kind = Outcome::Kind::Result;
    out.value = last;
  } catch (const BlameSignal& b) {
    out.kind = Outcome::Kind::Blame;
    out.label = b.label;
  } catch (const DynErrorSignal& e) {
    out.kind = Outcome::Kind::DynError;
    out.message = e.message;
  }
  out.counters = counters_;
  return out;
}

Outcome Evaluator::run() {
  Outcome out;
  std::exception_ptr eptr;
  std::function<void()> body = [&] {
    try {
      out = run_here();
    } catch (...) {
      eptr = std::current_exception();
    }
  };
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  bool spawned = false;
  if (pthread_attr_setstacksize(&attr, limits_.stack_bytes) == 0) {
    pthread_t tid;
    auto trampoline = [](void* p) -> void* {
      (*static_cast<std::function<void()>*>(p))();
      return nullptr;
    };
    if (pthread_create(&tid, &attr, trampoline, &body) == 0) {
      pthread_join(tid, nullptr);
      spawned = true;
    }
  }
  pthread_attr_destroy(&attr);
  if (!spawned) body();
  if (eptr) std::rethrow_exception(eptr);
  return out;
}

}  // namespace gradl
