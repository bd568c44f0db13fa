#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gradl/counters.hpp"
#include "gradl/types.hpp"

namespace gradl {

// Space-efficient lazy-D coercions in three-layer normal form:
//
//   c ::= id | (T?^p ; f) | f                 top
//   f ::= bot{T,p,T'} | (m ; T!) | m          final
//   m ::= id | (c.. -> c) | <c , ..> | Ref c c | MRef T   middle
//
// Injections and projections carry arbitrary non-Dyn types. The grammar is
// enforced by construction: a projection's tail is always a final coercion
// and an injection wraps a middle, which is what keeps composed coercions
// bounded in size.
//
// Vect coercions mirror the reference ones (proxied write/read pair or a
// monotonic target type) and are distinguished by a flag.

enum class CoercionKind : uint8_t {
  Identity,
  Project,   // (T?^p ; f)
  Fail,      // bot{T,p,T'}
  Inject,    // (m ; T!)
  Fun,       // contravariant args, covariant return
  Tuple,
  RefProxy,  // write coercion applied on writes, read coercion on reads
  RefMono,   // target RTTI; the label travels with the runtime cast request
};

struct CoercionNode;

class Coercion {
 public:
  Coercion() = default;  // identity
  explicit Coercion(std::shared_ptr<const CoercionNode> n) : node_(std::move(n)) {}

  bool is_identity() const { return node_ == nullptr; }
  CoercionKind kind() const;
  const CoercionNode& n() const { return *node_; }

 private:
  std::shared_ptr<const CoercionNode> node_;
};

struct CoercionNode {
  CoercionKind kind;
  TypeId type_a{};   // Project: target; Inject: injected type; Fail: source; RefMono: rtti
  TypeId type_b{};   // Fail: target
  std::string label; // Project, Fail, RefMono
  Coercion a;        // Project: rest; Inject: mid; Fun: ret; RefProxy: write
  Coercion b;        // RefProxy: read
  std::vector<Coercion> parts;  // Fun args, Tuple elems
  bool vect = false;            // RefProxy / RefMono
  bool mono_conflict = false;   // Fail produced by a monotonic meet conflict
};

inline CoercionKind Coercion::kind() const {
  return node_ ? node_->kind : CoercionKind::Identity;
}

// Constructors. These build the node verbatim; normal-form discipline is the
// caller's job (make_coercion and compose maintain it).
Coercion id_coercion();
Coercion project_c(TypeId target, std::string label, Coercion rest);
Coercion fail_c(TypeId src, std::string label, TypeId tgt, bool mono_conflict = false);
Coercion inject_c(Coercion mid, TypeId target);
Coercion fun_c(std::vector<Coercion> args, Coercion ret);
Coercion tuple_c(std::vector<Coercion> elems);
Coercion ref_proxy_c(Coercion write, Coercion read, bool vect = false);
Coercion ref_mono_c(TypeId rtti, std::string label, bool vect = false);

// The ref mode decides whether a Vect-to-Vect cast gets a proxied write/read
// pair or a monotonic coercion.
enum class RefRep : uint8_t { Proxied, Monotonic };

// Creates the coercion for a cast from src to tgt. Identical interned types
// give the identity; inconsistent non-Dyn pairs give a failure coercion (a
// value, not an error). Pass counters when calling at runtime so the creation
// is tallied; compile-time callers pass nullptr.
Coercion make_coercion(TypeTable& types, TypeId src, TypeId tgt,
                       const std::string& label, RefRep ref_rep,
                       Counters* counters = nullptr);

// Normalizing composition. Both inputs must be in normal form with c1's
// target matching c2's source; the result is in normal form, and iterated
// composition over a fixed type universe stays size-bounded. The ref mode is
// needed because an injection meeting a projection re-enters coercion
// creation, which resolves Vect casts by mode.
Coercion compose(TypeTable& types, const Coercion& c1, const Coercion& c2,
                 RefRep ref_rep, Counters* counters = nullptr);

// True iff c satisfies the top/final/middle stratification.
bool is_normal(const Coercion& c);

// Node count (identity = 1).
size_t coercion_size(const Coercion& c);

bool coercion_equal(const Coercion& x, const Coercion& y);

// Debug syntax: ι, T!, T?^p, (c1 .. cn → d), ⟨c , d⟩, Ref c d, MRef T,
// ⊥{T,p,T'}; sequences print as (x ; y). Stable, used by golden tests.
std::string show_coercion(const TypeTable& types, const Coercion& c);

}  // namespace gradl
