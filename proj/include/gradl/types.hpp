#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gradl {

// Gradual type algebra. All types live in a TypeTable; a TypeId identifies a
// type, and two TypeIds are equal exactly when the types are structurally
// equal (hash consing). This makes the hot equality checks in the runtime a
// single integer compare.

enum class TypeHead : uint8_t {
  Dyn,
  Int,
  Bool,
  Float,
  Unit,
  Fun,    // kids = params..., return type last
  Tuple,  // kids = elements (arity >= 2)
  RefP,   // proxied reference, kids = {elem}
  RefM,   // monotonic reference, kids = {elem}
  Vect,   // vector; proxied or monotonic depending on the program's ref mode
};

struct TypeId {
  uint32_t raw = 0;
  friend bool operator==(TypeId, TypeId) = default;
};

struct TypeIdHash {
  size_t operator()(TypeId t) const { return std::hash<uint32_t>{}(t.raw); }
};

// The five atoms are pre-interned at fixed ids.
inline constexpr TypeId kDyn{0};
inline constexpr TypeId kInt{1};
inline constexpr TypeId kBool{2};
inline constexpr TypeId kFloat{3};
inline constexpr TypeId kUnit{4};

struct TypeNode {
  TypeHead head;
  std::vector<TypeId> kids;
  bool is_static = false;    // Dyn occurs nowhere
  uint32_t node_count = 1;   // total type nodes, counting this one
};

class TypeTable {
 public:
  TypeTable();

  TypeId intern(TypeHead head, std::vector<TypeId> kids);

  TypeId fun(std::vector<TypeId> params, TypeId ret);
  TypeId tuple(std::vector<TypeId> elems);
  TypeId ref_p(TypeId elem) { return intern(TypeHead::RefP, {elem}); }
  TypeId ref_m(TypeId elem) { return intern(TypeHead::RefM, {elem}); }
  TypeId vect(TypeId elem) { return intern(TypeHead::Vect, {elem}); }

  const TypeNode& node(TypeId t) const { return nodes_[t.raw]; }
  TypeHead head(TypeId t) const { return nodes_[t.raw].head; }
  bool is_base(TypeId t) const;
  bool is_static(TypeId t) const { return nodes_[t.raw].is_static; }
  uint32_t node_count(TypeId t) const { return nodes_[t.raw].node_count; }
  // Non-Dyn node count, the numerator of the annotation-percentage metric.
  uint32_t typed_node_count(TypeId t) const;

  // Fun helpers.
  size_t fun_arity(TypeId t) const { return node(t).kids.size() - 1; }
  TypeId fun_param(TypeId t, size_t i) const { return node(t).kids[i]; }
  TypeId fun_ret(TypeId t) const { return node(t).kids.back(); }
  TypeId elem(TypeId t) const { return node(t).kids[0]; }

  bool consistent(TypeId a, TypeId b) const;
  // Greatest lower bound in the precision ordering; nullopt when a and b are
  // inconsistent. Results are interned on demand.
  std::optional<TypeId> meet(TypeId a, TypeId b);
  // a is less (or equally) precise than b; Dyn is below everything.
  bool precision_leq(TypeId a, TypeId b) const;

  // Surface syntax: Int, Bool, Float, Unit, Dyn, (-> T1 ... Tn Tr),
  // (Tuple T1 T2 ...), (Ref T), (Vect T). RefP and RefM both print as (Ref T);
  // the ref mode is a whole-program property, not part of the syntax.
  std::string show(TypeId t) const;

  size_t size() const { return nodes_.size(); }

 private:
  struct Key {
    TypeHead head;
    std::vector<TypeId> kids;
    bool operator==(const Key& o) const {
      return head == o.head && kids == o.kids;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      size_t h = static_cast<size_t>(k.head) * 0x9e3779b97f4a7c15ull;
      for (TypeId t : k.kids) h = h * 1099511628211ull ^ t.raw;
      return h;
    }
  };

  std::vector<TypeNode> nodes_;
  std::unordered_map<Key, uint32_t, KeyHash> memo_;
  std::unordered_map<uint64_t, TypeId> meet_memo_;
};

}  // namespace gradl
