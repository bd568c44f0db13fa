#include "gradl/types.hpp"

#include <cassert>
#include <stdexcept>

namespace gradl {

TypeTable::TypeTable() {
  intern(TypeHead::Dyn, {});
  intern(TypeHead::Int, {});
  intern(TypeHead::Bool, {});
  intern(TypeHead::Float, {});
  intern(TypeHead::Unit, {});
}

TypeId TypeTable::intern(TypeHead head, std::vector<TypeId> kids) {
  Key key{head, kids};
  auto it = memo_.find(key);
  if (it != memo_.end()) return TypeId{it->second};

  TypeNode n;
  n.head = head;
  n.kids = std::move(kids);
  n.is_static = head != TypeHead::Dyn;
  n.node_count = 1;
  for (TypeId k : n.kids) {
    assert(k.raw < nodes_.size());
    n.is_static = n.is_static && nodes_[k.raw].is_static;
    n.node_count += nodes_[k.raw].node_count;
  }
  uint32_t id = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back(std::move(n));
  memo_.emplace(std::move(key), id);
  return TypeId{id};
}

TypeId TypeTable::fun(std::vector<TypeId> params, TypeId ret) {
  params.push_back(ret);
  return intern(TypeHead::Fun, std::move(params));
}

TypeId TypeTable::tuple(std::vector<TypeId> elems) {
  if (elems.size() < 2) throw std::logic_error("tuple arity must be >= 2");
  return intern(TypeHead::Tuple, std::move(elems));
}

bool TypeTable::is_base(TypeId t) const {
  switch (head(t)) {
    case TypeHead::Int:
    case TypeHead::Bool:
    case TypeHead::Float:
    case TypeHead::Unit:
      return true;
    default:
      return false;
  }
}

uint32_t TypeTable::typed_node_count(TypeId t) const {
  if (t == kDyn) return 0;
  uint32_t n = 1;
  for (TypeId k : node(t).kids) n += typed_node_count(k);
  return n;
}

bool TypeTable::consistent(TypeId a, TypeId b) const {
  if (a == b) return true;
  if (a == kDyn || b == kDyn) return true;
  const TypeNode& na = node(a);
  const TypeNode& nb = node(b);
  if (na.head != nb.head || na.kids.size() != nb.kids.size()) return false;
  for (size_t i = 0; i < na.kids.size(); ++i)
    if (!consistent(na.kids[i], nb.kids[i])) return false;
  return true;
}

std::optional<TypeId> TypeTable::meet(TypeId a, TypeId b) {
  if (a == b) return a;
  if (a == kDyn) return b;
  if (b == kDyn) return a;
  uint64_t key = (static_cast<uint64_t>(a.raw) << 32) | b.raw;
  auto it = meet_memo_.find(key);
  if (it != meet_memo_.end()) return it->second;
  const TypeNode& na = node(a);
  // Careful: take copies of kid vectors, interning below may grow nodes_.
  if (na.head != node(b).head || na.kids.size() != node(b).kids.size())
    return std::nullopt;
  std::vector<TypeId> ka = na.kids;
  std::vector<TypeId> kb = node(b).kids;
  std::vector<TypeId> kids;
  kids.reserve(ka.size());
  for (size_t i = 0; i < ka.size(); ++i) {
    auto m = meet(ka[i], kb[i]);
    if (!m) return std::nullopt;
    kids.push_back(*m);
  }
  TypeId r = intern(node(a).head, std::move(kids));
  meet_memo_.emplace(key, r);
  return r;
}

bool TypeTable::precision_leq(TypeId a, TypeId b) const {
  if (a == kDyn) return true;
  if (a == b) return true;
  const TypeNode& na = node(a);
  const TypeNode& nb = node(b);
  if (na.head != nb.head || na.kids.size() != nb.kids.size()) return false;
  for (size_t i = 0; i < na.kids.size(); ++i)
    if (!precision_leq(na.kids[i], nb.kids[i])) return false;
  return true;
}

std::string TypeTable::show(TypeId t) const {
  const TypeNode& n = node(t);
  switch (n.head) {
    case TypeHead::Dyn: return "Dyn";
    case TypeHead::Int: return "Int";
    case TypeHead::Bool: return "Bool";
    case TypeHead::Float: return "Float";
    case TypeHead::Unit: return "Unit";
    case TypeHead::Fun: {
      std::string s = "(->";
      for (TypeId k : n.kids) s += " " + show(k);
      return s + ")";
    }
    case TypeHead::Tuple: {
      std::string s = "(Tuple";
      for (TypeId k : n.kids) s += " " + show(k);
      return s + ")";
    }
    case TypeHead::RefP:
    case TypeHead::RefM:
      return "(Ref " + show(n.kids[0]) + ")";
    case TypeHead::Vect:
      return "(Vect " + show(n.kids[0]) + ")";
  }
  return "?";
}

}  // namespace gradl
