#include "gradl/coercion.hpp"

#include <cassert>
#include <stdexcept>

namespace gradl {

namespace {
Coercion mk(CoercionNode n) {
  return Coercion(std::make_shared<const CoercionNode>(std::move(n)));
}
}  // namespace

Coercion id_coercion() { return Coercion(); }

Coercion project_c(TypeId target, std::string label, Coercion rest) {
  CoercionNode n;
  n.kind = CoercionKind::Project;
  n.type_a = target;
  n.label = std::move(label);
  n.a = std::move(rest);
  return mk(std::move(n));
}

Coercion fail_c(TypeId src, std::string label, TypeId tgt, bool mono_conflict) {
  CoercionNode n;
  n.kind = CoercionKind::Fail;
  n.type_a = src;
  n.type_b = tgt;
  n.label = std::move(label);
  n.mono_conflict = mono_conflict;
  return mk(std::move(n));
}

Coercion inject_c(Coercion mid, TypeId target) {
  CoercionNode n;
  n.kind = CoercionKind::Inject;
  n.a = std::move(mid);
  n.type_a = target;
  return mk(std::move(n));
}

Coercion fun_c(std::vector<Coercion> args, Coercion ret) {
  CoercionNode n;
  n.kind = CoercionKind::Fun;
  n.parts = std::move(args);
  n.a = std::move(ret);
  return mk(std::move(n));
}

Coercion tuple_c(std::vector<Coercion> elems) {
  CoercionNode n;
  n.kind = CoercionKind::Tuple;
  n.parts = std::move(elems);
  return mk(std::move(n));
}

Coercion ref_proxy_c(Coercion write, Coercion read, bool vect) {
  CoercionNode n;
  n.kind = CoercionKind::RefProxy;
  n.a = std::move(write);
  n.b = std::move(read);
  n.vect = vect;
  return mk(std::move(n));
}

Coercion ref_mono_c(TypeId rtti, std::string label, bool vect) {
  CoercionNode n;
  n.kind = CoercionKind::RefMono;
  n.type_a = rtti;
  n.label = std::move(label);
  n.vect = vect;
  return mk(std::move(n));
}

namespace {

Coercion make_impl(TypeTable& tt, TypeId s, TypeId t, const std::string& l,
                   RefRep rr) {
  if (s == t) return Coercion();  // interned ids, so this covers MRef T => MRef T
  if (s == kDyn) return project_c(t, l, Coercion());
  if (t == kDyn) return inject_c(Coercion(), s);
  const TypeNode& ns = tt.node(s);
  const TypeNode& nt = tt.node(t);
  if (ns.head != nt.head || ns.kids.size() != nt.kids.size())
    return fail_c(s, l, t);
  switch (ns.head) {
    case TypeHead::Fun: {
      size_t arity = ns.kids.size() - 1;
      std::vector<Coercion> args;
      args.reserve(arity);
      // Contravariant: stored arg coercions convert the caller's argument
      // (target param type) to what the underlying function expects.
      for (size_t i = 0; i < arity; ++i)
        args.push_back(make_impl(tt, nt.kids[i], ns.kids[i], l, rr));
      Coercion ret = make_impl(tt, ns.kids.back(), nt.kids.back(), l, rr);
      return fun_c(std::move(args), std::move(ret));
    }
    case TypeHead::Tuple: {
      std::vector<Coercion> elems;
      elems.reserve(ns.kids.size());
      for (size_t i = 0; i < ns.kids.size(); ++i)
        elems.push_back(make_impl(tt, ns.kids[i], nt.kids[i], l, rr));
      return tuple_c(std::move(elems));
    }
    case TypeHead::RefP:
      return ref_proxy_c(make_impl(tt, nt.kids[0], ns.kids[0], l, rr),
                         make_impl(tt, ns.kids[0], nt.kids[0], l, rr));
    case TypeHead::RefM:
      return ref_mono_c(nt.kids[0], l);
    case TypeHead::Vect:
      if (rr == RefRep::Proxied)
        return ref_proxy_c(make_impl(tt, nt.kids[0], ns.kids[0], l, rr),
                           make_impl(tt, ns.kids[0], nt.kids[0], l, rr),
                           /*vect=*/true);
      return ref_mono_c(nt.kids[0], l, /*vect=*/true);
    default:
      // Distinct base types (same head would have interned equal).
      return fail_c(s, l, t);
  }
}

Coercion compose_impl(TypeTable& tt, const Coercion& c1, const Coercion& c2,
                      RefRep rr);

Coercion compose_middles(TypeTable& tt, const Coercion& m1, const Coercion& m2,
                         RefRep rr) {
  const CoercionNode& n1 = m1.n();
  const CoercionNode& n2 = m2.n();
  if (n1.kind != n2.kind)
    throw std::logic_error("compose: incompatible middle coercions");
  switch (n1.kind) {
    case CoercionKind::Fun: {
      assert(n1.parts.size() == n2.parts.size());
      std::vector<Coercion> args;
      args.reserve(n1.parts.size());
      for (size_t i = 0; i < n1.parts.size(); ++i)
        args.push_back(compose_impl(tt, n2.parts[i], n1.parts[i], rr));
      return fun_c(std::move(args), compose_impl(tt, n1.a, n2.a, rr));
    }
    case CoercionKind::Tuple: {
      assert(n1.parts.size() == n2.parts.size());
      std::vector<Coercion> elems;
      elems.reserve(n1.parts.size());
      for (size_t i = 0; i < n1.parts.size(); ++i)
        elems.push_back(compose_impl(tt, n1.parts[i], n2.parts[i], rr));
      return tuple_c(std::move(elems));
    }
    case CoercionKind::RefProxy: {
      assert(n1.vect == n2.vect);
      return ref_proxy_c(compose_impl(tt, n2.a, n1.a, rr),
                         compose_impl(tt, n1.b, n2.b, rr), n1.vect);
    }
    case CoercionKind::RefMono: {
      assert(n1.vect == n2.vect);
      auto m = tt.meet(n1.type_a, n2.type_a);
      if (m) return ref_mono_c(*m, n2.label, n1.vect);
      // The meet conflict surfaces with the incoming (second) cast's label
      // and is reported as a runtime error, not blame, when applied.
      TypeId src = n1.vect ? tt.vect(n1.type_a) : tt.ref_m(n1.type_a);
      TypeId tgt = n2.vect ? tt.vect(n2.type_a) : tt.ref_m(n2.type_a);
      return fail_c(src, n2.label, tgt, /*mono_conflict=*/true);
    }
    default:
      throw std::logic_error("compose: not a middle coercion");
  }
}

Coercion compose_impl(TypeTable& tt, const Coercion& c1, const Coercion& c2,
                      RefRep rr) {
  if (c1.is_identity()) return c2;
  if (c2.is_identity()) return c1;
  switch (c1.kind()) {
    case CoercionKind::Project:
      // (I?^p ; f) . c = (I?^p ; (f . c))
      return project_c(c1.n().type_a, c1.n().label,
                       compose_impl(tt, c1.n().a, c2, rr));
    case CoercionKind::Fail:
      return c1;
    case CoercionKind::Inject: {
      if (c2.kind() == CoercionKind::Project) {
        // (m ; I!) . (J?^p ; f) = m . (<I =>^p J> . f)
        Coercion created = make_impl(tt, c1.n().type_a, c2.n().type_a,
                                     c2.n().label, rr);
        Coercion rest = compose_impl(tt, created, c2.n().a, rr);
        return compose_impl(tt, c1.n().a, rest, rr);
      }
      if (c2.kind() == CoercionKind::Fail) return c2;
      throw std::logic_error("compose: injection met a non-projection");
    }
    default: {
      // c1 is a middle coercion.
      if (c2.kind() == CoercionKind::Fail) return c2;
      if (c2.kind() == CoercionKind::Inject)
        return inject_c(compose_impl(tt, c1, c2.n().a, rr), c2.n().type_a);
      if (c2.kind() == CoercionKind::Project)
        throw std::logic_error("compose: middle met a projection");
      return compose_middles(tt, c1, c2, rr);
    }
  }
}

}  // namespace

Coercion make_coercion(TypeTable& types, TypeId src, TypeId tgt,
                       const std::string& label, RefRep ref_rep,
                       Counters* counters) {
  if (counters) counters->coercions_created_at_runtime++;
  return make_impl(types, src, tgt, label, ref_rep);
}

Coercion compose(TypeTable& types, const Coercion& c1, const Coercion& c2,
                 RefRep ref_rep, Counters* counters) {
  if (counters) counters->coercions_composed++;
  Coercion r = compose_impl(types, c1, c2, ref_rep);
  assert(is_normal(r));
  return r;
}

namespace {

bool normal_top(const Coercion& c);

bool normal_middle(const Coercion& c) {
  switch (c.kind()) {
    case CoercionKind::Identity:
      return true;
    case CoercionKind::Fun: {
      for (const Coercion& p : c.n().parts)
        if (!normal_top(p)) return false;
      return normal_top(c.n().a);
    }
    case CoercionKind::Tuple: {
      for (const Coercion& p : c.n().parts)
        if (!normal_top(p)) return false;
      return true;
    }
    case CoercionKind::RefProxy:
      return normal_top(c.n().a) && normal_top(c.n().b);
    case CoercionKind::RefMono:
      return true;
    default:
      return false;
  }
}

bool normal_final(const Coercion& c) {
  switch (c.kind()) {
    case CoercionKind::Fail:
      return true;
    case CoercionKind::Inject:
      return normal_middle(c.n().a) && c.n().type_a != kDyn;
    default:
      return normal_middle(c);
  }
}

bool normal_top(const Coercion& c) {
  if (c.kind() == CoercionKind::Project)
    return c.n().type_a != kDyn && normal_final(c.n().a);
  return normal_final(c);
}

}  // namespace

bool is_normal(const Coercion& c) { return normal_top(c); }

size_t coercion_size(const Coercion& c) {
  switch (c.kind()) {
    case CoercionKind::Identity:
      return 1;
    case CoercionKind::Project:
      return 1 + coercion_size(c.n().a);
    case CoercionKind::Fail:
      return 1;
    case CoercionKind::Inject:
      return 1 + coercion_size(c.n().a);
    case CoercionKind::Fun: {
      size_t s = 1 + coercion_size(c.n().a);
      for (const Coercion& p : c.n().parts) s += coercion_size(p);
      return s;
    }
    case CoercionKind::Tuple: {
      size_t s = 1;
      for (const Coercion& p : c.n().parts) s += coercion_size(p);
      return s;
    }
    case CoercionKind::RefProxy:
      return 1 + coercion_size(c.n().a) + coercion_size(c.n().b);
    case CoercionKind::RefMono:
      return 1;
  }
  return 0;
}

bool coercion_equal(const Coercion& x, const Coercion& y) {
  if (x.kind() != y.kind()) return false;
  if (x.is_identity()) return true;
  const CoercionNode& a = x.n();
  const CoercionNode& b = y.n();
  if (a.type_a != b.type_a || a.type_b != b.type_b || a.label != b.label ||
      a.vect != b.vect || a.mono_conflict != b.mono_conflict)
    return false;
  if (a.parts.size() != b.parts.size()) return false;
  for (size_t i = 0; i < a.parts.size(); ++i)
    if (!coercion_equal(a.parts[i], b.parts[i])) return false;
  return coercion_equal(a.a, b.a) && coercion_equal(a.b, b.b);
}

std::string show_coercion(const TypeTable& types, const Coercion& c) {
  switch (c.kind()) {
    case CoercionKind::Identity:
      return "ι";  // iota
    case CoercionKind::Project: {
      std::string head = types.show(c.n().type_a) + "?^" + c.n().label;
      if (c.n().a.is_identity()) return head;
      return "(" + head + " ; " + show_coercion(types, c.n().a) + ")";
    }
    case CoercionKind::Fail:
      return "⊥{" + types.show(c.n().type_a) + "," + c.n().label + "," +
             types.show(c.n().type_b) + "}";
    case CoercionKind::Inject: {
      std::string tail = types.show(c.n().type_a) + "!";
      if (c.n().a.is_identity()) return tail;
      return "(" + show_coercion(types, c.n().a) + " ; " + tail + ")";
    }
    case CoercionKind::Fun: {
      std::string s = "(";
      for (const Coercion& p : c.n().parts) s += show_coercion(types, p) + " ";
      return s + "→ " + show_coercion(types, c.n().a) + ")";
    }
    case CoercionKind::Tuple: {
      std::string s = "⟨";
      for (size_t i = 0; i < c.n().parts.size(); ++i) {
        if (i) s += " , ";
        s += show_coercion(types, c.n().parts[i]);
      }
      return s + "⟩";
    }
    case CoercionKind::RefProxy:
      return std::string(c.n().vect ? "Vect " : "Ref ") +
             show_coercion(types, c.n().a) + " " +
             show_coercion(types, c.n().b);
    case CoercionKind::RefMono:
      return std::string(c.n().vect ? "MVect " : "MRef ") +
             types.show(c.n().type_a);
  }
  return "?";
}

}  // namespace gradl
