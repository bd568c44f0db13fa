#include "gradl/lattice.hpp"

#include <cassert>
#include <functional>

namespace gradl {

uint64_t count_less_precise(const TypeTable& tt, TypeId t) {
  const TypeNode& n = tt.node(t);
  switch (n.head) {
    case TypeHead::Dyn:
      return 1;
    case TypeHead::Int:
    case TypeHead::Bool:
    case TypeHead::Float:
    case TypeHead::Unit:
      return 2;
    default: {
      uint64_t prod = 1;
      for (TypeId k : n.kids) {
        uint64_t c = count_less_precise(tt, k);
        if (prod > UINT64_MAX / c) return UINT64_MAX;  // saturate
        prod *= c;
      }
      return prod == UINT64_MAX ? UINT64_MAX : prod + 1;
    }
  }
}

TypeId nth_less_precise(TypeTable& tt, TypeId t, uint64_t k) {
  const TypeNode n = tt.node(t);  // copy; interning below can reallocate
  switch (n.head) {
    case TypeHead::Dyn:
      assert(k == 0);
      return kDyn;
    case TypeHead::Int:
    case TypeHead::Bool:
    case TypeHead::Float:
    case TypeHead::Unit:
      return k == 0 ? kDyn : t;
    default: {
      if (k == 0) return kDyn;
      uint64_t rest = k - 1;  // mixed-radix over the children
      std::vector<TypeId> kids;
      kids.reserve(n.kids.size());
      for (TypeId kid : n.kids) {
        uint64_t radix = count_less_precise(tt, kid);
        kids.push_back(nth_less_precise(tt, kid, rest % radix));
        rest /= radix;
      }
      assert(rest == 0);
      return tt.intern(n.head, std::move(kids));
    }
  }
}

std::vector<TypeId> enumerate_less_precise(TypeTable& tt, TypeId t, uint64_t cap) {
  uint64_t n = count_less_precise(tt, t);
  if (n > cap)
    throw SampleError("lattice for " + tt.show(t) + " has " + std::to_string(n) +
                      " elements, over the cap of " + std::to_string(cap));
  std::vector<TypeId> out;
  out.reserve(n);
  for (uint64_t k = 0; k < n; ++k) out.push_back(nth_less_precise(tt, t, k));
  return out;
}

namespace {

// Visits every explicit annotation slot of the program in a fixed order.
void walk_annotations(Program& p, const std::function<void(std::optional<TypeId>&)>& f) {
  std::function<void(AstPtr&)> walk = [&](AstPtr& n) {
    if (!n) return;
    if (n->kind == AstKind::Lambda) {
      for (Param& pa : n->params)
        if (pa.anno) f(pa.anno);
      if (n->ret_anno) f(n->ret_anno);
    } else if (n->kind == AstKind::Let) {
      for (Binding& b : n->binds)
        if (b.anno) f(b.anno);
    } else if (n->kind == AstKind::Ascribe) {
      f(n->anno);
    }
    for (Binding& b : n->binds) walk(b.init);
    for (AstPtr& k : n->kids) walk(k);
  };
  for (Define& d : p.defines) {
    for (Param& pa : d.params)
      if (pa.anno) f(pa.anno);
    if (d.ret_anno) f(d.ret_anno);
    walk(d.body);
  }
  for (AstPtr& e : p.exprs) walk(e);
}

}  // namespace

std::vector<AnnotationSite> collect_sites(const TypeTable& tt,
                                          const Program& program,
                                          uint64_t per_site_cap) {
  std::vector<AnnotationSite> sites;
  Program& p = const_cast<Program&>(program);  // read-only visit
  walk_annotations(p, [&](std::optional<TypeId>& slot) {
    AnnotationSite s;
    s.id = static_cast<uint32_t>(sites.size());
    s.full = *slot;
    s.lattice_size = count_less_precise(tt, *slot);
    if (s.lattice_size > per_site_cap)
      throw SampleError("annotation lattice too large (" +
                        std::to_string(s.lattice_size) + " elements) for " +
                        tt.show(*slot));
    sites.push_back(s);
  });
  return sites;
}

double annotation_percentage(const TypeTable& tt,
                             const std::vector<AnnotationSite>& sites,
                             const std::vector<TypeId>& chosen) {
  assert(sites.size() == chosen.size());
  uint64_t total = 0;
  uint64_t typed = 0;
  for (size_t i = 0; i < sites.size(); ++i) {
    total += tt.node_count(sites[i].full);
    typed += tt.typed_node_count(chosen[i]);
  }
  if (total == 0) return 1.0;
  return static_cast<double>(typed) / static_cast<double>(total);
}

uint64_t bounded_uniform(std::mt19937_64& rng, uint64_t n) {
  assert(n > 0);
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

std::vector<ConfigSample> sample_configs(TypeTable& tt,
                                         const std::vector<AnnotationSite>& sites,
                                         double lo, double hi, uint64_t seed,
                                         size_t count, uint64_t max_attempts) {
  std::mt19937_64 rng(seed);
  std::vector<ConfigSample> out;
  uint64_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > max_attempts)
      throw SampleError("no configuration in bucket [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "] after " +
                        std::to_string(max_attempts) + " attempts");
    ConfigSample s;
    s.seed = seed;
    s.chosen.reserve(sites.size());
    for (const AnnotationSite& site : sites)
      s.chosen.push_back(
          nth_less_precise(tt, site.full, bounded_uniform(rng, site.lattice_size)));
    s.percent = annotation_percentage(tt, sites, s.chosen);
    if (s.percent < lo || s.percent > hi) continue;
    out.push_back(std::move(s));
  }
  return out;
}

Program apply_config(const Program& program, const std::vector<TypeId>& chosen) {
  Program p = clone_program(program);
  size_t i = 0;
  walk_annotations(p, [&](std::optional<TypeId>& slot) {
    assert(i < chosen.size());
    slot = chosen[i++];
  });
  assert(i == chosen.size());
  return p;
}

}  // namespace gradl
