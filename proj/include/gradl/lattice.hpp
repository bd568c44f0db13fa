#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradl/ast.hpp"
#include "gradl/types.hpp"

namespace gradl {

struct SampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One explicit type annotation of a fully annotated program, together with
// the size of its lattice of less precise replacements. The lattice itself is
// indexed lazily; tests materialize it with enumerate_less_precise.
struct AnnotationSite {
  uint32_t id = 0;
  TypeId full{};
  uint64_t lattice_size = 0;
};

// Number of types less-or-equally precise than t: Dyn has one, a base type
// two, a constructor one (the whole-node Dyn) plus the product over children.
uint64_t count_less_precise(const TypeTable& types, TypeId t);

// k-th element of the lattice in the canonical order: index 0 is Dyn, the
// last index is t itself.
TypeId nth_less_precise(TypeTable& types, TypeId t, uint64_t k);

// Materializes the whole lattice; refuses when it exceeds cap.
std::vector<TypeId> enumerate_less_precise(TypeTable& types, TypeId t,
                                           uint64_t cap = 1'000'000);

// Walks the program in deterministic order and returns every explicit
// annotation. Sites whose lattice exceeds per_site_cap are refused.
std::vector<AnnotationSite> collect_sites(const TypeTable& types,
                                          const Program& program,
                                          uint64_t per_site_cap = 1'000'000);

struct ConfigSample {
  std::vector<TypeId> chosen;  // one per site, in site order
  double percent = 0;          // realized annotation ratio in [0,1]
  uint64_t seed = 0;
};

// Typed-node fraction: non-Dyn nodes of the chosen types over all type nodes
// of the full types.
double annotation_percentage(const TypeTable& types,
                             const std::vector<AnnotationSite>& sites,
                             const std::vector<TypeId>& chosen);

// Rejection sampling: per-site indices are uniform and independent, so the
// accepted configurations are uniform over everything in the [lo, hi] bucket.
// Deterministic for a given seed. Throws SampleError when the bucket cannot
// be hit within the attempt budget.
std::vector<ConfigSample> sample_configs(TypeTable& types,
                                         const std::vector<AnnotationSite>& sites,
                                         double lo, double hi, uint64_t seed,
                                         size_t count,
                                         uint64_t max_attempts = 2'000'000);

// Clone of the program with the chosen types substituted at each site.
Program apply_config(const Program& program,
                     const std::vector<TypeId>& chosen);

// Portable bounded uniform draw (rejection, no distribution objects).
uint64_t bounded_uniform(std::mt19937_64& rng, uint64_t n);

}  // namespace gradl
