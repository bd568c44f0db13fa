#pragma once

#include <cstdint>
#include <string>

namespace gradl {

// Operation tallies collected during a run. All fields are monotone while a
// program executes and are reset between runs. These carry the measurement
// burden of the harness; wall time is reported but never asserted on.
struct Counters {
  uint64_t casts_executed = 0;
  uint64_t coercions_composed = 0;
  uint64_t coercions_created_at_runtime = 0;
  uint64_t proxies_allocated = 0;
  uint64_t max_ref_proxy_depth = 0;
  uint64_t max_fun_proxy_depth = 0;
  uint64_t ref_reads = 0;
  uint64_t ref_writes = 0;
  uint64_t rtti_updates = 0;
  uint64_t heap_evolve_steps = 0;

  void reset() { *this = Counters{}; }

  // Flat JSON object with exactly these field names.
  std::string to_json() const;
};

}  // namespace gradl
