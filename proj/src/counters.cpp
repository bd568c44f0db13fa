#include "gradl/counters.hpp"

#include <json.hpp>

namespace gradl {

std::string Counters::to_json() const {
  nlohmann::ordered_json j;
  j["casts_executed"] = casts_executed;
  j["coercions_composed"] = coercions_composed;
  j["coercions_created_at_runtime"] = coercions_created_at_runtime;
  j["proxies_allocated"] = proxies_allocated;
  j["max_ref_proxy_depth"] = max_ref_proxy_depth;
  j["max_fun_proxy_depth"] = max_fun_proxy_depth;
  j["ref_reads"] = ref_reads;
  j["ref_writes"] = ref_writes;
  j["rtti_updates"] = rtti_updates;
  j["heap_evolve_steps"] = heap_evolve_steps;
  return j.dump();
}

}  // namespace gradl
