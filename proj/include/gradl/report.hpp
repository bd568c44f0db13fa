#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gradl/counters.hpp"
#include "gradl/driver.hpp"

namespace gradl {

// Mode strings: "<cast-rep>+<ref-rep>[+lazy][+spec][+optdyn]", e.g.
// "coercions+monotonic+lazy" or "type-based+proxied".
std::string mode_string(const PipelineOpts& m);
std::optional<PipelineOpts> parse_mode(const std::string& s);

struct RunReport {
  std::string benchmark;
  PipelineOpts mode;
  uint64_t size = 0;
  int reps = 1;
  double wall_time_mean_s = 0;
  Counters counters;
  std::string outcome_kind;  // result | blame | error | failed
  std::string printed;
};

struct GrowthFit {
  std::string benchmark;
  std::string mode;
  std::string counter;
  std::vector<uint64_t> sizes;
  double exponent = 0;
  double r2 = 0;
};

// Least-squares slope of log(count) against log(size).
GrowthFit fit_growth(const std::string& benchmark, const std::string& mode,
                     const std::string& counter,
                     const std::vector<uint64_t>& sizes,
                     const std::vector<double>& counts);

std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

std::string reports_to_json(const std::vector<RunReport>& rs,
                            const std::vector<GrowthFit>& fits);

}  // namespace gradl
