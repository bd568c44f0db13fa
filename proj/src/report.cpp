#include "gradl/report.hpp"

#include <cmath>

#include <json.hpp>

namespace gradl {

using nlohmann::json;
using nlohmann::ordered_json;

std::string mode_string(const PipelineOpts& m) {
  std::string s = m.cast_rep == CastRep::TypeBased ? "type-based" : "coercions";
  s += m.ref_rep == RefRep::Proxied ? "+proxied" : "+monotonic";
  if (m.lazy_coercions) s += "+lazy";
  if (m.specialize) s += "+spec";
  if (m.optimize_dyn) s += "+optdyn";
  return s;
}

std::optional<PipelineOpts> parse_mode(const std::string& s) {
  PipelineOpts m;
  size_t pos = 0;
  bool have_cast = false, have_ref = false;
  while (pos <= s.size()) {
    size_t next = s.find('+', pos);
    std::string part = s.substr(pos, next == std::string::npos ? next : next - pos);
    if (part == "type-based") { m.cast_rep = CastRep::TypeBased; have_cast = true; }
    else if (part == "coercions") { m.cast_rep = CastRep::Coercions; have_cast = true; }
    else if (part == "proxied") { m.ref_rep = RefRep::Proxied; have_ref = true; }
    else if (part == "monotonic") { m.ref_rep = RefRep::Monotonic; have_ref = true; }
    else if (part == "lazy") m.lazy_coercions = true;
    else if (part == "spec") m.specialize = true;
    else if (part == "optdyn") m.optimize_dyn = true;
    else return std::nullopt;
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (!have_cast || !have_ref) return std::nullopt;
  return m;
}

GrowthFit fit_growth(const std::string& benchmark, const std::string& mode,
                     const std::string& counter,
                     const std::vector<uint64_t>& sizes,
                     const std::vector<double>& counts) {
  GrowthFit f;
  f.benchmark = benchmark;
  f.mode = mode;
  f.counter = counter;
  f.sizes = sizes;
  size_t n = sizes.size();
  if (n < 2) return f;
  double sx = 0, sy = 0;
  std::vector<double> xs(n), ys(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = std::log(static_cast<double>(sizes[i]));
    ys[i] = std::log(counts[i] > 0 ? counts[i] : 1.0);
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  f.exponent = sxx > 0 ? sxy / sxx : 0;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

namespace {

ordered_json counters_json(const Counters& c) {
  return ordered_json::parse(c.to_json());
}

Counters counters_from(const json& j) {
  Counters c;
  c.casts_executed = j.at("casts_executed");
  c.coercions_composed = j.at("coercions_composed");
  c.coercions_created_at_runtime = j.at("coercions_created_at_runtime");
  c.proxies_allocated = j.at("proxies_allocated");
  c.max_ref_proxy_depth = j.at("max_ref_proxy_depth");
  c.max_fun_proxy_depth = j.at("max_fun_proxy_depth");
  c.ref_reads = j.at("ref_reads");
  c.ref_writes = j.at("ref_writes");
  c.rtti_updates = j.at("rtti_updates");
  c.heap_evolve_steps = j.at("heap_evolve_steps");
  return c;
}

ordered_json report_json(const RunReport& r) {
  ordered_json j;
  j["schema_version"] = 1;
  j["benchmark"] = r.benchmark;
  j["mode"] = mode_string(r.mode);
  j["size"] = r.size;
  j["reps"] = r.reps;
  j["wall_time_mean_s"] = r.wall_time_mean_s;
  j["counters"] = counters_json(r.counters);
  j["outcome"] = r.outcome_kind;
  j["printed"] = r.printed;
  return j;
}

}  // namespace

std::string report_to_json(const RunReport& r) { return report_json(r).dump(); }

RunReport report_from_json(const std::string& text) {
  json j = json::parse(text);
  RunReport r;
  r.benchmark = j.at("benchmark");
  auto m = parse_mode(j.at("mode"));
  if (!m) throw std::runtime_error("bad mode string in report");
  r.mode = *m;
  r.size = j.at("size");
  r.reps = j.at("reps");
  r.wall_time_mean_s = j.at("wall_time_mean_s");
  r.counters = counters_from(j.at("counters"));
  r.outcome_kind = j.at("outcome");
  r.printed = j.at("printed");
  return r;
}

std::string reports_to_json(const std::vector<RunReport>& rs,
                            const std::vector<GrowthFit>& fits) {
  ordered_json j;
  j["schema_version"] = 1;
  j["runs"] = ordered_json::array();
  for (const RunReport& r : rs) j["runs"].push_back(report_json(r));
  j["fits"] = ordered_json::array();
  for (const GrowthFit& f : fits) {
    ordered_json g;
    g["benchmark"] = f.benchmark;
    g["mode"] = f.mode;
    g["counter"] = f.counter;
    g["sizes"] = f.sizes;
    g["exponent"] = f.exponent;
    g["r2"] = f.r2;
    j["fits"].push_back(g);
  }
  return j.dump(2);
}

}  // namespace gradl
