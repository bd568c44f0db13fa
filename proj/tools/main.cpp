#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradl/driver.hpp"
#include "gradl/lattice.hpp"
#include "gradl/report.hpp"

namespace fs = std::filesystem;
using namespace gradl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct CommonFlags {
  std::string cast_rep = "coercions";
  std::string ref_rep = "monotonic";
  bool lazy_coercions = false;
  bool specialize = false;
  bool opt_dyn = false;

  PipelineOpts opts() const {
    PipelineOpts o;
    o.cast_rep = cast_rep == "type-based" ? CastRep::TypeBased : CastRep::Coercions;
    o.ref_rep = ref_rep == "proxied" ? RefRep::Proxied : RefRep::Monotonic;
    o.lazy_coercions = lazy_coercions;
    o.specialize = specialize;
    o.optimize_dyn = opt_dyn;
    return o;
  }
};

void add_mode_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--cast-rep", f.cast_rep, "Cast representation")
      ->check(CLI::IsMember({"type-based", "coercions"}))
      ->capture_default_str();
  cmd->add_option("--ref-rep", f.ref_rep, "Reference representation")
      ->check(CLI::IsMember({"proxied", "monotonic"}))
      ->capture_default_str();
  cmd->add_flag("--lazy-coercions", f.lazy_coercions,
                "Defer runtime coercion creation to the type-pair fast path");
  cmd->add_flag("--specialize", f.specialize,
                "Partially evaluate compile-time-known casts");
  cmd->add_flag("--optimize-dyn", f.opt_dyn,
                "Inline cast-and-eliminate patterns in dynamic code");
}

int print_compile_error(const std::string& file, const CompileError& e) {
  std::cerr << file << ":" << e.span.line << ":" << e.span.col << ": error: "
            << e.message << "\n";
  return 1;
}

// Rewrites the integer initializer of a top-level `(define size N)`.
std::string rewrite_size(const std::string& text, uint64_t size) {
  TypeTable tt;
  // Cheap textual pass: find the define form and replace its literal.
  std::string needle = "(define size ";
  size_t at = text.find(needle);
  if (at == std::string::npos) return text;
  size_t start = at + needle.size();
  size_t end = start;
  while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end])))
    ++end;
  return text.substr(0, start) + std::to_string(size) + text.substr(end);
}

int outcome_exit_code(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Result: return 0;
    case Outcome::Kind::Blame: return 2;
    case Outcome::Kind::DynError: return 3;
  }
  return 1;
}

int cmd_run(const std::string& file, const CommonFlags& flags, bool counters,
            const std::string& json_path) {
  std::string text;
  try {
    text = slurp(file);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  PipelineOpts opts = flags.opts();
  std::unique_ptr<Compiled> comp;
  try {
    comp = compile_text(text, file, opts);
  } catch (const CompileError& e) {
    return print_compile_error(file, e);
  }
  auto t0 = std::chrono::steady_clock::now();
  Evaluator ev(comp->types, comp->ir, opts.eval_mode());
  Outcome o = ev.run();
  auto t1 = std::chrono::steady_clock::now();
  std::cout << show_outcome(comp->types, ev.heap(), o) << "\n";
  if (counters) std::cout << o.counters.to_json() << "\n";
  if (!json_path.empty()) {
    RunReport r;
    r.benchmark = fs::path(file).stem().string();
    r.mode = opts;
    r.reps = 1;
    r.wall_time_mean_s = std::chrono::duration<double>(t1 - t0).count();
    r.counters = o.counters;
    r.outcome_kind = show_outcome_kind(o);
    r.printed = show_outcome(comp->types, ev.heap(), o);
    spit(json_path, report_to_json(r));
  }
  return outcome_exit_code(o);
}

int cmd_sample(const std::string& file, const std::string& percent, size_t count,
               uint64_t seed, const std::string& out_dir) {
  std::string text;
  try {
    text = slurp(file);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  double lo = 0, hi = 1;
  {
    size_t colon = percent.find(':');
    if (colon == std::string::npos) {
      std::cerr << "--percent expects lo:hi, e.g. 40:60\n";
      return 1;
    }
    lo = std::stod(percent.substr(0, colon)) / 100.0;
    hi = std::stod(percent.substr(colon + 1)) / 100.0;
  }
  try {
    TypeTable types;
    Program ast = parse_program(types, text, file, RefRep::Monotonic);
    typecheck(types, ast, RefRep::Monotonic);
    auto sites = collect_sites(types, ast);
    auto samples = sample_configs(types, sites, lo, hi, seed, count);
    fs::create_directories(out_dir);
    std::string stem = fs::path(file).stem().string();
    nlohmann::ordered_json manifest;
    manifest["benchmark"] = stem;
    manifest["site_count"] = sites.size();
    uint64_t total_nodes = 0;
    for (const auto& s : sites) total_nodes += types.node_count(s.full);
    manifest["type_node_count"] = total_nodes;
    manifest["seed"] = seed;
    manifest["percent_lo"] = lo;
    manifest["percent_hi"] = hi;
    manifest["samples"] = nlohmann::ordered_json::array();
    int pct = static_cast<int>(lo * 100 + 0.5);
    for (size_t k = 0; k < samples.size(); ++k) {
      Program conf = apply_config(ast, samples[k].chosen);
      std::string name = stem + "_p" + std::to_string(pct) + "_s" +
                         std::to_string(seed) + "_" + std::to_string(k) +
                         ".grift";
      spit((fs::path(out_dir) / name).string(), show_program(types, conf));
      nlohmann::ordered_json sj;
      sj["file"] = name;
      sj["realized_percent"] = samples[k].percent;
      manifest["samples"].push_back(sj);
    }
    spit((fs::path(out_dir) / (stem + "_manifest.json")).string(),
         manifest.dump(2));
    std::cout << "wrote " << samples.size() << " configurations to " << out_dir
              << "\n";
    return 0;
  } catch (const CompileError& e) {
    return print_compile_error(file, e);
  } catch (const SampleError& e) {
    std::cerr << "sample: " << e.what() << "\n";
    return 4;
  }
}

int cmd_bench(const std::string& dir, const std::string& modes_csv, int reps,
              const std::string& sizes_csv, uint64_t /*seed*/,
              const std::string& json_path) {
  std::vector<PipelineOpts> modes;
  {
    std::stringstream ss(modes_csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
      auto m = parse_mode(part);
      if (!m) {
        std::cerr << "bad mode: " << part << "\n";
        return 1;
      }
      modes.push_back(*m);
    }
  }
  std::vector<uint64_t> sizes;
  if (!sizes_csv.empty()) {
    std::stringstream ss(sizes_csv);
    std::string part;
    while (std::getline(ss, part, ',')) sizes.push_back(std::stoull(part));
  }
  if (sizes.empty()) sizes.push_back(0);  // 0 = leave the program unchanged

  std::vector<fs::path> files;
  for (const auto& ent : fs::directory_iterator(dir))
    if (ent.path().extension() == ".grift") files.push_back(ent.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no .grift files in " << dir << "\n";
    return 1;
  }

  std::vector<RunReport> reports;
  // (benchmark, mode) -> per-size cost counter for the growth fit
  std::map<std::pair<std::string, std::string>,
           std::vector<std::pair<uint64_t, double>>>
      fit_data;

  for (const fs::path& f : files) {
    std::string base_text = slurp(f.string());
    std::string bench = f.stem().string();
    for (const PipelineOpts& mode : modes) {
      for (uint64_t size : sizes) {
        RunReport r;
        r.benchmark = bench;
        r.mode = mode;
        r.size = size;
        r.reps = reps;
        std::string text = size ? rewrite_size(base_text, size) : base_text;
        try {
          auto comp = compile_text(text, f.string(), mode);
          double total = 0;
          Outcome last;
          std::string printed;
          for (int i = 0; i < reps; ++i) {
            Evaluator ev(comp->types, comp->ir, mode.eval_mode());
            auto t0 = std::chrono::steady_clock::now();
            last = ev.run();
            auto t1 = std::chrono::steady_clock::now();
            total += std::chrono::duration<double>(t1 - t0).count();
            printed = show_outcome(comp->types, ev.heap(), last);
          }
          r.wall_time_mean_s = total / reps;
          r.counters = last.counters;
          r.outcome_kind = show_outcome_kind(last);
          r.printed = printed;
          double cost = static_cast<double>(last.counters.ref_reads +
                                            last.counters.casts_executed);
          fit_data[{bench, mode_string(mode)}].push_back({size, cost});
        } catch (const CompileError& e) {
          r.outcome_kind = "failed";
          r.printed = e.message;
        } catch (const std::exception& e) {
          r.outcome_kind = "failed";
          r.printed = e.what();
        }
        reports.push_back(std::move(r));
        std::cout << bench << " " << mode_string(mode) << " n=" << size << " "
                  << reports.back().outcome_kind << " t="
                  << reports.back().wall_time_mean_s << "s\n";
      }
    }
  }

  std::vector<GrowthFit> fits;
  for (const auto& [key, points] : fit_data) {
    if (points.size() < 2) continue;
    std::vector<uint64_t> ns;
    std::vector<double> cs;
    for (const auto& [n, c] : points) {
      if (n == 0) continue;
      ns.push_back(n);
      cs.push_back(c);
    }
    if (ns.size() < 2) continue;
    GrowthFit fit = fit_growth(key.first, key.second,
                               "ref_reads+casts_executed", ns, cs);
    std::cout << "fit " << key.first << " " << key.second << " exponent="
              << fit.exponent << " r2=" << fit.r2 << "\n";
    fits.push_back(std::move(fit));
  }

  if (!json_path.empty()) spit(json_path, reports_to_json(reports, fits));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradually typed language runtime and benchmark harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "compile and evaluate a program");
  std::string run_file;
  CommonFlags run_flags;
  bool run_counters = false;
  std::string run_json;
  run->add_option("file", run_file, "source file")->required();
  add_mode_flags(run, run_flags);
  run->add_flag("--counters", run_counters, "print operation counters as JSON");
  run->add_option("--json", run_json, "write a run report to PATH");

  // sample
  auto* sample = app.add_subcommand(
      "sample", "sample migration-lattice configurations of a program");
  std::string sample_file, sample_percent = "0:100", sample_out = "samples";
  size_t sample_count = 1;
  uint64_t sample_seed = 1;
  sample->add_option("file", sample_file, "fully annotated source file")->required();
  sample->add_option("--percent", sample_percent, "bucket lo:hi in percent")
      ->capture_default_str();
  sample->add_option("--count", sample_count, "configurations to sample")
      ->capture_default_str();
  sample->add_option("--seed", sample_seed, "RNG seed")->capture_default_str();
  sample->add_option("--out", sample_out, "output directory")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "run a directory of benchmarks");
  std::string bench_dir, bench_json;
  std::string bench_modes = "coercions+monotonic";
  std::string bench_sizes;
  int bench_reps = 1;
  uint64_t bench_seed = 1;
  bench->add_option("dir", bench_dir, "directory of .grift programs")->required();
  bench->add_option("--modes", bench_modes, "comma-separated mode strings")
      ->capture_default_str();
  bench->add_option("--reps", bench_reps, "repetitions per run")
      ->capture_default_str();
  bench->add_option("--sizes", bench_sizes,
                    "comma-separated sizes substituted into (define size N)");
  bench->add_option("--seed", bench_seed, "RNG seed")->capture_default_str();
  bench->add_option("--json", bench_json, "write the report array to PATH");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_file, run_flags, run_counters, run_json);
    if (*sample)
      return cmd_sample(sample_file, sample_percent, sample_count, sample_seed,
                        sample_out);
    if (*bench)
      return cmd_bench(bench_dir, bench_modes, bench_reps, bench_sizes,
                       bench_seed, bench_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
