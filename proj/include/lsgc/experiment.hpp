#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lsgc/analytics.hpp"
#include "lsgc/csv.hpp"
#include "lsgc/engine.hpp"
#include "lsgc/error.hpp"
#include "lsgc/policy.hpp"
#include "lsgc/rng.hpp"
#include "lsgc/workload.hpp"

namespace lsgc {

// Everything a batch of runs needs, filled from defaults, a key=value file,
// LSGC_* environment variables and command-line overrides, in that order.
struct ExperimentConfig {
  StoreConfig store;
  // "proportional" rescales gc_trigger_free and gc_batch with store size;
  // "fixed" uses them as given.
  std::string gc_reserve = "proportional";
  std::vector<double> fill_factors{0.8};
  std::vector<std::string> policies{"mdc"};
  WorkloadSpec workload;
  double write_multiplier = 100.0;
  std::uint64_t total_user_writes = 0;  // 0 = derive from write_multiplier
  double measure_window = 0.5;
  std::uint64_t seed = 1;
  std::uint32_t repetitions = 1;
  bool absorb_rewrites = false;
  bool timing = false;
  std::vector<std::uint32_t> sort_buffer_sizes{1, 2, 4, 8, 16, 32, 64};
  std::string output = "-";
  std::string cycle_trace;
  std::uint32_t threads = 0;  // 0 = one per hardware thread
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos
                                                                            : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("key '" + std::string(key) + "': expected a non-negative integer, got '" +
                      std::string(s) + "'");
  return v;
}

inline std::uint32_t parse_u32(std::string_view key, std::string_view s) {
  const std::uint64_t v = parse_uint(key, s);
  if (v > UINT32_MAX) throw ConfigError("key '" + std::string(key) + "': value too large");
  return static_cast<std::uint32_t>(v);
}

inline double parse_real(std::string_view key, std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                      std::string(s) + "'");
  return v;
}

// Byte counts with an optional binary suffix: 4096, 2M, 2MiB, 256MB, 2G.
inline std::uint64_t parse_bytes(std::string_view key, std::string_view s) {
  std::size_t digits = 0;
  while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
  std::string unit(s.substr(digits));
  for (char& c : unit) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::uint64_t scale = 1;
  if (unit.empty() || unit == "B") scale = 1;
  else if (unit == "K" || unit == "KB" || unit == "KIB") scale = kKiB;
  else if (unit == "M" || unit == "MB" || unit == "MIB") scale = kMiB;
  else if (unit == "G" || unit == "GB" || unit == "GIB") scale = kGiB;
  else throw ConfigError("key '" + std::string(key) + "': unknown size unit '" + unit + "'");
  return parse_uint(key, s.substr(0, digits)) * scale;
}

inline bool parse_flag(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false, got '" +
                    std::string(s) + "'");
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::string default_text;
  std::string help;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

inline const std::vector<ConfigKey>& config_schema() {
  using namespace detail;
  using C = ExperimentConfig;
  static const std::vector<ConfigKey> kSchema = {
      {"capacity", "2G", "physical store size in bytes (K/M/G suffixes)",
       [](C& c, std::string_view v) { c.store.capacity = parse_bytes("capacity", v); }},
      {"page_size", "4096", "page size in bytes",
       [](C& c, std::string_view v) { c.store.page_size = parse_bytes("page_size", v); }},
      {"segment_size", "2M", "segment size in bytes",
       [](C& c, std::string_view v) { c.store.segment_size = parse_bytes("segment_size", v); }},
      {"fill_factors", "0.8", "comma-separated fill factors, each in (0, 1)",
       [](C& c, std::string_view v) {
         c.fill_factors.clear();
         for (const auto& f : split_list(v)) c.fill_factors.push_back(parse_real("fill_factors", f));
         if (c.fill_factors.empty()) throw ConfigError("key 'fill_factors': empty list");
       }},
      {"policies", "mdc",
       "comma-separated policies: age, greedy, cost_benefit, cost_benefit_text, multi_log, "
       "multi_log_opt, mdc, mdc_opt, mdc[_opt]_no_sep_user, mdc[_opt]_no_sep_user_gc",
       [](C& c, std::string_view v) {
         c.policies = split_list(v);
         if (c.policies.empty()) throw ConfigError("key 'policies': empty list");
         for (const auto& p : c.policies) parse_policy(p);
       }},
      {"workload", "uniform", "uniform, hotcold, zipfian or trace",
       [](C& c, std::string_view v) { c.workload.kind = parse_workload_kind(trim(v)); }},
      {"hot_update_fraction", "0.8", "hotcold: share m of updates sent to 1 - m of the pages",
       [](C& c, std::string_view v) {
         c.workload.hot_update_fraction = parse_real("hot_update_fraction", v);
       }},
      {"zipf_theta", "0.99", "zipfian exponent",
       [](C& c, std::string_view v) { c.workload.zipf_theta = parse_real("zipf_theta", v); }},
      {"trace_path", "", "trace file for the trace workload",
       [](C& c, std::string_view v) { c.workload.trace_path = std::string(v); }},
      {"gc_reserve", "proportional", "proportional or fixed (see gc_trigger_free, gc_batch)",
       [](C& c, std::string_view v) {
         if (v != "proportional" && v != "fixed")
           throw ConfigError("key 'gc_reserve': expected proportional or fixed");
         c.gc_reserve = std::string(v);
       }},
      {"gc_trigger_free", "32", "free segments below which cleaning starts (gc_reserve=fixed)",
       [](C& c, std::string_view v) {
         c.store.gc_trigger_free = parse_u32("gc_trigger_free", v);
       }},
      {"gc_batch", "64", "segments cleaned per cycle (gc_reserve=fixed)",
       [](C& c, std::string_view v) { c.store.gc_batch = parse_u32("gc_batch", v); }},
      {"sort_buffer_segments", "16", "staging buffer size in segments, per sorted stream",
       [](C& c, std::string_view v) {
         c.store.sort_buffer_segments = parse_u32("sort_buffer_segments", v);
       }},
      {"sort_buffer_sizes", "1,2,4,8,16,32,64", "buffer sizes visited by sweep-sortbuffer",
       [](C& c, std::string_view v) {
         c.sort_buffer_sizes.clear();
         for (const auto& s : split_list(v))
           c.sort_buffer_sizes.push_back(parse_u32("sort_buffer_sizes", s));
         if (c.sort_buffer_sizes.empty()) throw ConfigError("key 'sort_buffer_sizes': empty list");
       }},
      {"absorb_rewrites", "false", "a rewrite of a staged page replaces the staged copy",
       [](C& c, std::string_view v) { c.absorb_rewrites = parse_flag("absorb_rewrites", v); }},
      {"write_multiplier", "100", "user writes per run as a multiple of the logical page count",
       [](C& c, std::string_view v) {
         c.write_multiplier = parse_real("write_multiplier", v);
         if (c.write_multiplier < 0) throw ConfigError("key 'write_multiplier': negative");
       }},
      {"total_user_writes", "0", "explicit user write count per run (0 = use write_multiplier)",
       [](C& c, std::string_view v) {
         c.total_user_writes = parse_uint("total_user_writes", v);
       }},
      {"measure_window", "0.5", "trailing fraction of user writes that is measured",
       [](C& c, std::string_view v) {
         c.measure_window = parse_real("measure_window", v);
         if (!(c.measure_window > 0.0 && c.measure_window <= 1.0))
           throw ConfigError("key 'measure_window': must lie in (0, 1]");
       }},
      {"seed", "1", "seed of the first repetition",
       [](C& c, std::string_view v) { c.seed = parse_uint("seed", v); }},
      {"repetitions", "1", "runs per point; repetition r uses seed + r",
       [](C& c, std::string_view v) {
         c.repetitions = parse_u32("repetitions", v);
         if (c.repetitions == 0) throw ConfigError("key 'repetitions': must be at least 1");
       }},
      {"timing", "false", "fill runtime_seconds (otherwise 0, keeping output reproducible)",
       [](C& c, std::string_view v) { c.timing = parse_flag("timing", v); }},
      {"output", "-", "CSV destination, - for stdout",
       [](C& c, std::string_view v) { c.output = std::string(v); }},
      {"cycle_trace", "", "optional per-cycle trace CSV (run index appended for batches)",
       [](C& c, std::string_view v) { c.cycle_trace = std::string(v); }},
      {"threads", "0", "worker threads for sweeps, 0 = hardware threads",
       [](C& c, std::string_view v) { c.threads = parse_u32("threads", v); }},
  };
  return kSchema;
}

inline void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : config_schema()) {
    if (k.name == key) {
      k.set(cfg, detail::trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

// Applies `key=value` lines; '#' starts a comment line.
inline void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + t + "'", line_no);
    try {
      set_config_value(cfg, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    apply_config_text(cfg, in);
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline std::string env_name(std::string_view key) {
  std::string out = "LSGC_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// LSGC_<KEY> overrides any key, e.g. LSGC_FILL_FACTORS=0.7,0.8.
inline void apply_environment(ExperimentConfig& cfg,
                              const std::function<const char*(const char*)>& getenv_fn =
                                  [](const char* n) { return std::getenv(n); }) {
  for (const auto& k : config_schema()) {
    const std::string name = env_name(k.name);
    if (const char* v = getenv_fn(name.c_str())) {
      try {
        k.set(cfg, detail::trim(v));
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

// Small store and short runs for smoke tests.
inline void apply_quick_profile(ExperimentConfig& cfg) {
  cfg.store.capacity = 256 * kMiB;
  cfg.write_multiplier = 20.0;
  // Staging buffers shrink with the store, 16 segments per 2 GiB.
  cfg.store.sort_buffer_segments = 2;
}

inline std::string schema_help() {
  std::ostringstream out;
  out << "Config keys (key=value file, LSGC_<KEY> environment, or --set key=value):\n";
  for (const auto& k : config_schema())
    out << "  " << std::left << std::setw(22) << k.name << " " << k.help << " [default: "
        << (k.default_text.empty() ? "none" : k.default_text) << "]\n";
  return out.str();
}

// ---- runs ----

struct Job {
  RunSpec spec;
  std::string policy_name;
  std::string workload_name;
  double theta_or_m = 0.0;
  double fill = 0.0;
  std::uint32_t sort_buffer = 0;
  std::string trace_file;
};

struct ResultRow {
  Job job;
  WampReport report;
  double runtime_seconds = 0.0;
};

inline StoreConfig store_for(const ExperimentConfig& cfg, double fill) {
  StoreConfig s = cfg.store;
  s.fill_factor = fill;
  if (cfg.gc_reserve == "proportional") s = s.with_proportional_reserve();
  s.validate();
  return s;
}

// One job per (policy, fill factor, repetition), in that nesting order.
inline std::vector<Job> plan_jobs(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (const auto& name : cfg.policies) {
    const PolicyConfig policy = parse_policy(name);
    for (double fill : cfg.fill_factors) {
      for (std::uint32_t r = 0; r < cfg.repetitions; ++r) {
        Job j;
        j.spec.config = store_for(cfg, fill);
        j.spec.policy = policy;
        j.spec.workload = cfg.workload;
        j.spec.write_multiplier = cfg.write_multiplier;
        if (cfg.total_user_writes > 0) j.spec.total_user_writes = cfg.total_user_writes;
        j.spec.measure_window = cfg.measure_window;
        j.spec.seed = cfg.seed + r;
        j.spec.absorb_rewrites = cfg.absorb_rewrites;
        j.policy_name = policy.name();
        j.workload_name = to_string(cfg.workload.kind);
        j.theta_or_m = cfg.workload.skew_parameter();
        j.fill = fill;
        j.sort_buffer = j.spec.config.sort_buffer_segments;
        jobs.push_back(std::move(j));
      }
    }
  }
  return jobs;
}

inline std::string cycle_trace_path(const std::string& base, std::size_t index, std::size_t count) {
  if (count <= 1) return base;
  return base + "." + std::to_string(index);
}

// Runs jobs on a worker pool. Results keep job order; the first failure in
// job order is rethrown.
inline std::vector<ResultRow> run_jobs(std::vector<Job> jobs, std::uint32_t threads,
                                       bool timing, const std::string& cycle_trace = "") {
  const std::size_t n = jobs.size();
  std::vector<ResultRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        Job& job = jobs[i];
        std::unique_ptr<std::ofstream> trace;
        if (!cycle_trace.empty()) {
          const std::string path = cycle_trace_path(cycle_trace, i, n);
          trace = std::make_unique<std::ofstream>(path, std::ios::binary);
          if (!*trace) throw ConfigError("cannot write cycle trace: " + path);
          *trace << "cycle,u_now,victim,emptiness\n";
          std::ofstream* t = trace.get();
          job.spec.cycle_sink = [t](const CycleRecord& rec) {
            for (std::size_t v = 0; v < rec.victims.size(); ++v)
              *t << rec.cycle << ',' << rec.u_now << ',' << rec.victims[v] << ','
                 << format_double(rec.emptiness[v]) << '\n';
          };
        }
        const auto start = std::chrono::steady_clock::now();
        const WampReport report = run(job.spec);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        job.spec.cycle_sink = nullptr;
        rows[i] = ResultRow{job, report, timing ? secs : 0.0};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::uint32_t workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<std::uint32_t>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

inline const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> kColumns = {
      "policy",          "workload",    "theta_or_m",     "fill_factor",
      "user_writes",     "gc_writes",   "wamp_cumulative", "wamp_window",
      "avg_E_at_clean",  "cleanings",   "runtime_seconds"};
  return kColumns;
}

inline std::vector<std::string> result_fields(const ResultRow& r) {
  return {r.job.policy_name,
          r.job.workload_name,
          format_double(r.job.theta_or_m),
          format_double(r.job.fill),
          std::to_string(r.report.user_writes),
          std::to_string(r.report.gc_writes),
          format_double(r.report.wamp_cumulative),
          format_double(r.report.wamp_window),
          format_double(r.report.avg_E_at_clean),
          std::to_string(r.report.cleanings),
          format_double(r.runtime_seconds)};
}

inline void write_results(std::ostream& out, const std::vector<ResultRow>& rows,
                          bool with_buffer_column = false) {
  std::vector<std::string> header = result_columns();
  if (with_buffer_column) header.insert(header.begin(), "sort_buffer_segments");
  write_csv_row(out, header);
  for (const auto& r : rows) {
    auto fields = result_fields(r);
    if (with_buffer_column) fields.insert(fields.begin(), std::to_string(r.job.sort_buffer));
    write_csv_row(out, fields);
  }
}

// Writes to cfg.output, or to `fallback` when the output is "-".
template <typename Fn>
void with_output(const ExperimentConfig& cfg, std::ostream& fallback, Fn&& fn) {
  if (cfg.output.empty() || cfg.output == "-") {
    fn(fallback);
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + cfg.output);
  fn(out);
}

inline std::vector<ResultRow> cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.workload.kind == WorkloadKind::kTrace)
    throw ConfigError("workload=trace is run with the replay command");
  cfg.workload.validate();
  auto rows = run_jobs(plan_jobs(cfg), cfg.threads, cfg.timing, cfg.cycle_trace);
  with_output(cfg, out, [&](std::ostream& o) { write_results(o, rows); });
  return rows;
}

inline std::vector<ResultRow> cmd_replay(ExperimentConfig cfg, const std::string& trace_path,
                                         std::ostream& out) {
  for (const auto& name : cfg.policies) {
    const PolicyConfig p = parse_policy(name);
    if (p.uses_oracle())
      throw ConfigError("policy " + p.name() +
                        " needs exact page update frequencies, which a trace cannot provide");
  }
  cfg.workload.kind = WorkloadKind::kTrace;
  cfg.workload.trace_path = trace_path;
  auto jobs = plan_jobs(cfg);
  std::map<double, std::shared_ptr<const std::vector<PageId>>> parsed;
  for (auto& j : jobs) {
    auto& ids = parsed[j.fill];
    if (!ids) {
      try {
        ids = std::make_shared<const std::vector<PageId>>(
            read_trace(trace_path, j.spec.config.logical_pages()));
      } catch (const ParseError& e) {
        throw ConfigError(trace_path + ": " + e.what());
      }
    }
    j.spec.trace = *ids;
    j.theta_or_m = 0.0;
  }
  auto rows = run_jobs(std::move(jobs), cfg.threads, cfg.timing, cfg.cycle_trace);
  with_output(cfg, out, [&](std::ostream& o) { write_results(o, rows); });
  return rows;
}

inline std::vector<ResultRow> cmd_sweep_sortbuffer(const ExperimentConfig& cfg,
                                                   std::ostream& out) {
  std::vector<Job> jobs;
  for (std::uint32_t size : cfg.sort_buffer_sizes) {
    ExperimentConfig c = cfg;
    c.store.sort_buffer_segments = size;
    for (auto& j : plan_jobs(c)) jobs.push_back(std::move(j));
  }
  auto rows = run_jobs(std::move(jobs), cfg.threads, cfg.timing, cfg.cycle_trace);
  with_output(cfg, out, [&](std::ostream& o) { write_results(o, rows, true); });
  return rows;
}

// ---- analysis ----

inline void cmd_analyze_table1(const std::vector<double>& fills, bool csv, std::ostream& out) {
  const auto points = table1(fills);
  if (csv) {
    write_csv_row(out, {"F", "one_minus_F", "E", "cost", "R", "wamp"});
    for (const auto& p : points)
      write_csv_row(out, {format_double(p.fill), format_double(1.0 - p.fill),
                          format_double(p.emptiness), format_double(p.cost), format_double(p.r),
                          format_double(p.wamp)});
    return;
  }
  out << "    F    1-F       E     cost      R     wamp\n";
  out << std::fixed;
  for (const auto& p : points)
    out << std::setprecision(3) << std::setw(6) << p.fill << std::setw(7) << 1.0 - p.fill
        << std::setprecision(4) << std::setw(8) << p.emptiness << std::setprecision(3)
        << std::setw(9) << p.cost << std::setw(7) << p.r << std::setw(9) << p.wamp << '\n';
  out.unsetf(std::ios::fixed);
}

struct SplitRow {
  double fill = 0.0;
  double m = 0.0;
  SplitOptimum optimum;
  double hot60 = 0.0;
  double hot40 = 0.0;
};

inline std::vector<SplitRow> analyze_split(double fill, const std::vector<double>& ms) {
  std::vector<SplitRow> rows;
  for (double m : ms) {
    if (!(m >= 0.5 && m < 1.0)) throw ConfigError("m must lie in [0.5, 1)");
    SplitRow r;
    r.fill = fill;
    r.m = m;
    r.optimum = optimize_split(fill, {1.0 - m, m}, {m, 1.0 - m});
    r.hot60 = split_cost(hot_cold_split(fill, m, 0.6));
    r.hot40 = split_cost(hot_cold_split(fill, m, 0.4));
    rows.push_back(r);
  }
  return rows;
}

inline std::string split_label(double m) {
  const int hot = static_cast<int>(std::lround(m * 100));
  return std::to_string(hot) + ":" + std::to_string(100 - hot);
}

inline void cmd_analyze_split(double fill, const std::vector<double>& ms, bool csv,
                              std::ostream& out) {
  const auto rows = analyze_split(fill, ms);
  if (csv) {
    write_csv_row(out, {"F", "split", "min_cost", "g_hot", "closed_form_g_hot", "hot60",
                        "hot40"});
    for (const auto& r : rows)
      write_csv_row(out, {format_double(r.fill), split_label(r.m),
                          format_double(r.optimum.cost), format_double(r.optimum.g1),
                          format_double(r.optimum.closed_form_g1), format_double(r.hot60),
                          format_double(r.hot40)});
    return;
  }
  out << "    F  split  MinCost   g_hot  closed_g  Hot:60%  Hot:40%\n";
  out << std::fixed;
  for (const auto& r : rows)
    out << std::setprecision(2) << std::setw(5) << r.fill << std::setw(7) << split_label(r.m)
        << std::setprecision(3) << std::setw(9) << r.optimum.cost << std::setprecision(4)
        << std::setw(8) << r.optimum.g1 << std::setw(10) << r.optimum.closed_form_g1
        << std::setprecision(3) << std::setw(9) << r.hot60 << std::setw(9) << r.hot40 << '\n';
  out.unsetf(std::ios::fixed);
}

struct LemmaOutcome {
  std::uint64_t trials = 0;
  std::uint64_t passes = 0;
  std::uint64_t failures = 0;
};

// Draws positive dyadic values (k / 1024) so that every pairing sum is exact
// and comparisons need no tolerance.
inline std::vector<double> random_positive_dyadics(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(1 + rng.below(1u << 20)) / 1024.0;
  return v;
}

// Largest pairing sum over every permutation of y.
inline double brute_force_pairing_max(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size()) throw ConfigError("pairing needs sequences of equal length");
  std::vector<std::size_t> perm(y.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = -std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[perm[i]];
    best = std::max(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Random instances of length 1..max_len checked against brute force.
inline LemmaOutcome check_pairing_lemma(std::uint64_t trials, std::size_t max_len,
                                        std::uint64_t seed) {
  if (max_len == 0 || max_len > 9) throw ConfigError("lemma length must lie in [1, 9]");
  Rng rng(seed);
  LemmaOutcome out;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.below(max_len);
    const auto x = random_positive_dyadics(rng, n);
    const auto y = random_positive_dyadics(rng, n);
    ++out.trials;
    if (max_pairing_sum(x, y) == brute_force_pairing_max(x, y)) ++out.passes;
    else ++out.failures;
  }
  return out;
}

inline LemmaOutcome cmd_analyze_lemma(std::uint64_t trials, std::size_t max_len,
                                      std::uint64_t seed, std::ostream& out) {
  const auto r = check_pairing_lemma(trials, max_len, seed);
  out << "trials=" << r.trials << " passes=" << r.passes << " failures=" << r.failures << '\n';
  return r;
}

}  // namespace lsgc
