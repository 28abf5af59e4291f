// Command-line front end: simulate, replay, sweep-sortbuffer and analyze.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime fault
// (cleaning livelock, broken invariant, failed lemma check).

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsgc/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Options shared by the run commands. Each flag maps onto a config key and
// is applied after the config file and LSGC_* environment variables.
struct RunOptions {
  std::string config_file;
  std::vector<std::string> sets;
  bool quick = false;
  bool timing = false;
  std::string policies, fills, workload, m, theta, seed, output, threads, repetitions;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("-c,--config", o.config_file, "key=value config file");
  cmd->add_option("--set", o.sets, "override a config key, key=value (repeatable)");
  cmd->add_flag("--quick", o.quick, "quick profile: 256M store, 20x writes");
  cmd->add_flag("--timing", o.timing, "record runtime_seconds");
  cmd->add_option("-p,--policies", o.policies, "comma-separated policies");
  cmd->add_option("-F,--fill-factors", o.fills, "comma-separated fill factors");
  cmd->add_option("-w,--workload", o.workload, "uniform, hotcold or zipfian");
  cmd->add_option("--m", o.m, "hotcold update fraction m");
  cmd->add_option("--theta", o.theta, "zipfian exponent");
  cmd->add_option("--seed", o.seed, "seed of the first repetition");
  cmd->add_option("--repetitions", o.repetitions, "runs per point");
  cmd->add_option("-o,--output", o.output, "CSV output path, - for stdout");
  cmd->add_option("-j,--threads", o.threads, "worker threads, 0 = hardware threads");
  cmd->footer(lsgc::schema_help());
}

lsgc::ExperimentConfig build_config(const RunOptions& o, lsgc::ExperimentConfig cfg) {
  if (o.quick) lsgc::apply_quick_profile(cfg);
  if (!o.config_file.empty()) lsgc::apply_config_file(cfg, o.config_file);
  lsgc::apply_environment(cfg);
  const std::pair<const char*, const std::string*> flags[] = {
      {"policies", &o.policies}, {"fill_factors", &o.fills},
      {"workload", &o.workload}, {"hot_update_fraction", &o.m},
      {"zipf_theta", &o.theta},  {"seed", &o.seed},
      {"output", &o.output},     {"threads", &o.threads},
      {"repetitions", &o.repetitions}};
  for (const auto& [key, value] : flags)
    if (!value->empty()) lsgc::set_config_value(cfg, key, *value);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw lsgc::ConfigError("--set expects key=value, got '" + kv + "'");
    lsgc::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.timing) cfg.timing = true;
  return cfg;
}

std::vector<double> parse_reals(const std::string& key, const std::string& list) {
  std::vector<double> out;
  for (const auto& s : lsgc::detail::split_list(list)) out.push_back(lsgc::detail::parse_real(key, s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-structured store cleaning simulator and analysis"};
  app.require_subcommand(1);

  RunOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "run policies over a synthetic workload");
  add_run_options(simulate, sim_opts);

  RunOptions replay_opts;
  std::string trace_path;
  auto* replay = app.add_subcommand("replay", "run policies over a page-id trace");
  replay->add_option("trace", trace_path, "trace file: one decimal page id per line")->required();
  add_run_options(replay, replay_opts);

  RunOptions sweep_opts;
  std::string sizes;
  auto* sweep = app.add_subcommand(
      "sweep-sortbuffer", "MDC over staging buffer sizes (zipfian 0.99, F=0.8 unless overridden)");
  sweep->add_option("--sizes", sizes, "comma-separated buffer sizes in segments");
  add_run_options(sweep, sweep_opts);

  auto* analyze = app.add_subcommand("analyze", "closed-form analysis");
  analyze->require_subcommand(1);
  std::string t1_fills;
  bool t1_csv = false;
  auto* t1 = analyze->add_subcommand("table1", "emptiness at clean, cost, R and Wamp vs F");
  t1->add_option("--F", t1_fills, "comma-separated fill factors (default: the 17 table rows)");
  t1->add_flag("--csv", t1_csv, "CSV output");
  std::string split_fill = "0.8";
  std::string split_ms = "0.9,0.8,0.7,0.6,0.5";
  bool split_csv = false;
  auto* split = analyze->add_subcommand("split", "optimal slack split between hot and cold data");
  split->add_option("--F", split_fill, "overall fill factor");
  split->add_option("--m", split_ms, "comma-separated hot update fractions");
  split->add_flag("--csv", split_csv, "CSV output");
  std::uint64_t lemma_trials = 10000;
  std::size_t lemma_len = 6;
  std::uint64_t lemma_seed = 1;
  auto* lemma = analyze->add_subcommand("lemma", "check the sorted-pairing maximality property");
  lemma->add_option("--trials", lemma_trials, "random instances");
  lemma->add_option("--len", lemma_len, "maximum sequence length");
  lemma->add_option("--seed", lemma_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      lsgc::cmd_simulate(build_config(sim_opts, {}), std::cout);
    } else if (*replay) {
      lsgc::cmd_replay(build_config(replay_opts, {}), trace_path, std::cout);
    } else if (*sweep) {
      lsgc::ExperimentConfig preset;
      preset.workload.kind = lsgc::WorkloadKind::kZipfian;
      preset.workload.zipf_theta = 0.99;
      preset.policies = {"mdc"};
      preset.fill_factors = {0.8};
      auto cfg = build_config(sweep_opts, preset);
      if (!sizes.empty()) lsgc::set_config_value(cfg, "sort_buffer_sizes", sizes);
      lsgc::cmd_sweep_sortbuffer(cfg, std::cout);
    } else if (*t1) {
      const auto fills = t1_fills.empty() ? lsgc::default_table1_fills()
                                          : parse_reals("F", t1_fills);
      lsgc::cmd_analyze_table1(fills, t1_csv, std::cout);
    } else if (*split) {
      lsgc::cmd_analyze_split(lsgc::detail::parse_real("F", split_fill),
                              parse_reals("m", split_ms), split_csv, std::cout);
    } else if (*lemma) {
      const auto r = lsgc::cmd_analyze_lemma(lemma_trials, lemma_len, lemma_seed, std::cout);
      if (r.failures > 0) return kExitRuntime;
    }
  } catch (const lsgc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lsgc::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lsgc::CleaningLivelock& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const lsgc::SimulationFault& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
