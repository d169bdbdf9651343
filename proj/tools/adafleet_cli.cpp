#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adafleet/config.hpp"
#include "adafleet/experiment.hpp"
#include "adafleet/metrics.hpp"
#include "adafleet/simcore.hpp"

namespace {

using namespace adafleet;

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  long ticks_override = -1;
  bool baseline = false;
};

Config resolve_config(CommonArgs& args, bool seed_given) {
  Config config = args.config_path.empty() ? Config{} : load_config_file(args.config_path);
  if (args.ticks_override >= 0) config.sim_ticks = args.ticks_override;
  if (args.baseline) config = baseline_config(config);
  if (!seed_given) args.seed = config.demand_seed;
  validate_config(config);
  return config;
}

int cmd_run(CommonArgs args, bool seed_given, const std::string& save_q,
            const std::string& load_q, bool exploit) {
  const Config config = resolve_config(args, seed_given);
  RunOptions options;
  options.exploit_only = exploit;
  ModelBank loaded(1, 1);
  if (!load_q.empty()) {
    loaded = load_bank(load_q);
    options.initial_bank = &loaded;
  }
  const SimResult result = run_simulation(config, args.seed, options);
  std::filesystem::create_directories(args.out_dir);
  write_text_file(args.out_dir + "/metrics.csv", metrics_csv(result.metrics));
  write_text_file(args.out_dir + "/changes.csv", changes_csv(result.changes));
  if (!save_q.empty()) save_bank(result.bank, save_q);

  long generated = 0, accepted = 0, rejected = 0;
  for (const auto& row : result.metrics) {
    generated += row.requests_generated;
    accepted += row.requests_accepted;
    rejected += row.requests_rejected;
  }
  std::printf("ticks=%zu requests=%ld accepted=%ld rejected=%ld changes=%zu\n",
              result.metrics.size(), generated, accepted, rejected,
              result.changes.size());
  return 0;
}

int cmd_compare(CommonArgs args, bool seed_given, int num_seeds, long tolerance) {
  const Config config = resolve_config(args, seed_given);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < num_seeds; ++i) seeds.push_back(args.seed + i);
  const ExperimentReport report = compare_runs(config, seeds, tolerance);
  std::filesystem::create_directories(args.out_dir);
  write_text_file(args.out_dir + "/report.csv", report_csv(report));
  std::printf("adaptive accept rate %.4f vs baseline %.4f (delta %+.4f), "
              "cpd recall %.2f\n",
              report.adaptive_mean_accept_rate, report.baseline_mean_accept_rate,
              report.adaptive_mean_accept_rate - report.baseline_mean_accept_rate,
              report.adaptive_mean_recall);
  return 0;
}

int cmd_cpd_bench(int trials, double threshold, std::uint64_t seed) {
  const CpdBenchResult bench = cpd_bench(trials, threshold, seed);
  std::printf("change trials:   %d\n", bench.change_trials);
  std::printf("recall:          %.3f (|offset| <= 3)\n", bench.recall);
  std::printf("precision:       %.3f\n", bench.precision);
  std::printf("mean |offset|:   %.2f samples\n", bench.mean_abs_offset);
  std::printf("null trials:     %d\n", bench.null_trials);
  std::printf("false positives: %.3f\n", bench.false_positive_rate);
  std::printf("elapsed:         %.2f s\n", bench.elapsed_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adafleet: adaptive ride-sharing fleet simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  bool seed_given = false;
  std::string save_q, load_q;
  bool exploit = false;
  int num_seeds = 5;
  long tolerance = 30;
  int trials = 100;
  double threshold = 10.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "config file (dotted keys)");
    cmd->add_option("--seed", args.seed, "base seed (default: demand.seed)")
        ->trigger_on_parse()
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--ticks", args.ticks_override, "override sim.ticks");
    cmd->add_flag("--baseline", args.baseline, "force rl.k=1 and disable CPD");
  };

  CLI::App* run = app.add_subcommand("run", "one simulation; writes metrics.csv and changes.csv");
  add_common(run);
  run->add_option("--save-q", save_q, "persist the learned Q-tables");
  run->add_option("--load-q", load_q, "start from saved Q-tables");
  run->add_flag("--exploit", exploit, "exploitation only: eps at eps_end, no updates");

  CLI::App* compare = app.add_subcommand("compare", "paired adaptive/baseline runs; writes report.csv");
  add_common(compare);
  compare->add_option("--seeds", num_seeds, "number of paired seeds");
  compare->add_option("--tolerance", tolerance, "change-point match tolerance (ticks)");

  CLI::App* bench = app.add_subcommand("cpd-bench", "synthetic change-point recovery suite");
  bench->add_option("--trials", trials, "trials per condition");
  bench->add_option("--threshold", threshold, "detection threshold");
  bench->add_option("--seed", args.seed, "base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(args, seed_given, save_q, load_q, exploit);
    if (compare->parsed()) return cmd_compare(args, seed_given, num_seeds, tolerance);
    if (bench->parsed()) return cmd_cpd_bench(trials, threshold, args.seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
