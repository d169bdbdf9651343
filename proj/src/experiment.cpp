#include "adafleet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "adafleet/cpd.hpp"
#include "adafleet/metrics.hpp"

namespace adafleet {

Scorecard changepoint_scorecard(std::span<const long> detected_ticks,
                                std::span<const long> true_ticks,
                                long tolerance) {
  Scorecard score;
  std::vector<bool> used(true_ticks.size(), false);
  double offset_sum = 0;
  for (long det : detected_ticks) {
    long best = -1;
    long best_gap = tolerance + 1;
    for (std::size_t i = 0; i < true_ticks.size(); ++i) {
      if (used[i]) continue;
      const long gap = std::abs(det - true_ticks[i]);
      if (gap <= tolerance && gap < best_gap) {
        best = static_cast<long>(i);
        best_gap = gap;
      }
    }
    if (best >= 0) {
      used[best] = true;
      ++score.matched;
      offset_sum += static_cast<double>(best_gap);
    }
  }
  score.precision = detected_ticks.empty()
                        ? 1.0
                        : static_cast<double>(score.matched) /
                              static_cast<double>(detected_ticks.size());
  score.recall = true_ticks.empty()
                     ? 1.0
                     : static_cast<double>(score.matched) /
                           static_cast<double>(true_ticks.size());
  score.mean_abs_offset =
      score.matched > 0 ? offset_sum / static_cast<double>(score.matched) : 0.0;
  return score;
}

ArmSummary summarize_run(const Config& config, std::uint64_t seed,
                         const std::string& arm, const SimResult& result,
                         long tolerance) {
  ArmSummary s;
  s.seed = seed;
  s.arm = arm;
  s.ticks = static_cast<long>(result.metrics.size());
  for (const auto& row : result.metrics) {
    s.requests_generated += row.requests_generated;
    s.requests_accepted += row.requests_accepted;
    s.requests_rejected += row.requests_rejected;
    s.fleet_distance_km += row.fleet_distance_km;
  }
  if (!result.metrics.empty()) {
    s.total_profit = result.metrics.back().total_profit;
    s.mean_idle_minutes = result.metrics.back().mean_idle_minutes;
  }
  s.accept_rate = s.requests_generated > 0
                      ? static_cast<double>(s.requests_accepted) /
                            static_cast<double>(s.requests_generated)
                      : 0.0;
  s.changes_detected = static_cast<long>(result.changes.size());

  std::vector<long> detected;
  for (const auto& c : result.changes) detected.push_back(c.tick);
  const std::vector<long> truth =
      true_change_ticks(config.schedule(), config.sim_ticks);
  const Scorecard card = changepoint_scorecard(detected, truth, tolerance);
  s.cpd_precision = card.precision;
  s.cpd_recall = card.recall;
  s.cpd_mean_abs_offset = card.mean_abs_offset;
  return s;
}

Config baseline_config(Config config) {
  config.rl_k = 1;
  config.cpd_enabled = false;
  return config;
}

int max_parallel_runs() {
  if (const char* env = std::getenv("ADAFLEET_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentReport compare_runs(const Config& config,
                              std::span<const std::uint64_t> seeds,
                              long tolerance) {
  const Config baseline = baseline_config(config);

  struct Job {
    std::uint64_t seed;
    bool is_baseline;
  };
  std::vector<Job> jobs;
  for (std::uint64_t seed : seeds) {
    jobs.push_back({seed, false});
    jobs.push_back({seed, true});
  }
  std::vector<ArmSummary> results(jobs.size());

  const int workers =
      std::min<int>(max_parallel_runs(), static_cast<int>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const Config& run_config = job.is_baseline ? baseline : config;
      const SimResult result = run_simulation(run_config, job.seed);
      results[i] = summarize_run(run_config, job.seed,
                                 job.is_baseline ? "baseline" : "adaptive",
                                 result, tolerance);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentReport report;
  report.rows = std::move(results);
  double adaptive_sum = 0, baseline_sum = 0, recall_sum = 0;
  long arms = 0;
  for (const auto& row : report.rows) {
    if (row.arm == "adaptive") {
      adaptive_sum += row.accept_rate;
      recall_sum += row.cpd_recall;
      ++arms;
    } else {
      baseline_sum += row.accept_rate;
    }
  }
  if (arms > 0) {
    report.adaptive_mean_accept_rate = adaptive_sum / arms;
    report.baseline_mean_accept_rate = baseline_sum / arms;
    report.adaptive_mean_recall = recall_sum / arms;
  }
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out =
      "seed,arm,ticks,requests_generated,requests_accepted,requests_rejected,"
      "accept_rate,total_profit,fleet_distance_km,mean_idle_minutes,"
      "changes_detected,cpd_precision,cpd_recall,cpd_mean_abs_offset\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.seed);
    out += ',' + r.arm;
    out += ',' + std::to_string(r.ticks);
    out += ',' + std::to_string(r.requests_generated);
    out += ',' + std::to_string(r.requests_accepted);
    out += ',' + std::to_string(r.requests_rejected);
    out += ',' + format_double(r.accept_rate);
    out += ',' + format_double(r.total_profit);
    out += ',' + format_double(r.fleet_distance_km);
    out += ',' + format_double(r.mean_idle_minutes);
    out += ',' + std::to_string(r.changes_detected);
    out += ',' + format_double(r.cpd_precision);
    out += ',' + format_double(r.cpd_recall);
    out += ',' + format_double(r.cpd_mean_abs_offset);
    out += '\n';
  }
  out += "mean,adaptive_vs_baseline,,,,,";
  out += format_double(report.adaptive_mean_accept_rate - report.baseline_mean_accept_rate);
  out += ",,,,,,";
  out += format_double(report.adaptive_mean_recall);
  out += ",\n";
  return out;
}

CpdBenchResult cpd_bench(int trials, double threshold, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  CpdBenchResult bench;
  bench.change_trials = trials;
  bench.null_trials = trials;
  constexpr int kHalf = 40;
  constexpr long kTolerance = 3;
  const std::vector<double> alpha_a = {8.0, 2.0};
  const std::vector<double> alpha_b = {2.0, 8.0};
  const int min_segment = 4;  // d + 2 for d = 2

  double offset_sum = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = make_stream(seed, 10000 + static_cast<std::uint64_t>(trial));
    std::vector<CompositionSample> samples;
    samples.reserve(2 * kHalf);
    for (int i = 0; i < kHalf; ++i) samples.push_back({dirichlet_draw(rng, alpha_a)});
    for (int i = 0; i < kHalf; ++i) samples.push_back({dirichlet_draw(rng, alpha_b)});
    const ChangeReport report = detect_change(samples, threshold, min_segment);
    if (report.detected) ++bench.detections_total;
    if (report.detected && std::abs(report.change_index - kHalf) <= kTolerance) {
      ++bench.change_detected;
      offset_sum += std::abs(report.change_index - kHalf);
    }
  }
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = make_stream(seed, 20000 + static_cast<std::uint64_t>(trial));
    std::vector<CompositionSample> samples;
    samples.reserve(2 * kHalf);
    for (int i = 0; i < 2 * kHalf; ++i) samples.push_back({dirichlet_draw(rng, alpha_a)});
    const ChangeReport report = detect_change(samples, threshold, min_segment);
    if (report.detected) {
      ++bench.null_false_positives;
      ++bench.detections_total;
    }
  }
  bench.recall = trials > 0 ? static_cast<double>(bench.change_detected) / trials : 0;
  bench.precision = bench.detections_total > 0
                        ? static_cast<double>(bench.change_detected) /
                              bench.detections_total
                        : 1.0;
  bench.false_positive_rate =
      trials > 0 ? static_cast<double>(bench.null_false_positives) / trials : 0;
  bench.mean_abs_offset =
      bench.change_detected > 0 ? offset_sum / bench.change_detected : 0;
  bench.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return bench;
}

}  // namespace adafleet
