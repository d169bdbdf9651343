#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adafleet/config.hpp"
#include "adafleet/simcore.hpp"

namespace adafleet {

struct Scorecard {
  double precision = 1.0;  // vacuously 1 with no detections
  double recall = 1.0;     // vacuously 1 with no true changes
  double mean_abs_offset = 0.0;
  long matched = 0;
};

/// Matches each detection to the nearest unmatched true change within
/// `tolerance` ticks, then scores standard precision/recall and the mean
/// absolute tick offset over the matched pairs.
Scorecard changepoint_scorecard(std::span<const long> detected_ticks,
                                std::span<const long> true_ticks,
                                long tolerance);

struct ArmSummary {
  std::uint64_t seed = 0;
  std::string arm;  // "adaptive" or "baseline"
  long ticks = 0;
  long requests_generated = 0;
  long requests_accepted = 0;
  long requests_rejected = 0;
  double accept_rate = 0;
  double total_profit = 0;
  double fleet_distance_km = 0;
  double mean_idle_minutes = 0;
  long changes_detected = 0;
  double cpd_precision = 0;
  double cpd_recall = 0;
  double cpd_mean_abs_offset = 0;
};

ArmSummary summarize_run(const Config& config, std::uint64_t seed,
                         const std::string& arm, const SimResult& result,
                         long tolerance);

struct ExperimentReport {
  std::vector<ArmSummary> rows;  // seed-major, adaptive then baseline
  double adaptive_mean_accept_rate = 0;
  double baseline_mean_accept_rate = 0;
  double adaptive_mean_recall = 0;
};

/// The baseline arm of a paired comparison: one context, detector off.
Config baseline_config(Config config);

/// Paired adaptive/baseline runs over the given seeds. Seeds may run in
/// parallel (capped by the ADAFLEET_THREADS environment variable); rows
/// are assembled in seed order so the report is scheduling-independent.
ExperimentReport compare_runs(const Config& config,
                              std::span<const std::uint64_t> seeds,
                              long tolerance);

std::string report_csv(const ExperimentReport& report);

struct CpdBenchResult {
  int change_trials = 0;
  int change_detected = 0;  // detections landing within the tolerance
  int detections_total = 0;  // all detections over both suites
  int null_trials = 0;
  int null_false_positives = 0;
  double recall = 0;
  double precision = 0;  // in-tolerance detections / all detections
  double false_positive_rate = 0;
  double mean_abs_offset = 0;  // over detections within tolerance
  double elapsed_seconds = 0;
};

/// Synthetic recovery suite: `trials` windows of 40+40 draws from
/// Dirichlet(8,2) then Dirichlet(2,8) plus `trials` same-distribution
/// windows, detector at `threshold`, offset tolerance of 3 samples.
CpdBenchResult cpd_bench(int trials, double threshold, std::uint64_t seed);

/// Worker cap for compare_runs: ADAFLEET_THREADS when set, otherwise the
/// hardware concurrency.
int max_parallel_runs();

}  // namespace adafleet
