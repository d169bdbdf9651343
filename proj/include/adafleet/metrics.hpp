#pragma once

#include <span>
#include <string>
#include <vector>

namespace adafleet {

// One per-tick aggregate. Flow fields (requests_*, fleet_distance_km) are
// this tick's increments; total_profit is cumulative; mean_idle_minutes
// averages cumulative idle time over vehicles that have entered.
struct MetricsRow {
  long tick = 0;
  long requests_generated = 0;
  long requests_accepted = 0;
  long requests_rejected = 0;
  double fleet_distance_km = 0;
  int occupied_vehicles = 0;
  double utilized_fraction = 0;
  double total_profit = 0;
  double mean_idle_minutes = 0;
  int active_context = 1;
  bool change_detected = false;

  bool operator==(const MetricsRow&) const = default;
};

struct ChangeEvent {
  long tick = 0;  // estimated change point (the split the detector returned)
  int old_context = 0;
  int new_context = 0;
  double score = 0;

  bool operator==(const ChangeEvent&) const = default;
};

// CSV with a pinned header, LF line endings, and shortest exact float
// formatting so identical runs are byte-identical and parsing is lossless.
std::string metrics_csv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

std::string changes_csv(std::span<const ChangeEvent> events);

void write_text_file(const std::string& path, const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace adafleet
