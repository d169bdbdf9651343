#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "adafleet/demand.hpp"

namespace adafleet {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every tunable in one flat struct; the file format is dotted-key = value
// lines with '#' comments, and unknown keys are errors.
struct Config {
  // grid.*
  int grid_rows = 20;
  int grid_cols = 20;
  double grid_cell_length_km = 0.8;
  double grid_minutes_per_cell = 1.0;

  // match.*
  int match_radius_cells = 6;

  // demand.*
  int demand_k_true = 2;
  std::vector<ScheduleSegment> demand_schedule = {{360, 0}, {360, 1}};
  std::string demand_patterns = "two_peak";  // preset name or JSON file path
  double demand_rate_scale = 10.0;
  double demand_peak_contrast = 1.5;
  unsigned long long demand_seed = 1;
  int demand_forecast_window = 30;

  // fare.*
  double fare_base = 2.0;
  double fare_per_km = 1.5;

  // routing.*
  double routing_max_detour_ratio = std::numeric_limits<double>::infinity();

  // fleet.*
  int fleet_size = 200;
  int fleet_capacity = 4;
  double fleet_mileage = 10.0;
  int fleet_max_working_minutes = 21 * 60;

  // rl.*
  std::vector<double> rl_beta = {10, 1, 5, 12, 8};
  double rl_eta = 0.9;
  int rl_k = 7;
  long rl_eps_steps = 20000;
  double rl_gas_price = 3.0;

  // cpd.*
  bool cpd_enabled = true;
  double cpd_threshold = 10.0;
  int cpd_window_ticks = 30;
  int cpd_min_segment = 0;  // 0 = auto (feature dimension + 2)
  double cpd_epsilon = 1e-6;
  int cpd_max_window = 360;

  // sim.*
  long sim_ticks = 2880;
  int sim_warmup_ticks = 20;
  int sim_entry_window = 60;
  int sim_idle_trigger = 10;
  int sim_request_ttl = 10;

  TravelModel travel_model() const {
    return {grid_rows, grid_cols, grid_cell_length_km, grid_minutes_per_cell};
  }
  DiurnalSchedule schedule() const { return {demand_schedule}; }
};

/// Applies one key = value pair; throws ConfigError naming the key on an
/// unknown key or a malformed value.
void apply_config_entry(Config& config, const std::string& key,
                        const std::string& value);

Config parse_config_text(const std::string& text);
Config load_config_file(const std::string& path);

/// Validates cross-field constraints (positive grid, k >= 1, ...).
void validate_config(const Config& config);

/// Demand patterns per the config (preset or JSON file).
std::vector<DemandPattern> config_patterns(const Config& config);

}  // namespace adafleet
