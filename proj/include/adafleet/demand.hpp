#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "adafleet/citygrid.hpp"
#include "adafleet/rng.hpp"

namespace adafleet {

// One hidden demand regime: per-zone arrival rates, a shared destination
// weight map (renormalized per origin with the origin excluded), and a
// passenger-count distribution over 1..4.
struct DemandPattern {
  std::vector<double> zone_rates;           // requests per tick, per zone
  std::vector<double> destination_weights;  // per zone, unnormalized
  std::array<double, 4> passenger_probs = {0.55, 0.25, 0.12, 0.08};
};

struct ScheduleSegment {
  int duration_ticks = 0;
  int pattern = 0;
};

// Cyclic sequence of (duration, pattern) segments; the ground truth the
// change-point detector is scored against.
struct DiurnalSchedule {
  std::vector<ScheduleSegment> segments;

  long cycle_ticks() const;
};

/// Pattern index active at `tick` under cyclic repetition.
int active_true_model(long tick, const DiurnalSchedule& schedule);

/// Ticks within [1, horizon_ticks) at which the active pattern changes.
std::vector<long> true_change_ticks(const DiurnalSchedule& schedule,
                                    long horizon_ticks);

enum class RequestStatus { Pending, Assigned, Onboard, Completed, Rejected };

struct Request {
  int id = -1;
  GridCoord origin;
  GridCoord destination;
  int passengers = 1;
  long request_tick = 0;
  double fare = 0;
  RequestStatus status = RequestStatus::Pending;

  // Commitment bookkeeping, set when a vehicle takes the request.
  int assigned_vehicle = -1;
  long assigned_tick = -1;
  double solo_minutes = 0;  // approach + trip time if served alone
};

struct FareModel {
  double base = 2.0;
  double per_km = 1.5;
};

/// Draws this tick's requests: per zone a Poisson count at the pattern's
/// rate, destinations from the pattern's weight map (origin excluded),
/// passenger counts from the pattern's distribution. Deterministic given
/// the rng state; ids start at first_id.
std::vector<Request> generate_requests(const TravelModel& m,
                                       const DemandPattern& pattern,
                                       const FareModel& fare, long tick,
                                       int first_id, Rng& rng);

/// Per-zone mean of the most recent `window` history rows (each row is a
/// per-zone count vector); the forecast value is broadcast over the horizon.
std::vector<double> forecast_demand(std::span<const std::vector<double>> history,
                                    int window);

struct SupplyVehicleView {
  GridCoord location;
  std::vector<GridCoord> remaining_stops;  // empty means idle
};

/// Per-zone, per-bucket counts of vehicles becoming available: idle
/// vehicles in bucket 0 at their zone; busy vehicles at their final stop's
/// zone in the bucket of their remaining route time. Buckets run 0..horizon
/// (one tick each); completions past the horizon are excluded. Layout is
/// bucket-major: result[bucket * zones + zone].
std::vector<double> project_supply(const TravelModel& m,
                                   std::span<const SupplyVehicleView> vehicles,
                                   int horizon_ticks);

struct Forecast {
  int horizon_ticks = 0;
  int zones = 0;
  std::vector<double> demand;  // bucket-major, broadcast forecast
  std::vector<double> supply;  // bucket-major projection
};

Forecast make_forecast(const TravelModel& m,
                       std::span<const std::vector<double>> history, int window,
                       std::span<const SupplyVehicleView> vehicles,
                       int horizon_ticks);

/// Named presets for the demand patterns ("uniform", "two_peak").
/// rate_scale is the expected total requests per tick for the base pattern;
/// peak_contrast is the total-volume ratio of odd-indexed two_peak patterns
/// to even ones, so regime flips move aggregate demand as well as location.
std::vector<DemandPattern> make_patterns(const std::string& preset,
                                         const TravelModel& m, int k_true,
                                         double rate_scale,
                                         double peak_contrast = 1.5);

/// Patterns from a JSON file: {"patterns":[{"rates":[...],
/// "destination_weights":[...], "passenger_probs":[...]}, ...]}.
/// rates is required (row-major, one entry per zone); the rest default to
/// uniform weights and the stock passenger distribution.
std::vector<DemandPattern> load_patterns_json(const std::string& path,
                                              const TravelModel& m);

}  // namespace adafleet
