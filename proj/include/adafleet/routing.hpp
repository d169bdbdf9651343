#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "adafleet/citygrid.hpp"

namespace adafleet {

struct MalformedRoute : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StopKind { Pickup, Dropoff };

struct Stop {
  GridCoord coord;
  StopKind kind = StopKind::Pickup;
  int request_id = -1;
  int passengers = 0;
};

// Ordered pickup/drop-off stops. The vehicle's current location is the
// implicit first point of every cost evaluation (the "anchor" argument).
struct Route {
  std::vector<Stop> stops;

  bool empty() const { return stops.empty(); }
  std::vector<GridCoord> coords() const;
};

/// Occupancy after each stop, starting from the passengers already on
/// board. A drop-off with no preceding pickup in the route belongs to an
/// onboard rider. Throws MalformedRoute when a request's drop-off precedes
/// its own pickup.
std::vector<int> capacity_profile(const Route& route, int onboard);

struct RideRequestView {
  int id = -1;
  GridCoord origin;
  GridCoord destination;
  int passengers = 1;
};

struct InsertionResult {
  Route route;
  long cost_cells = 0;
  double cost_km = 0;  // full path weight of the new route from the anchor
};

/// Minimum-cost insertion of (origin, destination) into the route: the
/// pickup position is chosen first by full-route weight, fixed, then the
/// drop-off position is chosen after it. Prior stop order is preserved.
/// Ties resolve to the earliest position. Candidate costs are evaluated
/// incrementally (drop one edge, add two); the returned cost equals the
/// full recomputation exactly because cell distances are integers.
InsertionResult route_planning(const TravelModel& m, GridCoord anchor,
                               const Route& route, const RideRequestView& request);

struct GreedyInsertionResult {
  Route route;
  long cost_cells = 0;
  std::vector<int> matched_ids;
};

/// Repeatedly commits the candidate with the cheapest insertion until the
/// seat budget is exhausted or no candidate fits. committed_passengers
/// counts riders on board plus pickups already committed in the route.
/// Ties resolve to the lowest request id. max_detour_ratio (when finite)
/// drops candidates whose added cost exceeds ratio * their solo trip length.
GreedyInsertionResult greedy_insertion(const TravelModel& m, GridCoord anchor,
                                       Route route, int committed_passengers,
                                       int capacity_max,
                                       std::vector<RideRequestView> candidates,
                                       double max_detour_ratio);

/// Running maximum of the occupancy profile from pickup position onward:
/// result[j] = max occupancy over the span [pickup_pos, j] of the
/// onboard-prefixed profile. O(n) once per pickup position; each drop-off
/// query is then O(1).
std::vector<int> occupancy_running_max(std::span<const int> profile, int onboard,
                                       int pickup_pos);

/// O(1) capacity check against a precomputed running max: true iff adding
/// `passengers` over the span [pickup_pos, dropoff_pos) keeps every entry
/// within capacity_max.
bool feasible_capacity_fast(std::span<const int> running_max, int pickup_pos,
                            int dropoff_pos, int passengers, int capacity_max);

/// One-shot convenience over a raw profile.
bool feasible_capacity_fast(std::span<const int> profile, int onboard,
                            int pickup_pos, int dropoff_pos, int passengers,
                            int capacity_max);

}  // namespace adafleet
