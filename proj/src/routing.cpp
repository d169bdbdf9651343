#include "adafleet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace adafleet {

std::vector<GridCoord> Route::coords() const {
  std::vector<GridCoord> out;
  out.reserve(stops.size());
  for (const auto& s : stops) out.push_back(s.coord);
  return out;
}

std::vector<int> capacity_profile(const Route& route, int onboard) {
  // A request with both stops present must pick up before dropping off.
  std::unordered_map<int, std::size_t> pickup_at;
  for (std::size_t i = 0; i < route.stops.size(); ++i) {
    const Stop& s = route.stops[i];
    if (s.kind == StopKind::Pickup) pickup_at.emplace(s.request_id, i);
  }
  std::vector<int> profile;
  profile.reserve(route.stops.size());
  int occupancy = onboard;
  for (std::size_t i = 0; i < route.stops.size(); ++i) {
    const Stop& s = route.stops[i];
    if (s.kind == StopKind::Pickup) {
      occupancy += s.passengers;
    } else {
      auto it = pickup_at.find(s.request_id);
      if (it != pickup_at.end() && it->second > i) {
        throw MalformedRoute("capacity_profile: drop-off precedes its pickup");
      }
      occupancy -= s.passengers;
    }
    profile.push_back(occupancy);
  }
  return profile;
}

namespace {

// Cost in cells of inserting `coord` so it becomes the stop at `pos`.
// points = anchor followed by the current stop coords.
long insertion_delta(std::span<const GridCoord> points, std::size_t pos,
                     GridCoord coord) {
  const GridCoord before = points[pos];
  if (pos + 1 < points.size()) {
    const GridCoord after = points[pos + 1];
    return manhattan_cells(before, coord) + manhattan_cells(coord, after) -
           manhattan_cells(before, after);
  }
  return manhattan_cells(before, coord);
}

}  // namespace

InsertionResult route_planning(const TravelModel& m, GridCoord anchor,
                               const Route& route, const RideRequestView& request) {
  InsertionResult result;
  if (route.empty()) {
    result.route.stops = {
        {request.origin, StopKind::Pickup, request.id, request.passengers},
        {request.destination, StopKind::Dropoff, request.id, request.passengers}};
    result.cost_cells = manhattan_cells(anchor, request.origin) +
                        manhattan_cells(request.origin, request.destination);
    result.cost_km = result.cost_cells * m.cell_length_km;
    return result;
  }

  std::vector<GridCoord> points;
  points.reserve(route.stops.size() + 1);
  points.push_back(anchor);
  for (const auto& s : route.stops) points.push_back(s.coord);
  const long base = path_weight_cells(points);

  // Pass 1: best pickup position by full-route weight, earliest on ties.
  std::size_t best_x = 0;
  long best_dx = std::numeric_limits<long>::max();
  for (std::size_t x = 0; x <= route.stops.size(); ++x) {
    const long dx = insertion_delta(points, x, request.origin);
    if (dx < best_dx) {
      best_dx = dx;
      best_x = x;
    }
  }
  Route with_pickup = route;
  with_pickup.stops.insert(
      with_pickup.stops.begin() + static_cast<long>(best_x),
      Stop{request.origin, StopKind::Pickup, request.id, request.passengers});

  // Pass 2: best drop-off position strictly after the fixed pickup.
  std::vector<GridCoord> points2;
  points2.reserve(with_pickup.stops.size() + 1);
  points2.push_back(anchor);
  for (const auto& s : with_pickup.stops) points2.push_back(s.coord);
  std::size_t best_y = best_x + 1;
  long best_dy = std::numeric_limits<long>::max();
  for (std::size_t y = best_x + 1; y <= with_pickup.stops.size(); ++y) {
    const long dy = insertion_delta(points2, y, request.destination);
    if (dy < best_dy) {
      best_dy = dy;
      best_y = y;
    }
  }
  result.route = std::move(with_pickup);
  result.route.stops.insert(
      result.route.stops.begin() + static_cast<long>(best_y),
      Stop{request.destination, StopKind::Dropoff, request.id, request.passengers});
  result.cost_cells = base + best_dx + best_dy;
  result.cost_km = result.cost_cells * m.cell_length_km;
  return result;
}

GreedyInsertionResult greedy_insertion(const TravelModel& m, GridCoord anchor,
                                       Route route, int committed_passengers,
                                       int capacity_max,
                                       std::vector<RideRequestView> candidates,
                                       double max_detour_ratio) {
  GreedyInsertionResult result;
  std::vector<GridCoord> points;
  points.push_back(anchor);
  for (const auto& s : route.stops) points.push_back(s.coord);
  long current_cost = path_weight_cells(points);

  while (committed_passengers < capacity_max && !candidates.empty()) {
    std::size_t best_i = candidates.size();
    InsertionResult best_ins;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const RideRequestView& r = candidates[i];
      if (committed_passengers + r.passengers > capacity_max) continue;
      InsertionResult ins = route_planning(m, anchor, route, r);
      if (std::isfinite(max_detour_ratio)) {
        const double added = static_cast<double>(ins.cost_cells - current_cost);
        const double solo = manhattan_cells(r.origin, r.destination);
        if (added > max_detour_ratio * solo) continue;
      }
      if (best_i == candidates.size() || ins.cost_cells < best_ins.cost_cells ||
          (ins.cost_cells == best_ins.cost_cells && r.id < candidates[best_i].id)) {
        best_i = i;
        best_ins = std::move(ins);
      }
    }
    if (best_i == candidates.size()) break;  // nothing fits
    route = std::move(best_ins.route);
    current_cost = best_ins.cost_cells;
    committed_passengers += candidates[best_i].passengers;
    result.matched_ids.push_back(candidates[best_i].id);
    candidates.erase(candidates.begin() + static_cast<long>(best_i));
  }
  result.route = std::move(route);
  result.cost_cells = current_cost;
  return result;
}

std::vector<int> occupancy_running_max(std::span<const int> profile, int onboard,
                                       int pickup_pos) {
  // Index j of the result covers the onboard-prefixed profile entry j:
  // entry 0 is the pre-route occupancy, entry i + 1 is profile[i].
  const std::size_t n = profile.size() + 1;
  std::vector<int> rm(n, std::numeric_limits<int>::min());
  int running = std::numeric_limits<int>::min();
  for (std::size_t j = static_cast<std::size_t>(pickup_pos); j < n; ++j) {
    const int entry = (j == 0) ? onboard : profile[j - 1];
    running = std::max(running, entry);
    rm[j] = running;
  }
  return rm;
}

bool feasible_capacity_fast(std::span<const int> running_max, int pickup_pos,
                            int dropoff_pos, int passengers, int capacity_max) {
  if (passengers == 0) return true;
  if (dropoff_pos <= pickup_pos) return false;
  return running_max[static_cast<std::size_t>(dropoff_pos) - 1] + passengers <=
         capacity_max;
}

bool feasible_capacity_fast(std::span<const int> profile, int onboard,
                            int pickup_pos, int dropoff_pos, int passengers,
                            int capacity_max) {
  const std::vector<int> rm = occupancy_running_max(profile, onboard, pickup_pos);
  return feasible_capacity_fast(rm, pickup_pos, dropoff_pos, passengers,
                                capacity_max);
}

}  // namespace adafleet
