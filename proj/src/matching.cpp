#include "adafleet/matching.hpp"

#include <algorithm>
#include <numeric>

namespace adafleet {

MatchResult potential_assignments(std::span<const PendingRequestView> requests,
                                  std::span<const CandidateVehicle> vehicles,
                                  int radius_cells) {
  MatchResult result;
  result.assignments.resize(vehicles.size());
  for (std::size_t j = 0; j < vehicles.size(); ++j) {
    result.assignments[j].vehicle_id = vehicles[j].id;
  }

  std::vector<std::size_t> order(requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return requests[a].id < requests[b].id;
  });

  // (distance, vehicle id, slot) candidates, reused across requests.
  std::vector<std::tuple<int, int, std::size_t>> candidates;
  for (std::size_t idx : order) {
    const PendingRequestView& r = requests[idx];
    candidates.clear();
    for (std::size_t j = 0; j < vehicles.size(); ++j) {
      const CandidateVehicle& v = vehicles[j];
      if (!v.available) continue;
      const int dist = manhattan_cells(v.location, r.origin);
      if (dist <= radius_cells) candidates.emplace_back(dist, v.id, j);
    }
    if (candidates.empty()) {
      result.rejected_ids.push_back(r.id);
      continue;
    }
    std::sort(candidates.begin(), candidates.end());
    bool placed = false;
    for (const auto& [dist, vid, slot] : candidates) {
      auto& list = result.assignments[slot].request_ids;
      if (list.size() < kAssignmentCap) {
        list.push_back(r.id);
        placed = true;
        break;
      }
    }
    if (!placed) result.rejected_ids.push_back(r.id);
  }
  return result;
}

}  // namespace adafleet
