#pragma once

#include <span>
#include <vector>

#include "adafleet/citygrid.hpp"

namespace adafleet {

inline constexpr int kAssignmentCap = 50;  // max requests per vehicle per round

struct PendingRequestView {
  int id = -1;
  GridCoord origin;
};

struct CandidateVehicle {
  int id = -1;
  GridCoord location;
  bool available = true;
};

struct AssignmentList {
  int vehicle_id = -1;
  std::vector<int> request_ids;
};

struct MatchResult {
  std::vector<AssignmentList> assignments;  // one entry per input vehicle
  std::vector<int> rejected_ids;            // no candidate in radius, or all full
};

/// Greedy proximity assignment: requests are processed in ascending id
/// order; each goes to the available vehicle within radius_cells with the
/// smallest travel time (distance-proportional, so cell distance decides;
/// ties to the lowest vehicle id). A vehicle holds at most kAssignmentCap
/// requests per round; when the nearest is full the next-nearest with room
/// takes it. Requests with no candidate are rejected.
MatchResult potential_assignments(std::span<const PendingRequestView> requests,
                                  std::span<const CandidateVehicle> vehicles,
                                  int radius_cells);

}  // namespace adafleet
