#pragma once

#include <span>
#include <vector>

namespace adafleet {

struct GridCoord {
  int row = 0;
  int col = 0;
  bool operator==(const GridCoord&) const = default;
};

// Rectangular grid of zones with a closed-form L1 travel metric. Distances
// are cell counts scaled by cell_length_km; travel time is distance-
// proportional (no congestion model).
struct TravelModel {
  int rows = 20;
  int cols = 20;
  double cell_length_km = 0.8;
  double minutes_per_cell = 1.0;

  bool contains(GridCoord c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }
  int zone_count() const { return rows * cols; }
  int zone_index(GridCoord c) const { return c.row * cols + c.col; }
  GridCoord zone_at(int index) const { return {index / cols, index % cols}; }
  GridCoord clamp(GridCoord c) const;
};

int manhattan_cells(GridCoord a, GridCoord b);

double travel_minutes(const TravelModel& m, GridCoord a, GridCoord b);

/// Sum of consecutive pairwise L1 distances in cells; single stop is 0.
long path_weight_cells(std::span<const GridCoord> stops);

double path_weight_km(const TravelModel& m, std::span<const GridCoord> stops);

/// All on-grid coords with manhattan_cells(center, .) <= radius_cells,
/// in row-major order.
std::vector<GridCoord> zones_within_radius(const TravelModel& m, GridCoord center,
                                           int radius_cells);

}  // namespace adafleet
