#include "adafleet/citygrid.hpp"

#include <algorithm>
#include <cstdlib>

namespace adafleet {

GridCoord TravelModel::clamp(GridCoord c) const {
  return {std::clamp(c.row, 0, rows - 1), std::clamp(c.col, 0, cols - 1)};
}

int manhattan_cells(GridCoord a, GridCoord b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

double travel_minutes(const TravelModel& m, GridCoord a, GridCoord b) {
  return manhattan_cells(a, b) * m.minutes_per_cell;
}

long path_weight_cells(std::span<const GridCoord> stops) {
  long total = 0;
  for (std::size_t i = 1; i < stops.size(); ++i) {
    total += manhattan_cells(stops[i - 1], stops[i]);
  }
  return total;
}

double path_weight_km(const TravelModel& m, std::span<const GridCoord> stops) {
  return static_cast<double>(path_weight_cells(stops)) * m.cell_length_km;
}

std::vector<GridCoord> zones_within_radius(const TravelModel& m, GridCoord center,
                                           int radius_cells) {
  std::vector<GridCoord> out;
  const int r0 = std::max(0, center.row - radius_cells);
  const int r1 = std::min(m.rows - 1, center.row + radius_cells);
  for (int row = r0; row <= r1; ++row) {
    const int budget = radius_cells - std::abs(row - center.row);
    const int c0 = std::max(0, center.col - budget);
    const int c1 = std::min(m.cols - 1, center.col + budget);
    for (int col = c0; col <= c1; ++col) {
      out.push_back({row, col});
    }
  }
  return out;
}

}  // namespace adafleet
