#include "adafleet/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace adafleet {

long DiurnalSchedule::cycle_ticks() const {
  long total = 0;
  for (const auto& seg : segments) total += seg.duration_ticks;
  return total;
}

int active_true_model(long tick, const DiurnalSchedule& schedule) {
  const long cycle = schedule.cycle_ticks();
  if (cycle <= 0 || schedule.segments.empty()) {
    throw std::invalid_argument("active_true_model: empty schedule");
  }
  long offset = tick % cycle;
  if (offset < 0) offset += cycle;
  for (const auto& seg : schedule.segments) {
    if (offset < seg.duration_ticks) return seg.pattern;
    offset -= seg.duration_ticks;
  }
  return schedule.segments.back().pattern;  // unreachable
}

std::vector<long> true_change_ticks(const DiurnalSchedule& schedule,
                                    long horizon_ticks) {
  std::vector<long> out;
  if (horizon_ticks <= 1) return out;
  int prev = active_true_model(0, schedule);
  for (long t = 1; t < horizon_ticks; ++t) {
    const int cur = active_true_model(t, schedule);
    if (cur != prev) out.push_back(t);
    prev = cur;
  }
  return out;
}

std::vector<Request> generate_requests(const TravelModel& m,
                                       const DemandPattern& pattern,
                                       const FareModel& fare, long tick,
                                       int first_id, Rng& rng) {
  if (static_cast<int>(pattern.zone_rates.size()) != m.zone_count()) {
    throw std::invalid_argument("generate_requests: rate map size mismatch");
  }
  std::vector<Request> out;
  std::vector<double> dest_weights(pattern.destination_weights);
  for (int z = 0; z < m.zone_count(); ++z) {
    const double rate = pattern.zone_rates[z];
    if (rate <= 0) continue;
    const int count = poisson(rng, rate);
    for (int i = 0; i < count; ++i) {
      Request r;
      r.id = first_id + static_cast<int>(out.size());
      r.origin = m.zone_at(z);
      r.request_tick = tick;
      // Destination from the shared weight map with the origin excluded.
      const double saved = dest_weights[z];
      dest_weights[z] = 0;
      r.destination = m.zone_at(static_cast<int>(categorical(rng, dest_weights)));
      dest_weights[z] = saved;
      r.passengers = 1 + static_cast<int>(categorical(
                             rng, std::span<const double>(
                                      pattern.passenger_probs.data(), 4)));
      const double trip_km = manhattan_cells(r.origin, r.destination) * m.cell_length_km;
      r.fare = fare.base + fare.per_km * trip_km;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<double> forecast_demand(std::span<const std::vector<double>> history,
                                    int window) {
  if (history.empty()) {
    throw std::invalid_argument("forecast_demand: history must cover >= 1 tick");
  }
  const std::size_t zones = history.back().size();
  const std::size_t rows = std::min<std::size_t>(history.size(),
                                                 static_cast<std::size_t>(std::max(window, 1)));
  std::vector<double> mean(zones, 0.0);
  for (std::size_t i = history.size() - rows; i < history.size(); ++i) {
    if (history[i].size() != zones) {
      throw std::invalid_argument("forecast_demand: ragged history");
    }
    for (std::size_t z = 0; z < zones; ++z) mean[z] += history[i][z];
  }
  for (double& v : mean) v /= static_cast<double>(rows);
  return mean;
}

std::vector<double> project_supply(const TravelModel& m,
                                   std::span<const SupplyVehicleView> vehicles,
                                   int horizon_ticks) {
  const int zones = m.zone_count();
  std::vector<double> out(static_cast<std::size_t>(zones) * (horizon_ticks + 1), 0.0);
  for (const auto& v : vehicles) {
    if (v.remaining_stops.empty()) {
      out[static_cast<std::size_t>(m.zone_index(v.location))] += 1.0;
      continue;
    }
    double minutes = travel_minutes(m, v.location, v.remaining_stops.front());
    for (std::size_t i = 1; i < v.remaining_stops.size(); ++i) {
      minutes += travel_minutes(m, v.remaining_stops[i - 1], v.remaining_stops[i]);
    }
    const long bucket = static_cast<long>(std::floor(minutes));
    if (bucket > horizon_ticks) continue;
    const int zone = m.zone_index(v.remaining_stops.back());
    out[static_cast<std::size_t>(bucket) * zones + zone] += 1.0;
  }
  return out;
}

Forecast make_forecast(const TravelModel& m,
                       std::span<const std::vector<double>> history, int window,
                       std::span<const SupplyVehicleView> vehicles,
                       int horizon_ticks) {
  Forecast f;
  f.horizon_ticks = horizon_ticks;
  f.zones = m.zone_count();
  const std::vector<double> mean = forecast_demand(history, window);
  f.demand.resize(static_cast<std::size_t>(f.zones) * (horizon_ticks + 1));
  for (int b = 0; b <= horizon_ticks; ++b) {
    std::copy(mean.begin(), mean.end(),
              f.demand.begin() + static_cast<std::size_t>(b) * f.zones);
  }
  f.supply = project_supply(m, vehicles, horizon_ticks);
  return f;
}

namespace {

std::vector<DemandPattern> make_uniform(const TravelModel& m, int k_true,
                                        double rate_scale) {
  std::vector<DemandPattern> out(k_true);
  const int zones = m.zone_count();
  for (auto& p : out) {
    p.zone_rates.assign(zones, rate_scale / zones);
    p.destination_weights.assign(zones, 1.0);
  }
  return out;
}

// Hotspot anchors: the four quadrant centers, cycled for larger k.
GridCoord hotspot_anchor(const TravelModel& m, int pattern) {
  const int r4 = std::max(m.rows / 4, 0);
  const int c4 = std::max(m.cols / 4, 0);
  const GridCoord anchors[4] = {
      {r4, c4},
      {m.rows - 1 - r4, m.cols - 1 - c4},
      {r4, m.cols - 1 - c4},
      {m.rows - 1 - r4, c4}};
  return anchors[pattern % 4];
}

std::vector<DemandPattern> make_two_peak(const TravelModel& m, int k_true,
                                         double rate_scale, double peak_contrast) {
  std::vector<DemandPattern> out(k_true);
  const int zones = m.zone_count();
  const double decay = std::max(1.0, (m.rows + m.cols) / 8.0);
  for (int p = 0; p < k_true; ++p) {
    DemandPattern& pat = out[p];
    pat.zone_rates.resize(zones);
    const GridCoord center = hotspot_anchor(m, p);
    double kernel_total = 0;
    for (int z = 0; z < zones; ++z) {
      pat.zone_rates[z] = std::exp(-manhattan_cells(m.zone_at(z), center) / decay);
      kernel_total += pat.zone_rates[z];
    }
    // Alternating total volume so regime flips also shift aggregate demand.
    const double volume = rate_scale * (1.0 + (peak_contrast - 1.0) * (p % 2));
    for (int z = 0; z < zones; ++z) {
      pat.zone_rates[z] = volume * (0.85 * pat.zone_rates[z] / kernel_total +
                                    0.15 / zones);
    }
    pat.destination_weights.assign(zones, 1.0);
  }
  return out;
}

}  // namespace

std::vector<DemandPattern> make_patterns(const std::string& preset,
                                         const TravelModel& m, int k_true,
                                         double rate_scale,
                                         double peak_contrast) {
  if (k_true <= 0) throw std::invalid_argument("make_patterns: k_true must be positive");
  if (preset == "uniform") return make_uniform(m, k_true, rate_scale);
  if (preset == "two_peak") return make_two_peak(m, k_true, rate_scale, peak_contrast);
  throw std::invalid_argument("make_patterns: unknown preset '" + preset + "'");
}

std::vector<DemandPattern> load_patterns_json(const std::string& path,
                                              const TravelModel& m) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file: " + path);
  nlohmann::json doc;
  in >> doc;
  std::vector<DemandPattern> out;
  for (const auto& jp : doc.at("patterns")) {
    DemandPattern p;
    p.zone_rates = jp.at("rates").get<std::vector<double>>();
    if (static_cast<int>(p.zone_rates.size()) != m.zone_count()) {
      throw std::runtime_error("pattern file: rates length != zone count");
    }
    if (jp.contains("destination_weights")) {
      p.destination_weights = jp["destination_weights"].get<std::vector<double>>();
      if (static_cast<int>(p.destination_weights.size()) != m.zone_count()) {
        throw std::runtime_error("pattern file: destination_weights length != zone count");
      }
    } else {
      p.destination_weights.assign(m.zone_count(), 1.0);
    }
    if (jp.contains("passenger_probs")) {
      const auto probs = jp["passenger_probs"].get<std::vector<double>>();
      if (probs.size() != 4) {
        throw std::runtime_error("pattern file: passenger_probs must have 4 entries");
      }
      std::copy(probs.begin(), probs.end(), p.passenger_probs.begin());
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) throw std::runtime_error("pattern file: no patterns");
  return out;
}

}  // namespace adafleet
