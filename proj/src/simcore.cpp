#include "adafleet/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "adafleet/cpd.hpp"

namespace adafleet {

namespace {

constexpr long kDayTicks = 24 * 60;
constexpr std::uint64_t kDemandStream = 1;
constexpr std::uint64_t kFleetStream = 2;
constexpr std::uint64_t kVehicleStreamBase = 1000;

}  // namespace

int Vehicle::committed_passengers() const {
  int total = capacity_used;
  for (const auto& s : route.stops) {
    if (s.kind == StopKind::Pickup) total += s.passengers;
  }
  return total;
}

namespace {

const Config& validated(const Config& config) {
  validate_config(config);
  return config;
}

}  // namespace

World::World(const Config& config, std::uint64_t seed, RunOptions options)
    : config_(validated(config)),
      options_(options),
      model_(config.travel_model()),
      schedule_(config.schedule()),
      patterns_(config_patterns(config)),
      fare_{config.fare_base, config.fare_per_km},
      bank_(config.rl_k, config.travel_model().zone_count()),
      demand_rng_(make_stream(seed ? seed : config.demand_seed, kDemandStream)) {
  const std::uint64_t base = seed ? seed : config.demand_seed;

  weights_ = RewardWeights{config_.rl_beta[0], config_.rl_beta[1],
                           config_.rl_beta[2], config_.rl_beta[3],
                           config_.rl_beta[4]};
  decay_.eps_steps = config_.rl_eps_steps;
  // 4-dimensional per-tick aggregate feeds the detector.
  cpd_min_segment_ = config_.cpd_min_segment > 0 ? config_.cpd_min_segment : 4 + 2;

  if (options_.initial_bank) {
    if (options_.initial_bank->contexts() != bank_.contexts() ||
        options_.initial_bank->zones() != bank_.zones()) {
      throw ConfigError("initial Q-table bank does not match rl.k / grid size");
    }
    bank_ = *options_.initial_bank;
  }

  Rng fleet_rng = make_stream(base, kFleetStream);
  vehicles_.resize(config_.fleet_size);
  for (int i = 0; i < config_.fleet_size; ++i) {
    Vehicle& v = vehicles_[i];
    v.id = i;
    v.location = model_.zone_at(
        static_cast<int>(uniform_index(fleet_rng, model_.zone_count())));
    v.capacity_max = config_.fleet_capacity;
    v.rng = make_stream(base, kVehicleStreamBase + static_cast<std::uint64_t>(i));
    v.entry_offset = config_.fleet_size > 0
                         ? static_cast<int>((static_cast<long>(i) *
                                             config_.sim_entry_window) /
                                            config_.fleet_size)
                         : 0;
  }
}

void World::dispatch_vehicle(Vehicle& v) {
  const Rates rates = schedule_at(bank_.training_steps, decay_);
  const double eps = options_.exploit_only ? decay_.eps_end : rates.eps;
  const int zone = model_.zone_index(v.location);
  const Action a = best_action(bank_, zone, eps, v.rng);
  const GridCoord target = dispatch_target(model_, v.location, a);
  const double dispatch_minutes = travel_minutes(model_, v.location, target);

  PendingAction pending;
  pending.zone = zone;
  pending.action = action_index(a);
  pending.taken_tick = tick_;
  pending.accum.dispatch_minutes = dispatch_minutes;
  v.pending = pending;
  v.dispatch_minutes_scratch += dispatch_minutes;

  v.relocation_target = target;
  v.status = VehicleStatus::Relocating;
}

void World::close_pending(Vehicle& v) {
  if (!v.pending) return;
  if (!options_.exploit_only) {
    const Rates rates = schedule_at(bank_.training_steps, decay_);
    const double r = reward(v.pending->accum, weights_);
    const int next_zone = model_.zone_index(v.location);
    q_update(bank_, v.pending->zone, v.pending->action, r, next_zone,
             rates.sigma, config_.rl_eta);
    ++bank_.training_steps;
  }
  v.pending.reset();
}

void World::admit_vehicles() {
  const long day_start = (tick_ / kDayTicks) * kDayTicks;
  for (auto& v : vehicles_) {
    if (v.on_duty()) continue;
    if (tick_ != day_start + v.entry_offset) continue;
    v.status = VehicleStatus::Idle;
    v.entered_at = tick_;
    v.ever_entered = true;
    v.working_minutes = 0;
    v.idle_since = tick_;
    if (tick_ >= config_.sim_warmup_ticks) {
      dispatch_vehicle(v);
    }
  }
}

int World::inject_request(GridCoord origin, GridCoord destination, int passengers) {
  if (!model_.contains(origin) || !model_.contains(destination) ||
      origin == destination || passengers < 1 || passengers > 4) {
    throw std::invalid_argument("inject_request: invalid request");
  }
  Request r;
  r.id = static_cast<int>(requests_.size());
  r.origin = origin;
  r.destination = destination;
  r.passengers = passengers;
  r.request_tick = tick_;
  r.fare = fare_.base + fare_.per_km * manhattan_cells(origin, destination) *
                            model_.cell_length_km;
  injected_ids_.push_back(r.id);
  requests_.push_back(r);
  return r.id;
}

void World::generate_tick_requests() {
  const int pattern = active_true_model(tick_, schedule_);
  auto generated =
      generate_requests(model_, patterns_.at(pattern), fare_, tick_,
                        static_cast<int>(requests_.size()), demand_rng_);
  generated_tick_ =
      static_cast<long>(generated.size() + injected_ids_.size());

  std::vector<double> zone_counts(model_.zone_count(), 0.0);
  for (int id : injected_ids_) {
    zone_counts[model_.zone_index(requests_[id].origin)] += 1.0;
    pending_ids_.push_back(id);
  }
  injected_ids_.clear();
  for (auto& r : generated) {
    zone_counts[model_.zone_index(r.origin)] += 1.0;
    pending_ids_.push_back(r.id);
    requests_.push_back(std::move(r));
  }
  demand_history_.push_back(std::move(zone_counts));
  while (demand_history_.size() >
         static_cast<std::size_t>(std::max(config_.demand_forecast_window, 1))) {
    demand_history_.pop_front();
  }
}

void World::expire_pending_requests() {
  std::vector<int> still_pending;
  still_pending.reserve(pending_ids_.size());
  for (int id : pending_ids_) {
    Request& r = requests_[id];
    if (tick_ - r.request_tick >= config_.sim_request_ttl) {
      r.status = RequestStatus::Rejected;
      ++rejected_tick_;
    } else {
      still_pending.push_back(id);
    }
  }
  pending_ids_ = std::move(still_pending);
}

void World::match_and_insert() {
  if (pending_ids_.empty()) return;

  std::vector<PendingRequestView> views;
  views.reserve(pending_ids_.size());
  for (int id : pending_ids_) {
    views.push_back({id, requests_[id].origin});
  }
  std::vector<CandidateVehicle> snapshot;
  snapshot.reserve(vehicles_.size());
  for (const auto& v : vehicles_) {
    const bool available = v.on_duty() &&
                           v.working_minutes < config_.fleet_max_working_minutes &&
                           v.committed_passengers() < v.capacity_max;
    snapshot.push_back({v.id, v.location, available});
  }

  const MatchResult match =
      potential_assignments(views, snapshot, config_.match_radius_cells);
  for (int id : match.rejected_ids) {
    requests_[id].status = RequestStatus::Rejected;
    ++rejected_tick_;
  }

  for (const auto& list : match.assignments) {
    if (list.request_ids.empty()) continue;
    Vehicle& v = vehicles_[list.vehicle_id];
    std::vector<RideRequestView> candidates;
    candidates.reserve(list.request_ids.size());
    for (int id : list.request_ids) {
      const Request& r = requests_[id];
      candidates.push_back({id, r.origin, r.destination, r.passengers});
    }
    GreedyInsertionResult result = greedy_insertion(
        model_, v.location, v.route, v.committed_passengers(), v.capacity_max,
        std::move(candidates), config_.routing_max_detour_ratio);
    if (result.matched_ids.empty()) continue;

    for (int id : result.matched_ids) {
      Request& r = requests_[id];
      r.status = RequestStatus::Assigned;
      r.assigned_vehicle = v.id;
      r.assigned_tick = tick_;
      r.solo_minutes = travel_minutes(model_, v.location, r.origin) +
                       travel_minutes(model_, r.origin, r.destination);
      ++accepted_tick_;
    }
    v.route = std::move(result.route);
    // A fresh commitment preempts any relocation in progress.
    v.status = VehicleStatus::Serving;
  }

  // Both matched and radius-rejected ids leave the pool here.
  std::vector<int> still_pending;
  still_pending.reserve(pending_ids_.size());
  for (int id : pending_ids_) {
    if (requests_[id].status == RequestStatus::Pending) still_pending.push_back(id);
  }
  pending_ids_ = std::move(still_pending);
}

void World::advance_vehicle(Vehicle& v) {
  if (!v.on_duty()) return;

  if (v.status == VehicleStatus::Serving || v.status == VehicleStatus::Relocating) {
    v.travel_budget_minutes += 1.0;
  } else {
    v.travel_budget_minutes = 0;
  }

  for (;;) {
    // Handle every stop already under the wheels before moving further.
    while (!v.route.stops.empty() && v.route.stops.front().coord == v.location) {
      const Stop stop = v.route.stops.front();
      v.route.stops.erase(v.route.stops.begin());
      Request& r = requests_[stop.request_id];
      if (stop.kind == StopKind::Pickup) {
        r.status = RequestStatus::Onboard;
        v.capacity_used += stop.passengers;
        v.picked_pax_tick += stop.passengers;
        v.onboard.push_back({r.id, r.passengers, r.request_tick, r.solo_minutes,
                             r.fare});
      } else {
        r.status = RequestStatus::Completed;
        v.capacity_used -= stop.passengers;
        ++v.dropoffs_tick;
        v.fares_tick += r.fare;
        v.earnings += r.fare;
        std::erase_if(v.onboard, [&](const OnboardRider& rider) {
          return rider.request_id == r.id;
        });
      }
    }

    GridCoord waypoint;
    if (!v.route.stops.empty()) {
      waypoint = v.route.stops.front().coord;
    } else if (v.status == VehicleStatus::Relocating) {
      if (v.relocation_target == v.location) {
        v.status = VehicleStatus::Idle;
        v.idle_since = tick_;
        v.travel_budget_minutes = 0;
        break;
      }
      waypoint = v.relocation_target;
    } else {
      if (v.status == VehicleStatus::Serving) {
        // Route drained this tick; the vehicle is free again.
        v.status = VehicleStatus::Idle;
        v.idle_since = tick_;
      }
      v.travel_budget_minutes = 0;
      break;
    }

    if (v.travel_budget_minutes < model_.minutes_per_cell) break;
    // One cell toward the waypoint, rows first.
    if (v.location.row != waypoint.row) {
      v.location.row += (waypoint.row > v.location.row) ? 1 : -1;
    } else {
      v.location.col += (waypoint.col > v.location.col) ? 1 : -1;
    }
    v.travel_budget_minutes -= model_.minutes_per_cell;
    v.distance_tick += model_.cell_length_km;
    v.distance_km += model_.cell_length_km;
  }

  if (v.is_idle()) {
    v.idle_minutes += 1.0;
  }
  if (v.working_minutes < config_.fleet_max_working_minutes) {
    ++v.working_minutes;
  }
}

double World::rider_eta_minutes(const Vehicle& v, int request_id) const {
  double minutes = 0;
  GridCoord at = v.location;
  for (const auto& s : v.route.stops) {
    minutes += travel_minutes(model_, at, s.coord);
    at = s.coord;
    if (s.kind == StopKind::Dropoff && s.request_id == request_id) {
      return minutes;
    }
  }
  return minutes;
}

void World::rewards_and_updates() {
  double reward_sum = 0;
  long active = 0;
  for (auto& v : vehicles_) {
    if (!v.on_duty() && v.picked_pax_tick == 0 && v.distance_tick == 0 &&
        v.fares_tick == 0) {
      continue;
    }
    ComponentInputs in;
    in.passengers_picked_up = v.picked_pax_tick;
    in.dispatch_minutes = v.dispatch_minutes_scratch;
    in.fares_earned = v.fares_tick;
    in.distance_km = v.distance_tick;
    in.mileage_km_per_unit = config_.fleet_mileage;
    in.gas_price = config_.rl_gas_price;
    in.was_occupied = v.occupied_prev;
    in.now_occupied = !v.onboard.empty();
    for (const auto& rider : v.onboard) {
      const double elapsed = static_cast<double>(tick_ - rider.request_tick);
      in.rider_extra_minutes.push_back(
          elapsed + rider_eta_minutes(v, rider.request_id) - rider.solo_minutes);
    }
    const RewardComponents components = compute_components(in);
    const double r = reward(components, weights_);
    if (v.on_duty()) {
      reward_sum += r;
      ++active;
    }
    cumulative_profit_ += components.profit;
    v.dispatch_minutes_scratch = 0;
    v.occupied_prev = !v.onboard.empty();

    if (v.pending) {
      auto& acc = v.pending->accum;
      acc.customers += components.customers;
      acc.extra_minutes += components.extra_minutes;
      acc.profit += components.profit;
      acc.activation += components.activation;
    }
    // The window closes at the first realized drop-off after the action,
    // or right before the vehicle decides again, whichever comes first.
    if (v.pending && (v.dropoffs_tick > 0 || redispatch_eligible(v))) {
      close_pending(v);
    }
  }
  mean_reward_tick_ = active > 0 ? reward_sum / static_cast<double>(active) : 0.0;
}

bool World::redispatch_eligible(const Vehicle& v) const {
  return v.is_idle() && tick_ >= config_.sim_warmup_ticks &&
         v.working_minutes < config_.fleet_max_working_minutes &&
         (tick_ - v.idle_since) > config_.sim_idle_trigger;
}

void World::redispatch_idle() {
  for (auto& v : vehicles_) {
    if (redispatch_eligible(v)) {
      dispatch_vehicle(v);
    }
  }
}

void World::run_change_detection() {
  if (tick_ < config_.sim_warmup_ticks) return;  // skip initialization transients
  if (!options_.scripted_switch_ticks.empty() &&
      scripted_switch_next_ < options_.scripted_switch_ticks.size() &&
      options_.scripted_switch_ticks[scripted_switch_next_] == tick_) {
    ++scripted_switch_next_;
    for (auto& v : vehicles_) {
      if (v.pending) close_pending(v);
    }
    const int old_context = bank_.context();
    const int new_context = switch_context(bank_, tick_);
    changes_.push_back({tick_, old_context, new_context, 0.0});
    change_tick_ = true;
    cpd_features_.clear();
    cpd_feature_ticks_.clear();
    return;
  }

  long idle_count = 0;
  long duty_count = 0;
  for (const auto& v : vehicles_) {
    if (!v.on_duty()) continue;
    ++duty_count;
    if (v.is_idle()) ++idle_count;
  }
  const double idle_fraction =
      duty_count > 0 ? static_cast<double>(idle_count) / duty_count : 0.0;
  cpd_features_.push_back({static_cast<double>(generated_tick_),
                           static_cast<double>(accepted_tick_),
                           mean_reward_tick_, idle_fraction});
  cpd_feature_ticks_.push_back(tick_);
  if (config_.cpd_max_window > 0 &&
      cpd_features_.size() > static_cast<std::size_t>(config_.cpd_max_window)) {
    cpd_features_.erase(cpd_features_.begin());
    cpd_feature_ticks_.erase(cpd_feature_ticks_.begin());
  }

  if (!config_.cpd_enabled) return;
  if (tick_ == 0 || (tick_ + 1) % config_.cpd_window_ticks != 0) return;
  if (cpd_features_.size() < static_cast<std::size_t>(2 * cpd_min_segment_)) return;

  ChangeReport report;
  try {
    const auto samples = to_composition(cpd_features_, config_.cpd_epsilon);
    report = detect_change(samples, config_.cpd_threshold, cpd_min_segment_);
  } catch (const DegenerateInput&) {
    return;
  } catch (const NonConvergence&) {
    return;
  } catch (const WindowTooSmall&) {
    return;
  }
  if (!report.detected) return;

  // Close every open window under the regime that produced it, then flip.
  for (auto& v : vehicles_) {
    if (v.pending) close_pending(v);
  }
  const int old_context = bank_.context();
  const long change_tick = cpd_feature_ticks_[report.change_index - 1];
  const int new_context = switch_context(bank_, change_tick);
  changes_.push_back({change_tick, old_context, new_context, report.score});
  change_tick_ = true;

  // Restart the detector window right after the detected change.
  cpd_features_.erase(cpd_features_.begin(),
                      cpd_features_.begin() + report.change_index);
  cpd_feature_ticks_.erase(cpd_feature_ticks_.begin(),
                           cpd_feature_ticks_.begin() + report.change_index);
}

void World::retire_vehicles() {
  for (auto& v : vehicles_) {
    if (!v.on_duty()) continue;
    if (v.working_minutes < config_.fleet_max_working_minutes) continue;
    if (!v.route.stops.empty() || !v.onboard.empty()) continue;  // finish riders first
    close_pending(v);
    v.status = VehicleStatus::OffDuty;
    v.travel_budget_minutes = 0;
  }
}

void World::record_metrics() {
  MetricsRow row;
  row.tick = tick_;
  row.requests_generated = generated_tick_;
  row.requests_accepted = accepted_tick_;
  row.requests_rejected = rejected_tick_;
  int occupied = 0;
  long duty = 0;
  double idle_total = 0;
  long entered = 0;
  double distance_tick_total = 0;
  for (const auto& v : vehicles_) {
    distance_tick_total += v.distance_tick;
    if (v.ever_entered) {
      ++entered;
      idle_total += v.idle_minutes;
    }
    if (!v.on_duty()) continue;
    ++duty;
    if (!v.onboard.empty()) ++occupied;
  }
  row.fleet_distance_km = distance_tick_total;
  cumulative_distance_check_ += distance_tick_total;
  row.occupied_vehicles = occupied;
  row.utilized_fraction = duty > 0 ? static_cast<double>(occupied) / duty : 0.0;
  row.total_profit = cumulative_profit_;
  row.mean_idle_minutes = entered > 0 ? idle_total / entered : 0.0;
  row.active_context = bank_.context();
  row.change_detected = change_tick_;
  metrics_.push_back(row);
}

void World::step() {
  generated_tick_ = 0;
  accepted_tick_ = 0;
  rejected_tick_ = 0;
  change_tick_ = false;
  for (auto& v : vehicles_) {
    v.picked_pax_tick = 0;
    v.dropoffs_tick = 0;
    v.fares_tick = 0;
    v.distance_tick = 0;
  }

  admit_vehicles();
  generate_tick_requests();
  expire_pending_requests();
  match_and_insert();
  for (auto& v : vehicles_) advance_vehicle(v);
  rewards_and_updates();
  redispatch_idle();
  run_change_detection();
  retire_vehicles();
  record_metrics();
  if (options_.validate_invariants) validate();
  ++tick_;
}

void World::validate() const {
  // Request conservation: every generated request sits in exactly one pool.
  long pending = 0, assigned = 0, onboard = 0, completed = 0, rejected = 0;
  for (const auto& r : requests_) {
    switch (r.status) {
      case RequestStatus::Pending: ++pending; break;
      case RequestStatus::Assigned: ++assigned; break;
      case RequestStatus::Onboard: ++onboard; break;
      case RequestStatus::Completed: ++completed; break;
      case RequestStatus::Rejected: ++rejected; break;
    }
  }
  if (pending + assigned + onboard + completed + rejected !=
      static_cast<long>(requests_.size())) {
    throw SimInvariantViolation("request conservation broken");
  }
  if (pending != static_cast<long>(pending_ids_.size())) {
    throw SimInvariantViolation("pending pool out of sync");
  }

  long onboard_riders = 0;
  for (const auto& v : vehicles_) {
    int pax = 0;
    for (const auto& rider : v.onboard) pax += rider.passengers;
    if (pax != v.capacity_used) {
      throw SimInvariantViolation("capacity_used does not match onboard riders");
    }
    if (v.capacity_used > v.capacity_max) {
      throw SimInvariantViolation("vehicle over capacity");
    }
    onboard_riders += static_cast<long>(v.onboard.size());
    // Every onboard rider still has a drop-off; profile stays within the cap.
    const auto profile = capacity_profile(v.route, v.capacity_used);
    for (int occupancy : profile) {
      if (occupancy > v.capacity_max || occupancy < 0) {
        throw SimInvariantViolation("route capacity profile out of bounds");
      }
    }
    for (const auto& rider : v.onboard) {
      const bool has_dropoff = std::any_of(
          v.route.stops.begin(), v.route.stops.end(), [&](const Stop& s) {
            return s.kind == StopKind::Dropoff && s.request_id == rider.request_id;
          });
      if (!has_dropoff) {
        throw SimInvariantViolation("onboard rider lost its drop-off");
      }
    }
    if (v.working_minutes > config_.fleet_max_working_minutes) {
      throw SimInvariantViolation("working clock past the cap");
    }
  }
  if (onboard_riders != onboard) {
    throw SimInvariantViolation("onboard pool does not match vehicles");
  }

  double fleet_distance = 0;
  for (const auto& v : vehicles_) fleet_distance += v.distance_km;
  if (std::abs(fleet_distance - cumulative_distance_check_) > 1e-6) {
    throw SimInvariantViolation("distance accounting drifted");
  }
}

SimResult run_simulation(const Config& config, std::uint64_t seed,
                         RunOptions options) {
  World world(config, seed, options);
  for (long t = 0; t < config.sim_ticks; ++t) world.step();
  return {world.metrics(), world.changes(), world.bank()};
}

void save_bank(const ModelBank& bank, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write bank file: " + path);
  const char magic[8] = {'A', 'D', 'F', 'Q', '1', 0, 0, 0};
  out.write(magic, sizeof(magic));
  const std::int32_t header[3] = {static_cast<std::int32_t>(bank.contexts()),
                                  static_cast<std::int32_t>(bank.zones()),
                                  static_cast<std::int32_t>(bank.context())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const std::int64_t steps = bank.training_steps;
  out.write(reinterpret_cast<const char*>(&steps), sizeof(steps));
  for (int c = 1; c <= bank.contexts(); ++c) {
    const auto table = bank.table(c);
    out.write(reinterpret_cast<const char*>(table.data()),
              static_cast<std::streamsize>(table.size() * sizeof(double)));
  }
}

ModelBank load_bank(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open bank file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, "ADFQ1", 5) != 0) {
    throw std::runtime_error("bank file: bad magic");
  }
  std::int32_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  std::int64_t steps = 0;
  in.read(reinterpret_cast<char*>(&steps), sizeof(steps));
  if (!in) throw std::runtime_error("bank file: truncated header");
  ModelBank bank(header[0], header[1]);
  bank.training_steps = steps;
  for (int c = 1; c <= header[0]; ++c) {
    std::vector<double> table(static_cast<std::size_t>(header[1]) * kActionCount);
    in.read(reinterpret_cast<char*>(table.data()),
            static_cast<std::streamsize>(table.size() * sizeof(double)));
    if (!in) throw std::runtime_error("bank file: truncated table");
    for (int z = 0; z < header[1]; ++z) {
      for (int a = 0; a < kActionCount; ++a) {
        bank.set_q(c, z, a, table[static_cast<std::size_t>(z) * kActionCount + a]);
      }
    }
  }
  while (bank.context() != header[2]) switch_context(bank, 0);
  return bank;
}

}  // namespace adafleet
