#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "adafleet/config.hpp"
#include "adafleet/demand.hpp"
#include "adafleet/matching.hpp"
#include "adafleet/metrics.hpp"
#include "adafleet/qdispatch.hpp"
#include "adafleet/routing.hpp"
#include "adafleet/rng.hpp"

namespace adafleet {

struct SimInvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VehicleStatus { OffDuty, Idle, Relocating, Serving };

struct OnboardRider {
  int request_id = -1;
  int passengers = 0;
  long request_tick = 0;
  double solo_minutes = 0;
  double fare = 0;
};

// An open action window: the decision state plus the reward components
// accumulated since the action was taken. Closed with one Q-update at the
// vehicle's next decision point (or retirement).
struct PendingAction {
  int zone = 0;
  int action = 0;
  long taken_tick = 0;
  RewardComponents accum;
};

struct Vehicle {
  int id = -1;
  GridCoord location;
  Route route;
  int capacity_used = 0;  // passengers on board
  int capacity_max = 4;
  VehicleStatus status = VehicleStatus::OffDuty;
  double earnings = 0;
  double distance_km = 0;
  long idle_since = 0;
  double idle_minutes = 0;
  long entered_at = -1;
  int working_minutes = 0;
  bool occupied_prev = false;
  bool ever_entered = false;
  std::vector<OnboardRider> onboard;

  GridCoord relocation_target;
  double travel_budget_minutes = 0;

  std::optional<PendingAction> pending;
  Rng rng;
  int entry_offset = 0;  // tick within each day's entry window

  // Per-tick scratch, reset at the top of every tick.
  int picked_pax_tick = 0;
  int dropoffs_tick = 0;
  double fares_tick = 0;
  double distance_tick = 0;
  double dispatch_minutes_scratch = 0;  // consumed by the next reward pass

  bool on_duty() const { return status != VehicleStatus::OffDuty; }
  bool is_idle() const { return status == VehicleStatus::Idle; }
  int committed_passengers() const;
};

struct RunOptions {
  bool validate_invariants = true;
  // Start from previously learned tables instead of zeros.
  const ModelBank* initial_bank = nullptr;
  // Exploitation: epsilon pinned at eps_end, no Q-updates; CPD still
  // switches contexts.
  bool exploit_only = false;
  // Force context switches at these ticks (ascending), bypassing the
  // detector; for controlled experiments against known schedules.
  std::vector<long> scripted_switch_ticks;
};

class World {
 public:
  World(const Config& config, std::uint64_t seed, RunOptions options = {});

  /// One tick of the main loop: admissions and their dispatch, request
  /// generation, matching, insertion, movement, rewards and Q-updates,
  /// idle re-dispatch, change-point detection, retirement, metrics.
  void step();

  /// Queues a scripted request for the next step, alongside generated
  /// demand. Returns its id.
  int inject_request(GridCoord origin, GridCoord destination, int passengers);

  long tick() const { return tick_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const std::vector<Request>& requests() const { return requests_; }
  const ModelBank& bank() const { return bank_; }
  ModelBank& bank() { return bank_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }
  const std::vector<ChangeEvent>& changes() const { return changes_; }
  const std::deque<std::vector<double>>& demand_history() const {
    return demand_history_;
  }
  const TravelModel& travel_model() const { return model_; }

  /// Cross-checks request conservation, capacity bounds, route sanity,
  /// distance accounting, and clock monotonicity; throws
  /// SimInvariantViolation on the first failure.
  void validate() const;

 private:
  void admit_vehicles();
  void generate_tick_requests();
  void expire_pending_requests();
  void match_and_insert();
  void advance_vehicle(Vehicle& v);
  void rewards_and_updates();
  void redispatch_idle();
  void run_change_detection();
  void retire_vehicles();
  void record_metrics();

  void dispatch_vehicle(Vehicle& v);
  void close_pending(Vehicle& v);
  bool redispatch_eligible(const Vehicle& v) const;
  double rider_eta_minutes(const Vehicle& v, int request_id) const;

  Config config_;
  RunOptions options_;
  TravelModel model_;
  DiurnalSchedule schedule_;
  std::vector<DemandPattern> patterns_;
  FareModel fare_;
  RewardWeights weights_;
  DecaySchedule decay_;
  int cpd_min_segment_ = 0;

  long tick_ = 0;
  std::vector<Vehicle> vehicles_;
  std::vector<Request> requests_;  // request id indexes this catalog
  std::vector<int> pending_ids_;
  std::vector<int> injected_ids_;  // staged for the next step
  ModelBank bank_;
  Rng demand_rng_;

  std::deque<std::vector<double>> demand_history_;
  std::vector<std::vector<double>> cpd_features_;
  std::vector<long> cpd_feature_ticks_;

  std::vector<MetricsRow> metrics_;
  std::vector<ChangeEvent> changes_;
  std::size_t scripted_switch_next_ = 0;
  double cumulative_profit_ = 0;
  double cumulative_distance_check_ = 0;

  // Current tick's counters.
  long generated_tick_ = 0;
  long accepted_tick_ = 0;
  long rejected_tick_ = 0;
  double mean_reward_tick_ = 0;
  bool change_tick_ = false;
};

struct SimResult {
  std::vector<MetricsRow> metrics;
  std::vector<ChangeEvent> changes;
  ModelBank bank;
};

/// Runs config.sim_ticks ticks from a fresh world.
SimResult run_simulation(const Config& config, std::uint64_t seed,
                         RunOptions options = {});

void save_bank(const ModelBank& bank, const std::string& path);
ModelBank load_bank(const std::string& path);

}  // namespace adafleet
