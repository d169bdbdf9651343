#pragma once

#include <array>
#include <span>
#include <vector>

#include "adafleet/citygrid.hpp"
#include "adafleet/rng.hpp"

namespace adafleet {

// Relocation offset in cells; up to 7 in each direction gives the 15x15
// action set. Index 0 is stay-in-place: actions are ordered by
// (|dr| + |dc|, dr, dc) so greedy ties prefer shorter moves.
struct Action {
  int dr = 0;  // row offset
  int dc = 0;  // column offset
  bool operator==(const Action&) const = default;
};

inline constexpr int kActionRadius = 7;
inline constexpr int kActionCount = 15 * 15;

const std::array<Action, kActionCount>& action_table();
int action_index(Action a);

GridCoord dispatch_target(const TravelModel& m, GridCoord from, Action a);

struct RewardWeights {
  double served = 10;       // beta1
  double dispatch = 1;      // beta2
  double extra_time = 5;    // beta3
  double profit = 12;       // beta4
  double activation = 8;    // beta5
};

struct RewardComponents {
  double customers = 0;         // passengers picked up in the window
  double dispatch_minutes = 0;  // travel time of the dispatch decision
  double extra_minutes = 0;     // pooling delay over onboard riders
  double profit = 0;            // fares minus fuel cost
  double activation = 0;        // empty -> occupied transitions
};

double reward(const RewardComponents& c, const RewardWeights& w);

struct ComponentInputs {
  int passengers_picked_up = 0;
  double dispatch_minutes = 0;
  // Per onboard rider: elapsed-since-request + current ETA - solo ETA
  // (unfloored; each rider is floored at zero inside).
  std::vector<double> rider_extra_minutes;
  double fares_earned = 0;
  double distance_km = 0;
  double mileage_km_per_unit = 10.0;
  double gas_price = 3.0;
  bool was_occupied = false;
  bool now_occupied = false;
};

RewardComponents compute_components(const ComponentInputs& in);

struct DecaySchedule {
  double eps_start = 1.0;
  double eps_end = 0.1;
  long eps_steps = 20000;
  double sigma_start = 0.1;
  double sigma_end = 0.001;
  long sigma_steps = 10000;
};

struct Rates {
  double eps = 1.0;
  double sigma = 0.1;
};

/// Linear decay, clamped at the end values past the step budgets.
Rates schedule_at(long step, const DecaySchedule& schedule);

// k per-context Q-tables over (zone, action), zero-initialized; only the
// active context's table is read or written, so earlier contexts keep
// what they learned.
class ModelBank {
 public:
  ModelBank(int k, int zones);

  int contexts() const { return k_; }
  int zones() const { return zones_; }
  int context() const { return context_; }
  long last_change_tick() const { return last_change_tick_; }

  double q(int context, int zone, int action) const;
  double active_q(int zone, int action) const;
  void set_q(int context, int zone, int action, double value);

  /// Argmax over the active context's row; ties take the smallest index.
  int argmax_action(int zone) const;

  long training_steps = 0;

  friend void q_update(ModelBank& bank, int zone, int action, double r,
                       int next_zone, double sigma, double eta);
  friend int switch_context(ModelBank& bank, long detected_tick);

  std::span<const double> table(int context) const;

 private:
  int k_;
  int zones_;
  int context_ = 1;  // 1-based per the cyclic wrap rule
  long last_change_tick_ = 0;
  std::vector<std::vector<double>> tables_;
};

/// Epsilon-greedy over the active table: greedy argmax with probability
/// 1 - eps, otherwise a uniformly random action.
Action best_action(const ModelBank& bank, int zone, double eps, Rng& rng);

/// Q'(s,a) = (1 - sigma) Q(s,a) + sigma [r + eta max_a' Q(s',a')] on the
/// active context's table only.
void q_update(ModelBank& bank, int zone, int action, double r, int next_zone,
              double sigma, double eta);

/// Cyclic advance c -> c + 1 with k wrapping back to 1; records the tick.
/// Returns the new context.
int switch_context(ModelBank& bank, long detected_tick);

}  // namespace adafleet
