#include "adafleet/qdispatch.hpp"

#include <algorithm>
#include <stdexcept>

namespace adafleet {

namespace {

std::array<Action, kActionCount> build_action_table() {
  std::array<Action, kActionCount> table;
  std::size_t n = 0;
  for (int dr = -kActionRadius; dr <= kActionRadius; ++dr) {
    for (int dc = -kActionRadius; dc <= kActionRadius; ++dc) {
      table[n++] = {dr, dc};
    }
  }
  std::sort(table.begin(), table.end(), [](Action a, Action b) {
    const int ra = std::abs(a.dr) + std::abs(a.dc);
    const int rb = std::abs(b.dr) + std::abs(b.dc);
    if (ra != rb) return ra < rb;
    if (a.dr != b.dr) return a.dr < b.dr;
    return a.dc < b.dc;
  });
  return table;
}

}  // namespace

const std::array<Action, kActionCount>& action_table() {
  static const std::array<Action, kActionCount> table = build_action_table();
  return table;
}

int action_index(Action a) {
  const auto& table = action_table();
  for (int i = 0; i < kActionCount; ++i) {
    if (table[i] == a) return i;
  }
  throw std::invalid_argument("action_index: offset out of range");
}

GridCoord dispatch_target(const TravelModel& m, GridCoord from, Action a) {
  return m.clamp({from.row + a.dr, from.col + a.dc});
}

double reward(const RewardComponents& c, const RewardWeights& w) {
  return w.served * c.customers -
         (w.dispatch * c.dispatch_minutes + w.extra_time * c.extra_minutes) +
         w.profit * c.profit - w.activation * c.activation;
}

RewardComponents compute_components(const ComponentInputs& in) {
  RewardComponents c;
  c.customers = in.passengers_picked_up;
  c.dispatch_minutes = in.dispatch_minutes;
  for (double extra : in.rider_extra_minutes) {
    c.extra_minutes += std::max(0.0, extra);
  }
  c.profit = in.fares_earned -
             (in.distance_km / in.mileage_km_per_unit) * in.gas_price;
  c.activation = (!in.was_occupied && in.now_occupied) ? 1.0 : 0.0;
  return c;
}

Rates schedule_at(long step, const DecaySchedule& s) {
  auto lerp = [step](double start, double end, long budget) {
    if (budget <= 0 || step >= budget) return end;
    const double f = static_cast<double>(step) / static_cast<double>(budget);
    return start + (end - start) * f;
  };
  return {lerp(s.eps_start, s.eps_end, s.eps_steps),
          lerp(s.sigma_start, s.sigma_end, s.sigma_steps)};
}

ModelBank::ModelBank(int k, int zones) : k_(k), zones_(zones) {
  if (k <= 0 || zones <= 0) {
    throw std::invalid_argument("ModelBank: k and zones must be positive");
  }
  tables_.assign(k, std::vector<double>(
                        static_cast<std::size_t>(zones) * kActionCount, 0.0));
}

double ModelBank::q(int context, int zone, int action) const {
  return tables_[context - 1][static_cast<std::size_t>(zone) * kActionCount + action];
}

double ModelBank::active_q(int zone, int action) const {
  return q(context_, zone, action);
}

void ModelBank::set_q(int context, int zone, int action, double value) {
  tables_[context - 1][static_cast<std::size_t>(zone) * kActionCount + action] = value;
}

std::span<const double> ModelBank::table(int context) const {
  return tables_[context - 1];
}

int ModelBank::argmax_action(int zone) const {
  const auto& row = tables_[context_ - 1];
  const std::size_t base = static_cast<std::size_t>(zone) * kActionCount;
  int best = 0;
  double best_q = row[base];
  for (int a = 1; a < kActionCount; ++a) {
    if (row[base + a] > best_q) {
      best_q = row[base + a];
      best = a;
    }
  }
  return best;
}

Action best_action(const ModelBank& bank, int zone, double eps, Rng& rng) {
  if (eps > 0 && uniform01(rng) < eps) {
    return action_table()[uniform_index(rng, kActionCount)];
  }
  return action_table()[bank.argmax_action(zone)];
}

void q_update(ModelBank& bank, int zone, int action, double r, int next_zone,
              double sigma, double eta) {
  auto& row = bank.tables_[bank.context_ - 1];
  const std::size_t idx = static_cast<std::size_t>(zone) * kActionCount + action;
  const std::size_t next_base = static_cast<std::size_t>(next_zone) * kActionCount;
  double next_max = row[next_base];
  for (int a = 1; a < kActionCount; ++a) {
    next_max = std::max(next_max, row[next_base + a]);
  }
  row[idx] = (1.0 - sigma) * row[idx] + sigma * (r + eta * next_max);
}

int switch_context(ModelBank& bank, long detected_tick) {
  bank.context_ = (bank.context_ % bank.k_) + 1;
  bank.last_change_tick_ = detected_tick;
  return bank.context_;
}

}  // namespace adafleet
