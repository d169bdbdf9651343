#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>

#include "adafleet/config.hpp"
#include "adafleet/experiment.hpp"
#include "adafleet/metrics.hpp"
#include "adafleet/simcore.hpp"

using namespace adafleet;

namespace {

Config small_config() {
  Config c;
  c.grid_rows = 8;
  c.grid_cols = 8;
  c.demand_k_true = 2;
  c.demand_schedule = {{30, 0}, {30, 1}};
  c.demand_patterns = "two_peak";
  c.demand_rate_scale = 2.0;
  c.fleet_size = 8;
  c.sim_entry_window = 4;
  c.rl_k = 2;
  c.cpd_window_ticks = 15;
  c.sim_ticks = 120;
  return c;
}

}  // namespace

TEST_CASE("config text parsing") {
  const std::string text = R"(
# experiment knobs
grid.rows = 12
grid.cols = 10
demand.schedule = 240:0, 120:1
demand.patterns = uniform
rl.beta = 10,1,5,12,8
routing.max_detour_ratio = inf
cpd.enabled = false
sim.ticks = 99
)";
  const Config c = parse_config_text(text);
  CHECK(c.grid_rows == 12);
  CHECK(c.grid_cols == 10);
  REQUIRE(c.demand_schedule.size() == 2);
  CHECK(c.demand_schedule[0].duration_ticks == 240);
  CHECK(c.demand_schedule[1].pattern == 1);
  CHECK(c.demand_patterns == "uniform");
  CHECK(std::isinf(c.routing_max_detour_ratio));
  CHECK_FALSE(c.cpd_enabled);
  CHECK(c.sim_ticks == 99);
  // Untouched keys keep their defaults.
  CHECK(c.fleet_size == 200);
  CHECK(c.rl_k == 7);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config_text("grid.rowz = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("grid.rows == 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("grid.rows = x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("grid.rows = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("rl.beta = 1,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("rl.eta = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("demand.schedule = 100:5\n"), ConfigError);
  const char* unknown = "demand.scale = 2\n";
  try {
    parse_config_text(unknown);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    // The diagnostic names the offending key.
    CHECK(std::string(e.what()).find("demand.scale") != std::string::npos);
  }
}

TEST_CASE("metrics csv round-trips exactly") {
  std::vector<MetricsRow> rows;
  MetricsRow a;
  a.tick = 0;
  a.requests_generated = 3;
  a.requests_accepted = 2;
  a.requests_rejected = 1;
  a.fleet_distance_km = 12.34567890123;
  a.occupied_vehicles = 2;
  a.utilized_fraction = 1.0 / 3.0;
  a.total_profit = -0.125;
  a.mean_idle_minutes = 7.0;
  a.active_context = 4;
  a.change_detected = true;
  rows.push_back(a);
  MetricsRow b;
  b.tick = 1;
  b.utilized_fraction = 0.1 + 0.2;  // not exactly 0.3
  rows.push_back(b);

  const std::string csv = metrics_csv(rows);
  const std::vector<MetricsRow> parsed = parse_metrics_csv(csv);
  REQUIRE(parsed.size() == rows.size());
  CHECK(parsed[0] == rows[0]);
  CHECK(parsed[1] == rows[1]);
  CHECK(csv.find("\r") == std::string::npos);  // LF endings only
}

TEST_CASE("a zero-tick run emits the header alone") {
  Config c = small_config();
  c.sim_ticks = 0;
  const SimResult result = run_simulation(c, 1);
  CHECK(result.metrics.empty());
  const std::string csv = metrics_csv(result.metrics);
  CHECK(csv ==
        "tick,requests_generated,requests_accepted,requests_rejected,"
        "fleet_distance_km,occupied_vehicles,utilized_fraction,total_profit,"
        "mean_idle_minutes,active_context,change_detected\n");
}

TEST_CASE("run metrics survive a csv round-trip") {
  const SimResult result = run_simulation(small_config(), 31);
  const std::string csv = metrics_csv(result.metrics);
  const auto parsed = parse_metrics_csv(csv);
  REQUIRE(parsed.size() == result.metrics.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i] == result.metrics[i]);
  }
}

TEST_CASE("changepoint scorecard") {
  SUBCASE("vacuous cases") {
    const Scorecard none = changepoint_scorecard({}, {}, 5);
    CHECK(none.precision == 1.0);
    CHECK(none.recall == 1.0);
    CHECK(none.mean_abs_offset == 0.0);
  }
  SUBCASE("exact hits") {
    const std::vector<long> truth = {100, 200, 300};
    const Scorecard card = changepoint_scorecard(truth, truth, 5);
    CHECK(card.precision == 1.0);
    CHECK(card.recall == 1.0);
    CHECK(card.mean_abs_offset == 0.0);
  }
  SUBCASE("one of two found, offset two") {
    const std::vector<long> detected = {102};
    const std::vector<long> truth = {100, 200};
    const Scorecard card = changepoint_scorecard(detected, truth, 5);
    CHECK(card.recall == doctest::Approx(0.5));
    CHECK(card.precision == doctest::Approx(1.0));
    CHECK(card.mean_abs_offset == doctest::Approx(2.0));
  }
  SUBCASE("each true change absorbs one detection") {
    const std::vector<long> detected = {99, 101, 300};
    const std::vector<long> truth = {100};
    const Scorecard card = changepoint_scorecard(detected, truth, 5);
    CHECK(card.matched == 1);
    CHECK(card.recall == doctest::Approx(1.0));
    CHECK(card.precision == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("outside tolerance does not match") {
    const Scorecard card = changepoint_scorecard({{120}}, {{100}}, 5);
    CHECK(card.matched == 0);
    CHECK(card.recall == 0.0);
    CHECK(card.precision == 0.0);
  }
}

TEST_CASE("true_change_ticks feeds the scorecard with schedule truth") {
  Config c = small_config();
  c.sim_ticks = 120;
  const auto truth = true_change_ticks(c.schedule(), c.sim_ticks);
  CHECK(truth == std::vector<long>{30, 60, 90});
}

TEST_CASE("baseline_config flattens the bank and silences the detector") {
  const Config base = baseline_config(small_config());
  CHECK(base.rl_k == 1);
  CHECK_FALSE(base.cpd_enabled);
}

TEST_CASE("compare is deterministic and thread-count independent") {
  const Config c = small_config();
  const std::vector<std::uint64_t> seeds = {5, 6};

  setenv("ADAFLEET_THREADS", "1", 1);
  const ExperimentReport serial = compare_runs(c, seeds, 15);
  setenv("ADAFLEET_THREADS", "4", 1);
  const ExperimentReport threaded = compare_runs(c, seeds, 15);
  unsetenv("ADAFLEET_THREADS");

  CHECK(report_csv(serial) == report_csv(threaded));
  REQUIRE(serial.rows.size() == 4);  // two arms per seed
  // Arms stay paired on the same seed.
  CHECK(serial.rows[0].seed == serial.rows[1].seed);
  CHECK(serial.rows[0].arm == "adaptive");
  CHECK(serial.rows[1].arm == "baseline");
  CHECK(serial.rows[2].seed == serial.rows[3].seed);
}

TEST_CASE("pattern files load as rate maps") {
  const std::string path = "/tmp/adafleet_patterns_test.json";
  {
    std::string doc = R"({"patterns": [
      {"rates": [1.0, 0.0, 0.5, 0.25], "passenger_probs": [1.0, 0.0, 0.0, 0.0]},
      {"rates": [0.0, 2.0, 0.0, 0.0], "destination_weights": [1, 2, 3, 4]}
    ]})";
    write_text_file(path, doc);
  }
  Config c;
  c.grid_rows = 2;
  c.grid_cols = 2;
  c.demand_k_true = 2;
  c.demand_schedule = {{10, 0}, {10, 1}};
  c.demand_patterns = path;
  const auto patterns = config_patterns(c);
  REQUIRE(patterns.size() == 2);
  CHECK(patterns[0].zone_rates == std::vector<double>{1.0, 0.0, 0.5, 0.25});
  CHECK(patterns[0].passenger_probs[0] == 1.0);
  CHECK(patterns[1].destination_weights == std::vector<double>{1, 2, 3, 4});
  std::remove(path.c_str());

  // Wrong-sized rate maps are rejected.
  write_text_file(path, R"({"patterns": [{"rates": [1.0]}]})");
  CHECK_THROWS(config_patterns(c));
  std::remove(path.c_str());
}

TEST_CASE("cpd_bench runs a small suite") {
  const CpdBenchResult bench = cpd_bench(5, 10.0, 77);
  CHECK(bench.change_trials == 5);
  CHECK(bench.null_trials == 5);
  CHECK(bench.recall >= 0.0);
  CHECK(bench.recall <= 1.0);
}
