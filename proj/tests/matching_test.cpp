#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "adafleet/matching.hpp"
#include "adafleet/rng.hpp"

using namespace adafleet;

namespace {

long total_assigned(const MatchResult& r) {
  long n = 0;
  for (const auto& a : r.assignments) n += static_cast<long>(a.request_ids.size());
  return n;
}

}  // namespace

TEST_CASE("no vehicles rejects everything") {
  const std::vector<PendingRequestView> requests = {{0, {1, 1}}, {1, {2, 2}}};
  const MatchResult result = potential_assignments(requests, {}, 6);
  CHECK(result.rejected_ids == std::vector<int>{0, 1});
}

TEST_CASE("nearest candidate wins") {
  const std::vector<PendingRequestView> requests = {{0, {5, 5}}};
  const std::vector<CandidateVehicle> vehicles = {{0, {5, 10}, true},
                                                  {1, {5, 7}, true}};
  const MatchResult result = potential_assignments(requests, vehicles, 6);
  CHECK(result.assignments[1].request_ids == std::vector<int>{0});
  CHECK(result.assignments[0].request_ids.empty());
  CHECK(result.rejected_ids.empty());
}

TEST_CASE("equal distance breaks ties by vehicle id") {
  const std::vector<PendingRequestView> requests = {{0, {5, 5}}};
  const std::vector<CandidateVehicle> vehicles = {{3, {5, 7}, true},
                                                  {1, {5, 3}, true}};
  const MatchResult result = potential_assignments(requests, vehicles, 6);
  CHECK(result.assignments[1].request_ids == std::vector<int>{0});
}

TEST_CASE("unavailable vehicles are not candidates") {
  const std::vector<PendingRequestView> requests = {{0, {5, 5}}};
  const std::vector<CandidateVehicle> vehicles = {{0, {5, 5}, false},
                                                  {1, {5, 6}, true}};
  const MatchResult result = potential_assignments(requests, vehicles, 6);
  CHECK(result.assignments[1].request_ids == std::vector<int>{0});
}

TEST_CASE("out-of-radius requests are rejected") {
  const std::vector<PendingRequestView> requests = {{0, {0, 0}}, {1, {0, 5}}};
  const std::vector<CandidateVehicle> vehicles = {{0, {0, 8}, true}};
  const MatchResult result = potential_assignments(requests, vehicles, 6);
  CHECK(result.rejected_ids == std::vector<int>{0});
  CHECK(result.assignments[0].request_ids == std::vector<int>{1});
}

TEST_CASE("the 50-request cap spills to the next-nearest vehicle") {
  std::vector<PendingRequestView> requests;
  for (int i = 0; i < 60; ++i) requests.push_back({i, {5, 5}});

  SUBCASE("one vehicle takes 50, the rest are rejected") {
    const std::vector<CandidateVehicle> vehicles = {{0, {5, 5}, true}};
    const MatchResult result = potential_assignments(requests, vehicles, 6);
    CHECK(result.assignments[0].request_ids.size() == 50);
    CHECK(result.rejected_ids.size() == 10);
    // id order: the first 50 stay, the last 10 fall out.
    CHECK(result.assignments[0].request_ids.front() == 0);
    CHECK(result.assignments[0].request_ids.back() == 49);
    CHECK(result.rejected_ids.front() == 50);
  }
  SUBCASE("a farther vehicle catches the spill") {
    const std::vector<CandidateVehicle> vehicles = {{0, {5, 5}, true},
                                                    {1, {5, 8}, true}};
    const MatchResult result = potential_assignments(requests, vehicles, 6);
    CHECK(result.assignments[0].request_ids.size() == 50);
    CHECK(result.assignments[1].request_ids.size() == 10);
    CHECK(result.rejected_ids.empty());
  }
}

TEST_CASE("output partitions the pending requests") {
  Rng rng = make_stream(41, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PendingRequestView> requests;
    const int nr = static_cast<int>(uniform_index(rng, 80));
    for (int i = 0; i < nr; ++i) {
      requests.push_back({i, {static_cast<int>(uniform_index(rng, 20)),
                              static_cast<int>(uniform_index(rng, 20))}});
    }
    std::vector<CandidateVehicle> vehicles;
    const int nv = static_cast<int>(uniform_index(rng, 10));
    for (int j = 0; j < nv; ++j) {
      vehicles.push_back({j,
                          {static_cast<int>(uniform_index(rng, 20)),
                           static_cast<int>(uniform_index(rng, 20))},
                          uniform01(rng) < 0.8});
    }
    const MatchResult result = potential_assignments(requests, vehicles, 4);
    CHECK(total_assigned(result) + static_cast<long>(result.rejected_ids.size()) ==
          nr);

    // Assigned origins sit within the radius of their vehicle.
    for (std::size_t j = 0; j < vehicles.size(); ++j) {
      for (int id : result.assignments[j].request_ids) {
        CHECK(manhattan_cells(vehicles[j].location, requests[id].origin) <= 4);
        CHECK(vehicles[j].available);
      }
    }

    // No request lands in two lists.
    std::vector<int> seen;
    for (const auto& a : result.assignments) {
      for (int id : a.request_ids) seen.push_back(id);
    }
    for (int id : result.rejected_ids) seen.push_back(id);
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());

    // Determinism: identical inputs, identical outputs.
    const MatchResult again = potential_assignments(requests, vehicles, 4);
    CHECK(again.rejected_ids == result.rejected_ids);
    for (std::size_t j = 0; j < vehicles.size(); ++j) {
      CHECK(again.assignments[j].request_ids == result.assignments[j].request_ids);
    }
  }
}
