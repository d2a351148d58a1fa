#include <doctest.h>

#include <random>

#include "ctspav/feasibility.hpp"
#include "ctspav/mrea.hpp"
#include "support/oracles.hpp"

using namespace ctspav;

namespace {

// Wide-window instance over hand-set travel times.
Instance wide_instance(int n, Seconds t, double ride_factor = 0.5, Seconds service = 30) {
  IntMatrix tau = IntMatrix::Constant(4 * n + 2, 4 * n + 2, t);
  tau.diagonal().setZero();
  std::vector<CommuterTimes> want(static_cast<std::size_t>(n), {30000, 60000});
  WindowParams p;
  p.shift = 3600;
  p.ride_factor = ride_factor;
  p.service = service;
  return derive_time_windows(want, p, tau, tau).instance;
}

std::vector<NodeId> random_mini_route(const Instance& inst, std::mt19937_64& rng, int max_riders) {
  auto pool = inst.pickups(rng() % 2 ? Direction::inbound : Direction::outbound);
  std::shuffle(pool.begin(), pool.end(), rng);
  const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min<int>(max_riders, static_cast<int>(pool.size()))));
  std::vector<NodeId> r(pool.begin(), pool.begin() + k);
  std::vector<NodeId> drops;
  for (NodeId p : r) drops.push_back(inst.dropoff_of(p));
  std::shuffle(drops.begin(), drops.end(), rng);
  r.insert(r.end(), drops.begin(), drops.end());
  return r;
}

// Windows, travel, no-wait drop-offs and the ride limits of riders delivered
// within the prefix.
bool prefix_feasible(const std::vector<NodeId>& prefix, const Instance& inst) {
  const int m = static_cast<int>(prefix.size());
  oracle::DifferenceSystem sys(m);
  for (int k = 0; k < m; ++k) {
    const NodeId v = prefix[static_cast<std::size_t>(k)];
    sys.lower(k, inst.at(v).a);
    sys.upper(k, inst.at(v).b);
    if (k == 0) continue;
    const NodeId u = prefix[static_cast<std::size_t>(k - 1)];
    const Seconds step = inst.at(u).service + inst.travel(u, v);
    if (inst.is_pickup(v)) {
      sys.le(k - 1, k, -step);
    } else {
      sys.eq(k, k - 1, step);
    }
    if (inst.is_dropoff(v)) {
      const NodeId p = inst.pickup_of(v);
      for (int j = 0; j < k; ++j)
        if (prefix[static_cast<std::size_t>(j)] == p) sys.le(k, j, inst.at(p).ride_limit + inst.at(p).service);
    }
  }
  return sys.solve().has_value();
}

// Direct check of a witness against every constraint it must satisfy.
bool witness_ok(const Schedule& s, const Instance& inst, bool depots) {
  const auto& o = s.order;
  for (std::size_t k = 0; k < o.size(); ++k) {
    const NodeId v = o[k];
    if (!inst.is_depot(v) && (s.start[k] < inst.at(v).a || s.start[k] > inst.at(v).b)) return false;
    if (k > 0) {
      const Seconds arrive = s.start[k - 1] + inst.at(o[k - 1]).service + inst.travel(o[k - 1], v);
      const bool exact = inst.is_dropoff(v) || v == inst.sink() || (depots && k == 1);
      if (exact ? s.start[k] != arrive : s.start[k] < arrive) return false;
    }
    if (inst.is_dropoff(v)) {
      const NodeId p = inst.pickup_of(v);
      std::size_t j = 0;
      while (j < k && o[j] != p) ++j;
      if (j == k) return false;
      if (s.start[k] - s.start[j] - inst.at(p).service > inst.at(p).ride_limit) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("single trip starts at the window opening") {
  const auto inst = wide_instance(1, 500);
  const std::vector<NodeId> r{1, 2};
  const auto s = check_mini_route(r, inst);
  REQUIRE(s);
  CHECK(s->start[0] == inst.at(1).a);
  CHECK(s->start[1] == inst.at(1).a + inst.at(1).service + 500);
}

TEST_CASE("detour beyond the ride limit is rejected") {
  // L = 750; o1 -> o2 -> d1 takes 30 + 500 + 30 + 500 = 1060 > 750 + 30
  const auto inst = wide_instance(2, 500);
  const std::vector<NodeId> r{1, 2, 3, 4};
  const auto s = check_mini_route(r, inst);
  REQUIRE_FALSE(s);
  CHECK(s.reason() == Infeasibility::ride_limit);
}

TEST_CASE("extension failures carry their constraint family") {
  auto inst = wide_instance(5, 100);
  inst.capacity = 2;
  auto l = start_label(1, inst);
  l = extend_label(l, 2, inst).value();
  auto full = extend_label(l, 3, inst);
  CHECK(full.reason() == Infeasibility::capacity);

  auto late = inst;
  late.nodes[2].b = late.nodes[1].a - 1000;
  late.nodes[2].a = late.nodes[2].b - 10;
  CHECK(extend_label(start_label(1, late), 2, late).reason() == Infeasibility::window);
  CHECK(extend_label(start_label(1, inst), 7, inst).reason() == Infeasibility::pairing);
  CHECK_THROWS_AS(check_mini_route(std::vector<NodeId>{1, 11}, inst), RouteShapeError);
  CHECK_THROWS_AS(check_mini_route(std::vector<NodeId>{1, 11, 6, 16}, inst), RouteShapeError);
}

TEST_CASE("mini route verdicts match the constraint system") {
  std::mt19937_64 rng(17);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = oracle::small_instance(5, 4, 100 + static_cast<std::uint64_t>(trial % 40),
                                             300 + 60 * (trial % 7), 0.25 + 0.25 * (trial % 3))
                          .instance;
    const auto r = random_mini_route(inst, rng, 4);
    const auto got = check_mini_route(r, inst);
    const bool want = oracle::mini_route_feasible(r, inst);
    REQUIRE(got.feasible() == want);
    (want ? feasible : infeasible)++;
    if (got) {
      CHECK(witness_ok(*got, inst, false));
      for (std::size_t k = 1; k < got->start.size(); ++k) CHECK(got->start[k] > got->start[k - 1]);
    }
    // every prefix, through the label chain
    FeasLabel l = start_label(r[0], inst);
    bool alive = prefix_feasible({r[0]}, inst);
    CHECK(alive == (l.earliest <= l.latest));
    for (std::size_t k = 1; k < r.size() && alive; ++k) {
      auto next = extend_label(l, r[k], inst);
      const bool ok = prefix_feasible(std::vector<NodeId>(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k) + 1), inst);
      REQUIRE(next.feasible() == ok);
      alive = ok;
      if (ok) l = next.value();
    }
  }
  // the corpus exercises both verdicts
  CHECK(feasible > 100);
  CHECK(infeasible > 100);
}

TEST_CASE("vehicle routes match the constraint system") {
  std::mt19937_64 rng(5);
  int feasible = 0, infeasible = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = oracle::small_instance(4, 3, seed).instance;
    const auto omega = enumerate_omega(inst);
    for (int trial = 0; trial < 20; ++trial) {
      const int len = 1 + static_cast<int>(rng() % 3);
      std::vector<std::vector<NodeId>> chain;
      std::set<NodeId> used;
      for (int tries = 0; tries < 50 && static_cast<int>(chain.size()) < len; ++tries) {
        const auto& m = omega[rng() % omega.size()];
        if (std::any_of(m.riders.begin(), m.riders.end(), [&](NodeId p) { return used.count(p) > 0; })) continue;
        used.insert(m.riders.begin(), m.riders.end());
        chain.push_back(m.visit_order);
      }
      const auto got = check_av_route(chain, inst);
      const bool want = oracle::chain_schedule(chain, inst).has_value();
      REQUIRE(got.feasible() == want);
      (want ? feasible : infeasible)++;
      if (got) {
        CHECK(got->order.front() == inst.source());
        CHECK(got->order.back() == inst.sink());
        CHECK(witness_ok(*got, inst, true));
        for (std::size_t k = 1; k < got->start.size(); ++k) CHECK(got->start[k] > got->start[k - 1]);
      }
    }
  }
  CHECK(feasible > 50);
  CHECK(infeasible > 50);
}

TEST_CASE("single mini route chain fixes the depot times") {
  const auto inst = wide_instance(1, 400);
  const std::vector<std::vector<NodeId>> chain{{1, 2}};
  const auto s = check_av_route(chain, inst);
  REQUIRE(s);
  CHECK(s->start[0] == s->start[1] - inst.travel(0, 1));
  CHECK(s->start[3] == s->start[2] + inst.at(2).service + inst.travel(2, 5));
}

TEST_CASE("overlapping mini routes cannot share a vehicle") {
  const auto inst = wide_instance(2, 400);
  // both inbound trips have the same window; serving one after the other
  // misses the second window only if the windows are short
  auto tight = inst;
  for (NodeId p : {1, 2}) {
    tight.nodes[static_cast<std::size_t>(p)].a = 20000;
    tight.nodes[static_cast<std::size_t>(p)].b = 20100;
  }
  const std::vector<std::vector<NodeId>> chain{{1, 3}, {2, 4}};
  CHECK_FALSE(check_av_route(chain, tight));
  CHECK(check_av_route(chain, inst));
  const std::vector<std::vector<NodeId>> twice{{1, 3}, {1, 3}};
  CHECK_THROWS_AS(check_av_route(twice, inst), RouteShapeError);
}

TEST_CASE("relaxing windows or ride limits keeps routes feasible") {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto inst = oracle::small_instance(5, 4, 300 + static_cast<std::uint64_t>(trial % 20), 300).instance;
    const auto r = random_mini_route(inst, rng, 3);
    if (!check_mini_route(r, inst)) continue;
    ++checked;
    auto wider = inst;
    const NodeId v = r[rng() % r.size()];
    wider.nodes[static_cast<std::size_t>(v)].b += 1 + static_cast<Seconds>(rng() % 600);
    CHECK(check_mini_route(r, wider));
    auto longer = inst;
    longer.nodes[static_cast<std::size_t>(r[0])].ride_limit += 1 + static_cast<Seconds>(rng() % 600);
    CHECK(check_mini_route(r, longer));
  }
  CHECK(checked > 50);
}
