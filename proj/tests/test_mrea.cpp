#include <doctest.h>

#include <filesystem>
#include <random>

#include "ctspav/io.hpp"
#include "ctspav/mrea.hpp"
#include "support/oracles.hpp"

using namespace ctspav;

namespace {

long long binomial(int m, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
  return r;
}

std::set<std::vector<NodeId>> orders(const std::vector<MiniRoute>& routes) {
  std::set<std::vector<NodeId>> out;
  for (const auto& r : routes) out.insert(r.visit_order);
  return out;
}

}  // namespace

TEST_CASE("capacity one gives the direct trips") {
  const auto inst = oracle::small_instance(6, 1, 3).instance;
  const auto omega = enumerate_omega(inst);
  CHECK(omega.size() == 12);
  for (const auto& r : omega) {
    REQUIRE(r.visit_order.size() == 2);
    CHECK(r.visit_order[1] == inst.dropoff_of(r.visit_order[0]));
  }
}

TEST_CASE("two unconstrained trips give six routes") {
  IntMatrix tau = IntMatrix::Constant(10, 10, 100);
  tau.diagonal().setZero();
  WindowParams p;
  p.shift = 3600;
  p.ride_factor = 5;
  p.capacity = 2;
  const auto inst = derive_time_windows({{30000, 60000}, {30000, 60000}}, p, tau, tau).instance;
  const std::vector<NodeId> in{1, 2};
  const auto routes = enumerate_mini_routes(in, 2, inst);
  CHECK(routes.size() == 6);
  for (const auto& r : routes) CHECK(r.length == static_cast<Meters>(r.visit_order.size() - 1) * 100);
}

TEST_CASE("enumeration equals brute force") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 1 + static_cast<int>(rng() % 3);
    const auto inst = oracle::small_instance(5, K, 500 + static_cast<std::uint64_t>(trial), 300 + 100 * (trial % 5)).instance;
    auto pool = inst.pickups(trial % 2 ? Direction::inbound : Direction::outbound);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(2 + rng() % 4);
    MreaStats stats;
    const auto got = enumerate_mini_routes(pool, K, inst, 1, &stats);
    CHECK(orders(got) == oracle::brute_force_mini_routes(pool, K, inst));
    for (int k = 1; k <= K && k <= static_cast<int>(pool.size()); ++k)
      CHECK(stats.combinations[static_cast<std::size_t>(k)] == binomial(static_cast<int>(pool.size()), k));
    for (const auto& r : got) {
      CHECK(std::is_sorted(r.riders.begin(), r.riders.end()));
      CHECK(r.schedule.order == r.visit_order);
    }
    CHECK(std::is_sorted(got.begin(), got.end(), canonical_less));
  }
}

TEST_CASE("omega splits by direction") {
  const auto inst = oracle::small_instance(5, 3, 8).instance;
  const auto omega = enumerate_omega(inst);
  const auto parts = partition_omega(omega);
  CHECK(parts.inbound.size() + parts.outbound.size() == omega.size());
  for (const auto& r : parts.inbound) {
    CHECK(r.direction == Direction::inbound);
    for (NodeId v : r.visit_order) CHECK(inst.is_inbound(v));
  }
  for (const auto& r : parts.outbound) {
    CHECK(r.direction == Direction::outbound);
    for (NodeId v : r.visit_order) CHECK_FALSE(inst.is_inbound(v));
  }
  const auto in_only = partition_omega(parts.inbound);
  CHECK(in_only.outbound.empty());
}

TEST_CASE("output does not depend on the worker count") {
  const auto inst = oracle::small_instance(9, 4, 12).instance;
  const auto one = enumerate_omega(inst, 1);
  const auto three = enumerate_omega(inst, 3);
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].visit_order == three[i].visit_order);
}

TEST_CASE("cache round trip is keyed by instance") {
  const auto inst = oracle::small_instance(4, 3, 6).instance;
  const auto omega = enumerate_omega(inst);
  const auto file = std::filesystem::temp_directory_path() / "ctspav_omega_test.json";
  const auto hash = content_hash(instance_to_json(inst));
  save_omega(file, hash, omega);
  const auto back = load_omega(file, hash, inst);
  REQUIRE(back);
  CHECK(orders(*back) == orders(omega));
  CHECK_FALSE(load_omega(file, "0000", inst));
  std::filesystem::remove(file);
  CHECK_FALSE(load_omega(file, hash, inst));
}
