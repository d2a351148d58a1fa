#include <doctest.h>

#include <algorithm>

#include "ctspav/generator.hpp"
#include "ctspav/io.hpp"
#include "support/oracles.hpp"

using namespace ctspav;

namespace {

// One commuter, every pair of distinct nodes `t` seconds apart except the
// two commutes.
DerivedInstance one_commuter(Seconds arrival, Seconds departure, Seconds direct, WindowParams p) {
  IntMatrix tau = IntMatrix::Constant(6, 6, direct);
  tau.diagonal().setZero();
  IntMatrix dist = tau * 10;
  return derive_time_windows({{arrival, departure}}, p, tau, dist);
}

}  // namespace

TEST_CASE("window derivation on the worked example") {
  WindowParams p;
  p.shift = 600;
  p.ride_factor = 0.5;
  p.service = 0;
  const auto d = one_commuter(28800, 61200, 600, p);
  const auto& inst = d.instance;
  CHECK(d.warnings.empty());
  CHECK(inst.at(1).ride_limit == 900);
  CHECK(inst.at(2).b == 29400);
  CHECK(inst.at(1).b == 28500);
  CHECK(inst.at(1).a == 27300);
  CHECK(inst.at(3).a == 61200 - 600);
  CHECK(inst.at(3).b == 61200 + 600);
  CHECK(validate_instance(inst).empty());
}

TEST_CASE("zero ride extension leaves only the direct ride") {
  WindowParams p;
  p.ride_factor = 0;
  const auto d = one_commuter(30000, 62000, 437, p);
  CHECK(d.instance.at(1).ride_limit == 437);
  CHECK(d.instance.at(3).ride_limit == 437);
}

TEST_CASE("early windows are clamped with a warning") {
  WindowParams p;
  p.shift = 600;
  const auto d = one_commuter(500, 40000, 300, p);
  CHECK(d.instance.at(1).a == 0);
  CHECK(d.warnings.size() == 1);
}

TEST_CASE("graph sizes") {
  for (auto [n, nodes, arcs] : {std::tuple{1, 6, 30}, std::tuple{2, 10, 90}, std::tuple{100, 402, 402 * 401}}) {
    GeneratorParams gp;
    gp.n = n;
    const auto g = generate_instance(gp);
    const auto graph = build_pdgraph(g.instance);
    CHECK(graph.node_count == nodes);
    CHECK(static_cast<int>(graph.arcs.size()) == arcs);
    CHECK(std::none_of(graph.arcs.begin(), graph.arcs.end(), [](const Arc& a) { return a.from == a.to; }));
  }
}

TEST_CASE("index algebra") {
  const auto inst = oracle::small_instance(7, 4, 11).instance;
  for (NodeId p : inst.pickups()) {
    CHECK(inst.is_dropoff(inst.dropoff_of(p)));
    CHECK(inst.pickup_of(inst.dropoff_of(p)) == p);
    CHECK(inst.commuter_of(p) == inst.commuter_of(p + inst.n));
  }
  for (int c = 1; c <= inst.n; ++c) {
    CHECK(inst.at(c).kind == NodeKind::inbound_pickup);
    CHECK(inst.at(inst.n + c).kind == NodeKind::inbound_dropoff);
    CHECK(inst.at(2 * inst.n + c).kind == NodeKind::outbound_pickup);
    CHECK(inst.at(3 * inst.n + c).kind == NodeKind::outbound_dropoff);
    for (int k = 0; k < 4; ++k) CHECK(inst.commuter_of(k * inst.n + c) == c);
  }
}

TEST_CASE("validation flags injected faults") {
  auto inst = oracle::small_instance(3, 4, 2).instance;
  REQUIRE(validate_instance(inst).empty());

  auto bad = inst;
  bad.nodes[2].a = bad.nodes[2].b + 1;
  auto v = validate_instance(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "window");
  CHECK(v[0].nodes == std::vector<NodeId>{2});

  bad = inst;
  bad.tau(1, 4) = 100000;
  v = validate_instance(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "triangle");
  CHECK(v[0].nodes.front() == 1);
  CHECK(v[0].nodes.back() == 4);
}

TEST_CASE("generated windows are 2 delta wide and derivation is deterministic") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = oracle::small_instance(6, 4, seed, 450);
    CHECK(g.warnings.empty());
    for (NodeId p : g.instance.pickups()) CHECK(g.instance.at(p).b - g.instance.at(p).a == 900);
    // re-deriving from the recovered desired times gives the same instance
    WindowParams wp;
    wp.shift = 450;
    wp.ride_factor = 0.5;
    wp.capacity = 4;
    wp.service = g.instance.service_default;
    const auto again = derive_time_windows(desired_times(g.instance, 450), wp, g.instance.tau, g.instance.dist);
    CHECK(instance_to_json(again.instance) == instance_to_json(g.instance));
  }
}

TEST_CASE("generated matrices satisfy the triangle inequality") {
  const auto g = generate_instance(profile_params("medium"));
  CHECK(validate_instance(g.instance).empty());
}

TEST_CASE("instance json round trip") {
  const auto inst = oracle::small_instance(4, 3, 9).instance;
  InstanceMeta meta;
  meta.seed = 9;
  meta.delta = 600;
  meta.ride_factor = 0.5;
  meta.generator = "test";
  const auto text = instance_to_json(inst, meta);
  InstanceMeta back;
  const auto again = instance_from_json(text, &back);
  CHECK(instance_to_json(again, back) == text);
  CHECK(back.seed == meta.seed);
  CHECK(back.delta == meta.delta);
  CHECK(again.tau == inst.tau);
  CHECK(again.dist == inst.dist);
  CHECK_THROWS_AS(instance_from_json("{\"format\": 3}"), InputError);
}

TEST_CASE("content hash is the git blob id") {
  CHECK(content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("instance profiles") {
  const auto large = profile_params("large");
  CHECK(large.delta == 600);
  CHECK(large.ride_factor == 0.5);
  CHECK(large.capacity == 4);
  const auto medium = profile_params("medium");
  CHECK(medium.delta == 600);
  CHECK(medium.capacity == 4);
  CHECK_THROWS_AS(profile_params("huge"), InputError);
}
