#include <doctest.h>

#include <random>
#include <sstream>

#include "ctspav/graph_filter.hpp"
#include "ctspav/generator.hpp"
#include "support/oracles.hpp"

using namespace ctspav;

namespace {

std::set<std::pair<NodeId, NodeId>> arc_pairs(const ArcSet& s) {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& a : s.arcs) out.emplace(a.from, a.to);
  return out;
}

}  // namespace

TEST_CASE("depot to depot arcs are removed by rule a") {
  const auto inst = oracle::small_instance(2, 4, 1).instance;
  CHECK(removal_rule(inst.source(), inst.sink(), inst) == 'a');
  CHECK(removal_rule(inst.sink(), inst.source(), inst) == 'a');
  const auto arcs = filter_arcs(build_pdgraph(inst), inst);
  CHECK_FALSE(arcs.contains(inst.source(), inst.sink()));
  for (NodeId p : inst.pickups()) CHECK(arcs.contains(inst.source(), p));
}

TEST_CASE("every removal cites the first matching rule and survivors fit their windows") {
  const auto g = generate_instance(profile_params("medium"));
  const auto& inst = g.instance;
  const auto graph = build_pdgraph(inst);
  const auto arcs = filter_arcs(graph, inst);
  CHECK(arcs.arcs.size() + arcs.removal_log.size() == graph.arcs.size());
  std::map<char, int> per_rule;
  for (const auto& r : arcs.removal_log) {
    CHECK(r.rule == removal_rule(r.arc.from, r.arc.to, inst));
    ++per_rule[r.rule];
  }
  for (char rule : {'a', 'b', 'c', 'd'}) CHECK(per_rule[rule] > 0);
  for (const auto& a : arcs.arcs) {
    if (inst.is_depot(a.from) || inst.is_depot(a.to)) continue;
    CHECK(inst.at(a.from).a + inst.at(a.from).service + inst.travel(a.from, a.to) <= inst.at(a.to).b);
  }
  std::ostringstream csv;
  write_removal_csv(csv, arcs);
  CHECK(csv.str().rfind("arc,rule\n", 0) == 0);
}

TEST_CASE("rule d arithmetic") {
  IntMatrix tau = IntMatrix::Constant(10, 10, 300);
  tau.diagonal().setZero();
  WindowParams p;
  p.shift = 300;
  p.ride_factor = 5;
  // commuter 2 must arrive an hour before commuter 1 can even be picked up
  const auto inst = derive_time_windows({{36000, 60000}, {30000, 60000}}, p, tau, tau).instance;
  REQUIRE(inst.at(1).a + inst.at(1).service + inst.travel(1, 2) > inst.at(2).b);
  CHECK(removal_rule(1, 2, inst) == 'd');
  CHECK(removal_rule(2, 4, inst) == 0);
}

TEST_CASE("no surviving arc leads from an outbound pickup to an inbound node") {
  const auto g = generate_instance(profile_params("medium"));
  const auto& inst = g.instance;
  const auto arcs = filter_arcs(build_pdgraph(inst), inst);
  for (const auto& a : arcs.arcs) {
    const bool out_p = a.from > 2 * inst.n && a.from <= 3 * inst.n;
    const bool in_d = a.to > inst.n && a.to <= 2 * inst.n;
    CHECK_FALSE((out_p && in_d));
  }
}

TEST_CASE("filtering never removes an arc of a feasible plan") {
  int plans = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    const auto inst = oracle::small_instance(n, 2 + static_cast<int>(seed % 2), seed, 600 + 60 * static_cast<Seconds>(seed)).instance;
    const auto arcs = filter_arcs(build_pdgraph(inst), inst);
    oracle::enumerate_plans(inst, [&](const oracle::BruteForcePlan& plan) {
      ++plans;
      for (const auto& chain : plan.routes) {
        std::vector<NodeId> seq{inst.source()};
        for (const auto& r : chain) seq.insert(seq.end(), r.begin(), r.end());
        seq.push_back(inst.sink());
        for (std::size_t k = 0; k + 1 < seq.size(); ++k) REQUIRE(arcs.contains(seq[k], seq[k + 1]));
      }
    });
  }
  CHECK(plans > 100);
}

TEST_CASE("the surviving set does not depend on order or workers") {
  const auto inst = oracle::small_instance(8, 4, 21).instance;
  auto graph = build_pdgraph(inst);
  const auto base = filter_arcs(graph, inst, 1);
  std::mt19937_64 rng(2);
  std::shuffle(graph.arcs.begin(), graph.arcs.end(), rng);
  CHECK(arc_pairs(filter_arcs(graph, inst, 3)) == arc_pairs(base));
  // filtering the survivors again removes nothing
  PDGraph survivors{graph.node_count, base.arcs};
  CHECK(filter_arcs(survivors, inst).removal_log.empty());
  const auto all = unfiltered_arcs(build_pdgraph(inst));
  CHECK(all.arcs.size() == static_cast<std::size_t>(inst.node_count() * (inst.node_count() - 1)));
}
