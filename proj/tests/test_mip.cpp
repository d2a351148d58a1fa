#include <doctest.h>

#include <map>

#include "ctspav/ctspav_mip.hpp"
#include "ctspav/solve.hpp"
#include "support/oracles.hpp"

using namespace ctspav;

namespace {

struct Prepared {
  Instance inst;
  std::vector<MiniRoute> omega;
  ArcSet arcs;
};

Prepared prepare(const Instance& inst) {
  return {inst, enumerate_omega(inst), filter_arcs(build_pdgraph(inst), inst)};
}

// Brute-force plan as chains of omega indices.
std::vector<std::vector<int>> chains_of(const oracle::BruteForcePlan& plan, const std::vector<MiniRoute>& omega) {
  std::map<std::vector<NodeId>, int> index;
  for (std::size_t i = 0; i < omega.size(); ++i) index[omega[i].visit_order] = static_cast<int>(i);
  std::vector<std::vector<int>> out;
  for (const auto& chain : plan.routes) {
    out.emplace_back();
    for (const auto& r : chain) out.back().push_back(index.at(r));
  }
  return out;
}

}  // namespace

TEST_CASE("edge costs charge the fixed cost on source arcs only") {
  const auto p = prepare(oracle::small_instance(3, 4, 2).instance);
  const auto costs = edge_costs(p.inst, p.arcs);
  CHECK(costs.fixed_cost == doctest::Approx(100.0 * static_cast<double>(costs.distance_bound)));
  for (std::size_t e = 0; e < p.arcs.arcs.size(); ++e) {
    const auto& a = p.arcs.arcs[e];
    const double want = static_cast<double>(a.dist) + (a.from == p.inst.source() ? costs.fixed_cost : 0.0);
    CHECK(costs.cost[e] == want);
  }
  // the distance bound exceeds every plan's distance
  oracle::enumerate_plans(p.inst, [&](const oracle::BruteForcePlan& plan) {
    CHECK(plan.distance <= costs.distance_bound);
  });
}

TEST_CASE("big-M constants") {
  const auto inst = oracle::small_instance(3, 4, 4).instance;
  for (NodeId i = 1; i < inst.sink(); ++i)
    for (NodeId j = 1; j < inst.sink(); ++j) {
      if (i == j) continue;
      const auto& a = inst.at(i);
      const auto& b = inst.at(j);
      CHECK(big_m(inst, i, j) == std::max<Seconds>(0, a.b + a.service + inst.travel(i, j) - b.a));
      CHECK(big_m_bar(inst, i, j) == std::max<Seconds>(0, b.b - a.a - a.service - inst.travel(i, j)));
    }
}

TEST_CASE("model variable counts") {
  const auto p = prepare(oracle::small_instance(3, 3, 5).instance);
  const auto m = build_model(p.inst, p.omega, p.arcs);
  CHECK(m.x_var.size() == p.omega.size());
  CHECK(m.y_var.size() == p.arcs.arcs.size());
  CHECK(std::count_if(m.t_var.begin(), m.t_var.end(), [](int v) { return v >= 0; }) == 4 * p.inst.n);
  CHECK(m.lp.num_vars() == static_cast<int>(p.omega.size() + p.arcs.arcs.size()) + 4 * p.inst.n);
  CHECK(m.cover_rows == 2 * p.inst.n);
}

TEST_CASE("uncoverable trips are reported by commuter") {
  auto inst = oracle::small_instance(2, 4, 6).instance;
  inst.nodes[2].ride_limit = 0;  // commuter 2 can no longer ride in
  inst.nodes[2].a = inst.nodes[2].b = 100;
  const auto p = prepare(inst);
  try {
    build_model(p.inst, p.omega, p.arcs);
    FAIL("expected an uncoverable trip");
  } catch (const UncoverableError& e) {
    CHECK(e.commuter == 2);
  }
}

TEST_CASE("one commuter needs one vehicle") {
  const auto inst = oracle::small_instance(1, 4, 7).instance;
  SolveOptions opt;
  const auto out = solve_instance(inst, opt);
  REQUIRE(out.plan);
  CHECK(out.plan->vehicle_count == 1);
  REQUIRE(out.plan->routes.size() == 1);
  const auto& order = out.plan->routes[0].schedule.order;
  CHECK(order == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("every feasible plan satisfies the model") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto p = prepare(oracle::small_instance(2 + static_cast<int>(seed % 2), 2, seed).instance);
    for (bool lifted : {false, true}) {
      ModelOptions mo;
      mo.lifted_mtz = lifted;
      mo.lifted_time_bounds = lifted;
      const auto m = build_model(p.inst, p.omega, p.arcs, mo);
      int plans = 0;
      oracle::enumerate_plans(p.inst, [&](const oracle::BruteForcePlan& bf) {
        const auto plan = make_plan(chains_of(bf, p.omega), p.inst, p.omega, p.arcs);
        REQUIRE(plan);
        const auto x = plan_to_vector(m, *plan, p.omega, p.arcs);
        REQUIRE(x);
        CHECK(m.lp.max_violation(*x) <= 1e-6);
        // objective identity
        CHECK(m.lp.objective(*x) == doctest::Approx(static_cast<double>(bf.distance) +
                                                    m.costs.fixed_cost * bf.vehicles));
        CHECK(plan_objective(m, *plan) == doctest::Approx(m.lp.objective(*x)));
        ++plans;
      });
      CHECK(plans > 0);
    }
  }
}

TEST_CASE("optimum equals the lexicographic brute force for every variant") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    const auto inst = oracle::small_instance(n, 2 + static_cast<int>(seed % 3), seed * 7).instance;
    const auto best = oracle::brute_force_optimum(inst);
    REQUIRE(best);
    for (const char* v : {"base", "sec", "hybrid"}) {
      SolveOptions opt;
      opt.variant = v;
      const auto out = solve_instance(inst, opt);
      CAPTURE(seed);
      CAPTURE(v);
      REQUIRE(out.plan);
      CHECK(out.search.status == lp::SearchStatus::optimal);
      CHECK(out.plan->vehicle_count == best->vehicles);
      CHECK(out.plan->total_distance == best->distance);
      CHECK(out.gaps.vehicle_count_gap == 0);
      for (const auto& r : out.plan->routes) {
        std::vector<std::vector<NodeId>> chain;
        for (int i : r.mini_routes) chain.push_back(out.omega[static_cast<std::size_t>(i)].visit_order);
        CHECK(check_av_route(chain, inst));
      }
    }
  }
}

TEST_CASE("extraction counts vehicles on source arcs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = oracle::small_instance(4, 3, 40 + seed).instance;
    const auto out = solve_instance(inst, {});
    REQUIRE(out.plan);
    REQUIRE(out.search.incumbent);
    const auto& x = *out.search.incumbent;
    double source_flow = 0;
    for (int e : out.model.source_arcs) source_flow += x[static_cast<std::size_t>(out.model.y_var[static_cast<std::size_t>(e)])];
    CHECK(out.plan->vehicle_count == static_cast<int>(std::lround(source_flow)));
    CHECK(out.plan->vehicle_count == static_cast<int>(out.plan->routes.size()));
    Meters total = 0, empty = 0;
    for (const auto& r : out.plan->routes) {
      std::vector<std::vector<NodeId>> chain;
      for (int i : r.mini_routes) chain.push_back(out.omega[static_cast<std::size_t>(i)].visit_order);
      REQUIRE(check_av_route(chain, inst));
      CHECK(r.distance == oracle::chain_distance(chain, inst));
      // empty legs: depot legs and transit between mini routes
      Meters e = inst.distance(inst.source(), chain.front().front()) + inst.distance(chain.back().back(), inst.sink());
      for (std::size_t k = 0; k + 1 < chain.size(); ++k) e += inst.distance(chain[k].back(), chain[k + 1].front());
      CHECK(r.empty_distance == e);
      total += r.distance;
      empty += r.empty_distance;
    }
    CHECK(out.plan->total_distance == total);
    CHECK(out.plan->empty_distance == empty);
    CHECK(plan_objective(out.model, *out.plan) == doctest::Approx(out.search.z_mip));
  }
}

TEST_CASE("reporting gaps") {
  const double F = 1e8;
  auto g = gaps(3, 2.0, 3 * F + 5e4, 2 * F + 4e4);
  CHECK(g.defined);
  CHECK(g.vehicle_count_gap == 1);
  CHECK(g.optimality_gap * 100 == doctest::Approx(33.3).epsilon(0.002));
  g = gaps(2, 1.9999999, 7, 7);
  CHECK(g.vehicle_count_gap == 0);
  CHECK(g.optimality_gap == 0);
  CHECK(gaps(1, 1, 10, 7.5).optimality_gap == doctest::Approx(0.25));
  CHECK_FALSE(gaps(0, 1, 0, 0, false).defined);
}

TEST_CASE("variant configuration") {
  const auto base = configure_variant("base");
  CHECK((base.lifted_time_bounds && base.lifted_mtz && base.rounded_vc));
  CHECK_FALSE((base.two_path || base.pred_succ || base.darp_feed));
  const auto sec = configure_variant("sec");
  CHECK((sec.two_path && sec.pred_succ && sec.rounded_vc));
  CHECK_FALSE(sec.darp_feed);
  const auto hybrid = configure_variant("hybrid");
  CHECK((hybrid.darp_feed && hybrid.rounded_vc));
  CHECK_FALSE((hybrid.two_path || hybrid.pred_succ));
  CHECK_THROWS_AS(configure_variant("fast"), InputError);
}
