#include <doctest.h>

#include <map>
#include <random>

#include "ctspav/cuts.hpp"
#include "ctspav/generator.hpp"
#include "ctspav/solve.hpp"
#include "support/oracles.hpp"

using namespace ctspav;

namespace {

struct Prepared {
  Instance inst;
  std::vector<MiniRoute> omega;
  ArcSet arcs;
  CtspavModel model;
};

Prepared prepare(const Instance& inst, bool filtered = true) {
  Prepared p{inst, enumerate_omega(inst), {}, {}};
  p.arcs = filtered ? filter_arcs(build_pdgraph(inst), inst) : unfiltered_arcs(build_pdgraph(inst));
  p.model = build_model(p.inst, p.omega, p.arcs);
  return p;
}

std::vector<double> zero_point(const Prepared& p) { return std::vector<double>(static_cast<std::size_t>(p.model.lp.num_vars()), 0.0); }

void set_arc(std::vector<double>& x, const Prepared& p, NodeId i, NodeId j, double v) {
  const int e = p.arcs.find(i, j);
  REQUIRE(e >= 0);
  x[static_cast<std::size_t>(p.model.y_var[static_cast<std::size_t>(e)])] = v;
}

// Reachability closure, then components as equivalence classes.
std::vector<std::vector<NodeId>> warshall_sccs(const SupportGraph& g) {
  const int n = g.node_count;
  std::vector<std::vector<char>> r(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int v = 0; v < n; ++v)
    for (NodeId w : g.out[static_cast<std::size_t>(v)]) r[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (r[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] && r[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)])
          r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
  std::vector<std::vector<NodeId>> out;
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    if (done[static_cast<std::size_t>(i)]) continue;
    std::vector<NodeId> comp{i};
    for (int j = i + 1; j < n; ++j)
      if (r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] && r[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
        comp.push_back(j);
        done[static_cast<std::size_t>(j)] = 1;
      }
    if (comp.size() >= 2) out.push_back(comp);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Feasibility of an arbitrary stop sequence written as a difference system:
// windows, travel, waiting only before pickups, riders' limits, capacity.
bool path_feasible(const std::vector<NodeId>& path, const Instance& inst) {
  int load = 0;
  std::map<NodeId, int> pos;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const NodeId v = path[k];
    if (inst.is_pickup(v)) {
      if (pos.count(v) || ++load > inst.capacity) return false;
      pos[v] = static_cast<int>(k);
    } else {
      if (!pos.count(inst.pickup_of(v))) return false;
      --load;
    }
  }
  if (load != 0) return false;
  const int m = static_cast<int>(path.size());
  oracle::DifferenceSystem sys(m);
  for (int k = 0; k < m; ++k) {
    const NodeId v = path[static_cast<std::size_t>(k)];
    sys.lower(k, inst.at(v).a);
    sys.upper(k, inst.at(v).b);
    if (k > 0) {
      const NodeId u = path[static_cast<std::size_t>(k - 1)];
      const Seconds step = inst.at(u).service + inst.travel(u, v);
      if (inst.is_pickup(v)) {
        sys.le(k - 1, k, -step);
      } else {
        sys.eq(k, k - 1, step);
      }
    }
    if (inst.is_dropoff(v)) {
      const NodeId p = inst.pickup_of(v);
      sys.le(k, pos.at(p), inst.at(p).ride_limit + inst.at(p).service);
    }
  }
  return sys.solve().has_value();
}

// One vehicle serves pi(S)\S, then S, then sigma(S)\S, each layer in some order.
bool kappa_gt_one_brute(const std::vector<NodeId>& s, const Instance& inst, const ArcSet& arcs) {
  std::vector<NodeId> l1, l2 = s, l3;
  for (NodeId v : s) {
    if (inst.is_dropoff(v) && !std::binary_search(s.begin(), s.end(), inst.pickup_of(v))) l1.push_back(inst.pickup_of(v));
    if (inst.is_pickup(v) && !std::binary_search(s.begin(), s.end(), inst.dropoff_of(v))) l3.push_back(inst.dropoff_of(v));
  }
  std::sort(l1.begin(), l1.end());
  std::sort(l3.begin(), l3.end());
  do {
    do {
      do {
        std::vector<NodeId> seq{inst.source()};
        seq.insert(seq.end(), l1.begin(), l1.end());
        seq.insert(seq.end(), l2.begin(), l2.end());
        seq.insert(seq.end(), l3.begin(), l3.end());
        seq.push_back(inst.sink());
        bool ok = true;
        for (std::size_t k = 0; k + 1 < seq.size() && ok; ++k) ok = arcs.contains(seq[k], seq[k + 1]);
        if (ok && path_feasible(std::vector<NodeId>(seq.begin() + 1, seq.end() - 1), inst)) return false;
      } while (std::next_permutation(l3.begin(), l3.end()));
    } while (std::next_permutation(l2.begin(), l2.end()));
  } while (std::next_permutation(l1.begin(), l1.end()));
  return true;
}

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

std::vector<std::vector<double>> plan_points(const Prepared& p) {
  std::vector<std::vector<double>> out;
  oracle::enumerate_plans(p.inst, [&](const oracle::BruteForcePlan& bf) {
    const auto plan = make_plan(chains_of(bf, p.omega), p.inst, p.omega, p.arcs);
    REQUIRE(plan);
    const auto x = plan_to_vector(p.model, *plan, p.omega, p.arcs);
    REQUIRE(x);
    out.push_back(*x);
  });
  return out;
}

}  // namespace

TEST_CASE("rounded vehicle count") {
  const auto p = prepare(oracle::small_instance(3, 2, 3).instance);
  auto x = zero_point(p);
  const auto& src = p.model.source_arcs;
  REQUIRE(src.size() >= 3);
  const double flow[] = {0.5, 0.9, 0.9};
  for (int k = 0; k < 3; ++k)
    x[static_cast<std::size_t>(p.model.y_var[static_cast<std::size_t>(src[static_cast<std::size_t>(k)])])] = flow[k];
  auto cut = separate_rounded_vc(p.model, x, 2.3);
  REQUIRE(cut);
  CHECK(cut->row.lo == 3);
  CHECK(cut->row.terms.size() == src.size());
  CHECK_FALSE(separate_rounded_vc(p.model, x, 2.0));
  // flow exactly 2: a bound of 2.01 forces 3 while 2.0 forces nothing
  x[static_cast<std::size_t>(p.model.y_var[static_cast<std::size_t>(src[0])])] = 0.2;
  CHECK_FALSE(separate_rounded_vc(p.model, x, 2.0));
  cut = separate_rounded_vc(p.model, x, 2.01);
  REQUIRE(cut);
  CHECK(cut->row.lo == 3);
}

TEST_CASE("strongly connected components") {
  SupportGraph dag{4, {{1, 2}, {3}, {3}, {}}};
  CHECK(find_sccs(dag).empty());
  SupportGraph tri{4, {{1}, {2}, {0}, {}}};
  CHECK(find_sccs(tri) == std::vector<std::vector<NodeId>>{{0, 1, 2}});
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    SupportGraph g{n, std::vector<std::vector<NodeId>>(static_cast<std::size_t>(n))};
    const double density = 0.05 + 0.3 * static_cast<double>(rng() % 100) / 100.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && static_cast<double>(rng() % 1000) / 1000.0 < density) g.out[static_cast<std::size_t>(i)].push_back(j);
    CHECK(find_sccs(g) == warshall_sccs(g));
  }
}

TEST_CASE("predecessor and successor sets") {
  const auto inst = oracle::small_instance(3, 4, 1).instance;
  const std::vector<NodeId> s{1, 4};
  CHECK(predecessors_of(s, inst) == std::vector<NodeId>{1});
  CHECK(successors_of(s, inst) == std::vector<NodeId>{4});
}

TEST_CASE("kappa on a commuter's own trip and on a window conflict") {
  IntMatrix tau = IntMatrix::Constant(10, 10, 300);
  tau.diagonal().setZero();
  WindowParams wp;
  wp.shift = 300;
  const auto inst = derive_time_windows({{30000, 60000}, {40000, 70000}}, wp, tau, tau).instance;
  const auto arcs = unfiltered_arcs(build_pdgraph(inst));
  KappaOracle k(inst, arcs);
  CHECK(k.kappa_gt_one(std::vector<NodeId>{1, 3}) == false);
  CHECK(k.kappa_gt_one(std::vector<NodeId>{1, 2}) == true);
  CHECK(k.kappa_gt_one(std::vector<NodeId>{1, 2}) == true);
  CHECK(k.memo_hits() == 1);
  KappaOracle capped(inst, arcs, 1);
  CHECK_FALSE(capped.kappa_gt_one(std::vector<NodeId>{1, 2}).has_value());
}

TEST_CASE("kappa matches the permutation search") {
  int positive = 0, negative = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = seed <= 2 ? 2 : 3;
    const auto inst = oracle::small_instance(n, 2 + static_cast<int>(seed % 2), seed * 13).instance;
    for (bool filtered : {true, false}) {
      const auto arcs = filtered ? filter_arcs(build_pdgraph(inst), inst) : unfiltered_arcs(build_pdgraph(inst));
      KappaOracle k(inst, arcs);
      std::vector<NodeId> nodes;
      for (NodeId v = 1; v < inst.sink(); ++v) nodes.push_back(v);
      const int m = static_cast<int>(nodes.size());
      for (int mask = 1; mask < (1 << m); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) > 4) continue;
        std::vector<NodeId> s;
        for (int b = 0; b < m; ++b)
          if (mask >> b & 1) s.push_back(nodes[static_cast<std::size_t>(b)]);
        const bool want = kappa_gt_one_brute(s, inst, arcs);
        const auto got = k.kappa_gt_one(s);
        REQUIRE(got);
        CAPTURE(seed);
        CAPTURE(mask);
        REQUIRE(*got == want);
        CHECK(k.last_iterations() <= static_cast<int>(predecessors_of(s, inst).size() + s.size() + successors_of(s, inst).size()) + 2);
        (want ? positive : negative)++;
      }
    }
  }
  CHECK(positive > 0);
  CHECK(negative > 0);
}

TEST_CASE("two-path and precedence cuts on constructed points") {
  IntMatrix tau = IntMatrix::Constant(14, 14, 300);
  tau.diagonal().setZero();
  WindowParams wp;
  wp.shift = 300;
  const auto inst = derive_time_windows({{30000, 60000}, {40000, 70000}, {50000, 80000}}, wp, tau, tau).instance;
  const auto p = prepare(inst, false);
  KappaOracle k(p.inst, p.arcs);

  // 2-cycle between the two inbound pickups, one unit leaving it
  auto x = zero_point(p);
  set_arc(x, p, 1, 2, 1.0);
  set_arc(x, p, 2, 1, 1.0);
  set_arc(x, p, 2, 5, 1.0);
  auto cuts = separate_two_path(p.model, p.arcs, x, k);
  REQUIRE(cuts.size() == 1);
  CHECK(cuts[0].family == "two_path");
  CHECK(cuts[0].support == std::vector<int>{1, 2});
  CHECK(cuts[0].row.lo == 2);
  // implies the plain cutset row at the same set
  const std::vector<NodeId> s{1, 2};
  std::vector<NodeId> rest;
  for (NodeId v = 0; v < p.inst.node_count(); ++v)
    if (v != 1 && v != 2) rest.push_back(v);
  const auto cutset = crossing_row(s, rest, 1.0, p.model, p.arcs);
  REQUIRE(cutset.terms.size() == cuts[0].row.terms.size());
  for (std::size_t t = 0; t < cutset.terms.size(); ++t) CHECK(cutset.terms[t].var == cuts[0].row.terms[t].var);

  // two units leaving: no cut
  set_arc(x, p, 1, 4, 1.0);
  CHECK(separate_two_path(p.model, p.arcs, x, k).empty());

  // own trip cycle: kappa is one, no cut whatever the outflow
  auto y = zero_point(p);
  set_arc(y, p, 1, 4, 1.0);
  set_arc(y, p, 4, 1, 1.0);
  CHECK(separate_two_path(p.model, p.arcs, y, k).empty());

  // closed subtour: both precedence cuts
  auto z = zero_point(p);
  set_arc(z, p, 1, 2, 1.0);
  set_arc(z, p, 2, 1, 1.0);
  cuts = separate_pred_succ(p.model, p.inst, p.arcs, z);
  REQUIRE(cuts.size() == 2);
  CHECK(cuts[0].family == "predecessor");
  CHECK(cuts[1].family == "successor");
}

TEST_CASE("lifted MTZ coefficients") {
  auto gp = profile_params("medium");
  gp.n = 50;
  const auto g = generate_instance(gp);
  const auto& inst = g.instance;
  const auto arcs = filter_arcs(build_pdgraph(inst), inst);
  int audited = 0;
  for (const auto& a : arcs.arcs) {
    const NodeId i = a.from, j = a.to;
    if (inst.is_depot(i) || inst.is_depot(j) || !arcs.contains(j, i)) continue;
    const auto& ni = inst.at(i);
    const auto& nj = inst.at(j);
    const double M = static_cast<double>(big_m(inst, i, j));
    const double Mb = static_cast<double>(big_m_bar(inst, i, j));
    const double s_i = static_cast<double>(ni.service), s_j = static_cast<double>(nj.service);
    const double t_ij = static_cast<double>(inst.travel(i, j)), t_ji = static_cast<double>(inst.travel(j, i));
    const auto lift = lift_mtz(i, j, inst, arcs);
    if (inst.is_dropoff(i)) {
      CHECK(lift.alpha == M - s_i - t_ij - s_j - t_ji);
    } else {
      CHECK(lift.alpha == M - s_i - t_ij - static_cast<double>(ni.b) + static_cast<double>(nj.a));
    }
    // substitute the three arc states into every row; bounds on T_i - T_j
    for (const auto& f : mtz_forms(i, j, inst, arcs, true)) {
      REQUIRE(f.t_i == 1);
      REQUIRE(f.t_j == -1);
      auto bound = [&](double yij, double yji) {
        const double y = f.y_ij * yij + f.y_ji * yji;
        return f.kind == TimeForm::propagate ? f.hi - y : f.lo - y;
      };
      if (f.kind == TimeForm::propagate) {
        CHECK(bound(0, 0) == M - s_i - t_ij);
        CHECK(bound(1, 0) == -s_i - t_ij);
        CHECK(bound(0, 1) == (inst.is_dropoff(i) ? s_j + t_ji : static_cast<double>(ni.b - nj.a)));
      } else {
        CHECK(bound(0, 0) == -Mb - s_i - t_ij);
        CHECK(bound(1, 0) == -s_i - t_ij);
        CHECK(bound(0, 1) == s_j + t_ji);
      }
      CHECK(implied_by_windows(TimeForm{f.kind, i, j, 1, -1, 0, 0, f.kind == TimeForm::dropoff ? bound(0, 0) : -lp::kInf,
                                        f.kind == TimeForm::propagate ? bound(0, 0) : lp::kInf},
                               inst));
    }
    if (++audited == 200) break;
  }
  CHECK(audited == 200);
  // a missing reverse arc leaves the plain form
  const auto g2 = oracle::small_instance(3, 3, 2).instance;
  const auto a2 = filter_arcs(build_pdgraph(g2), g2);
  for (const auto& a : a2.arcs)
    if (!a2.contains(a.to, a.from)) {
      const auto lift = lift_mtz(a.from, a.to, g2, a2);
      CHECK(lift.alpha == 0);
      CHECK(lift.beta == 0);
    }
}

TEST_CASE("lifted time bounds") {
  const auto p = prepare(oracle::small_instance(3, 3, 9).instance);
  for (NodeId i = 1; i < p.inst.sink(); ++i) {
    const auto f = lifted_time_bounds(i, p.inst, p.arcs);
    for (auto [e, c] : f.lower) {
      const NodeId j = p.arcs.arcs[static_cast<std::size_t>(e)].from;
      CHECK(c == static_cast<double>(p.inst.at(j).a - p.inst.at(i).a + p.inst.at(j).service + p.inst.travel(j, i)));
      CHECK(c > 0);
    }
    for (auto [e, c] : f.upper) {
      const NodeId j = p.arcs.arcs[static_cast<std::size_t>(e)].to;
      CHECK(c == static_cast<double>(p.inst.at(i).b - p.inst.at(j).b + p.inst.at(i).service + p.inst.travel(i, j)));
    }
  }
  // every plan satisfies both forms
  for (const auto& x : plan_points(p)) {
    for (NodeId i = 1; i < p.inst.sink(); ++i) {
      const auto f = lifted_time_bounds(i, p.inst, p.arcs);
      const double t = x[static_cast<std::size_t>(p.model.t_var[static_cast<std::size_t>(i)])];
      double lo = static_cast<double>(p.inst.at(i).a), hi = static_cast<double>(p.inst.at(i).b);
      for (auto [e, c] : f.lower) lo += c * x[static_cast<std::size_t>(p.model.y_var[static_cast<std::size_t>(e)])];
      for (auto [e, c] : f.upper) hi -= c * x[static_cast<std::size_t>(p.model.y_var[static_cast<std::size_t>(e)])];
      CHECK(t >= lo - 1e-6);
      CHECK(t <= hi + 1e-6);
    }
  }
}

TEST_CASE("no separated cut removes a feasible plan") {
  std::mt19937_64 rng(77);
  long emitted = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto p = prepare(oracle::small_instance(2 + static_cast<int>(seed % 2), 2, seed * 5).instance);
    const auto points = plan_points(p);
    KappaOracle k(p.inst, p.arcs);
    for (int trial = 0; trial < 200; ++trial) {
      auto x = zero_point(p);
      for (int e : p.model.y_var)
        if (rng() % 4 == 0) x[static_cast<std::size_t>(e)] = (rng() % 2) ? 1.0 : 0.5;
      auto cuts = separate_two_path(p.model, p.arcs, x, k);
      for (auto& c : separate_pred_succ(p.model, p.inst, p.arcs, x)) cuts.push_back(std::move(c));
      for (const auto& c : cuts) {
        ++emitted;
        for (const auto& pt : points) REQUIRE(lp::violation(c.row, pt) <= 1e-9);
      }
    }
    // and through the solver with its own audit switched on
    for (const char* v : {"base", "sec"}) {
      SolveOptions opt;
      opt.variant = v;
      opt.audit_cuts = true;
      oracle::enumerate_plans(p.inst, [&](const oracle::BruteForcePlan& bf) {
        opt.audit_plans.push_back(*make_plan(chains_of(bf, p.omega), p.inst, p.omega, p.arcs));
      });
      const auto out = solve_prepared(p.inst, p.omega, p.arcs, opt);
      for (const auto& c : out.search.cuts)
        for (const auto& pt : points) CHECK(lp::violation(c.row, pt) <= 1e-6);
    }
  }
  CHECK(emitted > 50);
}
