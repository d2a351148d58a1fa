#include "ctspav/ctspav_mip.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ctspav/cuts.hpp"

namespace ctspav {

Meters distance_upper_bound(const Instance& inst, const ArcSet& arcs) {
  Meters total = 0;
  for (NodeId i = 1; i <= 4 * inst.n; ++i) {
    Meters longest = 0;
    for (int e : arcs.out_arcs(i)) longest = std::max(longest, arcs.arcs[static_cast<std::size_t>(e)].dist);
    total += longest;
  }
  Meters from_source = 0;
  for (int e : arcs.out_arcs(inst.source())) {
    from_source = std::max(from_source, arcs.arcs[static_cast<std::size_t>(e)].dist);
  }
  return total + static_cast<Meters>(2 * inst.n) * from_source;
}

CostTable edge_costs(const Instance& inst, const ArcSet& arcs, double fixed_multiplier) {
  CostTable t;
  t.distance_bound = distance_upper_bound(inst, arcs);
  t.fixed_cost = fixed_multiplier * static_cast<double>(t.distance_bound);
  t.cost.reserve(arcs.arcs.size());
  for (const auto& a : arcs.arcs) {
    double c = static_cast<double>(a.dist);
    if (a.from == inst.source()) c += t.fixed_cost;
    t.cost.push_back(c);
  }
  return t;
}

Seconds big_m(const Instance& inst, NodeId i, NodeId j) {
  return std::max<Seconds>(0, inst.at(i).b + inst.at(i).service + inst.travel(i, j) - inst.at(j).a);
}

Seconds big_m_bar(const Instance& inst, NodeId i, NodeId j) {
  return std::max<Seconds>(0, inst.at(j).b - inst.at(i).a - inst.at(i).service - inst.travel(i, j));
}

namespace {

std::string node_pair(NodeId i, NodeId j) { return std::to_string(i) + "_" + std::to_string(j); }

}  // namespace

CtspavModel build_model(const Instance& inst, std::span<const MiniRoute> omega, const ArcSet& arcs,
                        const ModelOptions& options) {
  CtspavModel m;
  m.costs = edge_costs(inst, arcs);
  auto& lp = m.lp;

  // routes whose internal arcs were filtered out can never be selected
  std::vector<char> usable(omega.size(), 1);
  for (std::size_t r = 0; r < omega.size(); ++r) {
    for (auto [a, b] : omega[r].arcs()) {
      if (!arcs.contains(a, b)) usable[r] = 0;
    }
  }
  std::vector<std::vector<int>> covering(static_cast<std::size_t>(inst.node_count()));
  for (std::size_t r = 0; r < omega.size(); ++r) {
    if (!usable[r]) continue;
    for (NodeId p : omega[r].riders) covering[static_cast<std::size_t>(p)].push_back(static_cast<int>(r));
  }
  for (NodeId p : inst.pickups()) {
    if (covering[static_cast<std::size_t>(p)].empty()) {
      const int c = inst.commuter_of(p);
      throw UncoverableError(c, "commuter " + std::to_string(c) + " has no feasible " +
                                    to_string(inst.direction(p)) + " mini route");
    }
  }

  for (std::size_t r = 0; r < omega.size(); ++r) {
    m.x_var.push_back(lp.add_variable(0, usable[r] ? 1 : 0, 0, true, "X" + std::to_string(r), 1));
  }
  for (std::size_t e = 0; e < arcs.arcs.size(); ++e) {
    const auto& a = arcs.arcs[e];
    m.y_var.push_back(lp.add_variable(0, 1, m.costs.cost[e], true, "Y" + node_pair(a.from, a.to), 0));
    if (a.from == inst.source()) m.source_arcs.push_back(static_cast<int>(e));
  }
  m.t_var.assign(static_cast<std::size_t>(inst.node_count()), -1);
  for (NodeId i = 1; i <= 4 * inst.n; ++i) {
    const auto& w = inst.at(i);
    m.t_var[static_cast<std::size_t>(i)] =
        lp.add_variable(static_cast<double>(w.a), static_cast<double>(w.b), 0, false, "T" + std::to_string(i));
  }

  for (NodeId p : inst.pickups()) {
    std::vector<lp::Term> terms;
    for (int r : covering[static_cast<std::size_t>(p)]) terms.push_back({m.x_var[static_cast<std::size_t>(r)], 1.0});
    lp.add_row(std::move(terms), lp::Sense::eq, 1, "cover" + std::to_string(p));
    ++m.cover_rows;
  }

  std::map<int, std::vector<int>> routes_on_arc;
  for (std::size_t r = 0; r < omega.size(); ++r) {
    if (!usable[r]) continue;
    for (auto [a, b] : omega[r].arcs()) routes_on_arc[arcs.find(a, b)].push_back(static_cast<int>(r));
  }
  for (const auto& [e, routes] : routes_on_arc) {
    std::vector<lp::Term> terms;
    for (int r : routes) terms.push_back({m.x_var[static_cast<std::size_t>(r)], 1.0});
    terms.push_back({m.y_var[static_cast<std::size_t>(e)], -1.0});
    const auto& a = arcs.arcs[static_cast<std::size_t>(e)];
    lp.add_row(std::move(terms), lp::Sense::le, 0, "select" + node_pair(a.from, a.to));
    ++m.edge_select_rows;
  }

  for (NodeId i = 1; i <= 4 * inst.n; ++i) {
    std::vector<lp::Term> out;
    std::vector<lp::Term> in;
    for (int e : arcs.out_arcs(i)) out.push_back({m.y_var[static_cast<std::size_t>(e)], 1.0});
    for (int e : arcs.in_arcs(i)) in.push_back({m.y_var[static_cast<std::size_t>(e)], 1.0});
    lp.add_row(std::move(out), lp::Sense::eq, 1, "out" + std::to_string(i));
    lp.add_row(std::move(in), lp::Sense::eq, 1, "in" + std::to_string(i));
    m.flow_rows += 2;
  }

  auto y_of = [&](NodeId a, NodeId b) {
    const int e = arcs.find(a, b);
    return e < 0 ? -1 : m.y_var[static_cast<std::size_t>(e)];
  };
  for (NodeId i = 1; i <= 4 * inst.n; ++i) {
    for (NodeId j = 1; j <= 4 * inst.n; ++j) {
      if (i == j) continue;
      const bool relevant = arcs.contains(i, j) || (options.lifted_mtz && arcs.contains(j, i));
      if (!relevant) continue;
      for (const auto& f : mtz_forms(i, j, inst, arcs, options.lifted_mtz)) {
        if (implied_by_windows(f, inst)) continue;
        lp::Row row;
        row.terms.push_back({m.t_var[static_cast<std::size_t>(i)], f.t_i});
        row.terms.push_back({m.t_var[static_cast<std::size_t>(j)], f.t_j});
        if (f.y_ij != 0) row.terms.push_back({y_of(i, j), f.y_ij});
        if (f.y_ji != 0) row.terms.push_back({y_of(j, i), f.y_ji});
        row.lo = f.lo;
        row.hi = f.hi;
        row.name = (f.kind == TimeForm::propagate ? "mtz" : "mtzd") + node_pair(i, j);
        lp.add_row(std::move(row));
        ++m.mtz_rows;
      }
    }
  }

  for (NodeId p : inst.pickups()) {
    const auto& w = inst.at(p);
    lp.add_row({{m.t_var[static_cast<std::size_t>(inst.dropoff_of(p))], 1.0}, {m.t_var[static_cast<std::size_t>(p)], -1.0}},
               lp::Sense::le, static_cast<double>(w.ride_limit + w.service), "ride" + std::to_string(p));
    ++m.ride_rows;
  }

  if (options.lifted_time_bounds) {
    for (NodeId i = 1; i <= 4 * inst.n; ++i) {
      const auto form = lifted_time_bounds(i, inst, arcs);
      const auto& w = inst.at(i);
      if (!form.lower.empty()) {
        std::vector<lp::Term> terms{{m.t_var[static_cast<std::size_t>(i)], 1.0}};
        for (auto [e, c] : form.lower) terms.push_back({m.y_var[static_cast<std::size_t>(e)], -c});
        lp.add_row(std::move(terms), lp::Sense::ge, static_cast<double>(w.a), "tlo" + std::to_string(i));
        ++m.time_bound_rows;
      }
      if (!form.upper.empty()) {
        std::vector<lp::Term> terms{{m.t_var[static_cast<std::size_t>(i)], 1.0}};
        for (auto [e, c] : form.upper) terms.push_back({m.y_var[static_cast<std::size_t>(e)], c});
        lp.add_row(std::move(terms), lp::Sense::le, static_cast<double>(w.b), "thi" + std::to_string(i));
        ++m.time_bound_rows;
      }
    }
  }
  return m;
}

std::optional<AvRoutePlan> make_plan(const std::vector<std::vector<int>>& chains, const Instance& inst,
                                     std::span<const MiniRoute> omega, const ArcSet& arcs) {
  AvRoutePlan plan;
  for (const auto& chain : chains) {
    if (chain.empty()) continue;
    std::vector<std::vector<NodeId>> orders;
    for (int r : chain) orders.push_back(omega[static_cast<std::size_t>(r)].visit_order);
    auto sched = check_av_route(orders, inst);
    if (!sched) return std::nullopt;
    AvRoute route;
    route.mini_routes = chain;
    route.schedule = std::move(sched.value());
    const auto& path = route.schedule.order;
    int load = 0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      if (!arcs.contains(path[k], path[k + 1])) return std::nullopt;
      if (inst.is_pickup(path[k])) ++load;
      if (inst.is_dropoff(path[k])) --load;
      const Meters d = inst.distance(path[k], path[k + 1]);
      route.distance += d;
      if (load == 0) route.empty_distance += d;
    }
    plan.total_distance += route.distance;
    plan.empty_distance += route.empty_distance;
    plan.routes.push_back(std::move(route));
  }
  plan.vehicle_count = static_cast<int>(plan.routes.size());
  return plan;
}

AvRoutePlan extract_routes(const CtspavModel& model, std::span<const double> x, const Instance& inst,
                           std::span<const MiniRoute> omega, const ArcSet& arcs) {
  auto on = [&](int var) { return x[static_cast<std::size_t>(var)] > 0.5; };
  std::vector<int> route_at(static_cast<std::size_t>(inst.node_count()), -1);
  int selected = 0;
  for (std::size_t r = 0; r < omega.size(); ++r) {
    if (!on(model.x_var[r])) continue;
    ++selected;
    auto& slot = route_at[static_cast<std::size_t>(omega[r].first())];
    if (slot >= 0) throw ExtractionError("two selected mini routes start at the same node");
    slot = static_cast<int>(r);
    for (auto [a, b] : omega[r].arcs()) {
      const int e = arcs.find(a, b);
      if (e < 0 || !on(model.y_var[static_cast<std::size_t>(e)])) {
        throw ExtractionError("selected mini route uses an unselected arc");
      }
    }
  }
  auto next_of = [&](NodeId v) {
    NodeId next = -1;
    for (int e : arcs.out_arcs(v)) {
      if (!on(model.y_var[static_cast<std::size_t>(e)])) continue;
      if (next >= 0) throw ExtractionError("node with two selected outgoing arcs");
      next = arcs.arcs[static_cast<std::size_t>(e)].to;
    }
    if (next < 0) throw ExtractionError("path ends before the sink");
    return next;
  };

  std::vector<std::vector<int>> chains;
  int used = 0;
  for (int e : model.source_arcs) {
    if (!on(model.y_var[static_cast<std::size_t>(e)])) continue;
    std::vector<int> chain;
    NodeId v = arcs.arcs[static_cast<std::size_t>(e)].to;
    while (v != inst.sink()) {
      const int r = route_at[static_cast<std::size_t>(v)];
      if (r < 0) throw ExtractionError("path enters node " + std::to_string(v) + " outside any selected mini route");
      if (static_cast<int>(chain.size()) > selected) throw ExtractionError("selected arcs form a cycle");
      chain.push_back(r);
      ++used;
      v = next_of(omega[static_cast<std::size_t>(r)].last());
    }
    chains.push_back(std::move(chain));
  }
  if (used != selected) throw ExtractionError("selected mini routes not reachable from the source");
  auto plan = make_plan(chains, inst, omega, arcs);
  if (!plan) throw ExtractionError("extracted AV route is infeasible");
  return *plan;
}

std::optional<std::vector<double>> plan_to_vector(const CtspavModel& model, const AvRoutePlan& plan,
                                                  std::span<const MiniRoute> omega, const ArcSet& arcs) {
  std::vector<double> x(static_cast<std::size_t>(model.lp.num_vars()), 0.0);
  for (std::size_t i = 0; i < model.t_var.size(); ++i) {
    if (model.t_var[i] >= 0) x[static_cast<std::size_t>(model.t_var[i])] = model.lp.var(model.t_var[i]).lo;
  }
  for (const auto& route : plan.routes) {
    for (int r : route.mini_routes) x[static_cast<std::size_t>(model.x_var[static_cast<std::size_t>(r)])] = 1;
    const auto& s = route.schedule;
    for (std::size_t k = 0; k < s.order.size(); ++k) {
      if (k + 1 < s.order.size()) {
        const int e = arcs.find(s.order[k], s.order[k + 1]);
        if (e < 0) return std::nullopt;
        x[static_cast<std::size_t>(model.y_var[static_cast<std::size_t>(e)])] = 1;
      }
      const int t = model.t_var[static_cast<std::size_t>(s.order[k])];
      if (t >= 0) x[static_cast<std::size_t>(t)] = static_cast<double>(s.start[k]);
    }
  }
  (void)omega;
  return x;
}

double plan_objective(const CtspavModel& model, const AvRoutePlan& plan) {
  return static_cast<double>(plan.total_distance) + model.costs.fixed_cost * plan.vehicle_count;
}

std::optional<AvRoutePlan> greedy_plan(std::span<const double> x, const CtspavModel& model, const Instance& inst,
                                       std::span<const MiniRoute> omega, const ArcSet& arcs) {
  auto xv = [&](int var) { return x.empty() ? 0.0 : x[static_cast<std::size_t>(var)]; };
  std::vector<int> order;
  for (std::size_t r = 0; r < omega.size(); ++r) {
    if (model.lp.var(model.x_var[r]).hi > 0 && xv(model.x_var[r]) > 1e-6) order.push_back(static_cast<int>(r));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return xv(model.x_var[static_cast<std::size_t>(a)]) > xv(model.x_var[static_cast<std::size_t>(b)]);
  });
  std::vector<char> covered(static_cast<std::size_t>(inst.node_count()), 0);
  std::vector<int> chosen;
  auto take_if_disjoint = [&](int r) {
    for (NodeId p : omega[static_cast<std::size_t>(r)].riders) {
      if (covered[static_cast<std::size_t>(p)]) return false;
    }
    for (NodeId p : omega[static_cast<std::size_t>(r)].riders) covered[static_cast<std::size_t>(p)] = 1;
    chosen.push_back(r);
    return true;
  };
  for (int r : order) take_if_disjoint(r);
  for (NodeId p : inst.pickups()) {
    if (covered[static_cast<std::size_t>(p)]) continue;
    bool ok = false;
    for (std::size_t r = 0; r < omega.size() && !ok; ++r) {
      if (model.lp.var(model.x_var[r]).hi <= 0) continue;
      const auto& riders = omega[r].riders;
      if (std::find(riders.begin(), riders.end(), p) == riders.end()) continue;
      ok = take_if_disjoint(static_cast<int>(r));
    }
    if (!ok) return std::nullopt;
  }

  std::stable_sort(chosen.begin(), chosen.end(), [&](int a, int b) {
    return omega[static_cast<std::size_t>(a)].schedule.start.front() < omega[static_cast<std::size_t>(b)].schedule.start.front();
  });
  std::vector<std::vector<int>> chains;
  std::vector<std::vector<std::vector<NodeId>>> chain_orders;
  for (int r : chosen) {
    const auto& mr = omega[static_cast<std::size_t>(r)];
    int best = -1;
    double best_flow = -1;
    Meters best_dist = 0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      const NodeId tail = omega[static_cast<std::size_t>(chains[c].back())].last();
      const int e = arcs.find(tail, mr.first());
      if (e < 0) continue;
      auto trial = chain_orders[c];
      trial.push_back(mr.visit_order);
      if (!check_av_route(trial, inst)) continue;
      const double flow = xv(model.y_var[static_cast<std::size_t>(e)]);
      const Meters d = inst.distance(tail, mr.first());
      if (best < 0 || flow > best_flow + 1e-9 || (std::abs(flow - best_flow) <= 1e-9 && d < best_dist)) {
        best = static_cast<int>(c);
        best_flow = flow;
        best_dist = d;
      }
    }
    if (best < 0) {
      chains.push_back({r});
      chain_orders.push_back({mr.visit_order});
    } else {
      chains[static_cast<std::size_t>(best)].push_back(r);
      chain_orders[static_cast<std::size_t>(best)].push_back(mr.visit_order);
    }
  }
  return make_plan(chains, inst, omega, arcs);
}

double vehicle_bound_from_objective(double z_lower, const CostTable& costs) {
  if (costs.fixed_cost <= 0) return 0;
  return (z_lower - static_cast<double>(costs.distance_bound)) / costs.fixed_cost;
}

long long safe_ceil(double v) {
  return static_cast<long long>(std::ceil(v - 1e-6 * std::max(1.0, std::abs(v))));
}

Gaps gaps(int chi_mip, double chi_lb, double z_mip, double z_bb, bool has_incumbent) {
  Gaps g;
  if (!has_incumbent || z_mip == 0) return g;
  g.defined = true;
  g.vehicle_count_gap = chi_mip - safe_ceil(chi_lb);
  g.optimality_gap = (z_mip - z_bb) / z_mip;
  return g;
}

VariantConfig configure_variant(const std::string& name) {
  VariantConfig v;
  v.name = name;
  if (name == "base") return v;
  if (name == "sec") {
    v.two_path = true;
    v.pred_succ = true;
    return v;
  }
  if (name == "hybrid") {
    v.darp_feed = true;
    return v;
  }
  throw InputError("unknown variant '" + name + "' (expected base, sec or hybrid)");
}

}  // namespace ctspav
