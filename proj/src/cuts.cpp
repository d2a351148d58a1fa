#include "ctspav/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <tuple>

namespace ctspav {

MtzLift lift_mtz(NodeId i, NodeId j, const Instance& inst, const ArcSet& arcs) {
  if (!arcs.contains(i, j) || !arcs.contains(j, i)) return {};
  const auto& ni = inst.at(i);
  const auto& nj = inst.at(j);
  const double m = static_cast<double>(big_m(inst, i, j));
  const double mbar = static_cast<double>(big_m_bar(inst, i, j));
  const double si = static_cast<double>(ni.service);
  const double sj = static_cast<double>(nj.service);
  const double tij = static_cast<double>(inst.travel(i, j));
  const double tji = static_cast<double>(inst.travel(j, i));
  MtzLift lift;
  if (inst.is_dropoff(i)) {
    lift.alpha = m - si - tij - sj - tji;
  } else {
    lift.alpha = m - si - tij - static_cast<double>(ni.b) + static_cast<double>(nj.a);
  }
  lift.beta = -mbar - si - tij - sj - tji;
  return lift;
}

std::vector<TimeForm> mtz_forms(NodeId i, NodeId j, const Instance& inst, const ArcSet& arcs, bool lifted) {
  std::vector<TimeForm> out;
  const bool has_ij = arcs.contains(i, j);
  const MtzLift lift = lifted ? lift_mtz(i, j, inst, arcs) : MtzLift{};
  const double si = static_cast<double>(inst.at(i).service);
  const double tij = static_cast<double>(inst.travel(i, j));
  const double m = static_cast<double>(big_m(inst, i, j));
  const double mbar = static_cast<double>(big_m_bar(inst, i, j));

  // T_i + s_i + tau_ij <= T_j + M (1 - Y_ij) - alpha Y_ji
  TimeForm p;
  p.kind = TimeForm::propagate;
  p.i = i;
  p.j = j;
  p.t_i = 1;
  p.t_j = -1;
  p.y_ij = has_ij ? m : 0;
  p.y_ji = lift.alpha;
  p.hi = m - si - tij;
  out.push_back(p);

  if (inst.is_dropoff(j)) {
    // T_i + s_i + tau_ij >= T_j - Mbar (1 - Y_ij) - beta Y_ji
    TimeForm d;
    d.kind = TimeForm::dropoff;
    d.i = i;
    d.j = j;
    d.t_i = 1;
    d.t_j = -1;
    d.y_ij = has_ij ? -mbar : 0;
    d.y_ji = lift.beta;
    d.lo = -mbar - si - tij;
    out.push_back(d);
  }
  return out;
}

bool implied_by_windows(const TimeForm& f, const Instance& inst) {
  const auto& ni = inst.at(f.i);
  const auto& nj = inst.at(f.j);
  auto extreme = [&](bool want_max) {
    double v = 0;
    for (auto [c, a, b] : {std::tuple{f.t_i, ni.a, ni.b}, std::tuple{f.t_j, nj.a, nj.b}}) {
      const bool take_b = (c > 0) == want_max;
      v += c * static_cast<double>(take_b ? b : a);
    }
    double best = want_max ? -lp::kInf : lp::kInf;
    for (double yij : {0.0, 1.0}) {
      for (double yji : {0.0, 1.0}) {
        const double y = f.y_ij * yij + f.y_ji * yji;
        best = want_max ? std::max(best, y) : std::min(best, y);
      }
    }
    return v + best;
  };
  if (f.hi < lp::kInf && extreme(true) > f.hi) return false;
  if (f.lo > -lp::kInf && extreme(false) < f.lo) return false;
  return true;
}

TimeBoundForm lifted_time_bounds(NodeId i, const Instance& inst, const ArcSet& arcs) {
  TimeBoundForm out;
  out.node = i;
  const auto& ni = inst.at(i);
  for (int e : arcs.in_arcs(i)) {
    const NodeId j = arcs.arcs[static_cast<std::size_t>(e)].from;
    if (inst.is_depot(j)) continue;
    const auto& nj = inst.at(j);
    const Seconds c = nj.a - ni.a + nj.service + inst.travel(j, i);
    if (c > 0) out.lower.emplace_back(e, static_cast<double>(c));
  }
  for (int e : arcs.out_arcs(i)) {
    const NodeId j = arcs.arcs[static_cast<std::size_t>(e)].to;
    if (inst.is_depot(j)) continue;
    const auto& nj = inst.at(j);
    const Seconds c = ni.b - nj.b + ni.service + inst.travel(i, j);
    if (c > 0) out.upper.emplace_back(e, static_cast<double>(c));
  }
  return out;
}

SupportGraph support_graph(const CtspavModel& model, const ArcSet& arcs, std::span<const double> x, double eps) {
  SupportGraph g;
  g.node_count = arcs.node_count;
  g.out.resize(static_cast<std::size_t>(g.node_count));
  for (std::size_t e = 0; e < arcs.arcs.size(); ++e) {
    if (x[static_cast<std::size_t>(model.y_var[e])] > eps) {
      g.out[static_cast<std::size_t>(arcs.arcs[e].from)].push_back(arcs.arcs[e].to);
    }
  }
  return g;
}

std::vector<std::vector<NodeId>> find_sccs(const SupportGraph& g) {
  // iterative Tarjan
  const int n = g.node_count;
  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  std::vector<std::vector<NodeId>> out;
  int counter = 0;
  struct Frame {
    int v;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& adj = g.out[static_cast<std::size_t>(f.v)];
      if (f.next < adj.size()) {
        const int w = adj[f.next++];
        if (index[static_cast<std::size_t>(w)] < 0) {
          index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = counter++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = 1;
          call.push_back({w, 0});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(f.v)] = std::min(low[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
        }
        continue;
      }
      const int v = f.v;
      call.pop_back();
      if (!call.empty()) {
        const int u = call.back().v;
        low[static_cast<std::size_t>(u)] = std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(v)]);
      }
      if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
        std::vector<NodeId> comp;
        int w = -1;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp.push_back(w);
        } while (w != v);
        if (comp.size() >= 2) {
          std::sort(comp.begin(), comp.end());
          out.push_back(std::move(comp));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> predecessors_of(std::span<const NodeId> s, const Instance& inst) {
  std::vector<NodeId> out;
  for (NodeId v : s) {
    if (inst.is_dropoff(v)) out.push_back(inst.pickup_of(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> successors_of(std::span<const NodeId> s, const Instance& inst) {
  std::vector<NodeId> out;
  for (NodeId v : s) {
    if (inst.is_pickup(v)) out.push_back(inst.dropoff_of(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

KappaOracle::KappaOracle(const Instance& inst, const ArcSet& arcs, int size_cap)
    : inst_(inst), arcs_(arcs), cap_(size_cap) {}

std::optional<bool> KappaOracle::kappa_gt_one(std::span<const NodeId> s) {
  if (static_cast<int>(s.size()) > cap_) return std::nullopt;
  std::vector<NodeId> key(s.begin(), s.end());
  std::sort(key.begin(), key.end());
  {
    std::shared_lock lock(mutex_);
    ++queries_;
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++hits_;
      return it->second;
    }
  }
  const bool verdict = compute(key);
  std::unique_lock lock(mutex_);
  memo_.emplace(std::move(key), verdict);
  return verdict;
}

namespace {

// Label of the relaxed path search on the layered graph.
struct PathLabel {
  FeasLabel res;
  int local = 0;          // local node index
  int cost = 0;
  int length = 0;         // nodes on the path, source included
  std::uint64_t seen = 0;  // visited members of the elementarity set
  int parent = -1;
  bool alive = true;
};

bool dominates(const PathLabel& a, const PathLabel& b) {
  if (a.cost > b.cost || a.length > b.length) return false;
  if ((a.seen & ~b.seen) != 0) return false;
  if (a.res.earliest > b.res.earliest || a.res.latest < b.res.latest) return false;
  if (a.res.load != b.res.load) return false;
  for (int k = 0; k < a.res.load; ++k) {
    const auto& ra = a.res.onboard[static_cast<std::size_t>(k)];
    const auto& rb = b.res.onboard[static_cast<std::size_t>(k)];
    if (ra.pickup != rb.pickup || ra.latest_pickup < rb.latest_pickup || ra.elapsed > rb.elapsed) return false;
  }
  return true;
}

}  // namespace

bool KappaOracle::compute(const std::vector<NodeId>& s) {
  // layers: pi(S)\S, S, sigma(S)\S
  std::vector<NodeId> l1;
  std::vector<NodeId> l3;
  for (NodeId p : predecessors_of(s, inst_)) {
    if (!std::binary_search(s.begin(), s.end(), p)) l1.push_back(p);
  }
  for (NodeId d : successors_of(s, inst_)) {
    if (!std::binary_search(s.begin(), s.end(), d)) l3.push_back(d);
  }
  std::vector<NodeId> nodes{inst_.source()};
  std::vector<int> layer{0};
  for (NodeId v : l1) nodes.push_back(v), layer.push_back(1);
  for (NodeId v : s) nodes.push_back(v), layer.push_back(2);
  for (NodeId v : l3) nodes.push_back(v), layer.push_back(3);
  nodes.push_back(inst_.sink());
  layer.push_back(4);
  const int count = static_cast<int>(nodes.size());
  const int first_layer = l1.empty() ? 2 : 1;
  const int last_layer = l3.empty() ? 2 : 3;

  std::vector<std::vector<int>> succ(static_cast<std::size_t>(count));
  for (int a = 0; a < count; ++a) {
    for (int b = 0; b < count; ++b) {
      if (a == b) continue;
      const int la = layer[static_cast<std::size_t>(a)];
      const int lb = layer[static_cast<std::size_t>(b)];
      bool edge = false;
      if (la == 0) {
        edge = lb == first_layer;
      } else if (lb == 4) {
        edge = la == last_layer;
      } else {
        edge = la == lb || lb == la + 1;
      }
      if (edge && arcs_.contains(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)])) {
        succ[static_cast<std::size_t>(a)].push_back(b);
      }
    }
  }

  int pickup_count = 0;
  for (NodeId v : nodes) pickup_count += inst_.is_pickup(v);
  const int target = -pickup_count;

  std::uint64_t elementary = 0;  // local indices that may not repeat
  last_iterations_ = 0;
  for (;;) {
    ++last_iterations_;
    std::vector<PathLabel> labels;
    std::vector<std::vector<int>> at(static_cast<std::size_t>(count));
    PathLabel root;
    root.res = depot_label(inst_);
    root.length = 1;
    labels.push_back(root);
    at[0].push_back(0);
    std::vector<int> frontier{0};
    std::vector<int> finished;
    while (!frontier.empty()) {
      std::vector<int> next_frontier;
      for (int li : frontier) {
        if (!labels[static_cast<std::size_t>(li)].alive) continue;
        const PathLabel cur = labels[static_cast<std::size_t>(li)];
        if (cur.length >= count) continue;
        for (int b : succ[static_cast<std::size_t>(cur.local)]) {
          const std::uint64_t bit = std::uint64_t{1} << b;
          if ((elementary & bit) && (cur.seen & bit)) continue;
          auto ext = extend_label(cur.res, nodes[static_cast<std::size_t>(b)], inst_);
          if (!ext) continue;
          PathLabel nl;
          nl.res = ext.value();
          nl.local = b;
          nl.cost = cur.cost - (inst_.is_pickup(nodes[static_cast<std::size_t>(cur.local)]) ? 1 : 0);
          nl.length = cur.length + 1;
          nl.seen = cur.seen | ((elementary & bit) ? bit : 0);
          nl.parent = li;
          auto& bucket = at[static_cast<std::size_t>(b)];
          bool dominated = false;
          for (int o : bucket) {
            if (labels[static_cast<std::size_t>(o)].alive && dominates(labels[static_cast<std::size_t>(o)], nl)) {
              dominated = true;
              break;
            }
          }
          if (dominated) continue;
          for (int o : bucket) {
            if (labels[static_cast<std::size_t>(o)].alive && dominates(nl, labels[static_cast<std::size_t>(o)])) {
              labels[static_cast<std::size_t>(o)].alive = false;
            }
          }
          const int id = static_cast<int>(labels.size());
          labels.push_back(nl);
          bucket.push_back(id);
          if (b == count - 1) {
            finished.push_back(id);
          } else {
            next_frontier.push_back(id);
          }
        }
      }
      frontier = std::move(next_frontier);
    }

    int best = 0;
    for (int id : finished) {
      if (labels[static_cast<std::size_t>(id)].alive) best = std::min(best, labels[static_cast<std::size_t>(id)].cost);
    }
    if (best > target) return true;

    // a minimum-cost path that is elementary settles the question
    std::vector<std::vector<int>> paths;
    for (int id : finished) {
      const auto& l = labels[static_cast<std::size_t>(id)];
      if (!l.alive || l.cost != best) continue;
      std::vector<int> path;
      for (int k = id; k >= 0; k = labels[static_cast<std::size_t>(k)].parent) path.push_back(labels[static_cast<std::size_t>(k)].local);
      std::reverse(path.begin(), path.end());
      paths.push_back(std::move(path));
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
      std::vector<int> sorted = path;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) return best > target;
    }
    const auto& path = paths.front();
    std::uint64_t met = 0;
    int repeated = -1;
    for (int v : path) {
      const std::uint64_t bit = std::uint64_t{1} << v;
      if (met & bit) {
        repeated = v;
        break;
      }
      met |= bit;
    }
    elementary |= std::uint64_t{1} << repeated;
  }
}

double outflow(std::span<const NodeId> s, const CtspavModel& model, const ArcSet& arcs, std::span<const double> x) {
  std::vector<char> in(static_cast<std::size_t>(arcs.node_count), 0);
  for (NodeId v : s) in[static_cast<std::size_t>(v)] = 1;
  double total = 0;
  for (NodeId v : s) {
    for (int e : arcs.out_arcs(v)) {
      if (!in[static_cast<std::size_t>(arcs.arcs[static_cast<std::size_t>(e)].to)]) {
        total += x[static_cast<std::size_t>(model.y_var[static_cast<std::size_t>(e)])];
      }
    }
  }
  return total;
}

lp::Row crossing_row(std::span<const NodeId> from, std::span<const NodeId> to, double rhs, const CtspavModel& model,
                     const ArcSet& arcs) {
  std::vector<char> target(static_cast<std::size_t>(arcs.node_count), 0);
  for (NodeId v : to) target[static_cast<std::size_t>(v)] = 1;
  lp::Row row;
  for (NodeId v : from) {
    for (int e : arcs.out_arcs(v)) {
      if (target[static_cast<std::size_t>(arcs.arcs[static_cast<std::size_t>(e)].to)]) {
        row.terms.push_back({model.y_var[static_cast<std::size_t>(e)], 1.0});
      }
    }
  }
  row.lo = rhs;
  return row;
}

std::optional<lp::Cut> separate_rounded_vc(const CtspavModel& model, std::span<const double> x, double chi_lb,
                                           double min_violation) {
  const double rhs = static_cast<double>(safe_ceil(chi_lb));
  lp::Row row;
  for (int e : model.source_arcs) row.terms.push_back({model.y_var[static_cast<std::size_t>(e)], 1.0});
  row.lo = rhs;
  row.name = "rounded_vc";
  if (lp::violation(row, x) <= min_violation) return std::nullopt;
  return lp::Cut{std::move(row), "rounded_vc", {}};
}

namespace {

std::vector<NodeId> complement(std::span<const NodeId> s, int node_count) {
  std::vector<char> in(static_cast<std::size_t>(node_count), 0);
  for (NodeId v : s) in[static_cast<std::size_t>(v)] = 1;
  std::vector<NodeId> out;
  for (int v = 0; v < node_count; ++v) {
    if (!in[static_cast<std::size_t>(v)]) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> minus(std::span<const NodeId> a, std::span<const NodeId> b) {
  std::vector<NodeId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<lp::Cut> separate_two_path(const CtspavModel& model, const ArcSet& arcs, std::span<const double> x,
                                       KappaOracle& oracle, double min_violation) {
  std::vector<lp::Cut> cuts;
  for (const auto& s : find_sccs(support_graph(model, arcs, x))) {
    if (outflow(s, model, arcs, x) >= 2.0 - min_violation) continue;
    const auto verdict = oracle.kappa_gt_one(s);
    if (!verdict || !*verdict) continue;
    const auto rest = complement(s, arcs.node_count);
    lp::Row row = crossing_row(s, rest, 2.0, model, arcs);
    row.name = "two_path";
    if (lp::violation(row, x) <= min_violation) continue;
    cuts.push_back({std::move(row), "two_path", s});
  }
  return cuts;
}

std::vector<lp::Cut> separate_pred_succ(const CtspavModel& model, const Instance& inst, const ArcSet& arcs,
                                        std::span<const double> x, double min_violation) {
  std::vector<lp::Cut> cuts;
  for (const auto& s : find_sccs(support_graph(model, arcs, x))) {
    const auto rest = complement(s, arcs.node_count);
    const auto pi = predecessors_of(s, inst);
    const auto sigma = successors_of(s, inst);
    lp::Row pred = crossing_row(minus(s, pi), minus(rest, pi), 1.0, model, arcs);
    pred.name = "predecessor";
    if (lp::violation(pred, x) > min_violation) cuts.push_back({std::move(pred), "predecessor", s});
    lp::Row succ = crossing_row(minus(rest, sigma), minus(s, sigma), 1.0, model, arcs);
    succ.name = "successor";
    if (lp::violation(succ, x) > min_violation) cuts.push_back({std::move(succ), "successor", s});
  }
  return cuts;
}

}  // namespace ctspav
