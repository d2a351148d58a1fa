#include "ctspav/graph_filter.hpp"

#include <algorithm>
#include <array>
#include <ostream>

#include "ctspav/feasibility.hpp"
#include "ctspav/parallel.hpp"

namespace ctspav {

void ArcSet::reindex() {
  const auto N = static_cast<std::size_t>(node_count);
  std::sort(arcs.begin(), arcs.end(),
            [](const Arc& x, const Arc& y) { return std::pair(x.from, x.to) < std::pair(y.from, y.to); });
  index_.assign(N * N, -1);
  out_.assign(N, {});
  in_.assign(N, {});
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const auto& a = arcs[k];
    index_[static_cast<std::size_t>(a.from) * N + static_cast<std::size_t>(a.to)] = static_cast<int>(k);
    out_[static_cast<std::size_t>(a.from)].push_back(static_cast<int>(k));
    in_[static_cast<std::size_t>(a.to)].push_back(static_cast<int>(k));
  }
}

namespace {

bool feasible(std::array<NodeId, 4> path, const Instance& inst) {
  return schedule_path(path, inst).feasible();
}

// The four partial routes used by rule (f) for an ordered pickup pair.
struct PairVerdicts {
  bool j_i_nj_ni = true;
  bool i_ni_j_nj = true;
  bool i_j_ni_nj = true;
  bool i_j_nj_ni = true;
  bool j_i_ni_nj = true;
};

PairVerdicts pair_verdicts(NodeId i, NodeId j, const Instance& inst) {
  const NodeId ni = inst.dropoff_of(i), nj = inst.dropoff_of(j);
  return {feasible({j, i, nj, ni}, inst), feasible({i, ni, j, nj}, inst), feasible({i, j, ni, nj}, inst),
          feasible({i, j, nj, ni}, inst), feasible({j, i, ni, nj}, inst)};
}

template <class Verdicts>
char classify(NodeId i, NodeId j, const Instance& inst, Verdicts&& verdicts) {
  const int n = inst.n;
  const NodeId vs = inst.source(), vt = inst.sink();
  auto P = [&](NodeId x) { return inst.is_pickup(x); };
  auto D = [&](NodeId x) { return inst.is_dropoff(x); };
  auto in_p = [&](NodeId x) { return x >= 1 && x <= n; };
  auto in_d = [&](NodeId x) { return x > n && x <= 2 * n; };
  auto out_p = [&](NodeId x) { return x > 2 * n && x <= 3 * n; };
  auto out_d = [&](NodeId x) { return x > 3 * n && x <= 4 * n; };

  // (a) depot arcs that no route can use
  if ((i == vs && j == vt) || (i == vt && j == vs)) return 'a';
  if (P(i) && (j == vs || j == vt)) return 'a';
  if (i == vt && P(j)) return 'a';
  if (D(j) && i == vs) return 'a';
  if (D(i) && j == vs) return 'a';
  if (i == vt && D(j)) return 'a';
  if (inst.is_depot(i) || inst.is_depot(j)) return 0;

  // (b) a commuter's own nodes in the wrong order
  if (inst.commuter_of(i) == inst.commuter_of(j)) {
    const int qi = (i - 1) / n, qj = (j - 1) / n;  // 0..3 along the commuter's chain
    if ((qi == 0 && (qj == 2 || qj == 3)) || (qi == 1 && (qj == 0 || qj == 3)) ||
        (qi == 2 && (qj == 0 || qj == 1)) || (qi == 3 && qj < 3)) {
      return 'b';
    }
  }

  // (c) mixing inbound and outbound inside a mini route
  if (in_p(i) && (out_p(j) || out_d(j))) return 'c';
  if (in_d(i) && out_d(j)) return 'c';
  if (out_p(i) && (in_p(j) || in_d(j))) return 'c';
  if (out_d(i) && in_d(j)) return 'c';

  // (d) time window along the arc
  if (inst.at(i).a + inst.at(i).service + inst.travel(i, j) > inst.at(j).b) return 'd';

  // (e) ride limit through an intermediate stop
  if (P(i) && j != inst.dropoff_of(i) &&
      inst.travel(i, j) + inst.at(j).service + inst.travel(j, inst.dropoff_of(i)) > inst.at(i).ride_limit) {
    return 'e';
  }
  if (D(j) && i != inst.pickup_of(j)) {
    const NodeId p = inst.pickup_of(j);
    if (inst.travel(p, i) + inst.at(i).service + inst.travel(i, j) > inst.at(p).ride_limit) return 'e';
  }

  // (f) pairs of trips
  if (P(i) && D(j) && inst.pickup_of(j) != i) {
    if (!verdicts(i, inst.pickup_of(j)).j_i_nj_ni) return 'f';
  }
  if (D(i) && P(j) && inst.pickup_of(i) != j) {
    if (!verdicts(inst.pickup_of(i), j).i_ni_j_nj) return 'f';
  }
  if (P(i) && P(j)) {
    const auto& v = verdicts(i, j);
    if (!v.i_j_ni_nj && !v.i_j_nj_ni) return 'f';
  }
  if (D(i) && D(j)) {
    const auto& v = verdicts(inst.pickup_of(i), inst.pickup_of(j));
    if (!v.i_j_ni_nj && !v.j_i_ni_nj) return 'f';
  }
  return 0;
}

}  // namespace

char removal_rule(NodeId i, NodeId j, const Instance& inst) {
  return classify(i, j, inst, [&](NodeId p, NodeId q) { return pair_verdicts(p, q, inst); });
}

ArcSet filter_arcs(const PDGraph& graph, const Instance& inst, int threads) {
  // rule (f) verdicts for every ordered pickup pair, computed once
  const auto pickups = inst.pickups();
  const std::size_t np = pickups.size();
  std::vector<PairVerdicts> memo(np * np);
  auto slot = [&](NodeId p) { return static_cast<std::size_t>(p <= inst.n ? p - 1 : p - inst.n - 1); };
  parallel_for(np * np, threads, [&](std::size_t k) {
    const std::size_t a = k / np, b = k % np;
    if (a != b) memo[k] = pair_verdicts(pickups[a], pickups[b], inst);
  });

  ArcSet out;
  out.node_count = graph.node_count;
  std::vector<char> rule(graph.arcs.size(), 0);
  parallel_for(graph.arcs.size(), threads, [&](std::size_t k) {
    const auto& arc = graph.arcs[k];
    rule[k] = classify(arc.from, arc.to, inst,
                       [&](NodeId p, NodeId q) -> const PairVerdicts& { return memo[slot(p) * np + slot(q)]; });
  });
  for (std::size_t k = 0; k < graph.arcs.size(); ++k) {
    if (rule[k]) {
      out.removal_log.push_back({graph.arcs[k], rule[k]});
    } else {
      out.arcs.push_back(graph.arcs[k]);
    }
  }
  out.reindex();
  return out;
}

ArcSet unfiltered_arcs(const PDGraph& graph) {
  ArcSet out;
  out.node_count = graph.node_count;
  out.arcs = graph.arcs;
  out.reindex();
  return out;
}

void write_removal_csv(std::ostream& os, const ArcSet& arcs) {
  os << "arc,rule\n";
  for (const auto& r : arcs.removal_log) os << r.arc.from << "->" << r.arc.to << ',' << r.rule << '\n';
}

}  // namespace ctspav
