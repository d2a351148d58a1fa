#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "ctspav/bnb.hpp"
#include "ctspav/ctspav_mip.hpp"

namespace ctspav {

/// Coefficients of Y_(j,i) in the time rows written for arc (i, j).
struct MtzLift {
  double alpha = 0;
  double beta = 0;
};

/// Zero unless both (i, j) and (j, i) survive filtering.
MtzLift lift_mtz(NodeId i, NodeId j, const Instance& inst, const ArcSet& arcs);

/// lo <= t_i*T_i + t_j*T_j + y_ij*Y_(i,j) + y_ji*Y_(j,i) <= hi
struct TimeForm {
  enum Kind { propagate, dropoff } kind = propagate;
  NodeId i = 0;
  NodeId j = 0;
  double t_i = 0;
  double t_j = 0;
  double y_ij = 0;
  double y_ji = 0;
  double lo = -lp::kInf;
  double hi = lp::kInf;
};

/// Time-propagation rows for the ordered pair (i, j): always the propagation
/// row, plus the no-wait row when j is a drop-off. Coefficients of arcs that
/// were filtered out are zero.
std::vector<TimeForm> mtz_forms(NodeId i, NodeId j, const Instance& inst, const ArcSet& arcs, bool lifted);

/// True if the form holds for every T in the windows and every 0/1 value of both arcs.
bool implied_by_windows(const TimeForm& form, const Instance& inst);

/// Lower and upper lifted window rows at node i, as (arc index, coefficient) lists.
struct TimeBoundForm {
  NodeId node = 0;
  std::vector<std::pair<int, double>> lower;  // in-arcs: T_i - sum coef*Y >= a_i
  std::vector<std::pair<int, double>> upper;  // out-arcs: T_i + sum coef*Y <= b_i
};

TimeBoundForm lifted_time_bounds(NodeId i, const Instance& inst, const ArcSet& arcs);

/// Arcs carrying positive flow in an LP point.
struct SupportGraph {
  int node_count = 0;
  std::vector<std::vector<NodeId>> out;
};

SupportGraph support_graph(const CtspavModel& model, const ArcSet& arcs, std::span<const double> x,
                           double eps = 1e-6);

/// Strongly connected components with at least two nodes, each sorted, listed by smallest node.
std::vector<std::vector<NodeId>> find_sccs(const SupportGraph& g);

/// pi(S): pickups whose drop-off lies in S. sigma(S): drop-offs whose pickup lies in S.
std::vector<NodeId> predecessors_of(std::span<const NodeId> s, const Instance& inst);
std::vector<NodeId> successors_of(std::span<const NodeId> s, const Instance& inst);

/// Decides whether one vehicle cannot visit the node set S in one contiguous
/// stretch. Verdicts are memoized; safe for concurrent callers.
class KappaOracle {
 public:
  KappaOracle(const Instance& inst, const ArcSet& arcs, int size_cap = 14);

  /// nullopt when |S| exceeds the size cap.
  std::optional<bool> kappa_gt_one(std::span<const NodeId> s);

  [[nodiscard]] long queries() const { return queries_; }
  [[nodiscard]] long memo_hits() const { return hits_; }
  /// Relaxed path searches run by the most recent uncached query.
  [[nodiscard]] int last_iterations() const { return last_iterations_; }

 private:
  bool compute(const std::vector<NodeId>& s);

  const Instance& inst_;
  const ArcSet& arcs_;
  int cap_;
  std::shared_mutex mutex_;
  std::map<std::vector<NodeId>, bool> memo_;
  std::atomic<long> queries_{0};
  std::atomic<long> hits_{0};
  std::atomic<int> last_iterations_{0};
};

/// Sum of Y* over arcs leaving `s` (into the complement, depots included).
double outflow(std::span<const NodeId> s, const CtspavModel& model, const ArcSet& arcs, std::span<const double> x);

/// Y(delta+(source)) >= ceil(chi_lb), when violated.
std::optional<lp::Cut> separate_rounded_vc(const CtspavModel& model, std::span<const double> x, double chi_lb,
                                           double min_violation = 1e-4);

std::vector<lp::Cut> separate_two_path(const CtspavModel& model, const ArcSet& arcs, std::span<const double> x,
                                       KappaOracle& oracle, double min_violation = 1e-4);

std::vector<lp::Cut> separate_pred_succ(const CtspavModel& model, const Instance& inst, const ArcSet& arcs,
                                        std::span<const double> x, double min_violation = 1e-4);

/// Row Y(from, to) >= rhs over the arcs from one node set into another.
lp::Row crossing_row(std::span<const NodeId> from, std::span<const NodeId> to, double rhs,
                     const CtspavModel& model, const ArcSet& arcs);

}  // namespace ctspav
