#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctspav/bnb.hpp"
#include "ctspav/graph_filter.hpp"
#include "ctspav/mrea.hpp"

namespace ctspav {

/// Per-arc costs: distance plus a fixed charge on arcs leaving the source.
struct CostTable {
  Meters distance_bound = 0;  // upper bound on the total distance of any plan
  double fixed_cost = 0;      // 100 * distance_bound
  std::vector<double> cost;   // parallel to ArcSet::arcs
};

/// Upper bound on the total distance of any plan: every non-depot node leaves
/// along its longest arc, and each of at most |P| vehicles leaves the source
/// along the longest source arc.
Meters distance_upper_bound(const Instance& inst, const ArcSet& arcs);

CostTable edge_costs(const Instance& inst, const ArcSet& arcs, double fixed_multiplier = 100.0);

/// Big-M constants of the time-propagation rows.
Seconds big_m(const Instance& inst, NodeId i, NodeId j);
Seconds big_m_bar(const Instance& inst, NodeId i, NodeId j);

struct ModelOptions {
  bool lifted_mtz = true;
  bool lifted_time_bounds = true;
};

/// MIP over mini routes (X), arcs (Y) and service start times (T).
struct CtspavModel {
  lp::LinearModel lp;
  std::vector<int> x_var;  // per mini route
  std::vector<int> y_var;  // per arc of the ArcSet
  std::vector<int> t_var;  // per node; -1 for depots
  CostTable costs;
  std::vector<int> source_arcs;  // arc indices leaving the source
  int cover_rows = 0;
  int edge_select_rows = 0;
  int flow_rows = 0;
  int mtz_rows = 0;
  int ride_rows = 0;
  int time_bound_rows = 0;
};

/// Raised when some pickup is not covered by any mini route.
class UncoverableError : public std::runtime_error {
 public:
  UncoverableError(int commuter, const std::string& what) : std::runtime_error(what), commuter(commuter) {}
  int commuter;
};

CtspavModel build_model(const Instance& inst, std::span<const MiniRoute> omega, const ArcSet& arcs,
                        const ModelOptions& options = {});

struct AvRoute {
  std::vector<int> mini_routes;  // indices into omega
  Schedule schedule;             // source, every stop, sink
  Meters distance = 0;
  Meters empty_distance = 0;
};

struct AvRoutePlan {
  std::vector<AvRoute> routes;
  int vehicle_count = 0;
  Meters total_distance = 0;
  Meters empty_distance = 0;
};

/// Raised when selected arcs do not decompose into source-to-sink paths of mini routes.
class ExtractionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

AvRoutePlan extract_routes(const CtspavModel& model, std::span<const double> x, const Instance& inst,
                           std::span<const MiniRoute> omega, const ArcSet& arcs);

/// Builds a chain plan of the given mini routes; nullopt if a chain is infeasible.
std::optional<AvRoutePlan> make_plan(const std::vector<std::vector<int>>& chains, const Instance& inst,
                                     std::span<const MiniRoute> omega, const ArcSet& arcs);

/// Full variable vector for a plan (X, Y, T). Nullopt if the plan uses a removed arc.
std::optional<std::vector<double>> plan_to_vector(const CtspavModel& model, const AvRoutePlan& plan,
                                                  std::span<const MiniRoute> omega, const ArcSet& arcs);

/// Objective of a plan under the model's costs.
double plan_objective(const CtspavModel& model, const AvRoutePlan& plan);

/// LP-guided greedy: pick disjoint mini routes by decreasing X, fill gaps
/// with single-rider routes, then chain them best-fit into vehicles.
std::optional<AvRoutePlan> greedy_plan(std::span<const double> x, const CtspavModel& model,
                                       const Instance& inst, std::span<const MiniRoute> omega,
                                       const ArcSet& arcs);

/// Vehicle-count lower bound implied by a lower bound on the objective.
double vehicle_bound_from_objective(double z_lower, const CostTable& costs);

/// ceil with a relative guard against round-off just above an integer.
long long safe_ceil(double v);

struct Gaps {
  bool defined = false;
  long long vehicle_count_gap = 0;
  double optimality_gap = 0;  // fraction, not percent
};

Gaps gaps(int chi_mip, double chi_lb, double z_mip, double z_bb, bool has_incumbent = true);

struct VariantConfig {
  std::string name;
  bool lifted_time_bounds = true;
  bool lifted_mtz = true;
  bool rounded_vc = true;
  bool two_path = false;
  bool pred_succ = false;
  bool darp_feed = false;
};

/// base, sec or hybrid; throws InputError otherwise.
VariantConfig configure_variant(const std::string& name);

}  // namespace ctspav
