#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctspav/lp.hpp"

namespace ctspav::lp {

/// A globally valid inequality proposed by a separator.
struct Cut {
  Row row;
  std::string family;
  std::vector<int> support;  // node set the cut was derived from, if any
};

struct SeparationContext {
  std::span<const double> x;
  long node_id = 0;
  int depth = 0;
  double node_objective = 0;
  double global_bound = -kInf;  // valid lower bound on the optimum right now
  std::optional<double> feed;   // latest value published by the bound feed
};

using SeparatorFn = std::function<void(const SeparationContext&, std::vector<Cut>&)>;

struct Separator {
  std::string family;
  SeparatorFn fn;
};

/// Asynchronous source of an external bound, read without blocking.
class BoundFeed {
 public:
  virtual ~BoundFeed() = default;
  virtual std::optional<double> latest() = 0;
  /// Called once per node before `latest`; inline producers advance here.
  virtual void step() {}
};

/// Maps an LP point to a candidate solution (full variable vector) or nothing.
using Heuristic = std::function<std::optional<std::vector<double>>(std::span<const double> x)>;

struct BnbOptions {
  double time_limit_s = 3600;
  long node_limit = -1;
  double int_tol = 1e-6;
  double cut_violation = 1e-4;
  int max_cuts_per_round = 20;
  int root_cut_rounds = 50;
  int node_cut_rounds = 5;
  bool objective_integral = false;  // every feasible objective value is an integer
  bool audit_cuts = false;          // check each cut against `audit_points`
  std::vector<std::vector<double>> audit_points;
  std::ostream* log = nullptr;      // node, depth, obj, bound, cuts-added
  std::ostream* cut_log = nullptr;  // CSV node_id,family,|S|,violation,accepted
  SimplexOptions simplex;
};

enum class SearchStatus { optimal, time_limit, infeasible };

const char* to_string(SearchStatus s);

struct BoundEvent {
  long node = 0;
  double bound = -kInf;
  double incumbent = kInf;
};

struct SearchResult {
  SearchStatus status = SearchStatus::infeasible;
  std::optional<std::vector<double>> incumbent;
  double z_mip = kInf;
  double z_bb = -kInf;
  double root_bound = -kInf;
  long nodes = 0;
  long cuts_added = 0;
  long lp_iterations = 0;
  std::vector<Cut> cuts;  // global pool, in insertion order
  std::vector<BoundEvent> history;
};

/// Thrown in audit mode when a cut cuts off a known feasible point.
class InvalidCutError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Best-bound branch and cut. Separators run in order at every node;
/// `feed` is polled after each node LP.
SearchResult branch_and_cut(const LinearModel& model, std::span<const Separator> separators,
                            BoundFeed* feed, const BnbOptions& options, const Heuristic& heuristic = {});

}  // namespace ctspav::lp
