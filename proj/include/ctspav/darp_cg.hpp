#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "ctspav/bnb.hpp"
#include "ctspav/graph_filter.hpp"

namespace ctspav {

/// A depot-to-depot walk of the relaxed dial-a-ride model, cost 1.
struct Column {
  std::vector<NodeId> path;                 // source ... sink
  std::vector<std::pair<NodeId, int>> visits;  // pickup, times visited; ascending pickup
};

struct PricingOptions {
  bool dominance = true;
  int walk_cap = -1;  // nodes per walk, depots included; -1: none when service times are positive, else 4n+2
  std::function<bool()> stop;  // polled during the search; true abandons it
};

struct PricingResult {
  double min_reduced_cost = 1.0;
  std::vector<Column> columns;  // negative reduced cost, best first
  long labels = 0;
  bool complete = true;  // false if stopped early; min_reduced_cost is then not a bound
};

/// Exact minimum reduced cost over resource-feasible walks from source to
/// sink along `arcs`. `mu` is indexed by node id (zero off pickups).
PricingResult price_routes(std::span<const double> mu, const ArcSet& arcs, const Instance& inst,
                           const PricingOptions& options = {});

/// max{z_rmp / (1 - cbar), previous}; once cbar >= 0 the quotient is z_rmp itself.
double farley_bound(double z_rmp, double cbar, double previous);

/// Latest-value channel from the column-generation worker to the tree search.
class BoundStream : public lp::BoundFeed {
 public:
  /// Records `value` if it improves the latest one. Returns true if recorded.
  bool publish(double value);
  std::optional<double> latest() override;
  [[nodiscard]] std::vector<double> history() const;
  [[nodiscard]] long published() const { return count_.load(); }

 private:
  std::atomic<double> latest_{-lp::kInf};
  std::atomic<long> count_{0};
  mutable std::mutex mutex_;
  std::vector<double> history_;
};

struct CgOptions {
  long max_iterations = -1;  // published iterations; 0 computes the first bound only
  double time_limit_s = 1e30;
  double smoothing = 0;      // dual smoothing weight on the previous duals; 0 disables
  PricingOptions pricing;
  std::ostream* log = nullptr;  // CSV iteration,z_rmp,cbar,z_farley,columns_added,wall_time_s
};

struct CgIteration {
  long iteration = 0;
  double z_rmp = 0;
  double cbar = 0;
  double z_farley = 0;
  int columns_added = 0;
  double wall_time_s = 0;
  bool complete = true;  // pricing ran to the end; otherwise cbar and the bound were not updated
};

/// Column generation over the covering master problem.
class DarpCg {
 public:
  /// Seeds one column per commuter; throws UncoverableError if a trip has no feasible route.
  DarpCg(const Instance& inst, const ArcSet& arcs, CgOptions options = {});
  ~DarpCg();
  DarpCg(const DarpCg&) = delete;
  DarpCg& operator=(const DarpCg&) = delete;

  /// Solves the master, prices, updates the bound and adds columns. Pricing
  /// gives up when `stop` returns true or the time limit passes.
  CgIteration iterate(const std::function<bool()>& stop = {});

  [[nodiscard]] bool converged() const { return converged_; }
  [[nodiscard]] double bound() const { return farley_; }
  [[nodiscard]] double z_rmp() const { return z_rmp_; }
  [[nodiscard]] long iterations() const { return iterations_; }
  [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }
  /// Duals of the covering rows from the last master solve, indexed by node id.
  [[nodiscard]] const std::vector<double>& duals() const { return mu_; }

 private:
  void add(Column c);

  const Instance& inst_;
  const ArcSet& arcs_;
  CgOptions opt_;
  struct Master;
  std::unique_ptr<Master> master_;
  std::vector<Column> columns_;
  std::vector<double> mu_;
  std::vector<double> smoothed_;
  double farley_ = -lp::kInf;
  double z_rmp_ = 0;
  long iterations_ = 0;
  bool converged_ = false;
  double started_ = 0;
};

/// Synchronous loop; publishes each improved bound. Returns the final bound.
double run_cg(const Instance& inst, const ArcSet& arcs, BoundStream& stream, const CgOptions& options);

/// Bound feed backed by column generation, either on a worker thread or
/// stepped inline once per tree node.
class CgFeed : public lp::BoundFeed {
 public:
  CgFeed(const Instance& inst, const ArcSet& arcs, CgOptions options, bool threaded);
  ~CgFeed() override;

  std::optional<double> latest() override { return stream_.latest(); }
  void step() override;
  void stop();

  [[nodiscard]] const BoundStream& stream() const { return stream_; }
  [[nodiscard]] std::vector<CgIteration> log() const;

 private:
  bool advance(const std::function<bool()>& stop);

  BoundStream stream_;
  std::unique_ptr<DarpCg> cg_;
  CgOptions opt_;
  bool done_ = false;
  long published_ = 0;
  mutable std::mutex log_mutex_;
  std::vector<CgIteration> log_;
  std::jthread worker_;
};

}  // namespace ctspav
