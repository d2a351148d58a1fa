#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ctspav/types.hpp"

namespace ctspav {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One commute trip. Inbound trips carry the desired arrival at the workplace,
/// outbound trips the desired departure from it.
struct Trip {
  int origin = 0;
  int destination = 0;
  Seconds desired_time = 0;
  Direction direction = Direction::inbound;
};

struct NodeAttrs {
  NodeKind kind = NodeKind::source;
  Seconds a = 0;  // earliest service start
  Seconds b = 0;  // latest service start
  Seconds service = 0;
  Seconds ride_limit = 0;  // pickups only
};

/// Pickup/delivery graph data for n commuters.
///
/// Node numbering: 0 is the source depot, 4n+1 the sink depot; commuter c in
/// [1, n] owns nodes c (inbound pickup), n+c (inbound drop-off), 2n+c
/// (outbound pickup) and 3n+c (outbound drop-off). The drop-off of any pickup
/// p is therefore p+n.
struct Instance {
  int n = 0;
  int capacity = 4;
  Seconds service_default = 30;
  std::vector<NodeAttrs> nodes;
  IntMatrix tau;   // travel time, seconds
  IntMatrix dist;  // distance, meters

  [[nodiscard]] int node_count() const { return 4 * n + 2; }
  [[nodiscard]] NodeId source() const { return 0; }
  [[nodiscard]] NodeId sink() const { return 4 * n + 1; }

  [[nodiscard]] bool is_depot(NodeId i) const { return i == 0 || i == 4 * n + 1; }
  [[nodiscard]] bool is_pickup(NodeId i) const {
    return (i >= 1 && i <= n) || (i > 2 * n && i <= 3 * n);
  }
  [[nodiscard]] bool is_dropoff(NodeId i) const {
    return (i > n && i <= 2 * n) || (i > 3 * n && i <= 4 * n);
  }
  [[nodiscard]] bool is_inbound(NodeId i) const { return i >= 1 && i <= 2 * n; }
  [[nodiscard]] Direction direction(NodeId i) const {
    return is_inbound(i) ? Direction::inbound : Direction::outbound;
  }
  [[nodiscard]] NodeId dropoff_of(NodeId pickup) const { return pickup + n; }
  [[nodiscard]] NodeId pickup_of(NodeId dropoff) const { return dropoff - n; }
  [[nodiscard]] int commuter_of(NodeId i) const { return (i - 1) % n + 1; }

  [[nodiscard]] const NodeAttrs& at(NodeId i) const { return nodes[static_cast<std::size_t>(i)]; }
  [[nodiscard]] Seconds travel(NodeId i, NodeId j) const { return tau(i, j); }
  [[nodiscard]] Meters distance(NodeId i, NodeId j) const { return dist(i, j); }

  [[nodiscard]] std::vector<NodeId> pickups() const;
  [[nodiscard]] std::vector<NodeId> pickups(Direction d) const;
};

/// Desired times of one commuter: arrival at work and departure from work.
struct CommuterTimes {
  Seconds desired_arrival = 0;
  Seconds desired_departure = 0;
};

struct WindowParams {
  Seconds shift = 600;        // maximum shift to desired times
  double ride_factor = 0.5;   // ride-duration extension over the direct trip
  int capacity = 4;
  Seconds service = 30;
};

struct DerivedInstance {
  Instance instance;
  std::vector<std::string> warnings;
};

/// Builds time windows and ride limits from desired times. `tau` and `dist`
/// must already be indexed by node (size 4n+2).
DerivedInstance derive_time_windows(const std::vector<CommuterTimes>& desired,
                                    const WindowParams& params, IntMatrix tau, IntMatrix dist);

/// Recovers desired times from a derived instance.
std::vector<CommuterTimes> desired_times(const Instance& inst, Seconds shift);

struct Violation {
  std::string rule;
  std::vector<NodeId> nodes;
  std::string detail;
};

/// Empty iff every structural invariant of the instance holds.
std::vector<Violation> validate_instance(const Instance& inst);

/// Arc of the pickup/delivery graph.
struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  Seconds tau = 0;
  Meters dist = 0;
};

/// Complete directed graph over all 4n+2 nodes, no self-loops.
struct PDGraph {
  int node_count = 0;
  std::vector<Arc> arcs;
};

PDGraph build_pdgraph(const Instance& inst);

}  // namespace ctspav
