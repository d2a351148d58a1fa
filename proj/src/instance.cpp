#include "ctspav/instance.hpp"

#include <cmath>
#include <sstream>

namespace ctspav {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::source: return "source";
    case NodeKind::inbound_pickup: return "inbound-pickup";
    case NodeKind::inbound_dropoff: return "inbound-dropoff";
    case NodeKind::outbound_pickup: return "outbound-pickup";
    case NodeKind::outbound_dropoff: return "outbound-dropoff";
    case NodeKind::sink: return "sink";
  }
  return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
  for (auto k : {NodeKind::source, NodeKind::inbound_pickup, NodeKind::inbound_dropoff,
                 NodeKind::outbound_pickup, NodeKind::outbound_dropoff, NodeKind::sink}) {
    if (s == to_string(k)) return k;
  }
  throw InputError("unknown node kind '" + s + "'");
}

const char* to_string(Direction d) { return d == Direction::inbound ? "inbound" : "outbound"; }

std::vector<NodeId> Instance::pickups() const {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(2 * n));
  for (NodeId i = 1; i <= n; ++i) out.push_back(i);
  for (NodeId i = 2 * n + 1; i <= 3 * n; ++i) out.push_back(i);
  return out;
}

std::vector<NodeId> Instance::pickups(Direction d) const {
  std::vector<NodeId> out;
  const NodeId first = d == Direction::inbound ? 1 : 2 * n + 1;
  for (NodeId i = first; i < first + n; ++i) out.push_back(i);
  return out;
}

namespace {

NodeKind kind_for_index(int n, NodeId i) {
  if (i == 0) return NodeKind::source;
  if (i == 4 * n + 1) return NodeKind::sink;
  switch ((i - 1) / n) {
    case 0: return NodeKind::inbound_pickup;
    case 1: return NodeKind::inbound_dropoff;
    case 2: return NodeKind::outbound_pickup;
    default: return NodeKind::outbound_dropoff;
  }
}

Seconds ride_limit_for(Seconds direct, double ride_factor) {
  // floor of (1+R)*tau, guarded against representation error in R
  return static_cast<Seconds>(std::floor((1.0 + ride_factor) * static_cast<double>(direct) + 1e-9));
}

}  // namespace

DerivedInstance derive_time_windows(const std::vector<CommuterTimes>& desired,
                                    const WindowParams& params, IntMatrix tau, IntMatrix dist) {
  const int n = static_cast<int>(desired.size());
  if (n < 1) throw InputError("instance needs at least one commuter");
  if (params.shift < 0) throw InputError("time shift must be nonnegative");
  if (params.ride_factor < 0) throw InputError("ride factor must be nonnegative");
  if (params.capacity < 1) throw InputError("capacity must be at least 1");
  if (params.service < 0) throw InputError("service time must be nonnegative");
  const int nodes = 4 * n + 2;
  if (tau.rows() != nodes || tau.cols() != nodes || dist.rows() != nodes || dist.cols() != nodes) {
    throw InputError("travel matrices must be (4n+2) x (4n+2)");
  }

  DerivedInstance out;
  Instance& inst = out.instance;
  inst.n = n;
  inst.capacity = params.capacity;
  inst.service_default = params.service;
  inst.tau = std::move(tau);
  inst.dist = std::move(dist);
  inst.nodes.resize(static_cast<std::size_t>(nodes));

  for (NodeId i = 0; i < nodes; ++i) {
    auto& node = inst.nodes[static_cast<std::size_t>(i)];
    node.kind = kind_for_index(n, i);
    if (inst.is_depot(i)) {
      node.a = kTimeNegInf;
      node.b = kTimePosInf;
      node.service = 0;
    } else {
      node.service = params.service;
    }
  }

  const Seconds delta = params.shift;
  for (int c = 1; c <= n; ++c) {
    const auto& want = desired[static_cast<std::size_t>(c - 1)];
    if (want.desired_arrival < 0 || want.desired_arrival >= kDaySeconds ||
        want.desired_departure < 0 || want.desired_departure >= kDaySeconds) {
      throw InputError("desired time of commuter " + std::to_string(c) + " outside the day");
    }
    const NodeId in_p = c, in_d = n + c, out_p = 2 * n + c, out_d = 3 * n + c;
    auto& ip = inst.nodes[static_cast<std::size_t>(in_p)];
    auto& id = inst.nodes[static_cast<std::size_t>(in_d)];
    auto& op = inst.nodes[static_cast<std::size_t>(out_p)];
    auto& od = inst.nodes[static_cast<std::size_t>(out_d)];

    ip.ride_limit = ride_limit_for(inst.tau(in_p, in_d), params.ride_factor);
    op.ride_limit = ride_limit_for(inst.tau(out_p, out_d), params.ride_factor);

    id.b = want.desired_arrival + delta;
    ip.b = id.b - ip.service - ip.ride_limit;
    ip.a = ip.b - 2 * delta;
    if (ip.a < 0) {
      out.warnings.push_back("commuter " + std::to_string(c) +
                             ": inbound window start clamped to 0 (was " + std::to_string(ip.a) + ")");
      ip.a = 0;
    }
    id.a = ip.a + ip.service + inst.tau(in_p, in_d);

    op.a = want.desired_departure - delta;
    op.b = want.desired_departure + delta;
    if (op.a < 0) {
      out.warnings.push_back("commuter " + std::to_string(c) +
                             ": outbound window start clamped to 0 (was " + std::to_string(op.a) + ")");
      op.a = 0;
    }
    od.b = op.b + op.service + op.ride_limit;
    od.a = op.a + op.service + inst.tau(out_p, out_d);
  }
  return out;
}

std::vector<CommuterTimes> desired_times(const Instance& inst, Seconds shift) {
  std::vector<CommuterTimes> out(static_cast<std::size_t>(inst.n));
  for (int c = 1; c <= inst.n; ++c) {
    out[static_cast<std::size_t>(c - 1)] = {inst.at(inst.n + c).b - shift, inst.at(2 * inst.n + c).b - shift};
  }
  return out;
}

std::vector<Violation> validate_instance(const Instance& inst) {
  std::vector<Violation> found;
  auto report = [&](std::string rule, std::vector<NodeId> nodes, std::string detail) {
    found.push_back({std::move(rule), std::move(nodes), std::move(detail)});
  };
  if (inst.n < 1) {
    report("size", {}, "n must be at least 1");
    return found;
  }
  const int N = inst.node_count();
  if (static_cast<int>(inst.nodes.size()) != N) {
    report("size", {}, "expected " + std::to_string(N) + " nodes");
    return found;
  }
  if (inst.tau.rows() != N || inst.tau.cols() != N || inst.dist.rows() != N || inst.dist.cols() != N) {
    report("size", {}, "matrix dimensions differ from node count");
    return found;
  }
  if (inst.capacity < 1) report("capacity", {}, "capacity must be at least 1");

  for (NodeId i = 0; i < N; ++i) {
    const auto& node = inst.at(i);
    if (node.kind != kind_for_index(inst.n, i)) {
      report("kind", {i}, std::string("expected ") + to_string(kind_for_index(inst.n, i)));
    }
    if (inst.is_depot(i)) continue;
    if (node.a > node.b) {
      report("window", {i}, "a=" + std::to_string(node.a) + " > b=" + std::to_string(node.b));
    }
    if (node.service < 0) report("service", {i}, "negative service time");
    if (inst.is_pickup(i) && node.ride_limit < 0) report("ride-limit", {i}, "negative ride limit");
  }
  for (NodeId i = 0; i < N; ++i) {
    for (NodeId j = 0; j < N; ++j) {
      if (inst.tau(i, j) < 0) report("nonnegative", {i, j}, "negative travel time");
      if (inst.dist(i, j) < 0) report("nonnegative", {i, j}, "negative distance");
    }
  }
  for (NodeId i = 0; i < N; ++i) {
    for (NodeId k = 0; k < N; ++k) {
      if (i == k) continue;
      for (NodeId j = 0; j < N; ++j) {
        if (j == i || j == k) continue;
        if (inst.tau(i, j) + inst.tau(j, k) < inst.tau(i, k)) {
          std::ostringstream msg;
          msg << "tau(" << i << "," << k << ")=" << inst.tau(i, k) << " > tau(" << i << "," << j
              << ")+tau(" << j << "," << k << ")=" << inst.tau(i, j) + inst.tau(j, k);
          report("triangle", {i, j, k}, msg.str());
          break;
        }
      }
    }
  }
  return found;
}

PDGraph build_pdgraph(const Instance& inst) {
  PDGraph g;
  g.node_count = inst.node_count();
  g.arcs.reserve(static_cast<std::size_t>(g.node_count) * static_cast<std::size_t>(g.node_count - 1));
  for (NodeId i = 0; i < g.node_count; ++i) {
    for (NodeId j = 0; j < g.node_count; ++j) {
      if (i != j) g.arcs.push_back({i, j, inst.tau(i, j), inst.dist(i, j)});
    }
  }
  return g;
}

}  // namespace ctspav
