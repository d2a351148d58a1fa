#include "ctspav/feasibility.hpp"

#include <algorithm>
#include <set>

namespace ctspav {

const char* to_string(Infeasibility why) {
  switch (why) {
    case Infeasibility::capacity: return "capacity";
    case Infeasibility::window: return "window";
    case Infeasibility::ride_limit: return "ride_limit";
    case Infeasibility::pairing: return "pairing";
    case Infeasibility::precedence: return "precedence";
  }
  return "?";
}

namespace {

Seconds sat_add(Seconds t, Seconds d) {
  if (t >= kTimePosInf) return kTimePosInf;
  if (t <= kTimeNegInf) return kTimeNegInf;
  return std::clamp(t + d, kTimeNegInf, kTimePosInf);
}

}  // namespace

bool FeasLabel::carries(NodeId pickup) const {
  for (const auto& r : riders()) {
    if (r.pickup == pickup) return true;
  }
  return false;
}

Seconds FeasLabel::deadline(const Instance& inst, NodeId pickup) const {
  for (const auto& r : riders()) {
    if (r.pickup != pickup) continue;
    const auto& p = inst.at(pickup);
    return std::min(inst.at(inst.dropoff_of(pickup)).b, sat_add(r.latest_pickup, p.service + p.ride_limit));
  }
  return kTimeNegInf;
}

FeasLabel depot_label(const Instance& inst) {
  FeasLabel l;
  l.node = inst.source();
  return l;
}

FeasLabel start_label(NodeId pickup, const Instance& inst) {
  FeasLabel l;
  l.node = pickup;
  l.earliest = inst.at(pickup).a;
  l.latest = inst.at(pickup).b;
  l.load = 1;
  l.onboard[0] = {pickup, kTimePosInf, 0};
  return l;
}

Checked<FeasLabel> extend_label(const FeasLabel& label, NodeId next, const Instance& inst) {
  const NodeId v = label.node;
  if (v == inst.sink() || next == inst.source() || next == v) return Infeasibility::pairing;
  const Seconds step = inst.at(v).service + inst.travel(v, next);
  FeasLabel out = label;
  out.node = next;

  if (next == inst.sink()) {
    if (label.load != 0) return Infeasibility::pairing;
    out.earliest = sat_add(label.earliest, step);
    out.latest = sat_add(label.latest, step);
    return out;
  }

  const auto& w = inst.at(next);
  if (inst.is_pickup(next)) {
    if (label.carries(next)) return Infeasibility::pairing;
    if (label.load >= inst.capacity) return Infeasibility::capacity;
    if (label.load >= kMaxCapacity) throw InputError("capacity above supported maximum");
    out.earliest = std::max(w.a, sat_add(label.earliest, step));
    if (out.earliest > w.b) return Infeasibility::window;
    out.latest = w.b;
    for (int k = 0; k < out.load; ++k) {
      auto& r = out.onboard[static_cast<std::size_t>(k)];
      r.latest_pickup = std::min(r.latest_pickup, sat_add(label.latest, -r.elapsed));
      r.elapsed += step;
    }
    // keep riders sorted by pickup id so equal states compare equal
    int pos = out.load;
    while (pos > 0 && out.onboard[static_cast<std::size_t>(pos - 1)].pickup > next) {
      out.onboard[static_cast<std::size_t>(pos)] = out.onboard[static_cast<std::size_t>(pos - 1)];
      --pos;
    }
    out.onboard[static_cast<std::size_t>(pos)] = {next, kTimePosInf, 0};
    ++out.load;
    return out;
  }

  // drop-off: no waiting on the way in
  const NodeId pickup = inst.pickup_of(next);
  int idx = -1;
  for (int k = 0; k < label.load; ++k) {
    if (label.onboard[static_cast<std::size_t>(k)].pickup == pickup) idx = k;
  }
  if (idx < 0) return Infeasibility::pairing;
  out.earliest = std::max(w.a, sat_add(label.earliest, step));
  out.latest = std::min(sat_add(label.latest, step), w.b);
  if (out.earliest > out.latest) return Infeasibility::window;
  for (int k = 0; k < out.load; ++k) out.onboard[static_cast<std::size_t>(k)].elapsed += step;
  const auto& rider = out.onboard[static_cast<std::size_t>(idx)];
  const auto& p = inst.at(pickup);
  if (rider.elapsed - p.service > p.ride_limit) return Infeasibility::ride_limit;
  out.latest = std::min(out.latest, sat_add(rider.latest_pickup, p.service + p.ride_limit));
  if (out.earliest > out.latest) return Infeasibility::ride_limit;
  for (int k = idx; k + 1 < out.load; ++k) {
    out.onboard[static_cast<std::size_t>(k)] = out.onboard[static_cast<std::size_t>(k + 1)];
  }
  --out.load;
  return out;
}

Seconds Schedule::at(NodeId node) const {
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] == node) return start[k];
  }
  throw std::out_of_range("node not in schedule");
}

Checked<Schedule> schedule_path(std::span<const NodeId> path, const Instance& inst) {
  if (path.empty()) throw RouteShapeError("empty path");
  std::vector<FeasLabel> labels;
  labels.reserve(path.size());
  if (path[0] == inst.source()) {
    labels.push_back(depot_label(inst));
  } else if (inst.is_pickup(path[0])) {
    labels.push_back(start_label(path[0], inst));
  } else {
    return Infeasibility::pairing;
  }
  for (std::size_t k = 1; k < path.size(); ++k) {
    auto next = extend_label(labels.back(), path[k], inst);
    if (!next) return next.reason();
    labels.push_back(next.value());
  }

  Schedule s;
  s.order.assign(path.begin(), path.end());
  s.start.resize(path.size());
  const std::size_t last = path.size() - 1;
  s.start[last] = labels[last].earliest;
  for (std::size_t k = last; k-- > 0;) {
    const Seconds step = inst.at(path[k]).service + inst.travel(path[k], path[k + 1]);
    const Seconds latest_here = s.start[k + 1] - step;
    if (inst.is_pickup(path[k + 1])) {
      s.start[k] = std::min(labels[k].latest, latest_here);
      s.total_wait += latest_here - s.start[k];
    } else {
      s.start[k] = latest_here;
    }
  }
  return s;
}

void require_valid_mini_route(std::span<const NodeId> route, const Instance& inst) {
  const std::size_t len = route.size();
  if (len < 2 || len % 2 != 0) throw RouteShapeError("mini route must have an even, nonzero length");
  const std::size_t k = len / 2;
  if (static_cast<int>(k) > inst.capacity) throw RouteShapeError("mini route serves more riders than capacity");
  std::set<NodeId> picked;
  for (std::size_t i = 0; i < k; ++i) {
    const NodeId p = route[i];
    if (p < 0 || p >= inst.node_count() || !inst.is_pickup(p)) {
      throw RouteShapeError("mini route must start with pickups");
    }
    if (inst.direction(p) != inst.direction(route[0])) throw RouteShapeError("mini route mixes directions");
    if (!picked.insert(p).second) throw RouteShapeError("pickup repeated in mini route");
  }
  std::set<NodeId> dropped;
  for (std::size_t i = k; i < len; ++i) {
    const NodeId d = route[i];
    if (d < 0 || d >= inst.node_count() || !inst.is_dropoff(d)) {
      throw RouteShapeError("mini route must end with drop-offs");
    }
    if (!picked.contains(inst.pickup_of(d)) || !dropped.insert(d).second) {
      throw RouteShapeError("drop-offs do not match pickups");
    }
  }
}

Checked<Schedule> check_mini_route(std::span<const NodeId> route, const Instance& inst) {
  require_valid_mini_route(route, inst);
  return schedule_path(route, inst);
}

Checked<Schedule> check_av_route(std::span<const std::vector<NodeId>> mini_routes, const Instance& inst) {
  std::set<NodeId> seen;
  std::vector<int> route_of(static_cast<std::size_t>(inst.node_count()), -1);
  std::vector<NodeId> path{inst.source()};
  for (std::size_t r = 0; r < mini_routes.size(); ++r) {
    const auto& mr = mini_routes[r];
    require_valid_mini_route(mr, inst);
    for (std::size_t i = 0; i < mr.size() / 2; ++i) {
      if (!seen.insert(mr[i]).second) throw RouteShapeError("mini routes of an AV route overlap");
      route_of[static_cast<std::size_t>(mr[i])] = static_cast<int>(r);
    }
    path.insert(path.end(), mr.begin(), mr.end());
  }
  for (int c = 1; c <= inst.n; ++c) {
    const int in = route_of[static_cast<std::size_t>(c)];
    const int out = route_of[static_cast<std::size_t>(2 * inst.n + c)];
    if (in >= 0 && out >= 0 && in > out) return Infeasibility::precedence;
  }
  path.push_back(inst.sink());
  return schedule_path(path, inst);
}

}  // namespace ctspav
