#include "ctspav/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ctspav {
namespace {

Seconds floor_div(Seconds a, Seconds b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InputError("bad number in report: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InputError("bad integer in report: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void add_overlap(std::map<Seconds, TimeBin>& bins, Seconds from, Seconds to, Seconds TimeBin::*field) {
  if (to <= from) return;
  for (Seconds b = floor_div(from, kBinSeconds) * kBinSeconds; b < to; b += kBinSeconds) {
    const Seconds lo = std::max(from, b);
    const Seconds hi = std::min(to, b + kBinSeconds);
    if (hi > lo) {
      auto& bin = bins[b];
      bin.start = b;
      bin.*field += hi - lo;
    }
  }
}

}  // namespace

double TimeBin::riders_per_vehicle() const {
  return vehicle_seconds > 0 ? static_cast<double>(rider_seconds) / static_cast<double>(vehicle_seconds) : 0.0;
}

std::vector<ActiveSpan> active_spans(const RouteRecord& route, const Instance& inst, bool depot_legs) {
  std::vector<ActiveSpan> out;
  const auto& o = route.order;
  if (o.size() < 3) return out;
  if (depot_legs) {
    const std::size_t last = o.size() - 2;
    out.push_back({route.start[1] - inst.travel(o.front(), o[1]),
                   route.start[last] + inst.at(o[last]).service + inst.travel(o[last], o.back())});
    return out;
  }
  int load = 0;
  Seconds begin = 0;
  for (std::size_t k = 1; k + 1 < o.size(); ++k) {
    if (inst.is_pickup(o[k])) {
      if (load == 0) begin = route.start[k];
      ++load;
    } else if (inst.is_dropoff(o[k])) {
      if (--load == 0) out.push_back({begin, route.start[k] + inst.at(o[k]).service});
    }
  }
  return out;
}

std::vector<RouteRecord> no_sharing_baseline(const Instance& inst, Seconds shift) {
  const auto want = desired_times(inst, shift);
  std::vector<RouteRecord> out;
  for (int c = 1; c <= inst.n; ++c) {
    const auto& w = want[static_cast<std::size_t>(c - 1)];
    const NodeId ip = c, id = inst.n + c, op = 2 * inst.n + c, od = 3 * inst.n + c;
    RouteRecord r;
    r.mini_routes = {{ip, id}, {op, od}};
    const Seconds t_id = w.desired_arrival;
    const Seconds t_ip = t_id - inst.at(ip).service - inst.travel(ip, id);
    const Seconds t_op = w.desired_departure;
    const Seconds t_od = t_op + inst.at(op).service + inst.travel(op, od);
    r.order = {inst.source(), ip, id, op, od, inst.sink()};
    r.start = {t_ip - inst.travel(inst.source(), ip), t_ip, t_id, t_op, t_od,
               t_od + inst.at(od).service + inst.travel(od, inst.sink())};
    r.distance = inst.distance(ip, id) + inst.distance(op, od);
    out.push_back(std::move(r));
  }
  return out;
}

int trips_served(const std::vector<RouteRecord>& routes, const Instance& inst) {
  std::vector<bool> seen(static_cast<std::size_t>(inst.node_count()), false);
  int trips = 0;
  for (const auto& r : routes)
    for (NodeId v : r.order)
      if (inst.is_pickup(v) && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++trips;
      }
  return trips;
}

Report analyze_plan(const std::string& config, const std::vector<RouteRecord>& routes, const Instance& inst,
                    bool depot_legs) {
  if (config.find(',') != std::string::npos || config.find('\n') != std::string::npos)
    throw InputError("configuration names may not contain commas or newlines");
  Report rep;
  rep.config = config;
  rep.vehicles = static_cast<int>(routes.size());
  rep.trips = trips_served(routes, inst);
  std::map<Seconds, TimeBin> bins;
  Seconds commute_total = 0;
  int commutes = 0;
  for (const auto& r : routes) {
    if (r.order.size() != r.start.size()) throw InputError("route schedule does not match its stops");
    for (NodeId v : r.order)
      if (v < 0 || v >= inst.node_count()) throw InputError("route visits unknown node " + std::to_string(v));
    // distance, split by whether anyone is aboard
    int load = 0;
    for (std::size_t k = 0; k + 1 < r.order.size(); ++k) {
      const NodeId v = r.order[k];
      if (inst.is_pickup(v)) ++load;
      if (inst.is_dropoff(v)) --load;
      const Meters d = inst.distance(v, r.order[k + 1]);
      if (load > 0) {
        rep.total_distance += d;
      } else if (depot_legs) {
        rep.total_distance += d;
        rep.empty_distance += d;
      }
    }
    // riders aboard from the start of pickup service to the end of drop-off service
    for (std::size_t k = 0; k < r.order.size(); ++k) {
      const NodeId p = r.order[k];
      if (!inst.is_pickup(p)) continue;
      const auto it = std::find(r.order.begin() + static_cast<std::ptrdiff_t>(k), r.order.end(), inst.dropoff_of(p));
      if (it == r.order.end()) throw InputError("pickup " + std::to_string(p) + " has no drop-off in its route");
      const Seconds t_p = r.start[k];
      const Seconds t_d = r.start[static_cast<std::size_t>(it - r.order.begin())];
      commute_total += t_d - t_p - inst.at(p).service;
      ++commutes;
      add_overlap(bins, t_p, t_d + inst.at(inst.dropoff_of(p)).service, &TimeBin::rider_seconds);
    }
    for (const auto& span : active_spans(r, inst, depot_legs)) {
      rep.active_seconds += span.arrive - span.depart;
      add_overlap(bins, span.depart, span.arrive, &TimeBin::vehicle_seconds);
    }
    // a vehicle with several spans still counts once per bin
    std::vector<Seconds> hit;
    for (const auto& span : active_spans(r, inst, depot_legs))
      for (Seconds b = floor_div(span.depart, kBinSeconds) * kBinSeconds; b < span.arrive; b += kBinSeconds)
        if (std::min(span.arrive, b + kBinSeconds) > std::max(span.depart, b)) hit.push_back(b);
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    for (Seconds b : hit) ++bins[b].vehicles_on_road;
  }
  if (!bins.empty()) {
    const Seconds lo = bins.begin()->first;
    const Seconds hi = bins.rbegin()->first;
    for (Seconds b = lo; b <= hi; b += kBinSeconds) {
      auto bin = bins[b];
      bin.start = b;
      rep.bins.push_back(bin);
    }
  }
  rep.efficiency = rep.total_distance > 0 ? static_cast<double>(rep.trips) / static_cast<double>(rep.total_distance) : 0;
  rep.avg_commute_s = commutes > 0 ? static_cast<double>(commute_total) / commutes : 0;
  return rep;
}

void relate_to_baseline(Report& r, const Report& b) {
  auto pct = [](double v, double base) { return base > 0 ? 100.0 * v / base : 0.0; };
  r.vehicles_pct = pct(r.vehicles, b.vehicles);
  r.distance_pct = pct(static_cast<double>(r.total_distance), static_cast<double>(b.total_distance));
  r.empty_pct = pct(static_cast<double>(r.empty_distance), static_cast<double>(b.total_distance));
  r.commute_pct = pct(r.avg_commute_s, b.avg_commute_s);
}

void write_summary_csv(std::ostream& os, const std::vector<Report>& reports) {
  os << "config,vehicles,total_distance_m,empty_distance_m,trips,efficiency_trips_per_m,avg_commute_s,"
        "active_vehicle_s,vehicles_pct,distance_pct,empty_pct,commute_pct\n";
  for (const auto& r : reports) {
    os << r.config << ',' << r.vehicles << ',' << r.total_distance << ',' << r.empty_distance << ',' << r.trips << ','
       << fmt(r.efficiency) << ',' << fmt(r.avg_commute_s) << ',' << r.active_seconds << ',' << fmt(r.vehicles_pct)
       << ',' << fmt(r.distance_pct) << ',' << fmt(r.empty_pct) << ',' << fmt(r.commute_pct) << '\n';
  }
}

void write_bins_csv(std::ostream& os, const std::vector<Report>& reports) {
  os << "config,bin_start_s,vehicles_on_road,vehicle_seconds,rider_seconds,riders_per_vehicle\n";
  for (const auto& r : reports)
    for (const auto& b : r.bins)
      os << r.config << ',' << b.start << ',' << b.vehicles_on_road << ',' << b.vehicle_seconds << ','
         << b.rider_seconds << ',' << fmt(b.riders_per_vehicle()) << '\n';
}

std::vector<Report> read_report_csv(std::istream& summary, std::istream& bins) {
  std::vector<Report> out;
  std::string line;
  // leading '#' lines carry provenance
  auto header = [&line](std::istream& is) {
    while (std::getline(is, line))
      if (line.empty() || line[0] != '#') return true;
    return false;
  };
  if (!header(summary)) throw InputError("empty summary CSV");
  while (std::getline(summary, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 12) throw InputError("summary row has " + std::to_string(c.size()) + " fields");
    Report r;
    r.config = c[0];
    r.vehicles = static_cast<int>(parse_int(c[1]));
    r.total_distance = parse_int(c[2]);
    r.empty_distance = parse_int(c[3]);
    r.trips = static_cast<int>(parse_int(c[4]));
    r.efficiency = parse_double(c[5]);
    r.avg_commute_s = parse_double(c[6]);
    r.active_seconds = parse_int(c[7]);
    r.vehicles_pct = parse_double(c[8]);
    r.distance_pct = parse_double(c[9]);
    r.empty_pct = parse_double(c[10]);
    r.commute_pct = parse_double(c[11]);
    out.push_back(std::move(r));
  }
  if (!header(bins)) throw InputError("empty bins CSV");
  while (std::getline(bins, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 6) throw InputError("bins row has " + std::to_string(c.size()) + " fields");
    auto it = std::find_if(out.begin(), out.end(), [&](const Report& r) { return r.config == c[0]; });
    if (it == out.end()) throw InputError("bin for unknown configuration " + c[0]);
    TimeBin b;
    b.start = parse_int(c[1]);
    b.vehicles_on_road = static_cast<int>(parse_int(c[2]));
    b.vehicle_seconds = parse_int(c[3]);
    b.rider_seconds = parse_int(c[4]);
    if (fmt(b.riders_per_vehicle()) != c[5]) throw InputError("riders per vehicle does not match its bin");
    it->bins.push_back(b);
  }
  return out;
}

}  // namespace ctspav
