#include "ctspav/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace ctspav {

using ojson = nlohmann::ordered_json;

std::string content_hash(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string instance_to_json(const Instance& inst, const InstanceMeta& meta) {
  ojson j;
  j["format"] = "ctspav-instance/1";
  j["n"] = inst.n;
  j["capacity"] = inst.capacity;
  j["service_default"] = inst.service_default;
  auto& m = j["meta"] = ojson::object();
  if (!meta.generator.empty()) m["generator"] = meta.generator;
  if (meta.seed) m["seed"] = *meta.seed;
  if (meta.delta) m["delta_secs"] = *meta.delta;
  if (meta.ride_factor) m["ride_factor"] = *meta.ride_factor;
  auto& nodes = j["nodes"] = ojson::array();
  for (NodeId i = 0; i < inst.node_count(); ++i) {
    const auto& a = inst.at(i);
    ojson node;
    node["idx"] = i;
    node["kind"] = to_string(a.kind);
    if (!inst.is_depot(i)) {
      node["a"] = a.a;
      node["b"] = a.b;
    }
    node["s"] = a.service;
    if (inst.is_pickup(i)) node["L"] = a.ride_limit;
    nodes.push_back(std::move(node));
  }
  auto matrix = [&](const IntMatrix& M) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      ojson row = ojson::array();
      for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["tau"] = matrix(inst.tau);
  j["dist"] = matrix(inst.dist);
  return j.dump(1) + "\n";
}

Instance instance_from_json(std::string_view text, InstanceMeta* meta) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance is not valid JSON: ") + e.what());
  }
  try {
    Instance inst;
    inst.n = j.at("n").get<int>();
    if (inst.n < 1) throw InputError("instance needs at least one commuter");
    inst.capacity = j.at("capacity").get<int>();
    inst.service_default = j.value("service_default", Seconds{30});
    const int N = inst.node_count();
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array() || static_cast<int>(nodes.size()) != N)
      throw InputError("expected " + std::to_string(N) + " nodes");
    inst.nodes.resize(static_cast<std::size_t>(N));
    for (const auto& node : nodes) {
      const int i = node.at("idx").get<int>();
      if (i < 0 || i >= N) throw InputError("node index out of range: " + std::to_string(i));
      auto& a = inst.nodes[static_cast<std::size_t>(i)];
      a.kind = node_kind_from_string(node.at("kind").get<std::string>());
      if (inst.is_depot(i)) {
        a.a = kTimeNegInf;
        a.b = kTimePosInf;
      } else {
        a.a = node.at("a").get<Seconds>();
        a.b = node.at("b").get<Seconds>();
      }
      a.service = node.value("s", inst.is_depot(i) ? Seconds{0} : inst.service_default);
      if (inst.is_pickup(i)) a.ride_limit = node.at("L").get<Seconds>();
    }
    auto matrix = [&](const char* key) {
      const auto& rows = j.at(key);
      if (!rows.is_array() || static_cast<int>(rows.size()) != N) throw InputError(std::string(key) + " has wrong shape");
      IntMatrix M(N, N);
      for (int r = 0; r < N; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != N)
          throw InputError(std::string(key) + " has wrong shape");
        for (int c = 0; c < N; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<std::int64_t>();
      }
      return M;
    };
    inst.tau = matrix("tau");
    inst.dist = matrix("dist");
    if (meta) {
      *meta = {};
      if (j.contains("meta")) {
        const auto& m = j["meta"];
        meta->generator = m.value("generator", std::string{});
        if (m.contains("seed")) meta->seed = m["seed"].get<std::uint64_t>();
        if (m.contains("delta_secs")) meta->delta = m["delta_secs"].get<Seconds>();
        if (m.contains("ride_factor")) meta->ride_factor = m["ride_factor"].get<double>();
      }
    }
    const auto bad = validate_instance(inst);
    if (!bad.empty()) throw InputError("invalid instance: " + bad.front().rule + " " + bad.front().detail);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed instance: ") + e.what());
  }
}

SolutionRecord make_solution_record(const SolveOutcome& out, const std::string& instance_hash,
                                    const SolveOptions& options) {
  SolutionRecord rec;
  rec.instance_hash = instance_hash;
  rec.variant = out.variant.name;
  rec.status = lp::to_string(out.search.status);
  rec.budget_secs = options.budget_secs;
  rec.threads = options.threads;
  rec.chi_bb = out.chi_bb;
  rec.chi_lb = out.chi_lb;
  rec.farley = out.farley;
  if (std::isfinite(out.search.z_mip)) rec.z_mip = out.search.z_mip;
  if (std::isfinite(out.search.z_bb)) rec.z_bb = out.search.z_bb;
  rec.nodes = out.search.nodes;
  rec.cuts_added = out.search.cuts_added;
  if (options.threads > 1) rec.wall_time_s = out.wall_time_s;
  if (out.plan) {
    rec.chi = out.plan->vehicle_count;
    rec.total_distance = out.plan->total_distance;
    rec.empty_distance = out.plan->empty_distance;
    if (out.gaps.defined) {
      rec.vehicle_count_gap = out.gaps.vehicle_count_gap;
      rec.optimality_gap_pct = 100.0 * out.gaps.optimality_gap;
    }
    for (const auto& r : out.plan->routes) {
      RouteRecord rr;
      for (int m : r.mini_routes) rr.mini_routes.push_back(out.omega[static_cast<std::size_t>(m)].visit_order);
      rr.order = r.schedule.order;
      rr.start = r.schedule.start;
      rr.distance = r.distance;
      rr.empty_distance = r.empty_distance;
      rec.routes.push_back(std::move(rr));
    }
  }
  return rec;
}

std::string solution_to_json(const SolutionRecord& rec) {
  ojson j;
  j["format"] = "ctspav-solution/1";
  j["instance_hash"] = rec.instance_hash;
  j["variant"] = rec.variant;
  j["status"] = rec.status;
  j["budget_secs"] = rec.budget_secs;
  j["threads"] = rec.threads;
  j["chi"] = rec.chi ? ojson(*rec.chi) : ojson(nullptr);
  j["chi_bb"] = rec.chi_bb;
  j["chi_lb"] = rec.chi_lb;
  j["farley"] = rec.farley ? ojson(*rec.farley) : ojson(nullptr);
  j["total_distance_m"] = rec.total_distance;
  j["empty_distance_m"] = rec.empty_distance;
  j["z_mip"] = rec.z_mip ? ojson(*rec.z_mip) : ojson(nullptr);
  j["z_bb"] = rec.z_bb ? ojson(*rec.z_bb) : ojson(nullptr);
  auto& g = j["gaps"] = ojson::object();
  g["vehicle_count"] = rec.vehicle_count_gap ? ojson(*rec.vehicle_count_gap) : ojson(nullptr);
  g["optimality_pct"] = rec.optimality_gap_pct ? ojson(*rec.optimality_gap_pct) : ojson(nullptr);
  j["nodes"] = rec.nodes;
  j["cuts_added"] = rec.cuts_added;
  j["wall_time_s"] = rec.wall_time_s ? ojson(*rec.wall_time_s) : ojson(nullptr);
  auto& routes = j["routes"] = ojson::array();
  for (const auto& r : rec.routes) {
    ojson jr;
    jr["mini_routes"] = r.mini_routes;
    auto& sched = jr["schedule"] = ojson::object();
    for (std::size_t k = 0; k < r.order.size(); ++k) sched[std::to_string(r.order[k])] = r.start[k];
    jr["distance_m"] = r.distance;
    jr["empty_distance_m"] = r.empty_distance;
    routes.push_back(std::move(jr));
  }
  return j.dump(1) + "\n";
}

SolutionRecord solution_from_json(std::string_view text) {
  try {
    const auto j = ojson::parse(text);
    SolutionRecord rec;
    rec.instance_hash = j.at("instance_hash").get<std::string>();
    rec.variant = j.at("variant").get<std::string>();
    rec.status = j.at("status").get<std::string>();
    rec.budget_secs = j.at("budget_secs").get<double>();
    rec.threads = j.at("threads").get<int>();
    if (!j.at("chi").is_null()) rec.chi = j["chi"].get<int>();
    rec.chi_bb = j.at("chi_bb").get<double>();
    rec.chi_lb = j.at("chi_lb").get<double>();
    if (!j.at("farley").is_null()) rec.farley = j["farley"].get<double>();
    rec.total_distance = j.at("total_distance_m").get<Meters>();
    rec.empty_distance = j.at("empty_distance_m").get<Meters>();
    if (!j.at("z_mip").is_null()) rec.z_mip = j["z_mip"].get<double>();
    if (!j.at("z_bb").is_null()) rec.z_bb = j["z_bb"].get<double>();
    const auto& g = j.at("gaps");
    if (!g.at("vehicle_count").is_null()) rec.vehicle_count_gap = g["vehicle_count"].get<long long>();
    if (!g.at("optimality_pct").is_null()) rec.optimality_gap_pct = g["optimality_pct"].get<double>();
    rec.nodes = j.at("nodes").get<long>();
    rec.cuts_added = j.at("cuts_added").get<long>();
    if (!j.at("wall_time_s").is_null()) rec.wall_time_s = j["wall_time_s"].get<double>();
    for (const auto& jr : j.at("routes")) {
      RouteRecord r;
      r.mini_routes = jr.at("mini_routes").get<std::vector<std::vector<NodeId>>>();
      for (const auto& [key, val] : jr.at("schedule").items()) {
        r.order.push_back(std::stoi(key));
        r.start.push_back(val.get<Seconds>());
      }
      r.distance = jr.at("distance_m").get<Meters>();
      r.empty_distance = jr.at("empty_distance_m").get<Meters>();
      rec.routes.push_back(std::move(r));
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed solution: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw InputError("malformed solution: bad node key in schedule");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write " + path);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw InputError("write failed: " + path);
}

}  // namespace ctspav
