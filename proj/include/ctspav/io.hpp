#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctspav/instance.hpp"
#include "ctspav/solve.hpp"

namespace ctspav {

/// Git blob id (SHA-1 over "blob <size>\0" + bytes), lowercase hex.
std::string content_hash(std::string_view bytes);

/// Free-form provenance carried alongside an instance.
struct InstanceMeta {
  std::optional<std::uint64_t> seed;
  std::optional<Seconds> delta;
  std::optional<double> ride_factor;
  std::string generator;
};

/// Depot nodes carry no time window in the file.
std::string instance_to_json(const Instance& inst, const InstanceMeta& meta = {});
Instance instance_from_json(std::string_view text, InstanceMeta* meta = nullptr);

struct RouteRecord {
  std::vector<std::vector<NodeId>> mini_routes;  // stop lists
  std::vector<NodeId> order;                    // source, stops, sink
  std::vector<Seconds> start;
  Meters distance = 0;
  Meters empty_distance = 0;
};

/// What a solution file holds.
struct SolutionRecord {
  std::string instance_hash;
  std::string variant;
  std::string status;
  double budget_secs = 0;
  int threads = 1;
  std::optional<int> chi;
  double chi_bb = 0;
  double chi_lb = 0;
  std::optional<double> farley;
  std::optional<double> z_mip;
  std::optional<double> z_bb;
  Meters total_distance = 0;
  Meters empty_distance = 0;
  std::optional<long long> vehicle_count_gap;
  std::optional<double> optimality_gap_pct;
  long nodes = 0;
  long cuts_added = 0;
  std::optional<double> wall_time_s;  // omitted in single-threaded runs so files are reproducible
  std::vector<RouteRecord> routes;
};

SolutionRecord make_solution_record(const SolveOutcome& outcome, const std::string& instance_hash,
                                    const SolveOptions& options);
std::string solution_to_json(const SolutionRecord& rec);
SolutionRecord solution_from_json(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace ctspav
