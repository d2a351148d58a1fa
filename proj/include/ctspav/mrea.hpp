#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctspav/feasibility.hpp"

namespace ctspav {

/// A feasible same-direction route: all pickups, then all drop-offs.
struct MiniRoute {
  Direction direction = Direction::inbound;
  std::vector<NodeId> visit_order;
  std::vector<NodeId> riders;  // pickup nodes, ascending
  Meters length = 0;           // internal arcs only
  Schedule schedule;

  [[nodiscard]] NodeId first() const { return visit_order.front(); }
  [[nodiscard]] NodeId last() const { return visit_order.back(); }
  [[nodiscard]] std::vector<std::pair<NodeId, NodeId>> arcs() const;
};

/// Canonical order: rider set, then visit order.
bool canonical_less(const MiniRoute& a, const MiniRoute& b);

struct MreaStats {
  std::vector<long long> combinations;  // index k: number of k-combinations considered
  std::vector<long long> searched;      // index k: combinations whose (k-1)-subsets are all feasible
  std::vector<long long> routes;        // index k: feasible routes with k riders
};

/// Builds a MiniRoute from a visit order (shape-checked). Returns nullopt if infeasible.
std::optional<MiniRoute> make_mini_route(std::vector<NodeId> visit_order, const Instance& inst);

/// All feasible mini routes over subsets of at most `capacity` of the given
/// same-direction pickups, in canonical order.
std::vector<MiniRoute> enumerate_mini_routes(std::span<const NodeId> pickups, int capacity,
                                             const Instance& inst, int threads = 1,
                                             MreaStats* stats = nullptr);

/// Both directions, canonical order. Uses inst.capacity.
std::vector<MiniRoute> enumerate_omega(const Instance& inst, int threads = 1);

struct OmegaParts {
  std::vector<MiniRoute> inbound;
  std::vector<MiniRoute> outbound;
};

OmegaParts partition_omega(std::span<const MiniRoute> omega);

/// Cache file keyed by an instance content hash.
void save_omega(const std::filesystem::path& file, const std::string& instance_hash,
                std::span<const MiniRoute> omega);
/// Returns nullopt if the file is missing or was written for another instance.
std::optional<std::vector<MiniRoute>> load_omega(const std::filesystem::path& file,
                                                 const std::string& instance_hash,
                                                 const Instance& inst);

}  // namespace ctspav
