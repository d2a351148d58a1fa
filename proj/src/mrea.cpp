#include "ctspav/mrea.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ctspav/parallel.hpp"

namespace ctspav {

std::vector<std::pair<NodeId, NodeId>> MiniRoute::arcs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t k = 0; k + 1 < visit_order.size(); ++k) out.emplace_back(visit_order[k], visit_order[k + 1]);
  return out;
}

bool canonical_less(const MiniRoute& a, const MiniRoute& b) {
  if (a.riders != b.riders) return a.riders < b.riders;
  return a.visit_order < b.visit_order;
}

namespace {

MiniRoute finish_route(std::vector<NodeId> order, Schedule schedule, const Instance& inst) {
  MiniRoute r;
  r.direction = inst.direction(order.front());
  const std::size_t k = order.size() / 2;
  r.riders.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(r.riders.begin(), r.riders.end());
  for (std::size_t i = 0; i + 1 < order.size(); ++i) r.length += inst.distance(order[i], order[i + 1]);
  r.visit_order = std::move(order);
  r.schedule = std::move(schedule);
  return r;
}

// Depth-first search over pickup orders, then drop-off orders, pruning on
// the first infeasible extension.
void search(const Instance& inst, std::span<const NodeId> combo, const FeasLabel& label,
            std::vector<NodeId>& order, std::vector<char>& used, std::vector<MiniRoute>& out) {
  const std::size_t k = combo.size();
  if (order.size() == 2 * k) {
    auto sched = schedule_path(order, inst);
    if (sched) out.push_back(finish_route(order, std::move(sched.value()), inst));
    return;
  }
  const bool picking = order.size() < k;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t slot = picking ? i : k + i;
    if (used[slot]) continue;
    const NodeId next = picking ? combo[i] : inst.dropoff_of(combo[i]);
    auto ext = extend_label(label, next, inst);
    if (!ext) continue;
    used[slot] = 1;
    order.push_back(next);
    search(inst, combo, ext.value(), order, used, out);
    order.pop_back();
    used[slot] = 0;
  }
}

std::vector<MiniRoute> routes_for(std::span<const NodeId> combo, const Instance& inst) {
  std::vector<MiniRoute> out;
  std::vector<NodeId> order;
  std::vector<char> used(2 * combo.size(), 0);
  for (std::size_t i = 0; i < combo.size(); ++i) {
    used[i] = 1;
    order.push_back(combo[i]);
    search(inst, combo, start_label(combo[i], inst), order, used, out);
    order.pop_back();
    used[i] = 0;
  }
  return out;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<MiniRoute> make_mini_route(std::vector<NodeId> visit_order, const Instance& inst) {
  auto sched = check_mini_route(visit_order, inst);
  if (!sched) return std::nullopt;
  return finish_route(std::move(visit_order), std::move(sched.value()), inst);
}

std::vector<MiniRoute> enumerate_mini_routes(std::span<const NodeId> pickups, int capacity,
                                             const Instance& inst, int threads, MreaStats* stats) {
  if (capacity < 1) throw InputError("capacity must be at least 1");
  if (capacity > kMaxCapacity) throw InputError("capacity above supported maximum of 6");
  std::vector<NodeId> trips(pickups.begin(), pickups.end());
  std::sort(trips.begin(), trips.end());
  for (NodeId p : trips) {
    if (!inst.is_pickup(p)) throw InputError("enumeration input must be pickup nodes");
    if (inst.direction(p) != inst.direction(trips.front())) throw InputError("enumeration input mixes directions");
  }
  const std::size_t n = trips.size();
  const std::size_t K = std::min<std::size_t>(static_cast<std::size_t>(capacity), n);

  MreaStats local;
  local.combinations.assign(K + 1, 0);
  local.searched.assign(K + 1, 0);
  local.routes.assign(K + 1, 0);

  std::vector<MiniRoute> omega;
  std::set<std::vector<NodeId>> feasible_prev;
  for (std::size_t k = 1; k <= K; ++k) {
    std::vector<std::vector<NodeId>> combos;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    do {
      ++local.combinations[k];
      std::vector<NodeId> combo(k);
      for (std::size_t i = 0; i < k; ++i) combo[i] = trips[idx[i]];
      // a feasible route stays feasible when one rider is dropped from it
      bool viable = true;
      if (k > 1) {
        std::vector<NodeId> sub(k - 1);
        for (std::size_t skip = 0; skip < k && viable; ++skip) {
          for (std::size_t i = 0, j = 0; i < k; ++i) {
            if (i != skip) sub[j++] = combo[i];
          }
          viable = feasible_prev.contains(sub);
        }
      }
      if (viable) combos.push_back(std::move(combo));
    } while (next_combination(idx, n));
    local.searched[k] = static_cast<long long>(combos.size());

    std::vector<std::vector<MiniRoute>> found(combos.size());
    parallel_for(combos.size(), threads, [&](std::size_t c) { found[c] = routes_for(combos[c], inst); });

    std::set<std::vector<NodeId>> feasible_now;
    for (std::size_t c = 0; c < combos.size(); ++c) {
      if (found[c].empty()) continue;
      feasible_now.insert(combos[c]);
      local.routes[k] += static_cast<long long>(found[c].size());
      for (auto& r : found[c]) omega.push_back(std::move(r));
    }
    feasible_prev = std::move(feasible_now);
  }
  std::sort(omega.begin(), omega.end(), canonical_less);
  if (stats) *stats = std::move(local);
  return omega;
}

std::vector<MiniRoute> enumerate_omega(const Instance& inst, int threads) {
  auto in = enumerate_mini_routes(inst.pickups(Direction::inbound), inst.capacity, inst, threads);
  auto out = enumerate_mini_routes(inst.pickups(Direction::outbound), inst.capacity, inst, threads);
  in.insert(in.end(), std::make_move_iterator(out.begin()), std::make_move_iterator(out.end()));
  std::sort(in.begin(), in.end(), canonical_less);
  return in;
}

OmegaParts partition_omega(std::span<const MiniRoute> omega) {
  OmegaParts parts;
  for (const auto& r : omega) {
    (r.direction == Direction::inbound ? parts.inbound : parts.outbound).push_back(r);
  }
  return parts;
}

void save_omega(const std::filesystem::path& file, const std::string& instance_hash,
                std::span<const MiniRoute> omega) {
  nlohmann::json j;
  j["instance_hash"] = instance_hash;
  auto& routes = j["routes"] = nlohmann::json::array();
  for (const auto& r : omega) routes.push_back(r.visit_order);
  std::ofstream os(file);
  if (!os) throw InputError("cannot write " + file.string());
  os << j.dump() << '\n';
}

std::optional<std::vector<MiniRoute>> load_omega(const std::filesystem::path& file,
                                                 const std::string& instance_hash,
                                                 const Instance& inst) {
  std::ifstream is(file);
  if (!is) return std::nullopt;
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (j.value("instance_hash", std::string{}) != instance_hash) return std::nullopt;
  std::vector<MiniRoute> omega;
  for (const auto& order : j.at("routes")) {
    auto r = make_mini_route(order.get<std::vector<NodeId>>(), inst);
    if (!r) return std::nullopt;
    omega.push_back(std::move(*r));
  }
  std::sort(omega.begin(), omega.end(), canonical_less);
  return omega;
}

}  // namespace ctspav
