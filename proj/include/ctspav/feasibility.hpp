#pragma once

#include <array>
#include <span>
#include <variant>
#include <vector>

#include "ctspav/instance.hpp"

namespace ctspav {

inline constexpr int kMaxCapacity = 6;

enum class Infeasibility { capacity, window, ride_limit, pairing, precedence };

const char* to_string(Infeasibility why);

/// Either a value or the constraint family that ruled it out.
template <class T>
class Checked {
 public:
  Checked(T value) : state_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Checked(Infeasibility why) : state_(why) {}      // NOLINT(google-explicit-constructor)

  explicit operator bool() const { return std::holds_alternative<T>(state_); }
  [[nodiscard]] bool feasible() const { return static_cast<bool>(*this); }
  [[nodiscard]] const T& value() const { return std::get<T>(state_); }
  [[nodiscard]] T& value() { return std::get<T>(state_); }
  const T* operator->() const { return &value(); }
  const T& operator*() const { return value(); }
  [[nodiscard]] Infeasibility reason() const { return std::get<Infeasibility>(state_); }

 private:
  std::variant<T, Infeasibility> state_;
};

struct OnboardRider {
  NodeId pickup = 0;
  Seconds latest_pickup = kTimePosInf;  // latest pickup start consistent with the prefix
  Seconds elapsed = 0;                  // pickup start to current start, no waiting
};

/// Resource state of a partial route ending at `node`.
///
/// Every start time in [earliest, latest] at `node` extends to a schedule of
/// the prefix satisfying windows, no-wait drop-offs and the ride limits of
/// riders already delivered. For rider c still onboard, the latest feasible
/// pickup start given current start t is min(latest_pickup, t - elapsed).
struct FeasLabel {
  NodeId node = -1;
  Seconds earliest = kTimeNegInf;
  Seconds latest = kTimePosInf;
  int load = 0;
  std::array<OnboardRider, kMaxCapacity> onboard{};  // first `load` entries, sorted by pickup

  [[nodiscard]] std::span<const OnboardRider> riders() const {
    return {onboard.data(), static_cast<std::size_t>(load)};
  }
  [[nodiscard]] bool carries(NodeId pickup) const;
  /// Latest drop-off start for an onboard rider implied by its ride limit and drop-off window.
  [[nodiscard]] Seconds deadline(const Instance& inst, NodeId pickup) const;
};

/// Label standing at the source depot (no window, free start).
FeasLabel depot_label(const Instance& inst);
/// Label after serving `pickup` as the first stop of a route.
FeasLabel start_label(NodeId pickup, const Instance& inst);

/// Extends a label by one stop. Exact: the result is feasible iff the
/// extended prefix admits a schedule.
Checked<FeasLabel> extend_label(const FeasLabel& label, NodeId next, const Instance& inst);

struct Schedule {
  std::vector<NodeId> order;
  std::vector<Seconds> start;  // start[k] is the service start at order[k]
  Seconds total_wait = 0;

  [[nodiscard]] Seconds at(NodeId node) const;
};

/// Schedules an arbitrary stop sequence (it may start at the source depot or
/// at a pickup). The witness finishes as early as possible and picks riders
/// up as late as that allows.
Checked<Schedule> schedule_path(std::span<const NodeId> path, const Instance& inst);

/// Throws RouteShapeError unless `route` lists |C_r| <= K same-direction
/// pickups followed by exactly their drop-offs.
void require_valid_mini_route(std::span<const NodeId> route, const Instance& inst);

Checked<Schedule> check_mini_route(std::span<const NodeId> route, const Instance& inst);

/// Checks a depot-to-depot chain of mini routes. The returned schedule covers
/// source, every stop, and sink.
Checked<Schedule> check_av_route(std::span<const std::vector<NodeId>> mini_routes, const Instance& inst);

}  // namespace ctspav
