#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ctspav {

// Times are integer seconds of day, distances integer meters.
using Seconds = std::int64_t;
using Meters = std::int64_t;
using NodeId = int;

inline constexpr Seconds kTimeNegInf = std::numeric_limits<Seconds>::min() / 4;
inline constexpr Seconds kTimePosInf = std::numeric_limits<Seconds>::max() / 4;
inline constexpr Seconds kDaySeconds = 86400;

enum class Direction { inbound, outbound };

enum class NodeKind {
  source,
  inbound_pickup,
  inbound_dropoff,
  outbound_pickup,
  outbound_dropoff,
  sink,
};

const char* to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& s);
const char* to_string(Direction d);

/// Raised for malformed input (bad JSON, out-of-range parameters, wrong shapes).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A route handed to a feasibility check does not have the required shape.
class RouteShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ctspav
