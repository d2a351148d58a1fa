#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "ctspav/instance.hpp"

namespace ctspav {

/// Synthetic commute instances: homes in an annulus around a central
/// workplace cluster, straight-line travel at constant speed, a morning
/// arrival peak and an evening departure peak.
struct GeneratorParams {
  int n = 10;
  Seconds delta = 600;
  double ride_factor = 0.5;
  int capacity = 4;
  Seconds service = 30;
  std::uint64_t seed = 1;
  double inner_radius_m = 2000;
  double outer_radius_m = 8000;
  double workplace_radius_m = 400;
  double speed_mps = 10;
  double arrival_mean_s = 7.5 * 3600;
  double arrival_sd_s = 45 * 60;
  double departure_mean_s = 17 * 3600;
  double departure_sd_s = 60 * 60;
  Seconds min_workday_s = 4 * 3600;
};

/// Named presets: "large" and "medium" (10 min shift, R = 0.5) and "tight" (5 min, R = 0.25).
GeneratorParams profile_params(const std::string& profile);

struct GeneratedInstance {
  Instance instance;
  std::vector<Eigen::Vector2d> homes;
  std::vector<Eigen::Vector2d> workplaces;
  std::vector<CommuterTimes> desired;
  std::vector<std::string> warnings;
};

GeneratedInstance generate_instance(const GeneratorParams& params);

/// Travel matrices over node positions: meters rounded to the nearest integer,
/// seconds rounded up, both closed under shortest paths.
void travel_matrices(const std::vector<Eigen::Vector2d>& positions, double speed_mps, IntMatrix& tau, IntMatrix& dist);

/// Node positions (4n+2) from homes and workplaces; depots at `depot`.
std::vector<Eigen::Vector2d> node_positions(const std::vector<Eigen::Vector2d>& homes,
                                            const std::vector<Eigen::Vector2d>& workplaces,
                                            const Eigen::Vector2d& depot);

}  // namespace ctspav
