#include "ctspav/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ctspav {

GeneratorParams profile_params(const std::string& profile) {
  GeneratorParams p;
  if (profile == "large" || profile == "medium" || profile == "default") return p;
  if (profile == "tight") {
    p.delta = 300;
    p.ride_factor = 0.25;
    return p;
  }
  throw InputError("unknown profile '" + profile + "' (expected large, medium or tight)");
}

std::vector<Eigen::Vector2d> node_positions(const std::vector<Eigen::Vector2d>& homes,
                                            const std::vector<Eigen::Vector2d>& workplaces,
                                            const Eigen::Vector2d& depot) {
  const std::size_t n = homes.size();
  std::vector<Eigen::Vector2d> pos(4 * n + 2, depot);
  for (std::size_t c = 0; c < n; ++c) {
    pos[1 + c] = homes[c];
    pos[1 + n + c] = workplaces[c];
    pos[1 + 2 * n + c] = workplaces[c];
    pos[1 + 3 * n + c] = homes[c];
  }
  return pos;
}

void travel_matrices(const std::vector<Eigen::Vector2d>& positions, double speed_mps, IntMatrix& tau, IntMatrix& dist) {
  const auto N = static_cast<Eigen::Index>(positions.size());
  tau.resize(N, N);
  dist.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      const double d = (positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)]).norm();
      dist(i, j) = static_cast<Meters>(std::llround(d));
      tau(i, j) = static_cast<Seconds>(std::ceil(d / speed_mps - 1e-9));
    }
  }
  // rounding can break the triangle inequality; close both matrices under shortest paths
  for (Eigen::Index k = 0; k < N; ++k) {
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) {
        tau(i, j) = std::min(tau(i, j), tau(i, k) + tau(k, j));
        dist(i, j) = std::min(dist(i, j), dist(i, k) + dist(k, j));
      }
    }
  }
}

GeneratedInstance generate_instance(const GeneratorParams& p) {
  if (p.n < 1) throw InputError("n must be at least 1");
  if (p.speed_mps <= 0) throw InputError("speed must be positive");
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> arrival(p.arrival_mean_s, p.arrival_sd_s);
  std::normal_distribution<double> departure(p.departure_mean_s, p.departure_sd_s);

  GeneratedInstance g;
  const double r0 = p.inner_radius_m * p.inner_radius_m;
  const double r1 = p.outer_radius_m * p.outer_radius_m;
  for (int c = 0; c < p.n; ++c) {
    const double r = std::sqrt(r0 + (r1 - r0) * unit(rng));
    const double a = 2 * std::numbers::pi * unit(rng);
    g.homes.emplace_back(r * std::cos(a), r * std::sin(a));
    const double wr = p.workplace_radius_m * std::sqrt(unit(rng));
    const double wa = 2 * std::numbers::pi * unit(rng);
    g.workplaces.emplace_back(wr * std::cos(wa), wr * std::sin(wa));
    const double lo = static_cast<double>(p.delta) + 3600;
    const double hi = static_cast<double>(kDaySeconds - p.delta) - 3600;
    const auto arr = static_cast<Seconds>(std::llround(std::clamp(arrival(rng), lo, hi)));
    auto dep = static_cast<Seconds>(std::llround(std::clamp(departure(rng), lo, hi)));
    dep = std::min<Seconds>(std::max(dep, arr + p.min_workday_s), static_cast<Seconds>(hi));
    g.desired.push_back({arr, dep});
  }
  IntMatrix tau;
  IntMatrix dist;
  travel_matrices(node_positions(g.homes, g.workplaces, Eigen::Vector2d::Zero()), p.speed_mps, tau, dist);
  WindowParams wp;
  wp.shift = p.delta;
  wp.ride_factor = p.ride_factor;
  wp.capacity = p.capacity;
  wp.service = p.service;
  auto derived = derive_time_windows(g.desired, wp, std::move(tau), std::move(dist));
  g.instance = std::move(derived.instance);
  g.warnings = std::move(derived.warnings);
  return g;
}

}  // namespace ctspav
