#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctspav {

/// Points are rows.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct ClusterState {
  PointSet points;
  PointSet centers;
  std::vector<int> assignment;  // point -> center
  int cap = 1;
  std::vector<int> frozen;      // centers left empty by the last assignment
  int iterations = 0;
};

/// D² sampling weights of every point against the chosen centers.
Eigen::VectorXd kmeanspp_weights(const PointSet& points, const PointSet& chosen);

PointSet kmeanspp_init(const PointSet& points, int k, std::uint64_t seed);

/// Capacity-limited assignment minimizing total point-center distance.
std::vector<int> assign_points(const PointSet& points, const PointSet& centers, int cap);

/// Sum of Euclidean point-center distances of an assignment.
double assignment_cost(const PointSet& points, const PointSet& centers, const std::vector<int>& assignment);

/// Means of assigned points. Centers with no points keep their coordinates and
/// are listed in `frozen`.
PointSet update_centers(const PointSet& points, const PointSet& centers, const std::vector<int>& assignment,
                        std::vector<int>* frozen = nullptr);

int cluster_count(int points, int cap);

/// Alternates assignment and update from a k-means++ start until the
/// assignment repeats (or 500 rounds).
ClusterState cluster(const PointSet& points, int cap, std::uint64_t seed, int max_iterations = 500);

/// Point indices per cluster, clusters ordered by center index.
std::vector<std::vector<int>> clusters_of(const ClusterState& state);

struct CommuterPoints {
  std::vector<std::string> ids;
  PointSet points;
};

/// CSV with header commuter_id,x,y.
CommuterPoints read_points_csv(std::istream& is);

/// {"<cluster id>": [commuter ids...], ...}
void write_clusters_json(std::ostream& os, const CommuterPoints& input, const ClusterState& state);

}  // namespace ctspav
