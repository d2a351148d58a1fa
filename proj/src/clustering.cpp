#include "ctspav/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ctspav/lp.hpp"
#include "ctspav/types.hpp"

namespace ctspav {
namespace {

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dist(const PointSet& a, Eigen::Index i, const PointSet& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).norm();
}

// Fractional assignment x[p][u] plus center slack. Shifts flow around even
// cycles of the fractional support (points on one side, centers and a slack
// node on the other) in the direction that does not raise cost, until every
// entry is 0 or 1.
void round_fractional(std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& cost, int cap) {
  constexpr double eps = 1e-9;
  const int P = static_cast<int>(x.size());
  const int U = P == 0 ? 0 : static_cast<int>(x[0].size());
  for (auto& row : x)
    for (auto& v : row) {
      if (std::abs(v) < eps) v = 0;
      if (std::abs(v - 1) < eps) v = 1;
    }
  auto frac = [&](int p, int u) { return x[p][u] > 0 && x[p][u] < 1; };
  // node ids: points 0..P-1, centers P..P+U-1, slack P+U
  const int S = P + U;
  for (int guard = 0; guard < 4 * P * U + 8; ++guard) {
    std::vector<double> load(static_cast<std::size_t>(U), 0.0);
    for (int p = 0; p < P; ++p)
      for (int u = 0; u < U; ++u) load[u] += x[p][u];
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(S + 1));
    bool any = false;
    for (int p = 0; p < P; ++p)
      for (int u = 0; u < U; ++u)
        if (frac(p, u)) {
          adj[p].push_back(P + u);
          adj[P + u].push_back(p);
          any = true;
        }
    if (!any) return;
    for (int u = 0; u < U; ++u)
      if (!adj[P + u].empty() && load[u] < cap - eps) {
        adj[P + u].push_back(S);
        adj[S].push_back(P + u);
      }
    // prune nodes of degree < 2 so a walk can always leave by a fresh edge
    std::vector<int> deg(adj.size());
    std::vector<bool> gone(adj.size(), false);
    std::vector<int> stack;
    for (std::size_t v = 0; v < adj.size(); ++v) {
      deg[v] = static_cast<int>(adj[v].size());
      if (deg[v] < 2) stack.push_back(static_cast<int>(v));
    }
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (gone[v]) continue;
      gone[v] = true;
      for (int w : adj[v])
        if (!gone[w] && --deg[w] < 2) stack.push_back(w);
    }
    int start = -1;
    for (int v = 0; v <= S && start < 0; ++v)
      if (!gone[v]) start = v;
    if (start < 0) throw std::logic_error("fractional assignment without a cycle");
    std::vector<int> walk{start};
    std::vector<int> pos(adj.size(), -1);
    pos[start] = 0;
    int prev = -1;
    int cur = start;
    std::vector<int> cycle;
    while (cycle.empty()) {
      int next = -1;
      for (int w : adj[cur])
        if (!gone[w] && w != prev) {
          next = w;
          break;
        }
      prev = cur;
      cur = next;
      if (pos[cur] >= 0) {
        cycle.assign(walk.begin() + pos[cur], walk.end());
        cycle.push_back(cur);
      } else {
        pos[cur] = static_cast<int>(walk.size());
        walk.push_back(cur);
      }
    }
    // edges cycle[k]-cycle[k+1] alternately get +theta and -theta
    double delta_cost = 0;
    std::vector<std::pair<int, int>> edges;  // (point, center) or (-1, center) for slack
    for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
      int a = cycle[k];
      int b = cycle[k + 1];
      if (a > b) std::swap(a, b);
      if (b == S) {
        edges.emplace_back(-1, a - P);
      } else {
        edges.emplace_back(a, b - P);
        delta_cost += (k % 2 == 0 ? 1.0 : -1.0) * cost[a][b - P];
      }
    }
    const double dir = delta_cost <= 0 ? 1.0 : -1.0;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double sgn = dir * (k % 2 == 0 ? 1.0 : -1.0);
      const auto [p, u] = edges[k];
      // a slack edge carries the slack of u; raising x on a neighbouring edge lowers it
      if (p < 0) {
        if (sgn < 0) theta = std::min(theta, cap - load[u]);
      } else {
        theta = std::min(theta, sgn > 0 ? 1 - x[p][u] : x[p][u]);
      }
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double sgn = dir * (k % 2 == 0 ? 1.0 : -1.0);
      const auto [p, u] = edges[k];
      if (p >= 0) {
        x[p][u] += sgn * theta;
        if (std::abs(x[p][u]) < eps) x[p][u] = 0;
        if (std::abs(x[p][u] - 1) < eps) x[p][u] = 1;
      }
    }
  }
  throw std::logic_error("fractional assignment rounding did not terminate");
}

}  // namespace

Eigen::VectorXd kmeanspp_weights(const PointSet& points, const PointSet& chosen) {
  Eigen::VectorXd w(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < chosen.rows(); ++j) best = std::min(best, (points.row(i) - chosen.row(j)).squaredNorm());
    w(i) = chosen.rows() == 0 ? 1.0 : best;
  }
  return w;
}

PointSet kmeanspp_init(const PointSet& points, int k, std::uint64_t seed) {
  if (k < 1) throw InputError("k must be at least 1");
  if (k > points.rows()) throw InputError("k exceeds the number of points");
  std::mt19937_64 rng(seed);
  PointSet centers(k, 2);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd w = kmeanspp_weights(points, centers.topRows(c));
    double total = w.sum();
    if (!(total > 0)) {
      w.setOnes();
      total = static_cast<double>(w.size());
    }
    const double target = unit_draw(rng) * total;
    Eigen::Index pick = points.rows() - 1;
    double acc = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      acc += w(i);
      if (w(i) > 0 && target < acc) {
        pick = i;
        break;
      }
    }
    while (w(pick) <= 0) --pick;  // float round-off at the top end
    centers.row(c) = points.row(pick);
  }
  return centers;
}

std::vector<int> assign_points(const PointSet& points, const PointSet& centers, int cap) {
  const int P = static_cast<int>(points.rows());
  const int U = static_cast<int>(centers.rows());
  if (cap < 1 || U < 1) throw InputError("need at least one center and a positive size limit");
  if (static_cast<long>(U) * cap < P) throw InputError("centers cannot hold all points under the size limit");
  if (P == 0) return {};

  std::vector<std::vector<double>> cost(static_cast<std::size_t>(P), std::vector<double>(static_cast<std::size_t>(U)));
  lp::LinearModel m;
  for (int p = 0; p < P; ++p)
    for (int u = 0; u < U; ++u) {
      cost[p][u] = dist(points, p, centers, u);
      m.add_variable(0, 1, cost[p][u]);
    }
  for (int p = 0; p < P; ++p) {
    std::vector<lp::Term> t;
    for (int u = 0; u < U; ++u) t.push_back({p * U + u, 1});
    m.add_row(std::move(t), lp::Sense::eq, 1);
  }
  for (int u = 0; u < U; ++u) {
    std::vector<lp::Term> t;
    for (int p = 0; p < P; ++p) t.push_back({p * U + u, 1});
    m.add_row(std::move(t), lp::Sense::le, cap);
  }
  const auto sol = lp::solve_lp(m);
  if (sol.status != lp::LpStatus::optimal) throw std::runtime_error("assignment LP not solved");

  std::vector<std::vector<double>> x(static_cast<std::size_t>(P), std::vector<double>(static_cast<std::size_t>(U)));
  for (int p = 0; p < P; ++p)
    for (int u = 0; u < U; ++u) x[p][u] = std::clamp(sol.x[static_cast<std::size_t>(p * U + u)], 0.0, 1.0);
  round_fractional(x, cost, cap);

  std::vector<int> out(static_cast<std::size_t>(P), -1);
  for (int p = 0; p < P; ++p)
    for (int u = 0; u < U; ++u)
      if (x[p][u] > 0.5) out[p] = u;
  return out;
}

double assignment_cost(const PointSet& points, const PointSet& centers, const std::vector<int>& assignment) {
  double s = 0;
  for (Eigen::Index p = 0; p < points.rows(); ++p) s += dist(points, p, centers, assignment[static_cast<std::size_t>(p)]);
  return s;
}

PointSet update_centers(const PointSet& points, const PointSet& centers, const std::vector<int>& assignment,
                        std::vector<int>* frozen) {
  PointSet sum = PointSet::Zero(centers.rows(), 2);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(centers.rows());
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    const int u = assignment[static_cast<std::size_t>(p)];
    sum.row(u) += points.row(p);
    ++count(u);
  }
  PointSet next = centers;
  if (frozen) frozen->clear();
  for (Eigen::Index u = 0; u < centers.rows(); ++u) {
    if (count(u) > 0) {
      next.row(u) = sum.row(u) / count(u);
    } else if (frozen) {
      frozen->push_back(static_cast<int>(u));
    }
  }
  return next;
}

int cluster_count(int points, int cap) {
  if (cap < 1) throw InputError("size limit must be at least 1");
  return std::max(1, (points + cap - 1) / cap);
}

ClusterState cluster(const PointSet& points, int cap, std::uint64_t seed, int max_iterations) {
  ClusterState st;
  st.points = points;
  st.cap = cap;
  const int k = cluster_count(static_cast<int>(points.rows()), cap);
  if (points.rows() == 0) {
    st.centers = PointSet::Zero(0, 2);
    return st;
  }
  st.centers = kmeanspp_init(points, k, seed);
  for (st.iterations = 0; st.iterations < max_iterations; ++st.iterations) {
    auto next = assign_points(points, st.centers, cap);
    if (next == st.assignment) break;
    st.assignment = std::move(next);
    st.centers = update_centers(points, st.centers, st.assignment, &st.frozen);
  }
  return st;
}

std::vector<std::vector<int>> clusters_of(const ClusterState& state) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(state.centers.rows()));
  for (std::size_t p = 0; p < state.assignment.size(); ++p) out[state.assignment[p]].push_back(static_cast<int>(p));
  return out;
}

CommuterPoints read_points_csv(std::istream& is) {
  CommuterPoints out;
  std::string line;
  std::vector<std::string> ids;
  std::vector<std::pair<double, double>> xy;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id;
    std::string xs;
    std::string ys;
    if (!std::getline(ss, id, ',') || !std::getline(ss, xs, ',') || !std::getline(ss, ys, ','))
      throw InputError("line " + std::to_string(line_no) + ": expected commuter_id,x,y");
    if (line_no == 1 && id == "commuter_id") continue;
    try {
      std::size_t used = 0;
      const double x = std::stod(xs, &used);
      const double y = std::stod(ys);
      xy.emplace_back(x, y);
    } catch (const std::exception&) {
      throw InputError("line " + std::to_string(line_no) + ": bad coordinate");
    }
    ids.push_back(id);
  }
  out.ids = std::move(ids);
  out.points.resize(static_cast<Eigen::Index>(xy.size()), 2);
  for (std::size_t i = 0; i < xy.size(); ++i) out.points.row(static_cast<Eigen::Index>(i)) << xy[i].first, xy[i].second;
  return out;
}

void write_clusters_json(std::ostream& os, const CommuterPoints& input, const ClusterState& state) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  const auto groups = clusters_of(state);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    auto& arr = j[std::to_string(c)] = nlohmann::ordered_json::array();
    for (int p : groups[c]) arr.push_back(input.ids[static_cast<std::size_t>(p)]);
  }
  os << j.dump(2) << '\n';
}

}  // namespace ctspav
