#include "ctspav/darp_cg.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <ostream>
#include <set>

#include "ctspav/ctspav_mip.hpp"
#include "ctspav/feasibility.hpp"

namespace ctspav {

namespace {

struct WalkLabel {
  FeasLabel res;
  double cost = 0;
  int length = 0;
  int parent = -1;
  bool alive = true;
};

// Labels compared here share the node and the onboard riders.
bool dominates(const WalkLabel& a, const WalkLabel& b, bool by_length) {
  if (a.cost > b.cost + 1e-12 || (by_length && a.length > b.length)) return false;
  if (a.res.earliest > b.res.earliest) return false;
  // with nobody aboard the next stop may wait, so only the earliest start matters
  if (a.res.load > 0 && a.res.latest < b.res.latest) return false;
  for (int k = 0; k < a.res.load; ++k) {
    const auto& ra = a.res.onboard[static_cast<std::size_t>(k)];
    const auto& rb = b.res.onboard[static_cast<std::size_t>(k)];
    if (ra.latest_pickup < rb.latest_pickup || ra.elapsed > rb.elapsed) return false;
  }
  return true;
}

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

Column make_column(std::vector<NodeId> path, const Instance& inst) {
  Column c;
  std::map<NodeId, int> count;
  for (NodeId v : path) {
    if (inst.is_pickup(v)) ++count[v];
  }
  c.visits.assign(count.begin(), count.end());
  c.path = std::move(path);
  return c;
}

}  // namespace

PricingResult price_routes(std::span<const double> mu, const ArcSet& arcs, const Instance& inst,
                           const PricingOptions& options) {
  // With positive service times every step moves the clock forward, so the
  // windows alone keep walks finite.
  bool timed = true;
  for (NodeId p : inst.pickups()) {
    if (inst.at(p).service <= 0 || inst.at(inst.dropoff_of(p)).service <= 0) timed = false;
  }
  const int cap = options.walk_cap > 0 ? options.walk_cap : (timed ? std::numeric_limits<int>::max() : 4 * inst.n + 2);
  const bool by_length = cap != std::numeric_limits<int>::max();
  const NodeId sink = inst.sink();
  PricingResult res;
  std::vector<WalkLabel> labels;
  // per node, labels grouped by the riders onboard
  std::vector<std::map<std::vector<NodeId>, std::vector<int>>> at(static_cast<std::size_t>(inst.node_count()));
  WalkLabel root;
  root.res = depot_label(inst);
  root.length = 1;
  labels.push_back(root);
  std::vector<int> finished;

  auto arc_cost = [&](NodeId from) {
    if (from == inst.source()) return 1.0;
    if (inst.is_pickup(from)) return -mu[static_cast<std::size_t>(from)];
    return 0.0;
  };

  // earliest start first, so a label tends to be settled before the ones it dominates appear
  using Item = std::pair<Seconds, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  queue.emplace(root.res.earliest, 0);
  long pops = 0;
  while (!queue.empty()) {
    if (options.stop && (++pops & 255) == 0 && options.stop()) {
      res.complete = false;
      break;
    }
    const int li = queue.top().second;
    queue.pop();
    if (!labels[static_cast<std::size_t>(li)].alive) continue;
    const WalkLabel cur = labels[static_cast<std::size_t>(li)];
    if (cur.length >= cap) continue;
    for (int e : arcs.out_arcs(cur.res.node)) {
      const NodeId to = arcs.arcs[static_cast<std::size_t>(e)].to;
      auto ext = extend_label(cur.res, to, inst);
      if (!ext) continue;
      WalkLabel nl;
      nl.res = ext.value();
      nl.cost = cur.cost + arc_cost(cur.res.node);
      nl.length = cur.length + 1;
      nl.parent = li;
      std::vector<NodeId> key;
      for (const auto& r : nl.res.riders()) key.push_back(r.pickup);
      auto& bucket = at[static_cast<std::size_t>(to)][key];
      if (options.dominance) {
        bool dominated = false;
        for (int o : bucket) {
          if (dominates(labels[static_cast<std::size_t>(o)], nl, by_length)) {
            dominated = true;
            break;
          }
        }
        if (dominated) continue;
        std::erase_if(bucket, [&](int o) {
          if (!dominates(nl, labels[static_cast<std::size_t>(o)], by_length)) return false;
          labels[static_cast<std::size_t>(o)].alive = false;
          return true;
        });
      }
      const int id = static_cast<int>(labels.size());
      labels.push_back(nl);
      bucket.push_back(id);
      if (to == sink) {
        finished.push_back(id);
      } else {
        queue.emplace(nl.res.earliest, id);
      }
    }
  }
  res.labels = static_cast<long>(labels.size());

  std::vector<std::pair<double, std::vector<NodeId>>> found;
  for (int id : finished) {
    const auto& l = labels[static_cast<std::size_t>(id)];
    if (!l.alive) continue;
    res.min_reduced_cost = std::min(res.min_reduced_cost, l.cost);
    if (l.cost >= -1e-9) continue;
    std::vector<NodeId> path;
    for (int k = id; k >= 0; k = labels[static_cast<std::size_t>(k)].parent) path.push_back(labels[static_cast<std::size_t>(k)].res.node);
    std::reverse(path.begin(), path.end());
    found.emplace_back(l.cost, std::move(path));
  }
  std::sort(found.begin(), found.end());
  for (auto& [cost, path] : found) res.columns.push_back(make_column(std::move(path), inst));
  return res;
}

double farley_bound(double z_rmp, double cbar, double previous) {
  if (cbar >= 0) return std::max(z_rmp, previous);
  assert(1 - cbar > 0);
  return std::max(z_rmp / (1 - cbar), previous);
}

bool BoundStream::publish(double value) {
  std::lock_guard lock(mutex_);
  if (value <= latest_.load()) return false;
  latest_.store(value);
  history_.push_back(value);
  ++count_;
  return true;
}

std::optional<double> BoundStream::latest() {
  const double v = latest_.load();
  if (v == -lp::kInf) return std::nullopt;
  return v;
}

std::vector<double> BoundStream::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

struct DarpCg::Master {
  lp::LinearModel model;
  std::unique_ptr<lp::Simplex> simplex;
  std::vector<int> row_of;  // node id -> covering row, -1 off pickups
  std::set<std::vector<NodeId>> paths;
};

DarpCg::DarpCg(const Instance& inst, const ArcSet& arcs, CgOptions options)
    : inst_(inst), arcs_(arcs), opt_(std::move(options)), master_(std::make_unique<Master>()) {
  started_ = now_s();
  auto& m = *master_;
  m.row_of.assign(static_cast<std::size_t>(inst.node_count()), -1);
  const auto pickups = inst.pickups();
  for (std::size_t r = 0; r < pickups.size(); ++r) m.row_of[static_cast<std::size_t>(pickups[r])] = static_cast<int>(r);
  auto walk_ok = [&](const std::vector<NodeId>& path) {
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      if (!arcs.contains(path[k], path[k + 1])) return false;
    }
    return static_cast<bool>(schedule_path(path, inst));
  };
  const NodeId s = inst.source();
  const NodeId t = inst.sink();
  for (int c = 1; c <= inst.n; ++c) {
    const NodeId in = c;
    const NodeId out = 2 * inst.n + c;
    std::vector<NodeId> both{s, in, inst.dropoff_of(in), out, inst.dropoff_of(out), t};
    if (walk_ok(both)) {
      columns_.push_back(make_column(both, inst));
      continue;
    }
    for (NodeId p : {in, out}) {
      std::vector<NodeId> single{s, p, inst.dropoff_of(p), t};
      if (!walk_ok(single)) {
        throw UncoverableError(c, "commuter " + std::to_string(c) + " has no feasible " +
                                      to_string(inst.direction(p)) + " route");
      }
      columns_.push_back(make_column(single, inst));
    }
  }
  std::vector<std::vector<lp::Term>> rows(pickups.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    m.model.add_variable(0, lp::kInf, 1.0, false, "R" + std::to_string(j));
    m.paths.insert(columns_[j].path);
    for (auto [p, k] : columns_[j].visits) {
      rows[static_cast<std::size_t>(m.row_of[static_cast<std::size_t>(p)])].push_back({static_cast<int>(j), static_cast<double>(k)});
    }
  }
  for (std::size_t r = 0; r < pickups.size(); ++r) {
    m.model.add_row(std::move(rows[r]), lp::Sense::ge, 1, "cover" + std::to_string(pickups[r]));
  }
  m.simplex = std::make_unique<lp::Simplex>(m.model);
  mu_.assign(static_cast<std::size_t>(inst.node_count()), 0.0);
}

DarpCg::~DarpCg() = default;

void DarpCg::add(Column c) {
  auto& m = *master_;
  if (!m.paths.insert(c.path).second) return;
  std::vector<lp::Term> terms;
  for (auto [p, k] : c.visits) terms.push_back({m.row_of[static_cast<std::size_t>(p)], static_cast<double>(k)});
  lp::Variable v;
  v.lo = 0;
  v.hi = lp::kInf;
  v.cost = 1.0;
  m.simplex->add_column(v, terms);
  columns_.push_back(std::move(c));
}

CgIteration DarpCg::iterate(const std::function<bool()>& stop) {
  auto& m = *master_;
  const auto st = m.simplex->solve();
  if (st != lp::LpStatus::optimal) throw lp::NumericalError("covering master not solved to optimality");
  z_rmp_ = m.simplex->objective();
  const auto y = m.simplex->duals();
  std::fill(mu_.begin(), mu_.end(), 0.0);
  // unit right-hand sides: the clipped duals sum to a bound numerator even off optimality
  double dual_total = 0;
  for (NodeId p : inst_.pickups()) {
    mu_[static_cast<std::size_t>(p)] = std::max(0.0, y[static_cast<std::size_t>(m.row_of[static_cast<std::size_t>(p)])]);
    dual_total += mu_[static_cast<std::size_t>(p)];
  }

  CgIteration it;
  it.iteration = ++iterations_;
  it.z_rmp = z_rmp_;
  PricingOptions popt = opt_.pricing;
  const double deadline = started_ + opt_.time_limit_s;
  popt.stop = [&stop, deadline, outer = opt_.pricing.stop] {
    return (stop && stop()) || (outer && outer()) || now_s() >= deadline;
  };
  PricingResult priced;
  bool from_smoothed = false;
  if (opt_.smoothing > 0 && !smoothed_.empty()) {
    std::vector<double> blend(mu_.size());
    for (std::size_t i = 0; i < mu_.size(); ++i) blend[i] = opt_.smoothing * smoothed_[i] + (1 - opt_.smoothing) * mu_[i];
    priced = price_routes(blend, arcs_, inst_, popt);
    if (priced.columns.empty() && priced.complete) {
      priced = price_routes(mu_, arcs_, inst_, popt);
    } else if (priced.complete) {
      from_smoothed = true;
      double total = 0;
      for (double v : blend) total += v;
      // any nonnegative duals scaled by their worst column give a valid bound
      if (priced.min_reduced_cost < 0) farley_ = std::max(farley_, total / (1 - priced.min_reduced_cost));
      smoothed_ = std::move(blend);
    }
  } else {
    priced = price_routes(mu_, arcs_, inst_, popt);
  }
  it.complete = priced.complete;
  if (!from_smoothed && priced.complete) {
    if (opt_.smoothing > 0) smoothed_ = mu_;
    if (priced.min_reduced_cost >= -1e-6) {
      converged_ = true;
      farley_ = std::max(farley_, std::min(z_rmp_, dual_total));
    } else {
      farley_ = farley_bound(std::min(z_rmp_, dual_total), priced.min_reduced_cost, farley_);
    }
  }
  it.cbar = priced.min_reduced_cost;
  it.z_farley = farley_;
  const std::size_t before = columns_.size();
  for (auto& c : priced.columns) add(std::move(c));
  it.columns_added = static_cast<int>(columns_.size() - before);
  it.wall_time_s = now_s() - started_;
  if (opt_.log) {
    *opt_.log << it.iteration << ',' << it.z_rmp << ',' << it.cbar << ',' << it.z_farley << ',' << it.columns_added
              << ',' << it.wall_time_s << '\n';
  }
  return it;
}

double run_cg(const Instance& inst, const ArcSet& arcs, BoundStream& stream, const CgOptions& options) {
  DarpCg cg(inst, arcs, options);
  const double start = now_s();
  for (;;) {
    const auto it = cg.iterate();
    if (!it.complete) break;
    const bool may_publish = options.max_iterations < 0 || cg.iterations() <= options.max_iterations;
    if (may_publish) stream.publish(cg.bound());
    if (cg.converged()) break;
    if (options.max_iterations >= 0 && cg.iterations() >= std::max<long>(1, options.max_iterations)) break;
    if (now_s() - start >= options.time_limit_s) break;
  }
  return cg.bound();
}

CgFeed::CgFeed(const Instance& inst, const ArcSet& arcs, CgOptions options, bool threaded)
    : cg_(std::make_unique<DarpCg>(inst, arcs, options)), opt_(std::move(options)) {
  if (threaded) {
    worker_ = std::jthread([this](std::stop_token token) {
      const double start = now_s();
      while (!token.stop_requested() && advance([&token] { return token.stop_requested(); })) {
        if (now_s() - start >= opt_.time_limit_s) break;
      }
    });
  }
}

CgFeed::~CgFeed() { stop(); }

void CgFeed::stop() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
}

void CgFeed::step() {
  if (!worker_.joinable()) advance({});
}

bool CgFeed::advance(const std::function<bool()>& stop) {
  if (done_) return false;
  const auto it = cg_->iterate(stop);
  {
    std::lock_guard lock(log_mutex_);
    log_.push_back(it);
  }
  if (!it.complete) {
    done_ = true;
    return false;
  }
  const bool may_publish = opt_.max_iterations < 0 || cg_->iterations() <= opt_.max_iterations;
  if (may_publish) stream_.publish(cg_->bound());
  if (cg_->converged() || (opt_.max_iterations >= 0 && cg_->iterations() >= std::max<long>(1, opt_.max_iterations))) {
    done_ = true;
  }
  return !done_;
}

std::vector<CgIteration> CgFeed::log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

}  // namespace ctspav
