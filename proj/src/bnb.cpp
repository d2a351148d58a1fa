#include "ctspav/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace ctspav::lp {

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::optimal: return "optimal";
    case SearchStatus::time_limit: return "time-limit";
    case SearchStatus::infeasible: return "infeasible";
  }
  return "?";
}

namespace {

struct BoundChange {
  int var;
  double lo;
  double hi;
};

struct Node {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;  // cumulative from the root
  std::shared_ptr<const std::vector<Simplex::VarStatus>> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

std::string cut_key(const Row& row) {
  std::vector<Term> t = row.terms;
  std::sort(t.begin(), t.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::ostringstream os;
  os.precision(12);
  for (const auto& x : t) os << x.var << ':' << x.coef << ';';
  os << '[' << row.lo << ',' << row.hi << ']';
  return os.str();
}

}  // namespace

SearchResult branch_and_cut(const LinearModel& model, std::span<const Separator> separators,
                            BoundFeed* feed, const BnbOptions& opt, const Heuristic& heuristic) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SearchResult res;
  Simplex lp(model, opt.simplex);
  const int nv = model.num_vars();

  auto prune_eps = [](double z) { return 1e-6 + 1e-9 * std::abs(z); };
  auto prunable = [&](double bound) {
    if (!res.incumbent) return false;
    if (opt.objective_integral) return std::ceil(bound - prune_eps(bound)) >= res.z_mip - 0.5;
    return bound >= res.z_mip - prune_eps(res.z_mip);
  };
  auto offer = [&](std::vector<double> x) {
    if (model.max_violation(x, true) > 1e-6) return false;
    for (const auto& c : res.cuts) {
      if (violation(c.row, x) > 1e-6) return false;
    }
    const double z = model.objective(x);
    if (res.incumbent && z >= res.z_mip - prune_eps(res.z_mip)) return false;
    res.z_mip = z;
    res.incumbent = std::move(x);
    return true;
  };

  // numerical trouble on a warm basis: rebuild the LP cold with the same rows and bounds
  std::vector<BoundChange> applied;
  long lp_iterations_before = 0;
  // a breakdown or runaway solve is retried once from a cold basis
  auto cold_solve = [&] {
    Simplex fresh(model, opt.simplex);
    for (const auto& c : res.cuts) fresh.add_row(c.row);
    for (const auto& c : applied) fresh.set_bounds(c.var, c.lo, c.hi);
    lp_iterations_before += lp.iterations();
    lp = std::move(fresh);
    return lp.solve();
  };
  auto solve_lp = [&] {
    LpStatus st;
    try {
      st = lp.solve();
    } catch (const NumericalError&) {
      return cold_solve();
    }
    return st == LpStatus::iteration_limit ? cold_solve() : st;
  };

  std::unordered_set<std::string> pool_keys;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{});
  long next_id = 1;
  long last_solved = -1;
  bool budget_hit = false;

  auto open_bound = [&] { return open.empty() ? kInf : open.top().bound; };
  auto record_bound = [&](long node, double candidate) {
    double b = std::min(candidate, res.z_mip);
    if (!res.history.empty()) b = std::max(b, res.history.back().bound);
    res.z_bb = b;
    if (res.history.empty() || res.history.back().bound != b || res.history.back().incumbent != res.z_mip) {
      res.history.push_back({node, b, res.z_mip});
    }
  };

  while (!open.empty()) {
    if (elapsed() >= opt.time_limit_s || (opt.node_limit >= 0 && res.nodes >= opt.node_limit)) {
      budget_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (prunable(node.bound)) continue;

    for (const auto& c : applied) lp.set_bounds(c.var, model.var(c.var).lo, model.var(c.var).hi);
    for (const auto& c : node.changes) lp.set_bounds(c.var, c.lo, c.hi);
    applied = node.changes;
    if (node.basis && node.parent != last_solved) lp.set_basis(*node.basis);
    last_solved = node.id;
    ++res.nodes;

    LpStatus st = solve_lp();
    if (st == LpStatus::unbounded) throw std::runtime_error("LP relaxation unbounded");
    if (st == LpStatus::iteration_limit) throw NumericalError("LP iteration limit reached");
    int cuts_here = 0;
    // a slightly dual-infeasible basis overstates the optimum; prune on the Lagrangian bound
    auto lp_bound = [&] { return std::min(lp.objective(), lp.dual_bound()); };
    double obj = st == LpStatus::optimal ? lp_bound() : kInf;

    std::optional<double> feed_value;
    if (feed) {
      feed->step();
      feed_value = feed->latest();
    }

    const int max_rounds = node.depth == 0 ? opt.root_cut_rounds : opt.node_cut_rounds;
    std::vector<Cut> found;
    for (int round = 0; st == LpStatus::optimal && round < max_rounds && !separators.empty(); ++round) {
      if (prunable(obj)) break;
      const auto x = lp.primal();
      SeparationContext ctx{x, node.id, node.depth, obj, std::min({obj, open_bound(), res.z_mip}), feed_value};
      if (!res.history.empty()) ctx.global_bound = std::max(ctx.global_bound, res.history.back().bound);
      found.clear();
      for (const auto& sep : separators) sep.fn(ctx, found);
      int accepted = 0;
      for (auto& cut : found) {
        const double v = violation(cut.row, x);
        bool take = v > opt.cut_violation && accepted < opt.max_cuts_per_round;
        if (take && !pool_keys.insert(cut_key(cut.row)).second) take = false;
        if (opt.cut_log) {
          *opt.cut_log << node.id << ',' << cut.family << ',' << cut.support.size() << ',' << v << ','
                       << (take ? 1 : 0) << '\n';
        }
        if (!take) continue;
        if (opt.audit_cuts) {
          for (const auto& p : opt.audit_points) {
            if (violation(cut.row, p) > 1e-6) {
              throw InvalidCutError("cut of family " + cut.family + " removes a known feasible solution");
            }
          }
        }
        lp.add_row(cut.row);
        res.cuts.push_back(std::move(cut));
        ++accepted;
      }
      if (accepted == 0) break;
      cuts_here += accepted;
      res.cuts_added += accepted;
      st = solve_lp();
      if (st == LpStatus::unbounded) throw std::runtime_error("LP relaxation unbounded");
      if (st == LpStatus::iteration_limit) throw NumericalError("LP iteration limit reached");
      obj = st == LpStatus::optimal ? lp_bound() : kInf;
    }
    res.lp_iterations = lp_iterations_before + lp.iterations();
    if (node.depth == 0) res.root_bound = obj;

    if (st == LpStatus::optimal && !prunable(obj)) {
      const auto x = lp.primal();
      if (heuristic) {
        if (auto cand = heuristic(x)) offer(std::move(*cand));
      }
      int pick = -1;
      double split = 0;  // children get x <= split and x >= split + 1
      double pick_frac = 0;
      int pick_class = 0;
      for (int j = 0; j < nv; ++j) {
        const auto& v = model.var(j);
        if (!v.integer) continue;
        const double f = x[static_cast<std::size_t>(j)] - std::floor(x[static_cast<std::size_t>(j)]);
        const double dist = std::min(f, 1 - f);
        if (dist <= opt.int_tol) continue;
        if (pick < 0 || v.branch_class < pick_class || (v.branch_class == pick_class && dist > pick_frac + 1e-12)) {
          pick = j;
          pick_frac = dist;
          pick_class = v.branch_class;
        }
      }
      if (pick >= 0) split = std::floor(x[static_cast<std::size_t>(pick)]);
      if (pick < 0) {
        std::vector<double> sol = x;
        for (int j = 0; j < nv; ++j) {
          if (model.var(j).integer) sol[static_cast<std::size_t>(j)] = std::round(sol[static_cast<std::size_t>(j)]);
        }
        if (!offer(sol)) offer(x);
        // an integral LP point closes the node only if the bound certifies it
        if (!prunable(obj)) {
          for (int j = 0; j < nv && pick < 0; ++j) {
            if (!model.var(j).integer) continue;
            double lo = model.var(j).lo, hi = model.var(j).hi;
            for (const auto& c : node.changes)
              if (c.var == j) lo = c.lo, hi = c.hi;
            if (lo < hi) {
              pick = j;
              const double v = sol[static_cast<std::size_t>(j)];
              split = v < hi ? v : v - 1;
            }
          }
        }
      }
      if (pick >= 0 && !prunable(obj)) {
        auto basis = std::make_shared<const std::vector<Simplex::VarStatus>>(lp.basis());
        auto child = [&](double lo, double hi) {
          Node c;
          c.id = next_id++;
          c.parent = node.id;
          c.depth = node.depth + 1;
          c.bound = obj;
          c.changes = node.changes;
          bool merged = false;
          for (auto& ch : c.changes) {
            if (ch.var == pick) {
              ch.lo = std::max(ch.lo, lo);
              ch.hi = std::min(ch.hi, hi);
              merged = true;
            }
          }
          if (!merged) {
            c.changes.push_back({pick, std::max(lo, model.var(pick).lo), std::min(hi, model.var(pick).hi)});
          }
          c.basis = basis;
          open.push(std::move(c));
        };
        child(-kInf, split);
        child(split + 1, kInf);
      }
    }
    record_bound(node.id, std::min(open_bound(), res.incumbent ? res.z_mip : kInf));
    if (opt.log) {
      *opt.log << "node=" << node.id << " depth=" << node.depth << " obj=";
      if (st == LpStatus::optimal) *opt.log << obj; else *opt.log << "infeasible";
      *opt.log << " bound=" << res.z_bb << " incumbent=";
      if (res.incumbent) *opt.log << res.z_mip; else *opt.log << "none";
      *opt.log << " cuts=" << cuts_here << '\n';
    }
  }

  if (budget_hit) {
    res.status = SearchStatus::time_limit;
    record_bound(-1, std::min(open_bound(), res.z_mip));
  } else if (res.incumbent) {
    res.status = SearchStatus::optimal;
    res.z_bb = res.z_mip;
    res.history.push_back({-1, res.z_bb, res.z_mip});
  } else {
    res.status = SearchStatus::infeasible;
  }
  return res;
}

}  // namespace ctspav::lp
