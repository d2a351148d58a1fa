#include "ctspav/solve.hpp"

#include <algorithm>
#include <chrono>

#include "ctspav/cuts.hpp"

namespace ctspav {

std::vector<lp::Separator> make_separators(const VariantConfig& variant, const CtspavModel& model,
                                           const Instance& inst, const ArcSet& arcs, KappaOracle& oracle) {
  std::vector<lp::Separator> seps;
  if (variant.rounded_vc) {
    seps.push_back({"rounded_vc", [&model](const lp::SeparationContext& ctx, std::vector<lp::Cut>& out) {
                      double chi = vehicle_bound_from_objective(ctx.global_bound, model.costs);
                      if (ctx.feed) chi = std::max(chi, *ctx.feed);
                      if (auto cut = separate_rounded_vc(model, ctx.x, chi)) out.push_back(std::move(*cut));
                    }});
  }
  if (variant.two_path) {
    seps.push_back({"two_path", [&model, &arcs, &oracle](const lp::SeparationContext& ctx, std::vector<lp::Cut>& out) {
                      for (auto& c : separate_two_path(model, arcs, ctx.x, oracle)) out.push_back(std::move(c));
                    }});
  }
  if (variant.pred_succ) {
    seps.push_back({"pred_succ", [&model, &inst, &arcs](const lp::SeparationContext& ctx, std::vector<lp::Cut>& out) {
                      for (auto& c : separate_pred_succ(model, inst, arcs, ctx.x)) out.push_back(std::move(c));
                    }});
  }
  return seps;
}

SolveOutcome solve_instance(const Instance& inst, const SolveOptions& options) {
  auto omega = enumerate_omega(inst, options.threads);
  const auto graph = build_pdgraph(inst);
  ArcSet arcs = options.filter ? filter_arcs(graph, inst, options.threads) : unfiltered_arcs(graph);
  return solve_prepared(inst, std::move(omega), std::move(arcs), options);
}

SolveOutcome solve_prepared(const Instance& inst, std::vector<MiniRoute> omega, ArcSet arcs,
                            const SolveOptions& options) {
  if (!(options.budget_secs > 0)) throw InputError("budget must be positive");
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  out.variant = configure_variant(options.variant);
  out.omega = std::move(omega);
  out.arcs = std::move(arcs);
  const auto& om = out.omega;
  const auto& ar = out.arcs;

  ModelOptions mo;
  mo.lifted_mtz = out.variant.lifted_mtz;
  mo.lifted_time_bounds = out.variant.lifted_time_bounds;
  out.model = build_model(inst, om, ar, mo);
  const auto& model = out.model;

  KappaOracle oracle(inst, ar);
  const auto seps = make_separators(out.variant, model, inst, ar, oracle);

  std::unique_ptr<CgFeed> feed;
  if (out.variant.darp_feed) {
    CgOptions cg;
    cg.max_iterations = options.cg_iterations;
    cg.time_limit_s = options.budget_secs;
    cg.log = options.cg_log;
    feed = std::make_unique<CgFeed>(inst, ar, cg, options.threads > 1);
  }

  lp::BnbOptions bo;
  bo.time_limit_s = options.budget_secs;
  bo.node_limit = options.node_limit;
  bo.objective_integral = true;
  bo.log = options.log;
  bo.cut_log = options.cut_log;
  bo.audit_cuts = options.audit_cuts;
  for (const auto& p : options.audit_plans) {
    if (auto v = plan_to_vector(model, p, om, ar)) bo.audit_points.push_back(std::move(*v));
  }

  const lp::Heuristic heuristic = [&](std::span<const double> x) -> std::optional<std::vector<double>> {
    auto plan = greedy_plan(x, model, inst, om, ar);
    if (!plan) return std::nullopt;
    return plan_to_vector(model, *plan, om, ar);
  };

  out.search = lp::branch_and_cut(model.lp, seps, feed.get(), bo, heuristic);
  if (feed) {
    feed->stop();
    out.farley = feed->latest();
    out.farley_history = feed->stream().history();
    out.cg_log = feed->log();
  }

  if (out.search.incumbent) out.plan = extract_routes(model, *out.search.incumbent, inst, om, ar);
  out.chi_bb = std::max(0.0, vehicle_bound_from_objective(out.search.z_bb, model.costs));
  out.chi_lb = out.chi_bb;
  if (out.farley) out.chi_lb = std::max(out.chi_lb, *out.farley);
  if (out.plan) {
    out.gaps = gaps(out.plan->vehicle_count, out.chi_lb, out.search.z_mip, out.search.z_bb, true);
  }
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace ctspav
