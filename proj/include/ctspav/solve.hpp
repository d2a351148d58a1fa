#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctspav/bnb.hpp"
#include "ctspav/ctspav_mip.hpp"
#include "ctspav/darp_cg.hpp"

namespace ctspav {

class KappaOracle;

struct SolveOptions {
  std::string variant = "base";
  double budget_secs = 7200;
  int threads = 1;          // 1 keeps everything on the calling thread
  long node_limit = -1;
  long cg_iterations = -1;  // column-generation iterations allowed to publish; -1 unlimited
  bool filter = true;       // apply the a-priori arc rules
  bool audit_cuts = false;
  std::vector<AvRoutePlan> audit_plans;  // known feasible plans every cut must keep
  std::ostream* log = nullptr;
  std::ostream* cut_log = nullptr;
  std::ostream* cg_log = nullptr;
};

struct SolveOutcome {
  VariantConfig variant;
  std::vector<MiniRoute> omega;
  ArcSet arcs;
  CtspavModel model;
  lp::SearchResult search;
  std::optional<AvRoutePlan> plan;
  double chi_bb = 0;    // vehicle bound implied by the final objective bound
  std::optional<double> farley;
  double chi_lb = 0;    // max of the two
  Gaps gaps;
  std::vector<double> farley_history;
  std::vector<CgIteration> cg_log;
  double wall_time_s = 0;
};

/// Enumerates mini routes, filters arcs, builds the model and runs branch and cut.
SolveOutcome solve_instance(const Instance& inst, const SolveOptions& options);

/// Same, with mini routes and arcs supplied by the caller.
SolveOutcome solve_prepared(const Instance& inst, std::vector<MiniRoute> omega, ArcSet arcs,
                            const SolveOptions& options);

/// Separators of a variant, in priority order.
std::vector<lp::Separator> make_separators(const VariantConfig& variant, const CtspavModel& model,
                                           const Instance& inst, const ArcSet& arcs, KappaOracle& oracle);

}  // namespace ctspav
