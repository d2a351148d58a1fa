#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "ctspav/analytics.hpp"
#include "ctspav/clustering.hpp"
#include "ctspav/generator.hpp"
#include "ctspav/io.hpp"
#include "ctspav/solve.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitTimeLimit = 3;
constexpr int kExitInfeasible = 4;

struct GenerateArgs {
  std::string profile = "large";
  int n = 10;
  int capacity = -1;
  long long delta = -1;
  double ride_factor = -1;
  std::uint64_t seed = 1;
  std::string out;
  std::string points_out;
};

struct ClusterArgs {
  std::string in;
  int cap = 100;
  std::uint64_t seed = 1;
  std::string out;
};

struct SolveArgs {
  std::string instance;
  std::string variant = "base";
  double budget = 7200;
  int threads = 1;
  long node_limit = -1;
  std::string out;
  std::string log;
  std::string cut_log;
  std::string cg_log;
};

struct AnalyzeArgs {
  std::string instance;
  std::vector<std::string> solutions;
  long long delta = -1;
  std::string out = "report";
};

struct ReportArgs {
  std::vector<std::string> solutions;
  std::string out;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    ctspav::write_file(path, text);
  }
}

int run_generate(const GenerateArgs& a) {
  auto p = ctspav::profile_params(a.profile);
  p.n = a.n;
  p.seed = a.seed;
  if (a.capacity > 0) p.capacity = a.capacity;
  if (a.delta >= 0) p.delta = a.delta;
  if (a.ride_factor >= 0) p.ride_factor = a.ride_factor;
  const auto g = ctspav::generate_instance(p);
  for (const auto& w : g.warnings) std::cerr << "warning: " << w << '\n';
  ctspav::InstanceMeta meta;
  meta.generator = "annulus/" + a.profile;
  meta.seed = a.seed;
  meta.delta = p.delta;
  meta.ride_factor = p.ride_factor;
  emit(a.out, ctspav::instance_to_json(g.instance, meta));
  if (!a.points_out.empty()) {
    std::ostringstream os;
    os << "commuter_id,x,y\n";
    for (std::size_t c = 0; c < g.homes.size(); ++c) os << c + 1 << ',' << g.homes[c].x() << ',' << g.homes[c].y() << '\n';
    ctspav::write_file(a.points_out, os.str());
  }
  return kExitOk;
}

int run_cluster(const ClusterArgs& a) {
  std::istringstream is(ctspav::read_file(a.in));
  const auto input = ctspav::read_points_csv(is);
  const auto state = ctspav::cluster(input.points, a.cap, a.seed);
  if (!state.frozen.empty()) std::cerr << "warning: " << state.frozen.size() << " cluster centers ended empty\n";
  std::ostringstream os;
  ctspav::write_clusters_json(os, input, state);
  emit(a.out, os.str());
  return kExitOk;
}

int run_solve(const SolveArgs& a) {
  const auto text = ctspav::read_file(a.instance);
  const auto inst = ctspav::instance_from_json(text);
  ctspav::SolveOptions opt;
  opt.variant = a.variant;
  opt.budget_secs = a.budget;
  opt.threads = a.threads;
  opt.node_limit = a.node_limit;
  std::unique_ptr<std::ofstream> log, cut_log, cg_log;
  auto open = [](const std::string& path, std::unique_ptr<std::ofstream>& f) -> std::ostream* {
    if (path.empty()) return nullptr;
    f = std::make_unique<std::ofstream>(path);
    if (!*f) throw ctspav::InputError("cannot write " + path);
    return f.get();
  };
  opt.log = open(a.log, log);
  opt.cut_log = open(a.cut_log, cut_log);
  opt.cg_log = open(a.cg_log, cg_log);

  ctspav::SolveOutcome out;
  try {
    out = ctspav::solve_instance(inst, opt);
  } catch (const ctspav::UncoverableError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  }
  const auto rec = ctspav::make_solution_record(out, ctspav::content_hash(text), opt);
  emit(a.out, ctspav::solution_to_json(rec));
  std::cerr << "status " << rec.status << ", vehicles " << (rec.chi ? std::to_string(*rec.chi) : "-")
            << ", lower bound " << std::ceil(rec.chi_lb - 1e-6) << ", distance " << rec.total_distance << " m, nodes "
            << rec.nodes << '\n';
  if (!out.plan) return kExitInfeasible;
  return out.search.status == ctspav::lp::SearchStatus::optimal ? kExitOk : kExitTimeLimit;
}

int run_analyze(const AnalyzeArgs& a) {
  const auto text = ctspav::read_file(a.instance);
  ctspav::InstanceMeta meta;
  const auto inst = ctspav::instance_from_json(text, &meta);
  const auto hash = ctspav::content_hash(text);
  const ctspav::Seconds delta = a.delta >= 0 ? a.delta : meta.delta.value_or(-1);
  if (delta < 0) throw ctspav::InputError("time shift unknown: pass --delta-secs");

  std::vector<ctspav::Report> reports;
  reports.push_back(ctspav::analyze_plan("no-sharing", ctspav::no_sharing_baseline(inst, delta), inst, false));
  std::ostringstream prov;
  prov << "# instance " << hash;
  if (meta.seed) prov << " seed " << *meta.seed;
  prov << '\n';
  for (const auto& path : a.solutions) {
    const auto sol_text = ctspav::read_file(path);
    const auto sol = ctspav::solution_from_json(sol_text);
    if (sol.instance_hash != hash) throw ctspav::InputError(path + " was solved for a different instance");
    if (!sol.chi) throw ctspav::InputError(path + " holds no plan");
    std::string name = sol.variant;
    for (const auto& r : reports)
      if (r.config == name) name += "-" + std::to_string(reports.size());
    auto rep = ctspav::analyze_plan(name, sol.routes, inst);
    if (rep.trips != 2 * inst.n) throw ctspav::InputError(path + " does not serve every trip");
    reports.push_back(std::move(rep));
    prov << "# solution " << name << ' ' << ctspav::content_hash(sol_text) << '\n';
  }
  for (std::size_t i = 0; i < reports.size(); ++i) ctspav::relate_to_baseline(reports[i], reports.front());
  std::ostringstream summary, bins;
  ctspav::write_summary_csv(summary, reports);
  ctspav::write_bins_csv(bins, reports);
  ctspav::write_file(a.out + "_summary.csv", prov.str() + summary.str());
  ctspav::write_file(a.out + "_bins.csv", prov.str() + bins.str());
  return kExitOk;
}

int run_report(const ReportArgs& a) {
  std::ostringstream os;
  os << "file,variant,status,chi,chi_lb,ceil_chi_lb,vehicle_count_gap,optimality_gap_pct,total_distance_m,nodes\n";
  for (const auto& path : a.solutions) {
    const auto sol = ctspav::solution_from_json(ctspav::read_file(path));
    os << path << ',' << sol.variant << ',' << sol.status << ',' << (sol.chi ? std::to_string(*sol.chi) : "") << ','
       << sol.chi_lb << ',' << std::ceil(sol.chi_lb - 1e-6) << ','
       << (sol.vehicle_count_gap ? std::to_string(*sol.vehicle_count_gap) : "") << ',';
    if (sol.optimality_gap_pct) os << *sol.optimality_gap_pct;
    os << ',' << sol.total_distance << ',' << sol.nodes << '\n';
  }
  emit(a.out, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commute trip sharing with autonomous vehicles: generate, cluster, solve, analyze"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic instance");
  g->add_option("--profile", gen.profile, "large, medium or tight")->capture_default_str();
  g->add_option("-n,--commuters", gen.n, "Number of commuters")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--capacity", gen.capacity, "Vehicle capacity (profile default 4)")->check(CLI::PositiveNumber);
  g->add_option("--delta-secs", gen.delta, "Maximum shift of desired times")->check(CLI::NonNegativeNumber);
  g->add_option("--ride-factor", gen.ride_factor, "Ride-duration extension")->check(CLI::NonNegativeNumber);
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "Instance JSON (stdout if omitted)");
  g->add_option("--points-out", gen.points_out, "Home coordinates CSV for clustering");

  ClusterArgs cl;
  auto* c = app.add_subcommand("cluster", "Partition commuter homes into size-limited neighborhoods");
  c->add_option("--in", cl.in, "CSV commuter_id,x,y")->required();
  c->add_option("--capacity,--size", cl.cap, "Maximum commuters per cluster")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--seed", cl.seed)->capture_default_str();
  c->add_option("--out", cl.out, "Cluster JSON (stdout if omitted)");

  SolveArgs sv;
  auto* s = app.add_subcommand("solve", "Solve an instance by branch and cut");
  s->add_option("instance", sv.instance, "Instance JSON")->required();
  s->add_option("--variant", sv.variant)->capture_default_str()->check(CLI::IsMember({"base", "sec", "hybrid"}));
  s->add_option("--budget-secs", sv.budget)->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--threads", sv.threads)->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--node-limit", sv.node_limit, "Stop after this many nodes (-1 unlimited)")->capture_default_str();
  s->add_option("--out", sv.out, "Solution JSON (stdout if omitted)");
  s->add_option("--log", sv.log, "Node log");
  s->add_option("--cut-log", sv.cut_log, "Cut CSV");
  s->add_option("--cg-log", sv.cg_log, "Column generation CSV");

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "Case-study metrics against the no-sharing baseline");
  z->add_option("--instance", an.instance)->required();
  z->add_option("solutions", an.solutions, "Solution JSON files");
  z->add_option("--delta-secs", an.delta, "Time shift used to build the instance (read from it if recorded)");
  z->add_option("--out", an.out, "Output prefix; writes <prefix>_summary.csv and <prefix>_bins.csv")->capture_default_str();

  ReportArgs rp;
  auto* r = app.add_subcommand("report", "Bound and gap table of solution files");
  r->add_option("solutions", rp.solutions)->required();
  r->add_option("--out", rp.out, "CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*g) return run_generate(gen);
    if (*c) return run_cluster(cl);
    if (*s) return run_solve(sv);
    if (*z) return run_analyze(an);
    if (*r) return run_report(rp);
  } catch (const ctspav::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitBadInput;
}
