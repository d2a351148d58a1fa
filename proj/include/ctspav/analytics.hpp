#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ctspav/instance.hpp"
#include "ctspav/io.hpp"

namespace ctspav {

inline constexpr Seconds kBinSeconds = 900;

struct TimeBin {
  Seconds start = 0;
  int vehicles_on_road = 0;   // vehicles whose active span overlaps the bin
  Seconds vehicle_seconds = 0;
  Seconds rider_seconds = 0;

  [[nodiscard]] double riders_per_vehicle() const;  // 0 when no vehicle-time
  bool operator==(const TimeBin&) const = default;
};

struct Report {
  std::string config;
  int vehicles = 0;
  Meters total_distance = 0;
  Meters empty_distance = 0;
  int trips = 0;
  double efficiency = 0;  // trips per meter
  double avg_commute_s = 0;
  Seconds active_seconds = 0;  // sum of route active spans
  std::vector<TimeBin> bins;
  // relative to the no-sharing baseline, in percent; zero when there is no baseline
  double vehicles_pct = 0;
  double distance_pct = 0;
  double empty_pct = 0;  // empty meters as a share of baseline distance
  double commute_pct = 0;

  bool operator==(const Report&) const = default;
};

struct ActiveSpan {
  Seconds depart = 0;
  Seconds arrive = 0;
};

/// Time a vehicle is on the road. With depot legs: it leaves the depot just in
/// time for its first stop and is back right after its last one, and waiting
/// between stops counts. Without (private cars): one span per mini route, from
/// the first pickup to the end of the last drop-off.
std::vector<ActiveSpan> active_spans(const RouteRecord& route, const Instance& inst, bool depot_legs);

/// One private vehicle per commuter, two direct trips at the desired times.
/// Depot legs are not driven.
std::vector<RouteRecord> no_sharing_baseline(const Instance& inst, Seconds shift);

/// Metrics of one plan. `depot_legs` is false for the private-car baseline.
Report analyze_plan(const std::string& config, const std::vector<RouteRecord>& routes, const Instance& inst,
                    bool depot_legs = true);

/// Fills the percentage fields from a baseline report.
void relate_to_baseline(Report& report, const Report& baseline);

/// Summary CSV, one row per report.
void write_summary_csv(std::ostream& os, const std::vector<Report>& reports);
/// Bins CSV, one row per (config, bin).
void write_bins_csv(std::ostream& os, const std::vector<Report>& reports);
/// Inverse of the two writers.
std::vector<Report> read_report_csv(std::istream& summary, std::istream& bins);

/// Number of trips served by a plan (each pickup counted once).
int trips_served(const std::vector<RouteRecord>& routes, const Instance& inst);

}  // namespace ctspav
