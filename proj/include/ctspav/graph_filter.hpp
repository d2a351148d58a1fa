#pragma once

#include <iosfwd>
#include <vector>

#include "ctspav/instance.hpp"

namespace ctspav {

struct RemovedArc {
  Arc arc;
  char rule = '?';  // 'a'..'f', the first rule that matches
};

/// Arcs surviving the a-priori feasibility rules, with adjacency lookups.
struct ArcSet {
  int node_count = 0;
  std::vector<Arc> arcs;  // sorted by (from, to)
  std::vector<RemovedArc> removal_log;

  /// Index into `arcs`, or -1 if (i, j) was removed.
  [[nodiscard]] int find(NodeId i, NodeId j) const {
    return index_[static_cast<std::size_t>(i) * static_cast<std::size_t>(node_count) + static_cast<std::size_t>(j)];
  }
  [[nodiscard]] bool contains(NodeId i, NodeId j) const { return find(i, j) >= 0; }
  [[nodiscard]] const std::vector<int>& out_arcs(NodeId i) const { return out_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<int>& in_arcs(NodeId i) const { return in_[static_cast<std::size_t>(i)]; }

  /// Rebuilds lookup tables after `arcs` changed.
  void reindex();

 private:
  std::vector<int> index_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

/// First matching removal rule for arc (i, j), or 0 if it survives.
char removal_rule(NodeId i, NodeId j, const Instance& inst);

ArcSet filter_arcs(const PDGraph& graph, const Instance& inst, int threads = 1);

/// Every arc kept, nothing removed (useful for ablations and tests).
ArcSet unfiltered_arcs(const PDGraph& graph);

/// CSV with header "arc,rule", one line per removed arc as "i->j,rule".
void write_removal_csv(std::ostream& os, const ArcSet& arcs);

}  // namespace ctspav
