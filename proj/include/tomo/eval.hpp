#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "csv.hpp"
#include "metric.hpp"
#include "partition.hpp"
#include "swarm.hpp"

namespace tomo {

/// Normalized mutual information I(X;Y) / max(H(X), H(Y)) in [0, 1].
///
/// When both partitions are a single cluster the entropies vanish; the value
/// is then 1 (they are necessarily identical).
inline double nmi(const Partition& found, const Partition& truth) {
  if (found.size() != truth.size()) throw std::invalid_argument("nmi: partitions cover different node sets");
  if (found.size() == 0) throw std::invalid_argument("nmi: empty partitions");
  const auto n = static_cast<double>(found.size());
  std::vector<double> a(found.cluster_count(), 0.0), b(truth.cluster_count(), 0.0);
  std::map<std::pair<ClusterId, ClusterId>, double> joint;
  for (NodeId i = 0; i < found.size(); ++i) {
    a[found[i]] += 1.0;
    b[truth[i]] += 1.0;
    joint[{found[i], truth[i]}] += 1.0;
  }
  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0.0) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double hx = entropy(a);
  const double hy = entropy(b);
  const double hmax = std::max(hx, hy);
  if (hmax <= 0.0) return found == truth ? 1.0 : 0.0;
  double mi = 0.0;
  for (const auto& [cell, c] : joint) mi += (c / n) * std::log(c * n / (a[cell.first] * b[cell.second]));
  return std::clamp(mi / hmax, 0.0, 1.0);
}

struct TracePoint {
  std::uint64_t iterations = 0;
  double nmi = 0.0;
  double modularity = 0.0;
  std::size_t clusters = 0;
};

using ConvergenceTrace = std::vector<TracePoint>;

/// For every prefix of the runs: aggregate, cluster, score against truth.
/// The last clustering is returned through `final_result` when given.
inline ConvergenceTrace convergence_trace(std::span<const TransferLedger> ledgers, const Partition& truth,
                                          std::uint64_t cluster_seed, LouvainResult* final_result = nullptr,
                                          MeasurementGraph* final_graph = nullptr) {
  if (ledgers.empty()) throw std::invalid_argument("convergence_trace needs at least one run");
  ConvergenceTrace trace;
  MeasurementGraph acc(ledgers.front().node_count(), 0);
  LouvainResult last;
  for (const auto& ledger : ledgers) {
    acc.accumulate(single_run_weights(ledger));
    last = louvain(acc, cluster_seed);
    trace.push_back({acc.iterations(), nmi(last.partition, truth), last.score.q, last.partition.cluster_count()});
  }
  if (final_result) *final_result = std::move(last);
  if (final_graph) *final_graph = std::move(acc);
  return trace;
}

inline std::string trace_csv(const ConvergenceTrace& trace) {
  std::string out = "n,nmi,modularity,k\n";
  for (const auto& p : trace)
    out += std::to_string(p.iterations) + "," + csv::format(p.nmi) + "," + csv::format(p.modularity) + "," +
           std::to_string(p.clusters) + "\n";
  return out;
}

}  // namespace tomo
