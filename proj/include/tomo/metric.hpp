#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "partition.hpp"
#include "swarm.hpp"

namespace tomo {

/// Undirected weighted graph of exchanged fragments, averaged over runs.
///
/// Each edge keeps the exact sum of its per-run weights (integer-valued for
/// simulated runs, hence exact in a double) together with the number of
/// aggregated runs; the averaged weight is only formed on read. Absent edges
/// are implicit zeros.
class MeasurementGraph {
 public:
  using Edge = std::pair<NodeId, NodeId>;  // first < second

  MeasurementGraph() = default;
  explicit MeasurementGraph(std::size_t node_count, std::uint64_t iterations = 1)
      : node_count_(node_count), iterations_(iterations) {}

  std::size_t node_count() const noexcept { return node_count_; }
  std::uint64_t iterations() const noexcept { return iterations_; }

  /// Adds `amount` to the summed weight of {a, b}.
  void add(NodeId a, NodeId b, double amount) {
    if (a >= node_count_ || b >= node_count_) throw std::out_of_range("edge endpoint outside node range");
    if (a == b) throw std::invalid_argument("self-edges are not part of the measurement graph");
    if (amount < 0.0) throw std::invalid_argument("edge weights must be non-negative");
    if (amount == 0.0) return;
    sums_[std::minmax(a, b)] += amount;
  }

  double sum(NodeId a, NodeId b) const {
    auto it = sums_.find(std::minmax(a, b));
    return it == sums_.end() ? 0.0 : it->second;
  }

  /// Averaged weight w(e) = sum / iterations.
  double weight(NodeId a, NodeId b) const { return sum(a, b) / static_cast<double>(iterations_); }

  /// Nonzero edges with their summed weights, ordered by (a, b).
  const std::map<Edge, double>& sums() const noexcept { return sums_; }
  std::size_t edge_count() const noexcept { return sums_.size(); }

  /// Nonzero edges with averaged weights, ordered by (a, b).
  std::vector<std::pair<Edge, double>> weighted_edges() const {
    std::vector<std::pair<Edge, double>> out;
    out.reserve(sums_.size());
    for (const auto& [e, s] : sums_) out.emplace_back(e, s / static_cast<double>(iterations_));
    return out;
  }

  double total_sum() const {
    double t = 0.0;
    for (const auto& [e, s] : sums_) t += s;
    return t;
  }

  double total_weight() const { return total_sum() / static_cast<double>(iterations_); }

  /// Folds another graph in: sums add, iteration counts add.
  void accumulate(const MeasurementGraph& other) {
    if (other.node_count_ != node_count_) throw std::invalid_argument("cannot aggregate graphs of different size");
    for (const auto& [e, s] : other.sums_) sums_[e] += s;
    iterations_ += other.iterations_;
  }

  friend bool operator==(const MeasurementGraph&, const MeasurementGraph&) = default;

 private:
  std::size_t node_count_ = 0;
  std::uint64_t iterations_ = 1;
  std::map<Edge, double> sums_;
};

/// w({a,b}) = count(a->b) + count(b->a) for one broadcast.
inline MeasurementGraph single_run_weights(const TransferLedger& ledger) {
  MeasurementGraph g(ledger.node_count(), 1);
  for (const auto& [key, c] : ledger.counts()) g.add(key.first, key.second, static_cast<double>(c));
  return g;
}

/// Averages single-run graphs: w(e) = sum_i w_i(e) / n.
inline MeasurementGraph aggregate(std::span<const MeasurementGraph> graphs) {
  if (graphs.empty()) throw std::invalid_argument("aggregate needs at least one graph");
  MeasurementGraph out(graphs.front().node_count(), 0);
  for (const auto& g : graphs) {
    if (g.iterations() != 1) throw std::invalid_argument("aggregate expects single-run graphs");
    out.accumulate(g);
  }
  return out;
}

inline std::string weights_csv(const MeasurementGraph& g) {
  std::string out = "node_a,node_b,weight\n";
  for (const auto& [e, w] : g.weighted_edges())
    out += std::to_string(e.first) + "," + std::to_string(e.second) + "," + csv::format(w) + "\n";
  return out;
}

/// Reads `node_a,node_b,weight` rows. The result holds the weights as a
/// single iteration. Node count is max(node_count, largest id + 1).
inline MeasurementGraph read_weights_csv(std::istream& in, std::size_t node_count = 0) {
  std::vector<std::tuple<NodeId, NodeId, double>> rows;
  csv::read(in, "node_a,node_b,weight", [&](const auto& f, std::size_t line) {
    const auto a = csv::parse_number<NodeId>(f[0], "node_a", line);
    const auto b = csv::parse_number<NodeId>(f[1], "node_b", line);
    const auto w = csv::parse_number<double>(f[2], "weight", line);
    if (a == b) throw FormatError("line " + std::to_string(line) + ": self-edge");
    if (!(w >= 0.0)) throw FormatError("line " + std::to_string(line) + ": negative weight");
    rows.emplace_back(a, b, w);
    node_count = std::max<std::size_t>(node_count, std::max(a, b) + std::size_t{1});
  });
  MeasurementGraph g(node_count, 1);
  for (auto [a, b, w] : rows) g.add(a, b, w);
  return g;
}

}  // namespace tomo
