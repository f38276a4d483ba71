#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "metric.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace tomo {

/// Q = sum_i (e_ii - a_i^2) with the per-cluster terms kept for inspection.
struct ModularityScore {
  double q = 0.0;
  std::vector<double> e_ii;  // intra-cluster weight / W
  std::vector<double> a_i;   // cluster degree weight / 2W
};

inline ModularityScore modularity(const MeasurementGraph& graph, const Partition& partition) {
  if (partition.size() != graph.node_count()) throw std::invalid_argument("partition does not cover the graph");
  const double total = graph.total_sum();
  if (!(total > 0.0)) throw std::invalid_argument("modularity of a zero-weight graph is undefined");
  ModularityScore s;
  const std::size_t k = partition.cluster_count();
  std::vector<double> intra(k, 0.0), degree(k, 0.0);
  for (const auto& [e, w] : graph.sums()) {
    const auto ca = partition[e.first];
    const auto cb = partition[e.second];
    degree[ca] += w;
    degree[cb] += w;
    if (ca == cb) intra[ca] += w;
  }
  s.e_ii.resize(k);
  s.a_i.resize(k);
  double numerator = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    s.e_ii[c] = intra[c] / total;
    s.a_i[c] = degree[c] / (2.0 * total);
    numerator += 4.0 * total * intra[c] - degree[c] * degree[c];
  }
  // One division at the end keeps integer-weight graphs exact up to rounding.
  s.q = numerator / (4.0 * total * total);
  return s;
}

struct LouvainResult {
  Partition partition;
  ModularityScore score;
  std::size_t levels = 0;  // coarsening levels built
};

namespace detail {

/// Symmetric weighted graph for one Louvain level. `loops[i]` holds A_ii,
/// i.e. twice the weight internal to coarse node i, so that
/// degree(i) = loops[i] + sum of incident edge weights.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> loops;
  std::vector<double> degree;

  std::size_t size() const noexcept { return adj.size(); }
};

inline LevelGraph level_graph(const MeasurementGraph& g) {
  LevelGraph lg;
  const auto n = g.node_count();
  lg.adj.resize(n);
  lg.loops.assign(n, 0.0);
  lg.degree.assign(n, 0.0);
  for (const auto& [e, w] : g.sums()) {
    lg.adj[e.first].emplace_back(e.second, w);
    lg.adj[e.second].emplace_back(e.first, w);
    lg.degree[e.first] += w;
    lg.degree[e.second] += w;
  }
  return lg;
}

/// Local moving phase. Returns dense community labels (first-appearance
/// order) and whether any node changed community.
inline std::pair<std::vector<std::uint32_t>, bool> move_nodes(const LevelGraph& g, double two_m, double total_weight,
                                                              Rng& rng, std::vector<std::uint32_t> comm = {}) {
  const std::size_t n = g.size();
  if (comm.empty()) {
    comm.resize(n);
    std::iota(comm.begin(), comm.end(), 0U);
  }
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += g.degree[i];
  std::vector<double> link_to(n, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  bool moved_any = false;

  for (int pass = 0; pass < 1000; ++pass) {
    rng.shuffle(order);
    double improvement = 0.0;
    for (auto i : order) {
      const double ki = g.degree[i];
      const auto own = comm[i];
      touched.clear();
      for (auto [j, w] : g.adj[i]) {
        const auto c = comm[j];
        if (link_to[c] == 0.0) touched.push_back(c);
        link_to[c] += w;
      }
      tot[own] -= ki;
      auto gain = [&](std::uint32_t c) { return link_to[c] - tot[c] * ki / two_m; };
      const double stay = gain(own);
      std::sort(touched.begin(), touched.end());
      std::uint32_t best = own;
      double best_gain = stay;
      bool have_candidate = false;
      std::uint32_t cand = own;
      double cand_gain = -std::numeric_limits<double>::infinity();
      for (auto c : touched) {
        if (c == own) continue;
        const double gc = gain(c);
        if (!have_candidate || gc > cand_gain) {
          cand = c;
          cand_gain = gc;
          have_candidate = true;
        }
      }
      // Move only on a strict improvement; equal gains keep the node put.
      const double eps = 1e-12 * (ki + std::abs(stay));
      if (have_candidate && cand_gain > stay + eps) {
        best = cand;
        best_gain = cand_gain;
      }
      tot[best] += ki;
      if (best != own) {
        comm[i] = best;
        improvement += best_gain - stay;
        moved_any = true;
      }
      for (auto c : touched) link_to[c] = 0.0;
    }
    if (improvement < 1e-9 * total_weight) break;
  }

  std::vector<std::uint32_t> dense(n, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  for (auto& c : comm) {
    if (dense[c] == std::numeric_limits<std::uint32_t>::max()) dense[c] = next++;
    c = dense[c];
  }
  return {std::move(comm), moved_any};
}

inline LevelGraph coarsen(const LevelGraph& g, const std::vector<std::uint32_t>& comm) {
  const std::size_t k = comm.empty() ? 0 : *std::max_element(comm.begin(), comm.end()) + std::size_t{1};
  LevelGraph out;
  out.adj.resize(k);
  out.loops.assign(k, 0.0);
  out.degree.assign(k, 0.0);
  std::vector<std::map<std::uint32_t, double>> links(k);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ci = comm[i];
    out.loops[ci] += g.loops[i];
    out.degree[ci] += g.degree[i];
    for (auto [j, w] : g.adj[i]) {
      const auto cj = comm[j];
      if (ci == cj) {
        out.loops[ci] += w;  // each internal edge is seen from both ends
      } else {
        links[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c)
    for (auto [d, w] : links[c]) out.adj[c].emplace_back(d, w);
  return out;
}

/// Vertex-mover fine-tuning. Each sweep moves every node exactly once, always
/// taking the best remaining move into a neighbouring or empty community even
/// when it lowers Q, then restarts from the best state seen. Stops once a sweep
/// ends without improvement.
inline std::vector<std::uint32_t> fine_tune(const LevelGraph& g, double total_weight, std::vector<std::uint32_t> comm) {
  const std::size_t n = g.size();
  const double two_m = 2.0 * total_weight;
  const double eps = 1e-12 * total_weight;
  std::vector<double> tot(n), kin(n * n);
  std::vector<std::uint32_t> size(n);
  std::vector<char> moved(n);
  for (int sweep = 0; sweep < 1000; ++sweep) {
    auto state = comm;
    std::fill(tot.begin(), tot.end(), 0.0);
    std::fill(kin.begin(), kin.end(), 0.0);
    std::fill(size.begin(), size.end(), 0U);
    std::fill(moved.begin(), moved.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      tot[state[i]] += g.degree[i];
      ++size[state[i]];
      for (auto [j, w] : g.adj[i]) kin[i * n + state[j]] += w;
    }
    double gain = 0.0, best_gain = 0.0;
    auto best_state = state;
    for (std::size_t step = 0; step < n; ++step) {
      const auto empty = static_cast<std::uint32_t>(std::find(size.begin(), size.end(), 0U) - size.begin());
      double move_gain = -std::numeric_limits<double>::infinity();
      std::size_t node = n;
      std::uint32_t target = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (moved[i]) continue;
        const auto own = state[i];
        const double ki = g.degree[i];
        for (std::uint32_t c = 0; c < n; ++c) {
          const bool open = c == empty && size[own] > 1;
          if (c == own || !(kin[i * n + c] > 0.0 || open)) continue;
          const double d = kin[i * n + c] - kin[i * n + own] - ki * (tot[c] - tot[own] + ki) / two_m;
          if (d > move_gain) {
            move_gain = d;
            node = i;
            target = c;
          }
        }
      }
      if (node == n) break;
      const auto from = state[node];
      for (auto [j, w] : g.adj[node]) {
        kin[j * n + from] -= w;
        kin[j * n + target] += w;
      }
      tot[from] -= g.degree[node];
      tot[target] += g.degree[node];
      --size[from];
      ++size[target];
      state[node] = target;
      moved[node] = 1;
      gain += move_gain;
      if (gain > best_gain + eps) {
        best_gain = gain;
        best_state = state;
      }
    }
    if (best_gain <= eps) break;
    comm = std::move(best_state);
  }
  return comm;
}

inline std::vector<std::uint32_t> component_labels(const MeasurementGraph& g) {
  const auto n = g.node_count();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0U);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [e, w] : g.sums()) {
    const auto a = find(e.first);
    const auto b = find(e.second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::uint32_t> labels(n);
  for (std::uint32_t i = 0; i < n; ++i) labels[i] = find(i);
  return labels;
}

}  // namespace detail

/// Louvain modularity maximization.
///
/// Alternates a local moving phase (nodes visited in a seeded random order per
/// pass, each moved to the neighbouring community of largest gain, lowest
/// label on ties) with graph coarsening until no node moves. Of the flat
/// partitions induced by the levels, the one with the highest Q is kept and
/// polished with `detail::fine_tune`. This repeats for `restarts` independent
/// seeds derived from `seed`; the best result wins. The partition into
/// connected components (Q >= 0), also fine-tuned, is a candidate too, so the
/// result never scores below zero.
inline LouvainResult louvain(const MeasurementGraph& graph, std::uint64_t seed, std::uint32_t restarts = 4) {
  const double total = graph.total_sum();
  if (!(total > 0.0)) throw std::invalid_argument("louvain needs a graph with positive total weight");
  if (restarts == 0) throw std::invalid_argument("louvain needs at least one restart");
  const double two_m = 2.0 * total;
  const auto base = detail::level_graph(graph);

  LouvainResult best;
  auto consider = [&](std::vector<std::uint32_t> labels, std::size_t levels) {
    Partition flat(detail::fine_tune(base, total, std::move(labels)));
    auto score = modularity(graph, flat);
    if (best.partition.size() == 0 || score.q > best.score.q + 1e-12) {
      best.partition = std::move(flat);
      best.score = std::move(score);
      best.levels = levels;
    }
  };
  for (std::uint32_t r = 0; r < restarts; ++r) {
    Rng rng(r == 0 ? seed : derive_seed(seed, r));
    auto level = base;
    std::vector<std::uint32_t> membership(graph.node_count());
    std::iota(membership.begin(), membership.end(), 0U);
    std::vector<std::uint32_t> top;
    double top_q = -std::numeric_limits<double>::infinity();
    std::size_t levels = 0;
    while (true) {
      auto [comm, moved] = detail::move_nodes(level, two_m, total, rng);
      if (!moved) break;
      ++levels;
      for (auto& m : membership) m = comm[m];
      const double q = modularity(graph, Partition(membership)).q;
      if (q > top_q + 1e-12) {
        top_q = q;
        top = membership;
      }
      level = detail::coarsen(level, comm);
    }
    if (!top.empty()) consider(std::move(top), levels);
  }
  consider(Partition(detail::component_labels(graph)).labels(), 0);
  return best;
}

inline std::string partition_csv(const Partition& p) {
  std::string out = "node,cluster\n";
  for (NodeId i = 0; i < p.size(); ++i) out += std::to_string(i) + "," + std::to_string(p[i]) + "\n";
  return out;
}

/// Reads `node,cluster` rows; every node 0..N-1 must appear exactly once.
inline Partition read_partition_csv(std::istream& in) {
  std::map<NodeId, std::int64_t> rows;
  csv::read(in, "node,cluster", [&](const auto& f, std::size_t line) {
    const auto node = csv::parse_number<NodeId>(f[0], "node", line);
    const auto label = csv::parse_number<std::int64_t>(f[1], "cluster", line);
    if (!rows.emplace(node, label).second)
      throw FormatError("line " + std::to_string(line) + ": node " + std::to_string(node) + " listed twice");
  });
  std::vector<std::int64_t> labels;
  for (const auto& [node, label] : rows) {
    if (node != labels.size()) throw FormatError("partition is missing node " + std::to_string(labels.size()));
    labels.push_back(label);
  }
  return Partition(labels);
}

}  // namespace tomo
