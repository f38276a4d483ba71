#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "metric.hpp"
#include "partition.hpp"

namespace tomo {

inline constexpr std::string_view kClusterShapes[] = {"circle",   "diamond", "triangle", "box",
                                                       "pentagon", "hexagon", "invtriangle", "octagon",
                                                       "house",    "invhouse", "trapezium", "parallelogram"};

namespace detail {

inline std::string dot_id(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Undirected DOT document for an external spring layout (neato).
///
/// Node shapes encode the ground-truth cluster. Only the heaviest
/// ceil(edge_fraction * |E|) edges are emitted (heavier first, then by node
/// pair). Each edge carries `weight` = w(e) and `len` = c / w(e), with c set
/// so that the median emitted `len` is 1.
inline std::string to_dot(const MeasurementGraph& graph, const Partition& truth, double edge_fraction,
                          const std::vector<std::string>& node_names = {}) {
  if (graph.node_count() == 0 || graph.edge_count() == 0) throw std::invalid_argument("to_dot: empty graph");
  if (!(edge_fraction > 0.0 && edge_fraction <= 1.0)) throw std::invalid_argument("to_dot: edge_fraction must be in (0, 1]");
  if (truth.size() != graph.node_count()) throw std::invalid_argument("to_dot: ground truth does not cover the graph");
  if (!node_names.empty() && node_names.size() != graph.node_count())
    throw std::invalid_argument("to_dot: node name count mismatch");

  auto edges = graph.weighted_edges();
  std::stable_sort(edges.begin(), edges.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  const auto keep = static_cast<std::size_t>(std::ceil(edge_fraction * static_cast<double>(edges.size()) - 1e-9));
  edges.resize(std::clamp<std::size_t>(keep, 1, edges.size()));

  std::vector<double> inverse;
  inverse.reserve(edges.size());
  for (const auto& e : edges) inverse.push_back(1.0 / e.second);
  std::sort(inverse.begin(), inverse.end());
  const std::size_t mid = inverse.size() / 2;
  const double median_inverse = inverse.size() % 2 ? inverse[mid] : 0.5 * (inverse[mid - 1] + inverse[mid]);
  const double scale = 1.0 / median_inverse;

  std::string out = "graph tomography {\n  node [style=filled, fillcolor=white];\n";
  for (NodeId i = 0; i < graph.node_count(); ++i) {
    const auto cluster = truth[i];
    const auto shape = kClusterShapes[cluster % std::size(kClusterShapes)];
    const std::string label = node_names.empty() ? std::to_string(i) : node_names[i];
    out += "  " + std::to_string(i) + " [label=" + detail::dot_id(label) + ", shape=" + std::string(shape) +
           ", cluster=" + std::to_string(cluster) + "];\n";
  }
  for (const auto& [e, w] : edges) {
    out += "  " + std::to_string(e.first) + " -- " + std::to_string(e.second) + " [weight=" + csv::format_fixed(w, 6) +
           ", len=" + csv::format_fixed(scale / w, 6) + "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace tomo
