#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "partition.hpp"

namespace tomo {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using LinkId = std::uint32_t;

/// One end of a link: either a host (node) or a switch.
struct Endpoint {
  enum class Kind : std::uint8_t { node, switch_ };
  Kind kind = Kind::node;
  std::uint32_t index = 0;

  static Endpoint node(NodeId i) { return {Kind::node, i}; }
  static Endpoint switch_(std::uint32_t i) { return {Kind::switch_, i}; }
  bool is_node() const noexcept { return kind == Kind::node; }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Capacity-labelled link. Capacities are kept in Mbps exactly as declared.
struct Link {
  Endpoint a;
  Endpoint b;
  double capacity_mbps = 0.0;
  bool duplex = true;
  /// Upper bound on the rate of any single flow crossing the link; 0 = none.
  double flow_cap_mbps = 0.0;

  double capacity_bps() const noexcept { return capacity_mbps * 1e6; }
  double flow_cap_bps() const noexcept { return flow_cap_mbps * 1e6; }
  friend bool operator==(const Link&, const Link&) = default;
};

/// Hosts, switches and links. Immutable after `PhysicalTopology::build`.
class PhysicalTopology {
 public:
  /// Validates and assembles a topology. Throws TopologyError.
  static PhysicalTopology build(std::vector<std::string> node_names, std::vector<std::string> switch_names,
                                std::vector<Link> links);

  std::size_t node_count() const noexcept { return node_names_.size(); }
  std::size_t switch_count() const noexcept { return switch_names_.size(); }
  const std::vector<std::string>& node_names() const noexcept { return node_names_; }
  const std::vector<std::string>& switch_names() const noexcept { return switch_names_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const Link& link(LinkId id) const { return links_.at(id); }
  const std::string& node_name(NodeId n) const { return node_names_.at(n); }

  LinkId access_link(NodeId n) const { return access_link_.at(n); }
  double node_nic_capacity_bps(NodeId n) const { return links_[access_link(n)].capacity_bps(); }

  std::string endpoint_name(const Endpoint& e) const {
    return e.is_node() ? node_names_.at(e.index) : switch_names_.at(e.index);
  }

  /// Vertex numbering used by graph searches: nodes first, then switches.
  std::size_t vertex(const Endpoint& e) const noexcept {
    return e.is_node() ? e.index : node_names_.size() + e.index;
  }
  std::size_t vertex_count() const noexcept { return node_names_.size() + switch_names_.size(); }

  /// (link, neighbour vertex) pairs, sorted by link id.
  const std::vector<std::pair<LinkId, std::size_t>>& incident(std::size_t vertex) const {
    return adjacency_.at(vertex);
  }

  friend bool operator==(const PhysicalTopology& x, const PhysicalTopology& y) {
    return x.node_names_ == y.node_names_ && x.switch_names_ == y.switch_names_ && x.links_ == y.links_;
  }

 private:
  std::vector<std::string> node_names_;
  std::vector<std::string> switch_names_;
  std::vector<Link> links_;
  std::vector<LinkId> access_link_;
  std::vector<std::vector<std::pair<LinkId, std::size_t>>> adjacency_;
};

inline PhysicalTopology PhysicalTopology::build(std::vector<std::string> node_names,
                                                std::vector<std::string> switch_names, std::vector<Link> links) {
  PhysicalTopology t;
  t.node_names_ = std::move(node_names);
  t.switch_names_ = std::move(switch_names);
  t.links_ = std::move(links);

  if (t.node_names_.size() < 2) throw TopologyError("topology needs at least 2 nodes");
  {
    std::unordered_map<std::string, int> seen;
    for (const auto& n : t.node_names_) {
      if (n.empty()) throw TopologyError("empty node name");
      if (seen[n]++) throw TopologyError("duplicate name '" + n + "'");
    }
    for (const auto& s : t.switch_names_) {
      if (s.empty()) throw TopologyError("empty switch name");
      if (seen[s]++) throw TopologyError("duplicate name '" + s + "'");
    }
  }

  const std::size_t vertices = t.vertex_count();
  t.adjacency_.assign(vertices, {});
  std::map<std::pair<std::size_t, std::size_t>, LinkId> pairs;
  std::vector<std::vector<LinkId>> node_links(t.node_names_.size());

  for (LinkId id = 0; id < t.links_.size(); ++id) {
    const Link& l = t.links_[id];
    auto in_range = [&](const Endpoint& e) {
      return e.is_node() ? e.index < t.node_names_.size() : e.index < t.switch_names_.size();
    };
    const std::string where = "links[" + std::to_string(id) + "]";
    if (!in_range(l.a) || !in_range(l.b)) throw TopologyError(where + ": endpoint out of range");
    const std::string label = where + " (" + t.endpoint_name(l.a) + " - " + t.endpoint_name(l.b) + ")";
    if (!(l.capacity_mbps > 0.0) || !std::isfinite(l.capacity_mbps))
      throw TopologyError(label + ": capacity must be positive");
    if (l.flow_cap_mbps < 0.0 || !std::isfinite(l.flow_cap_mbps))
      throw TopologyError(label + ": flow cap must be non-negative");
    const auto va = t.vertex(l.a);
    const auto vb = t.vertex(l.b);
    if (va == vb) throw TopologyError(label + ": self-link");
    auto key = std::minmax(va, vb);
    if (!pairs.emplace(std::pair{key.first, key.second}, id).second)
      throw TopologyError(label + ": duplicate link between the same endpoints");
    t.adjacency_[va].emplace_back(id, vb);
    t.adjacency_[vb].emplace_back(id, va);
    if (l.a.is_node()) node_links[l.a.index].push_back(id);
    if (l.b.is_node()) node_links[l.b.index].push_back(id);
  }

  t.access_link_.resize(t.node_names_.size());
  for (NodeId n = 0; n < t.node_names_.size(); ++n) {
    if (node_links[n].size() != 1) {
      throw TopologyError("node '" + t.node_names_[n] + "' has " + std::to_string(node_links[n].size()) +
                          " access links, expected exactly 1");
    }
    t.access_link_[n] = node_links[n].front();
  }

  std::vector<char> seen(vertices, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto [lid, w] : t.adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  if (reached != vertices) {
    for (std::size_t v = 0; v < vertices; ++v) {
      if (!seen[v]) {
        const auto e = v < t.node_names_.size() ? Endpoint::node(static_cast<NodeId>(v))
                                                : Endpoint::switch_(static_cast<std::uint32_t>(v - t.node_names_.size()));
        throw TopologyError("topology is disconnected: '" + t.endpoint_name(e) + "' unreachable from '" +
                            t.node_names_[0] + "'");
      }
    }
  }
  return t;
}

/// A topology together with the administrator's logical clustering.
struct TopologyDocument {
  PhysicalTopology topology;
  Partition ground_truth;
};

namespace detail {

inline std::vector<int> bfs_distances(const PhysicalTopology& t, std::size_t from) {
  std::vector<int> dist(t.vertex_count(), -1);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto [lid, w] : t.incident(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace detail

/// Hop-shortest path between two nodes as an ordered list of links from `src`.
///
/// Among equal-length paths the lexicographically smallest link-id sequence,
/// taken from the lower-numbered endpoint, wins; the path for the opposite
/// direction is its reverse, so route(a,b) == reverse(route(b,a)) always.
inline std::vector<LinkId> route(const PhysicalTopology& t, NodeId src, NodeId dst) {
  if (src >= t.node_count() || dst >= t.node_count()) throw TopologyError("route: node out of range");
  if (src == dst) throw TopologyError("route: source equals destination");
  const NodeId lo = std::min(src, dst);
  const NodeId hi = std::max(src, dst);

  const auto to_dst = detail::bfs_distances(t, t.vertex(Endpoint::node(hi)));
  std::vector<LinkId> path;
  std::size_t v = t.vertex(Endpoint::node(lo));
  int remaining = to_dst[v];
  while (remaining > 0) {
    // incident() is sorted by link id, so the first hop that stays on a
    // shortest path is the lexicographically smallest choice.
    for (auto [lid, w] : t.incident(v)) {
      if (to_dst[w] == remaining - 1) {
        path.push_back(lid);
        v = w;
        break;
      }
    }
    --remaining;
  }
  if (src != lo) std::reverse(path.begin(), path.end());
  return path;
}

/// All-pairs node routes, computed once per topology.
class RouteTable {
 public:
  explicit RouteTable(const PhysicalTopology& t) : n_(t.node_count()), routes_(n_ * n_) {
    for (NodeId a = 0; a < n_; ++a) {
      for (NodeId b = a + 1; b < n_; ++b) {
        auto forward = route(t, a, b);
        routes_[b * n_ + a].assign(forward.rbegin(), forward.rend());
        routes_[a * n_ + b] = std::move(forward);
      }
    }
  }

  const std::vector<LinkId>& operator()(NodeId src, NodeId dst) const { return routes_.at(src * n_ + dst); }
  std::size_t node_count() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::vector<LinkId>> routes_;
};

// ---------------------------------------------------------------------------
// Topology documents (JSON data model).

namespace detail {

[[noreturn]] inline void doc_error(const std::string& where, const std::string& what) {
  throw TopologyError(where + ": " + what);
}

inline std::vector<std::string> name_list(const nlohmann::json& doc, const char* key, bool required) {
  std::vector<std::string> out;
  if (!doc.contains(key)) {
    if (required) doc_error(key, "missing key");
    return out;
  }
  const auto& arr = doc.at(key);
  if (!arr.is_array()) doc_error(key, "expected a list of names");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) doc_error(std::string(key) + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

inline double positive_number(const nlohmann::json& obj, const char* key, const std::string& where,
                              bool required, double fallback = 0.0) {
  if (!obj.contains(key)) {
    if (required) doc_error(where, std::string("missing '") + key + "'");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) doc_error(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

/// Parses a topology document:
///   { "nodes": [...], "switches": [...],
///     "links": [{"a":..,"b":..,"capacity_mbps":..,"duplex":true,"flow_cap_mbps":..}],
///     "ground_truth": {"node": label, ...} }
/// Names resolve to dense ids by declaration order; labels may be strings or
/// integers and are densified by first appearance in node order.
inline TopologyDocument parse_topology(const nlohmann::json& doc) {
  if (!doc.is_object()) throw TopologyError("topology document must be an object");
  auto nodes = detail::name_list(doc, "nodes", true);
  auto switches = detail::name_list(doc, "switches", false);

  std::unordered_map<std::string, Endpoint> names;
  for (NodeId i = 0; i < nodes.size(); ++i)
    if (!names.emplace(nodes[i], Endpoint::node(i)).second) detail::doc_error("nodes", "duplicate name '" + nodes[i] + "'");
  for (std::uint32_t i = 0; i < switches.size(); ++i)
    if (!names.emplace(switches[i], Endpoint::switch_(i)).second)
      detail::doc_error("switches", "duplicate name '" + switches[i] + "'");

  if (!doc.contains("links") || !doc.at("links").is_array()) detail::doc_error("links", "missing list");
  std::vector<Link> links;
  const auto& arr = doc.at("links");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& item = arr[i];
    std::string where = "links[" + std::to_string(i) + "]";
    if (!item.is_object()) detail::doc_error(where, "expected an object");
    auto endpoint = [&](const char* key) {
      if (!item.contains(key) || !item.at(key).is_string())
        detail::doc_error(where, std::string("missing endpoint '") + key + "'");
      const auto name = item.at(key).get<std::string>();
      auto it = names.find(name);
      if (it == names.end()) detail::doc_error(where, "unknown endpoint '" + name + "'");
      return it->second;
    };
    Link l;
    l.a = endpoint("a");
    l.b = endpoint("b");
    where += " (" + item.at("a").get<std::string>() + " - " + item.at("b").get<std::string>() + ")";
    l.capacity_mbps = detail::positive_number(item, "capacity_mbps", where, true);
    if (!(l.capacity_mbps > 0.0)) detail::doc_error(where, "capacity must be positive");
    l.flow_cap_mbps = detail::positive_number(item, "flow_cap_mbps", where, false, 0.0);
    if (item.contains("duplex")) {
      if (!item.at("duplex").is_boolean()) detail::doc_error(where, "'duplex' must be a boolean");
      l.duplex = item.at("duplex").get<bool>();
    }
    links.push_back(l);
  }

  auto topology = PhysicalTopology::build(nodes, std::move(switches), std::move(links));

  if (!doc.contains("ground_truth") || !doc.at("ground_truth").is_object())
    detail::doc_error("ground_truth", "missing map of node name to label");
  const auto& gt = doc.at("ground_truth");
  std::unordered_map<std::string, std::int64_t> label_ids;
  std::vector<std::int64_t> labels(nodes.size());
  for (auto it = gt.begin(); it != gt.end(); ++it) {
    auto found = names.find(it.key());
    if (found == names.end() || !found->second.is_node())
      detail::doc_error("ground_truth", "unknown node '" + it.key() + "'");
  }
  for (NodeId i = 0; i < nodes.size(); ++i) {
    if (!gt.contains(nodes[i])) detail::doc_error("ground_truth", "node '" + nodes[i] + "' has no label");
    const auto& v = gt.at(nodes[i]);
    std::string key;
    if (v.is_string()) {
      key = "s:" + v.get<std::string>();
    } else if (v.is_number_integer()) {
      key = "i:" + std::to_string(v.get<std::int64_t>());
    } else {
      detail::doc_error("ground_truth", "label of '" + nodes[i] + "' must be a string or integer");
    }
    labels[i] = label_ids.try_emplace(key, static_cast<std::int64_t>(label_ids.size())).first->second;
  }
  return {std::move(topology), Partition(labels)};
}

inline TopologyDocument parse_topology(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TopologyError(std::string("malformed topology document: ") + e.what());
  }
  return parse_topology(doc);
}

inline nlohmann::json to_json(const PhysicalTopology& t, const Partition& truth) {
  nlohmann::json doc;
  doc["nodes"] = t.node_names();
  doc["switches"] = t.switch_names();
  auto links = nlohmann::json::array();
  for (const auto& l : t.links()) {
    nlohmann::json item{{"a", t.endpoint_name(l.a)},
                        {"b", t.endpoint_name(l.b)},
                        {"capacity_mbps", l.capacity_mbps},
                        {"duplex", l.duplex}};
    if (l.flow_cap_mbps > 0.0) item["flow_cap_mbps"] = l.flow_cap_mbps;
    links.push_back(std::move(item));
  }
  doc["links"] = std::move(links);
  nlohmann::json gt = nlohmann::json::object();
  for (NodeId i = 0; i < t.node_count(); ++i) gt[t.node_name(i)] = truth[i];
  doc["ground_truth"] = std::move(gt);
  return doc;
}

inline std::string serialize_topology(const PhysicalTopology& t, const Partition& truth) {
  return to_json(t, truth).dump(2) + "\n";
}

}  // namespace tomo
