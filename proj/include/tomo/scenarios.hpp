#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topology.hpp"

namespace tomo {

struct Scenario {
  std::string name;
  std::string description;
  PhysicalTopology topology;
  Partition ground_truth;
};

/// Achievable point-to-point rate inside an Ethernet cluster.
inline constexpr double kClusterNicMbps = 890.0;
/// Nominal inter-site trunk and the per-flow rate reachable across it.
inline constexpr double kTrunkMbps = 10000.0;
inline constexpr double kInterSiteFlowMbps = 787.0;
/// Single Gigabit link between switch groups.
inline constexpr double kGigabitMbps = 1000.0;
/// Fast uplink between switches inside a site.
inline constexpr double kIntraSiteUplinkMbps = 10000.0;

namespace detail {

class ScenarioBuilder {
 public:
  std::uint32_t add_switch(std::string name) {
    switches_.push_back(std::move(name));
    return static_cast<std::uint32_t>(switches_.size() - 1);
  }

  /// Adds `count` hosts named prefix-1..prefix-count hanging off `sw`.
  void add_hosts(const std::string& prefix, std::size_t count, std::uint32_t sw, int truth_label) {
    for (std::size_t i = 1; i <= count; ++i) {
      nodes_.push_back(prefix + "-" + std::to_string(i));
      labels_.push_back(truth_label);
      links_.push_back({Endpoint::node(static_cast<NodeId>(nodes_.size() - 1)), Endpoint::switch_(sw),
                        kClusterNicMbps, true, 0.0});
    }
  }

  void connect(std::uint32_t a, std::uint32_t b, double capacity_mbps, double flow_cap_mbps = 0.0, bool duplex = true) {
    links_.push_back({Endpoint::switch_(a), Endpoint::switch_(b), capacity_mbps, duplex, flow_cap_mbps});
  }

  Scenario finish(std::string name, std::string description) {
    auto topology = PhysicalTopology::build(std::move(nodes_), std::move(switches_), std::move(links_));
    return {std::move(name), std::move(description), std::move(topology), Partition(labels_)};
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<std::string> switches_;
  std::vector<Link> links_;
  std::vector<int> labels_;
};

inline Scenario make_bordeaux() {
  ScenarioBuilder b;
  const auto dell = b.add_switch("dell");
  const auto cisco = b.add_switch("cisco");
  const auto borderline_sw = b.add_switch("borderline-sw");
  b.connect(dell, cisco, kGigabitMbps);
  b.connect(cisco, borderline_sw, kIntraSiteUplinkMbps);
  b.add_hosts("bordeplage", 32, dell, 0);
  b.add_hosts("borderline", 5, borderline_sw, 1);
  b.add_hosts("bordereau", 27, cisco, 1);
  return b.finish("B", "single site, 32+5+27 nodes, 1 Gbps Dell-Cisco bottleneck; 3 physical / 2 logical clusters");
}

inline Scenario make_two_by_two() {
  ScenarioBuilder b;
  const auto plage = b.add_switch("bordeplage-sw");
  const auto line = b.add_switch("borderline-sw");
  b.connect(plage, line, kGigabitMbps);
  b.add_hosts("bordeplage", 2, plage, 0);
  b.add_hosts("borderline", 2, line, 0);
  return b.finish("2x2", "2+2 nodes across the 1 Gbps link, which is not a bottleneck at this size");
}

/// Sites hang off a backbone switch; `hub_site` (if >= 0) is the backbone itself.
inline Scenario make_sites(std::string name, std::string description, const std::vector<std::string>& sites,
                           std::size_t per_site, int hub_site) {
  ScenarioBuilder b;
  std::vector<std::uint32_t> site_sw;
  for (const auto& s : sites) site_sw.push_back(b.add_switch(s + "-sw"));
  std::uint32_t hub;
  if (hub_site >= 0) {
    hub = site_sw[static_cast<std::size_t>(hub_site)];
  } else {
    hub = b.add_switch("renater");
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (site_sw[i] != hub) b.connect(site_sw[i], hub, kTrunkMbps, kInterSiteFlowMbps, false);
  }
  for (std::size_t i = 0; i < sites.size(); ++i) b.add_hosts(sites[i], per_site, site_sw[i], static_cast<int>(i));
  return b.finish(std::move(name), std::move(description));
}

inline Scenario make_bordeaux_toulouse() {
  ScenarioBuilder b;
  const auto dell = b.add_switch("dell");
  const auto cisco = b.add_switch("cisco");
  const auto toulouse = b.add_switch("toulouse-sw");
  b.connect(dell, cisco, kGigabitMbps);
  b.connect(cisco, toulouse, kTrunkMbps, kInterSiteFlowMbps);
  b.add_hosts("bordeplage", 16, dell, 0);
  b.add_hosts("bordereau", 16, cisco, 1);
  b.add_hosts("toulouse", 32, toulouse, 2);
  return b.finish("BT", "Bordeaux (two logical clusters behind a 1 Gbps link) + Toulouse, 3-cluster ground truth");
}

}  // namespace detail

/// Names of the built-in scenarios, in listing order.
inline std::vector<std::string> builtin_scenario_names() { return {"B", "2x2", "GT", "BT", "BGT", "BGTL"}; }

/// Builds one built-in scenario. Throws std::invalid_argument for unknown names.
inline Scenario builtin_scenario(std::string_view name) {
  if (name == "B") return detail::make_bordeaux();
  if (name == "2x2") return detail::make_two_by_two();
  if (name == "GT")
    return detail::make_sites("GT", "Grenoble + Toulouse, 32 nodes each, flat sites", {"grenoble", "toulouse"}, 32,
                              -1);
  if (name == "BT") return detail::make_bordeaux_toulouse();
  if (name == "BGT")
    return detail::make_sites("BGT", "Bordeaux + Grenoble + Toulouse, 32 nodes each",
                              {"bordeaux", "grenoble", "toulouse"}, 32, -1);
  if (name == "BGTL")
    return detail::make_sites("BGTL", "Bordeaux + Grenoble + Toulouse + Lyon, 16 nodes each, star hub at Lyon",
                              {"bordeaux", "grenoble", "toulouse", "lyon"}, 16, 3);
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

inline std::map<std::string, Scenario> builtin_scenarios() {
  std::map<std::string, Scenario> out;
  for (const auto& n : builtin_scenario_names()) out.emplace(n, builtin_scenario(n));
  return out;
}

}  // namespace tomo
