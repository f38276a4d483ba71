#include <algorithm>
#include <string>

#include <gtest/gtest.h>

#include "tomo/scenarios.hpp"
#include "tomo/topology.hpp"

namespace {

using namespace tomo;

const char* kFourNodes = R"({
  "nodes": ["a1", "a2", "b1", "b2"],
  "switches": ["sa", "sb"],
  "links": [
    {"a": "a1", "b": "sa", "capacity_mbps": 890},
    {"a": "a2", "b": "sa", "capacity_mbps": 890},
    {"a": "b1", "b": "sb", "capacity_mbps": 890},
    {"a": "b2", "b": "sb", "capacity_mbps": 890},
    {"a": "sa", "b": "sb", "capacity_mbps": 1000, "duplex": true}
  ],
  "ground_truth": {"a1": "left", "a2": "left", "b1": "right", "b2": "right"}
})";

std::string expect_error(const std::string& doc) {
  try {
    parse_topology(doc);
  } catch (const TopologyError& e) {
    return e.what();
  }
  ADD_FAILURE() << "document was accepted:\n" << doc;
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

LinkId find_link(const PhysicalTopology& t, const std::string& a, const std::string& b) {
  for (LinkId i = 0; i < t.links().size(); ++i) {
    const auto x = t.endpoint_name(t.link(i).a);
    const auto y = t.endpoint_name(t.link(i).b);
    if ((x == a && y == b) || (x == b && y == a)) return i;
  }
  ADD_FAILURE() << "no link " << a << " - " << b;
  return 0;
}

TEST(ParseTopology, FourNodesTwoSwitches) {
  const auto doc = parse_topology(std::string(kFourNodes));
  const auto& t = doc.topology;
  EXPECT_EQ(t.node_count(), 4u);
  EXPECT_EQ(t.switch_count(), 2u);
  const auto trunk = find_link(t, "sa", "sb");
  EXPECT_DOUBLE_EQ(t.link(trunk).capacity_mbps, 1000.0);
  EXPECT_EQ(doc.ground_truth, Partition({0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(t.node_nic_capacity_bps(0), 890e6);
  const auto path = route(t, 0, 3);
  EXPECT_NE(std::find(path.begin(), path.end(), trunk), path.end());
}

TEST(ParseTopology, MissingCapacityNamesTheLink) {
  std::string doc = kFourNodes;
  doc.replace(doc.find(R"("capacity_mbps": 1000, )"), std::string(R"("capacity_mbps": 1000, )").size(), "");
  const auto msg = expect_error(doc);
  EXPECT_TRUE(contains(msg, "links[4]")) << msg;
  EXPECT_TRUE(contains(msg, "sa - sb")) << msg;
  EXPECT_TRUE(contains(msg, "capacity_mbps")) << msg;
}

TEST(ParseTopology, RejectsInvalidDocuments) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string doc = kFourNodes;
    doc.replace(doc.find(from), from.size(), to);
    return doc;
  };
  EXPECT_TRUE(contains(expect_error("{not json"), "malformed"));
  EXPECT_TRUE(contains(expect_error(with(R"("capacity_mbps": 1000)", R"("capacity_mbps": 0)")), "capacity must be positive"));
  EXPECT_TRUE(contains(expect_error(with(R"("capacity_mbps": 1000)", R"("capacity_mbps": -5)")), "links[4]"));
  EXPECT_TRUE(contains(expect_error(with(R"("capacity_mbps": 1000)", R"("capacity_mbps": "fast")")), "must be a number"));
  // Removing the trunk disconnects the two halves.
  EXPECT_TRUE(contains(expect_error(with(R"(,
    {"a": "sa", "b": "sb", "capacity_mbps": 1000, "duplex": true})", "")),
                       "disconnected"));
  EXPECT_TRUE(contains(expect_error(with(R"({"a": "b2", "b": "sb", "capacity_mbps": 890},)", "")), "'b2' has 0 access links"));
  EXPECT_TRUE(contains(expect_error(with(R"({"a": "b2", "b": "sb", "capacity_mbps": 890},)",
                                         R"({"a": "b2", "b": "sb", "capacity_mbps": 890}, {"a": "b2", "b": "sa", "capacity_mbps": 890},)")),
                       "'b2' has 2 access links"));
  EXPECT_TRUE(contains(expect_error(with(R"("a": "sa", "b": "sb")", R"("a": "sa", "b": "sa")")), "self-link"));
  EXPECT_TRUE(contains(expect_error(with(R"("a": "sa", "b": "sb")", R"("a": "sa", "b": "nowhere")")), "unknown endpoint 'nowhere'"));
  EXPECT_TRUE(contains(expect_error(with(R"(, "b2": "right")", "")), "'b2' has no label"));
  EXPECT_TRUE(contains(expect_error(with(R"("b2": "right")", R"("b2": "right", "sa": 1)")), "unknown node 'sa'"));
  EXPECT_TRUE(contains(expect_error(with(R"("nodes": ["a1", "a2", "b1", "b2"])", R"("nodes": ["a1", "a1", "b1", "b2"])")), "duplicate"));
  EXPECT_TRUE(contains(expect_error(with(R"("duplex": true)", R"("duplex": "yes")")), "'duplex' must be a boolean"));
  EXPECT_TRUE(contains(expect_error(R"({"nodes": ["x"], "links": [], "ground_truth": {"x": 0}})"), "at least 2 nodes"));
}

TEST(ParseTopology, DuplicateLinkRejected) {
  const auto msg = expect_error(R"({
    "nodes": ["a", "b"], "switches": ["s", "t"],
    "links": [{"a": "a", "b": "s", "capacity_mbps": 1}, {"a": "b", "b": "t", "capacity_mbps": 1},
              {"a": "s", "b": "t", "capacity_mbps": 1}, {"a": "t", "b": "s", "capacity_mbps": 2}],
    "ground_truth": {"a": 0, "b": 0}})");
  EXPECT_TRUE(contains(msg, "duplicate link")) << msg;
}

TEST(ParseTopology, LabelsDensifiedInNodeOrder) {
  std::string doc = kFourNodes;
  doc.replace(doc.find(R"("a1": "left", "a2": "left", "b1": "right", "b2": "right")"),
              std::string(R"("a1": "left", "a2": "left", "b1": "right", "b2": "right")").size(),
              R"("b2": 7, "a1": 9, "a2": 7, "b1": 9)");
  const auto parsed = parse_topology(doc);
  EXPECT_EQ(parsed.ground_truth.labels(), (std::vector<ClusterId>{0, 1, 0, 1}));
}

TEST(BuiltinScenarios, NodeAndClusterCounts) {
  struct Expect {
    const char* name;
    std::size_t nodes;
    std::size_t k;
  };
  for (auto [name, nodes, k] : {Expect{"B", 64, 2}, Expect{"2x2", 4, 1}, Expect{"GT", 64, 2}, Expect{"BT", 64, 3},
                                Expect{"BGT", 96, 3}, Expect{"BGTL", 64, 4}}) {
    SCOPED_TRACE(name);
    const auto s = builtin_scenario(name);
    EXPECT_EQ(s.name, name);
    EXPECT_EQ(s.topology.node_count(), nodes);
    EXPECT_EQ(s.ground_truth.cluster_count(), k);
    EXPECT_EQ(s.ground_truth.size(), nodes);
  }
  EXPECT_EQ(builtin_scenarios().size(), builtin_scenario_names().size());
  EXPECT_THROW(builtin_scenario("nope"), std::invalid_argument);
}

TEST(BuiltinScenarios, BordeauxGroundTruthMergesTheUnbottleneckedGroups) {
  const auto s = builtin_scenario("B");
  const auto& t = s.topology;
  std::size_t plage = 0, line = 0, reau = 0;
  for (NodeId i = 0; i < t.node_count(); ++i) {
    const auto& name = t.node_name(i);
    if (name.starts_with("bordeplage")) {
      ++plage;
      EXPECT_EQ(s.ground_truth[i], s.ground_truth[0]);
    } else {
      name.starts_with("borderline") ? ++line : ++reau;
      EXPECT_NE(s.ground_truth[i], s.ground_truth[0]);
    }
  }
  EXPECT_EQ(plage, 32u);
  EXPECT_EQ(line, 5u);
  EXPECT_EQ(reau, 27u);
  EXPECT_EQ(s.ground_truth.cluster_sizes(), (std::vector<std::size_t>{32, 32}));
}

TEST(Route, SameSwitchPairUsesTwoAccessLinks) {
  const auto s = builtin_scenario("B");
  const auto& t = s.topology;
  const auto path = route(t, 1, 2);
  ASSERT_EQ(path.size(), 2u);
  EXPECT_EQ(path[0], t.access_link(1));
  EXPECT_EQ(path[1], t.access_link(2));
}

TEST(Route, CrossBottleneckPairUsesTheGigabitLink) {
  const auto s = builtin_scenario("B");
  const auto& t = s.topology;
  const auto bottleneck = find_link(t, "dell", "cisco");
  EXPECT_DOUBLE_EQ(t.link(bottleneck).capacity_mbps, 1000.0);
  for (NodeId a = 0; a < t.node_count(); ++a) {
    for (NodeId b = 0; b < t.node_count(); ++b) {
      if (a == b) continue;
      const auto path = route(t, a, b);
      const bool crosses = std::find(path.begin(), path.end(), bottleneck) != path.end();
      EXPECT_EQ(crosses, s.ground_truth[a] != s.ground_truth[b]) << a << " -> " << b;
    }
  }
}

TEST(Route, InterSitePathsTraverseTheHub) {
  const auto s = builtin_scenario("BGTL");
  const auto& t = s.topology;
  const auto hub = t.vertex(Endpoint::switch_(3));
  ASSERT_EQ(t.switch_names()[3], "lyon-sw");
  for (NodeId a = 0; a < t.node_count(); ++a) {
    for (NodeId b = a + 1; b < t.node_count(); ++b) {
      if (s.ground_truth[a] == s.ground_truth[b]) continue;
      bool via_hub = false;
      for (auto lid : route(t, a, b)) via_hub |= t.vertex(t.link(lid).a) == hub || t.vertex(t.link(lid).b) == hub;
      EXPECT_TRUE(via_hub) << a << " -> " << b;
    }
  }
}

TEST(Route, ReverseOfOppositeDirection) {
  for (const auto& name : builtin_scenario_names()) {
    SCOPED_TRACE(name);
    const auto s = builtin_scenario(name);
    const auto& t = s.topology;
    const RouteTable table(t);
    for (NodeId a = 0; a < t.node_count(); ++a) {
      for (NodeId b = 0; b < t.node_count(); ++b) {
        if (a == b) continue;
        auto back = table(b, a);
        std::reverse(back.begin(), back.end());
        ASSERT_EQ(table(a, b), back) << a << " -> " << b;
        ASSERT_EQ(table(a, b), route(t, a, b));
      }
    }
  }
}

TEST(Route, RejectsDegenerateRequests) {
  const auto t = builtin_scenario("2x2").topology;
  EXPECT_THROW(route(t, 1, 1), TopologyError);
  EXPECT_THROW(route(t, 0, 9), TopologyError);
}

TEST(Route, EqualLengthPathsTieBreakOnLinkIndices) {
  // Two parallel two-hop paths between the hosts' switches; the one through
  // lower-numbered links wins in both directions.
  const auto doc = parse_topology(std::string(R"({
    "nodes": ["x", "y"], "switches": ["sx", "sy", "m1", "m2"],
    "links": [
      {"a": "x", "b": "sx", "capacity_mbps": 1},
      {"a": "y", "b": "sy", "capacity_mbps": 1},
      {"a": "sx", "b": "m2", "capacity_mbps": 1},
      {"a": "m2", "b": "sy", "capacity_mbps": 1},
      {"a": "sx", "b": "m1", "capacity_mbps": 1},
      {"a": "m1", "b": "sy", "capacity_mbps": 1}
    ],
    "ground_truth": {"x": 0, "y": 0}})"));
  EXPECT_EQ(route(doc.topology, 0, 1), (std::vector<LinkId>{0, 2, 3, 1}));
  EXPECT_EQ(route(doc.topology, 1, 0), (std::vector<LinkId>{1, 3, 2, 0}));
}

TEST(Serialization, RoundTripIsIdentity) {
  for (const auto& name : builtin_scenario_names()) {
    SCOPED_TRACE(name);
    const auto s = builtin_scenario(name);
    const auto text = serialize_topology(s.topology, s.ground_truth);
    const auto back = parse_topology(text);
    EXPECT_EQ(back.topology, s.topology);
    EXPECT_EQ(back.ground_truth, s.ground_truth);
    EXPECT_EQ(serialize_topology(back.topology, back.ground_truth), text);
  }
  const auto four = parse_topology(std::string(kFourNodes));
  const auto again = parse_topology(serialize_topology(four.topology, four.ground_truth));
  EXPECT_EQ(again.topology, four.topology);
  EXPECT_EQ(again.ground_truth, four.ground_truth);
}

}  // namespace
