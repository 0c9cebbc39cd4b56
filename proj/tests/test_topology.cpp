#include <gtest/gtest.h>

#include <map>
#include <set>
#include <tuple>

#include "fabricsim/topology.hpp"

using namespace fabricsim;

TEST(RlftSpec, SizesAndValidation) {
  RlftSpec s{8, 32};
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.leaves(), 8u);
  EXPECT_EQ(s.spines(), 4u);
  EXPECT_EQ(s.switches(), 12u);
  EXPECT_THROW((RlftSpec{8, 128}).validate(), std::invalid_argument);
  EXPECT_THROW((RlftSpec{7, 24}).validate(), std::invalid_argument);
  EXPECT_EQ(RlftSpec::for_nodes(128).radix, 16u);
  EXPECT_EQ(RlftSpec::for_nodes(128).switches(), 24u);
  EXPECT_EQ(RlftSpec::for_nodes(512).switches(), 48u);
  EXPECT_EQ(RlftSpec::for_nodes(2).radix, 2u);
  EXPECT_THROW(RlftSpec::for_nodes(100), std::invalid_argument);
}

TEST(RlftGraph, EveryPortWiredOnce) {
  auto g = build_rlft(RlftSpec{8, 32});
  EXPECT_EQ(g.links.size(), 32u + 8u * 4u);
  std::set<std::pair<std::uint32_t, std::uint32_t>> ports;
  for (const auto& l : g.links) {
    if (l.a_kind == RlftGraph::Link::EndKind::Switch) {
      EXPECT_TRUE(ports.insert({l.a, l.a_port}).second);
    }
    EXPECT_TRUE(ports.insert({l.b, l.b_port}).second);
  }
  EXPECT_EQ(ports.size(), 12u * 8u);
}

namespace {

// Follows a route through the wiring and returns the node it reaches.
std::uint32_t walk(const RlftGraph& g, std::uint32_t src, const Route& r) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<bool, std::uint32_t>> peer;
  for (const auto& l : g.links) {
    if (l.a_kind == RlftGraph::Link::EndKind::Node) {
      peer[{l.b, l.b_port}] = {true, l.a};
    } else {
      peer[{l.a, l.a_port}] = {false, l.b};
      peer[{l.b, l.b_port}] = {false, l.a};
    }
  }
  std::uint32_t sw = g.leaf_of(src);
  for (std::size_t h = 0; h < r.hops.size(); ++h) {
    EXPECT_EQ(r.hops[h].switch_id, sw);
    auto it = peer.find({sw, r.hops[h].out_port});
    EXPECT_NE(it, peer.end());
    if (it->second.first) return it->second.second;
    sw = it->second.second;
  }
  ADD_FAILURE() << "route ended inside the fabric";
  return ~0u;
}

}  // namespace

TEST(DmodK, ExhaustiveReachabilityAndShortestPathsAtRadix8) {
  RlftSpec s{8, 32};
  auto g = build_rlft(s);
  for (std::uint32_t a = 0; a < 32; ++a)
    for (std::uint32_t b = 0; b < 32; ++b) {
      if (a == b) {
        EXPECT_THROW(dmodk_route(a, b, s), std::invalid_argument);
        continue;
      }
      Route r = dmodk_route(a, b, s);
      EXPECT_EQ(walk(g, a, r), b);
      EXPECT_EQ(r.hops.size(), g.leaf_of(a) == g.leaf_of(b) ? 1u : 3u);
      for (const auto& h : r.hops) EXPECT_EQ(dmodk_port(s, h.switch_id, b), h.out_port);
    }
}

TEST(DmodK, BalancedLinkLoadAtRadix8) {
  RlftSpec s{8, 32};
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> use;
  for (std::uint32_t a = 0; a < 32; ++a)
    for (std::uint32_t b = 0; b < 32; ++b)
      if (a != b)
        for (const auto& h : dmodk_route(a, b, s).hops) ++use[{h.switch_id, h.out_port}];
  // Leaf up-ports: each carries the same number of flows; likewise spine down-ports.
  std::set<int> up, down;
  for (auto [key, n] : use) {
    auto [sw, port] = key;
    if (sw < s.leaves() && port >= s.half()) up.insert(n);
    if (sw >= s.leaves()) down.insert(n);
  }
  EXPECT_EQ(up.size(), 1u);
  EXPECT_EQ(down.size(), 1u);
  EXPECT_EQ(*up.begin(), 4 * 28 / 4);
  // Every destination is reached through exactly one spine.
  for (std::uint32_t b = 0; b < 32; ++b) {
    std::set<std::uint32_t> spines;
    for (std::uint32_t a = 0; a < 32; ++a)
      if (a / 4 != b / 4) spines.insert(dmodk_route(a, b, s).hops[1].switch_id);
    EXPECT_EQ(spines.size(), 1u);
  }
}

TEST(DmodK, RejectsOutOfRangeNodes) {
  EXPECT_THROW(dmodk_route(0, 32, RlftSpec{8, 32}), std::out_of_range);
}
