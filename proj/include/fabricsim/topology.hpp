#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/fabric.hpp"

namespace fabricsim {

// One server: accelerators around a single intra-node switch whose last port
// leads to the NIC.
struct NodeSpec {
  std::uint32_t accelerators_per_node = 8;
  double acc_link_gbps = 512.0;
  double nic_inter_gbps = 400.0;
  SwitchParams intra_switch{};

  std::uint32_t nic_port() const { return accelerators_per_node; }
  std::uint32_t intra_radix() const { return accelerators_per_node + 1; }
};

// Two-stage Real-Life Fat-Tree built from k-port switches: k leaves with k/2
// node ports and k/2 up ports each, and k/2 spines connected to every leaf.
struct RlftSpec {
  std::uint32_t radix = 8;
  std::uint32_t node_count = 32;

  std::uint32_t half() const { return radix / 2; }
  std::uint32_t leaves() const { return radix; }
  std::uint32_t spines() const { return radix / 2; }
  std::uint32_t switches() const { return leaves() + spines(); }

  void validate() const {
    if (radix < 2 || radix % 2 != 0) throw std::invalid_argument("fat-tree radix must be even and >= 2");
    if (node_count != radix * radix / 2)
      throw std::invalid_argument("fat-tree with radix " + std::to_string(radix) + " hosts " +
                                  std::to_string(radix * radix / 2) + " nodes, not " +
                                  std::to_string(node_count));
  }

  static RlftSpec for_nodes(std::uint32_t nodes) {
    for (std::uint32_t k = 2; k <= 256; k += 2)
      if (k * k / 2 == nodes) return {k, nodes};
    throw std::invalid_argument("no two-stage fat-tree hosts exactly " + std::to_string(nodes) +
                                " nodes");
  }
};

enum class SwitchRole : std::uint8_t { Leaf, Spine };

// Switch ids: leaves are 0..k-1, spines are k..k+k/2-1. Leaf ports 0..k/2-1
// face nodes, k/2..k-1 face spines (port k/2+s to spine s). Spine port l
// faces leaf l.
struct RlftGraph {
  struct Link {
    enum class EndKind : std::uint8_t { Node, Switch };
    EndKind a_kind;
    std::uint32_t a;       // node id or switch id
    std::uint32_t a_port;  // 0 for nodes
    std::uint32_t b;       // switch id
    std::uint32_t b_port;
  };

  RlftSpec spec;
  std::vector<Link> links;  // undirected; each is two directed channels

  std::uint32_t switch_count() const { return spec.switches(); }
  SwitchRole role(std::uint32_t sw) const { return sw < spec.leaves() ? SwitchRole::Leaf : SwitchRole::Spine; }
  std::uint32_t leaf_of(std::uint32_t node) const { return node / spec.half(); }
  std::uint32_t down_port_of(std::uint32_t node) const { return node % spec.half(); }
  std::uint32_t spine_id(std::uint32_t s) const { return spec.leaves() + s; }
};

inline RlftGraph build_rlft(const RlftSpec& spec) {
  spec.validate();
  RlftGraph g;
  g.spec = spec;
  const std::uint32_t h = spec.half();
  for (std::uint32_t n = 0; n < spec.node_count; ++n)
    g.links.push_back({RlftGraph::Link::EndKind::Node, n, 0, n / h, n % h});
  for (std::uint32_t l = 0; l < spec.leaves(); ++l)
    for (std::uint32_t s = 0; s < spec.spines(); ++s)
      g.links.push_back({RlftGraph::Link::EndKind::Switch, l, h + s, spec.leaves() + s, l});
  return g;
}

struct Hop {
  std::uint32_t switch_id;
  std::uint32_t out_port;
  bool operator==(const Hop&) const = default;
};

struct Route {
  std::vector<Hop> hops;
  // Links traversed, counting the NIC-to-leaf and leaf-to-NIC channels.
  std::size_t link_count() const { return hops.size() + 1; }
};

// Output port switch `sw` uses toward node `dst` under D-mod-K.
inline std::uint32_t dmodk_port(const RlftSpec& spec, std::uint32_t sw, std::uint32_t dst) {
  const std::uint32_t h = spec.half();
  if (sw < spec.leaves()) {
    if (dst / h == sw) return dst % h;
    return h + dst % h;
  }
  return dst / h;
}

inline Route dmodk_route(std::uint32_t src, std::uint32_t dst, const RlftSpec& spec) {
  if (src >= spec.node_count || dst >= spec.node_count)
    throw std::out_of_range("node index outside the fat-tree");
  if (src == dst) throw std::invalid_argument("route source equals destination");
  const std::uint32_t h = spec.half();
  Route r;
  std::uint32_t src_leaf = src / h, dst_leaf = dst / h;
  if (src_leaf == dst_leaf) {
    r.hops.push_back({src_leaf, dst % h});
    return r;
  }
  std::uint32_t spine = dst % h;
  r.hops.push_back({src_leaf, h + spine});
  r.hops.push_back({spec.leaves() + spine, dst_leaf});
  r.hops.push_back({dst_leaf, dst % h});
  return r;
}

}  // namespace fabricsim
