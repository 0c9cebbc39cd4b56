#pragma once

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/fabric_config.hpp"

namespace fabricsim {

// Ten evenly spaced loads, 10% .. 100%.
inline std::vector<LoadPoint> standard_sweep(SimTime duration = SimTime::from_us(250.0)) {
  std::vector<LoadPoint> s;
  for (int i = 1; i <= 10; ++i) s.push_back(LoadPoint{i / 10.0, duration});
  return s;
}

// Intra-node packets as large as inter-node ones, so the NIC converts
// nothing but headers.
inline PacketGeometry large_intra_geometry() {
  PacketGeometry g;
  g.intra_header_bytes = g.inter_header_bytes;
  g.intra_payload_bytes = g.inter_payload_bytes;
  return g;
}

inline FabricConfig base_preset(std::string name, std::uint32_t nodes, std::uint32_t accs,
                                double acc_gbps) {
  FabricConfig c;
  c.name = std::move(name);
  c.rlft = RlftSpec::for_nodes(nodes);
  c.node.accelerators_per_node = accs;
  c.node.acc_link_gbps = acc_gbps;
  c.node.nic_inter_gbps = 400.0;
  c.pattern = TrafficPattern::named("C1");
  c.sweep = standard_sweep();
  return c;
}

// Built-in experiment configurations keyed by name.
inline const std::map<std::string, FabricConfig>& presets() {
  static const std::map<std::string, FabricConfig> all = [] {
    std::map<std::string, FabricConfig> m;
    auto add = [&](FabricConfig c) { m.emplace(c.name, std::move(c)); };
    // Packetization overhead: 32 nodes of 8 x 512 Gbps accelerators.
    for (const char* pat : {"C4", "C5"})
      for (int mtu : {148, 4096}) {
        std::string p = pat;
        for (auto& ch : p) ch = static_cast<char>(std::tolower(ch));
        auto c = base_preset("overhead-" + p + "-" + std::to_string(mtu), 32, 8, 512.0);
        c.pattern = TrafficPattern::named(pat);
        if (mtu == 4096) c.geometry = large_intra_geometry();
        add(c);
      }
    // The scaling studies run the fabric itself at the NIC rate.
    auto scaled = [&](std::string name, std::uint32_t nodes, std::uint32_t accs, double gbps) {
      auto c = base_preset(std::move(name), nodes, accs, gbps);
      c.switch_link_gbps = 400.0;
      add(c);
    };
    // Scale-up: 32 nodes, growing accelerator count and link speed.
    const double speeds[] = {128.0, 256.0, 512.0};
    for (int conf = 1; conf <= 3; ++conf)
      for (std::uint32_t accs : {1u, 2u, 4u, 8u})
        scaled("scaleup-conf" + std::to_string(conf) + "-" + std::to_string(accs) + "acc", 32, accs,
               speeds[conf - 1]);
    // Scale-out: 8 accelerators per node on 128 or 512 nodes.
    scaled("scaleout-conf1", 128, 8, 256.0);
    scaled("scaleout-conf2", 128, 8, 512.0);
    scaled("scaleout-conf3", 512, 8, 256.0);
    scaled("scaleout-conf4", 512, 8, 512.0);
    return m;
  }();
  return all;
}

inline const FabricConfig& preset(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("", "unknown preset '" + name + "'");
  return it->second;
}

}  // namespace fabricsim
