#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/fabric.hpp"
#include "fabricsim/model.hpp"
#include "fabricsim/nic.hpp"
#include "fabricsim/rng.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

// Thrown for invalid configurations. `path` names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::invalid_argument(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Everything one simulation needs. Switch radices are derived from the node
// and fat-tree sizes; the radix fields of the embedded SwitchParams are
// ignored.
struct FabricConfig {
  std::string name = "custom";
  NodeSpec node{};
  RlftSpec rlft{};
  SwitchParams inter_switch{};
  Arbitration arbitration = Arbitration::RoundRobin;
  double switch_link_gbps = 512.0;
  double intra_link_length_m = 0.3;
  double inter_link_length_m = 2.0;
  double propagation_ns_per_m = 25.0;
  // Optional link-layer acknowledgements on intra-node links.
  Bytes intra_dllp_bytes = 0;
  std::uint32_t intra_ack_factor = 4;
  PacketGeometry geometry{};
  LoadReference load_reference{};
  NicParams nic{};
  TrafficPattern pattern{};
  std::vector<LoadPoint> sweep{};
  RunSeed seed{};
  double warmup_fraction = 0.1;

  std::uint32_t nodes() const { return rlft.node_count; }
  std::uint32_t accelerators() const { return rlft.node_count * node.accelerators_per_node; }

  SwitchParams intra_switch_params() const {
    SwitchParams p = node.intra_switch;
    p.radix = node.intra_radix();
    p.arbitration = arbitration;
    return p;
  }
  SwitchParams inter_switch_params() const {
    SwitchParams p = inter_switch;
    p.radix = rlft.radix;
    p.arbitration = arbitration;
    return p;
  }
  LinkParams intra_link() const {
    return {node.acc_link_gbps, intra_link_length_m, propagation_ns_per_m, intra_dllp_bytes,
            intra_ack_factor};
  }
  LinkParams nic_link() const {
    return {node.nic_inter_gbps, inter_link_length_m, propagation_ns_per_m, 0, 1};
  }
  LinkParams switch_link() const {
    return {switch_link_gbps, inter_link_length_m, propagation_ns_per_m, 0, 1};
  }

  void validate() const {
    auto wrap = [](const char* path, auto&& fn) {
      try {
        fn();
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
      }
    };
    if (node.accelerators_per_node < 1 || node.accelerators_per_node + 1 > SwitchParams::kMaxRadix)
      throw ConfigError("node.accelerators_per_node", "must lie in [1, 63]");
    if (!(node.acc_link_gbps > 0)) throw ConfigError("node.acc_link_gbps", "must be positive");
    if (!(node.nic_inter_gbps > 0)) throw ConfigError("node.nic_inter_gbps", "must be positive");
    if (!(switch_link_gbps > 0)) throw ConfigError("links.switch_gbps", "must be positive");
    if (intra_link_length_m < 0) throw ConfigError("links.intra_length_m", "must be non-negative");
    if (inter_link_length_m < 0) throw ConfigError("links.inter_length_m", "must be non-negative");
    if (propagation_ns_per_m < 0)
      throw ConfigError("links.propagation_ns_per_m", "must be non-negative");
    if (intra_ack_factor < 1) throw ConfigError("links.intra_ack_factor", "must be >= 1");
    wrap("geometry", [&] { geometry.validate(); });
    wrap("load_reference", [&] { load_reference.validate(); });
    wrap("rlft", [&] { rlft.validate(); });
    if (rlft.radix > SwitchParams::kMaxRadix) throw ConfigError("rlft.radix", "must be <= 64");
    const Bytes max_wire = std::max(geometry.max_intra_wire(), geometry.max_inter_wire());
    wrap("node.intra_switch", [&] { intra_switch_params().validate(geometry.max_intra_wire()); });
    wrap("inter_switch", [&] { inter_switch_params().validate(geometry.max_inter_wire()); });
    wrap("nic", [&] { nic.validate(max_wire); });
    wrap("pattern", [&] { pattern.validate(); });
    if (sweep.empty()) throw ConfigError("sweep", "at least one load point is required");
    for (std::size_t i = 0; i < sweep.size(); ++i)
      wrap(("sweep[" + std::to_string(i) + "]").c_str(), [&] { sweep[i].validate(); });
    if (!(warmup_fraction >= 0 && warmup_fraction < 1))
      throw ConfigError("warmup_fraction", "must lie in [0, 1)");
  }
};

}  // namespace fabricsim
