#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fabricsim/engine.hpp"
#include "fabricsim/fabric.hpp"
#include "fabricsim/model.hpp"
#include "fabricsim/pcie.hpp"
#include "fabricsim/rng.hpp"

namespace fabricsim {

// Share of generated messages addressed to other nodes. C1..C4 model model
// parallelism with decreasing tensor-parallel traffic across nodes; C5 is
// data parallelism confined to one node.
struct TrafficPattern {
  std::string name = "C4";
  double inter_fraction = 0.05;
  Bytes message_bytes = 4096;

  static TrafficPattern named(std::string_view name, Bytes message_bytes = 4096) {
    if (name == "C1") return {"C1", 0.20, message_bytes};
    if (name == "C2") return {"C2", 0.15, message_bytes};
    if (name == "C3") return {"C3", 0.10, message_bytes};
    if (name == "C4") return {"C4", 0.05, message_bytes};
    if (name == "C5") return {"C5", 0.00, message_bytes};
    throw std::invalid_argument("unknown traffic pattern '" + std::string(name) + "'");
  }
  static TrafficPattern custom(double inter_fraction, Bytes message_bytes = 4096) {
    return {"Custom", inter_fraction, message_bytes};
  }

  void validate() const {
    if (!(inter_fraction >= 0.0 && inter_fraction <= 1.0))
      throw std::invalid_argument("inter_fraction must lie in [0, 1]");
    if (message_bytes == 0) throw std::invalid_argument("message size must be positive");
  }
};

struct LoadPoint {
  double load = 1.0;
  SimTime duration = SimTime::from_us(2500.0);

  void validate() const {
    if (!(load > 0.0 && load <= 1.0)) throw std::invalid_argument("load must lie in (0, 1]");
    if (duration <= SimTime::zero()) throw std::invalid_argument("duration must be positive");
  }
};

// Framing used to turn offered load into a message rate and to count
// delivered throughput. It is fixed independently of the simulated packet
// geometry so curves for different MTUs share one scale.
struct LoadReference {
  Bytes header_bytes = 20;
  Bytes payload_bytes = 128;

  void validate() const {
    if (payload_bytes == 0) throw std::invalid_argument("reference payload must be positive");
  }
  std::uint64_t wire_bytes(std::uint64_t message_bytes) const {
    return (message_bytes + payload_bytes - 1) / payload_bytes * (header_bytes + payload_bytes);
  }
};

struct Destination {
  std::uint32_t node = 0;
  std::uint32_t acc = 0;
};

struct MessageDraw {
  SimTime interarrival;
  // Empty when the draw asked for a same-node peer on a single-accelerator
  // node; such messages are not generated.
  std::optional<Destination> destination;
};

// Poisson message source attached to one accelerator. Load is relative to
// the accelerator link rate, with messages sized by the reference framing.
class TrafficSource {
 public:
  TrafficSource(std::uint32_t node, std::uint32_t acc, std::uint32_t nodes,
                std::uint32_t accs_per_node, const TrafficPattern& pattern, double load,
                double acc_link_gbps, const LoadReference& ref, RunSeed seed)
      : node_(node), acc_(acc), nodes_(nodes), accs_(accs_per_node), pattern_(pattern),
        rng_(seed, static_cast<std::uint64_t>(node) * accs_per_node + acc) {
    if (!(load > 0.0)) throw std::invalid_argument("load must be positive");
    const double wire_bits = static_cast<double>(ref.wire_bytes(pattern.message_bytes)) * 8.0;
    mean_interarrival_ns_ = wire_bits / acc_link_gbps / load;
  }

  double mean_interarrival_ns() const { return mean_interarrival_ns_; }

  MessageDraw next() {
    MessageDraw d;
    d.interarrival = SimTime::from_ns(rng_.exponential(mean_interarrival_ns_));
    const bool remote = pattern_.inter_fraction > 0.0 && rng_.uniform() < pattern_.inter_fraction;
    if (remote) {
      if (nodes_ < 2) return d;
      std::uint64_t r = rng_.below(static_cast<std::uint64_t>(nodes_ - 1) * accs_);
      std::uint32_t node = static_cast<std::uint32_t>(r / accs_);
      if (node >= node_) ++node;
      d.destination = Destination{node, static_cast<std::uint32_t>(r % accs_)};
    } else {
      if (accs_ < 2) return d;
      std::uint32_t acc = static_cast<std::uint32_t>(rng_.below(accs_ - 1));
      if (acc >= acc_) ++acc;
      d.destination = Destination{node_, acc};
    }
    return d;
  }

 private:
  std::uint32_t node_, acc_, nodes_, accs_;
  TrafficPattern pattern_;
  CounterRng rng_;
  double mean_interarrival_ns_ = 0;
};

// Two-node ib_write-style transfer: a host on each node behind a PCIe-like
// intra link, NICs joined by one inter-node link.
struct PerftestScenario {
  Bytes message_bytes = 4096;
  pcie::PcieLinkParams pcie = pcie::PcieLinkParams::gen3_x16();
  LinkParams inter_link{100.0, 2.0, 25.0};
  double intra_link_length_m = 0.3;
  // Host-side cost folded into one delay between posting a message and its
  // first byte entering the PCIe link (root complex and CPU traversal).
  double host_delay_ns = 1000.0;
  // Gap between successive posts in the bandwidth test.
  double post_interval_ns = 290.0;
  double nic_conversion_delay_ns = 2.0;
  // NIC input buffering. Large enough to stage a whole posted message so the
  // PCIe segment is not throttled by the slower inter-node link.
  Bytes nic_buffer_bytes = 8u << 20;
  // Total bytes streamed by the bandwidth test (at least 4 messages).
  std::uint64_t bandwidth_bytes = 8ull << 20;

  // PCIe link as seen by the packet simulator: effective rate plus DLLP acks.
  LinkParams intra_link() const {
    LinkParams l;
    l.bandwidth_gbps = pcie::effective_gbps(pcie);
    l.length_m = intra_link_length_m;
    l.propagation_ns_per_m = inter_link.propagation_ns_per_m;
    l.dllp_bytes = pcie.dllp_overhead_bytes + pcie.dllp_size_bytes;
    l.ack_factor = pcie.ack_factor;
    return l;
  }
  PacketGeometry geometry() const {
    PacketGeometry g;
    g.intra_header_bytes = pcie.tlp_overhead_bytes;
    g.intra_payload_bytes = pcie.max_payload_bytes;
    return g;
  }
};

}  // namespace fabricsim
