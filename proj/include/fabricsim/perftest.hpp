#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fabricsim/network.hpp"
#include "fabricsim/pcie.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

struct PerftestPoint {
  Bytes message_bytes = 0;
  // Host delay plus network time of one message sent on an idle system.
  double latency_ns = 0;
  // Time for the last byte to leave the source PCIe segment and reach the NIC.
  double pcie_segment_ns = 0;
  // Closed-form PCIe transfer time of the same message.
  double pcie_model_ns = 0;
  // Payload bytes per ns (decimal GB/s) over a stream of back-to-back posts.
  double bandwidth_gbytes_s = 0;
};

// Two nodes with one host each, joined through a radix-2 fat-tree.
inline FabricConfig perftest_config(const PerftestScenario& sc) {
  FabricConfig cfg;
  cfg.name = "perftest";
  cfg.node.accelerators_per_node = 1;
  cfg.node.acc_link_gbps = pcie::effective_gbps(sc.pcie);
  cfg.node.nic_inter_gbps = sc.inter_link.bandwidth_gbps;
  cfg.rlft = RlftSpec{2, 2};
  cfg.switch_link_gbps = sc.inter_link.bandwidth_gbps;
  cfg.intra_link_length_m = sc.intra_link_length_m;
  cfg.inter_link_length_m = sc.inter_link.length_m;
  cfg.propagation_ns_per_m = sc.inter_link.propagation_ns_per_m;
  const LinkParams intra = sc.intra_link();
  cfg.intra_dllp_bytes = intra.dllp_bytes;
  cfg.intra_ack_factor = intra.ack_factor;
  cfg.geometry = sc.geometry();
  cfg.nic.conversion_delay_ns = sc.nic_conversion_delay_ns;
  cfg.nic.packing = PackingPolicy::PerMessage;
  cfg.nic.input_buffer_bytes = sc.nic_buffer_bytes;
  cfg.pattern = TrafficPattern::custom(1.0, sc.message_bytes);
  cfg.sweep = {LoadPoint{}};
  return cfg;
}

namespace detail {

struct PerftestRun {
  std::vector<DeliveryTrace> traces;
  SimTime end{};
};

inline PerftestRun run_posts(const FabricConfig& cfg, Bytes size, std::uint64_t count,
                             SimTime interval) {
  Network net(cfg);
  PerftestRun run;
  net.set_observer([&](const DeliveryTrace& t) { run.traces.push_back(t); });
  for (std::uint64_t i = 0; i < count; ++i)
    net.post(SimTime{interval.ticks() * static_cast<std::int64_t>(i)}, 0, 0, 1, 0, size);
  // Generous horizon: every message at a tenth of the slowest link rate.
  const double slow = std::min(cfg.node.acc_link_gbps, cfg.node.nic_inter_gbps) / 10.0;
  SimTime horizon = SimTime{interval.ticks() * static_cast<std::int64_t>(count)} +
                    SimTime::from_ns(static_cast<double>(size) * count * 8.0 / slow + 1e5);
  net.run_until(horizon);
  net.check_conservation();
  if (run.traces.size() != count) throw SimulationError("perftest messages were not all delivered");
  run.end = run.traces.back().delivered_at;
  return run;
}

}  // namespace detail

// One ib_write-style measurement: a lone message for latency, then a
// stream of posts for bandwidth.
inline PerftestPoint run_perftest(const PerftestScenario& sc) {
  if (sc.message_bytes == 0) throw std::invalid_argument("perftest message size must be positive");
  const FabricConfig cfg = perftest_config(sc);
  PerftestPoint pt;
  pt.message_bytes = sc.message_bytes;

  auto single = detail::run_posts(cfg, sc.message_bytes, 1, SimTime::zero());
  const DeliveryTrace& t = single.traces.front();
  pt.latency_ns = sc.host_delay_ns + (t.delivered_at - t.message.created_at).ns();
  pt.pcie_segment_ns = (t.milestones[1] - t.first_injection).ns();
  pt.pcie_model_ns = pcie::message_latency_ns(sc.pcie, sc.message_bytes).to_double();

  const std::uint64_t count = std::max<std::uint64_t>(4, sc.bandwidth_bytes / sc.message_bytes);
  auto stream = detail::run_posts(cfg, sc.message_bytes, count, SimTime::from_ns(sc.post_interval_ns));
  const double span_ns = sc.host_delay_ns + stream.end.ns();
  pt.bandwidth_gbytes_s = static_cast<double>(count * sc.message_bytes) / span_ns;
  return pt;
}

// Sizes 128 B .. 4 MiB by powers of two.
inline std::vector<PerftestPoint> run_perftest_sweep(PerftestScenario sc, Bytes from = 128,
                                                     Bytes to = 4u << 20) {
  std::vector<PerftestPoint> out;
  for (Bytes s = from; s <= to; s *= 2) {
    sc.message_bytes = s;
    out.push_back(run_perftest(sc));
  }
  return out;
}

}  // namespace fabricsim
