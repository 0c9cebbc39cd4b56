#include <gtest/gtest.h>

#include "fabricsim/perftest.hpp"

using namespace fabricsim;

// The simulated PCIe segment adds propagation both ways and the header of
// the first packet to the closed-form transfer time, and nothing else.
TEST(Perftest, PcieSegmentTracksClosedForm) {
  PerftestScenario sc;
  for (Bytes s : {128u, 4096u, 65536u, 1u << 20}) {
    sc.message_bytes = s;
    auto pt = run_perftest(sc);
    EXPECT_NEAR(pt.pcie_segment_ns, pt.pcie_model_ns, pt.pcie_model_ns * 0.02 + 20.0) << s;
    EXPECT_GT(pt.latency_ns, pt.pcie_segment_ns + sc.host_delay_ns);
  }
}

TEST(Perftest, BandwidthPlateausNearLineRate) {
  PerftestScenario sc;
  sc.message_bytes = 1u << 20;
  auto pt = run_perftest(sc);
  // 100 Gbps carries at most 12.5 GB/s of payload and framing.
  EXPECT_LT(pt.bandwidth_gbytes_s, 12.5);
  EXPECT_GT(pt.bandwidth_gbytes_s, 11.5);
}

TEST(Perftest, LatencyGrowsWithSize) {
  auto pts = run_perftest_sweep(PerftestScenario{}, 128, 8192);
  ASSERT_EQ(pts.size(), 7u);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i].latency_ns, pts[i - 1].latency_ns);
}
