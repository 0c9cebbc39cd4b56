#include <gtest/gtest.h>

#include "fabricsim/pcie.hpp"

using namespace fabricsim::pcie;

TEST(Rational, ArithmeticIsExactAndReduced) {
  Rational a(1, 3), b(1, 6);
  EXPECT_EQ(a + b, Rational(1, 2));
  EXPECT_EQ(a * b, Rational(1, 18));
  EXPECT_EQ(a / b, Rational(2));
  EXPECT_TRUE(b < a);
  EXPECT_EQ(Rational(4, -8), Rational(-1, 2));
  EXPECT_THROW(Rational(1, 0), std::domain_error);
  EXPECT_THROW(a / Rational(0), std::domain_error);
}

TEST(PcieModel, Gen3x16Rates) {
  PcieLinkParams p = PcieLinkParams::gen3_x16();
  // 16 lanes x 8 Gbps x 128/130 = 15.7538... bytes per ns.
  EXPECT_EQ(bytes_per_ns(p), Rational(16 * 8 * 128, 130 * 8));
  EXPECT_NEAR(effective_gbps(p), 126.0308, 1e-3);
  EXPECT_EQ(tlp_time_ns(p), Rational(148) / bytes_per_ns(p));
  EXPECT_EQ(dllp_time_ns(p), Rational(8) / bytes_per_ns(p));
}

TEST(PcieModel, CountsTlpsAndAcks) {
  PcieLinkParams p;
  EXPECT_EQ(number_tlps(p, 1), 1u);
  EXPECT_EQ(number_tlps(p, 128), 1u);
  EXPECT_EQ(number_tlps(p, 129), 2u);
  EXPECT_EQ(number_acks(p, 128), 1u);
  EXPECT_EQ(number_acks(p, 4 * 128), 1u);
  EXPECT_EQ(number_acks(p, 5 * 128), 2u);
}

TEST(PcieModel, MessageLatencyOracle) {
  PcieLinkParams p;
  // 4096 B: 32 TLPs of 148 B and 8 DLLPs of 8 B at 15.75 B/ns.
  const Rational expect = Rational(32 * 148 + 8 * 8) / bytes_per_ns(p);
  EXPECT_EQ(message_latency_ns(p, 4096), expect);
  EXPECT_NEAR(message_latency_ns(p, 4096).to_double(), 304.6875, 1e-9);
  EXPECT_NEAR(message_latency_ns(p, 128).to_double(), 9.90234375, 1e-9);
  EXPECT_THROW(message_latency_ns(p, 0), std::invalid_argument);
}

TEST(PcieModel, LatencyIsMonotoneInSize) {
  PcieLinkParams p;
  Rational prev(0);
  for (std::uint64_t s = 1; s <= 8192; s += 37) {
    Rational l = message_latency_ns(p, s);
    EXPECT_TRUE(prev <= l);
    prev = l;
  }
}

TEST(PcieModel, RejectsBadParameters) {
  PcieLinkParams p;
  p.width = 3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.encoding_num = 131;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.ack_factor = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
