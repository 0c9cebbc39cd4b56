#include <gtest/gtest.h>

#include "fabricsim/model.hpp"

using namespace fabricsim;

TEST(PacketGeometry, DefaultsAndWireSize) {
  PacketGeometry g;
  EXPECT_EQ(g.max_intra_wire(), 148u);
  EXPECT_EQ(g.max_inter_wire(), 4096u);
  EXPECT_EQ(g.intra_packets_for(4096), 32u);
  EXPECT_EQ(g.intra_wire_bytes(4096), 4096u + 32 * 20);
  EXPECT_EQ(g.intra_packets_for(129), 2u);
  PacketGeometry bad;
  bad.inter_payload_bytes = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Packetize, CoversMessageOnPayloadGrid) {
  PacketGeometry g;
  Message m;
  m.id = 4;
  m.size_bytes = 300;
  auto f = packetize(m, g);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0], (IntraFragment{4, 0, 128, 20}));
  EXPECT_EQ(f[1], (IntraFragment{4, 128, 128, 20}));
  EXPECT_EQ(f[2], (IntraFragment{4, 256, 44, 20}));
  m.size_bytes = 0;
  EXPECT_THROW(packetize(m, g), std::invalid_argument);
}

TEST(Message, ScopeAndValidation) {
  Message m;
  m.size_bytes = 10;
  m.src_node = 1;
  m.dst_node = 1;
  m.src_acc = 0;
  m.dst_acc = 1;
  EXPECT_EQ(m.scope(), Scope::IntraNode);
  EXPECT_NO_THROW(m.validate());
  m.dst_acc = 0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.dst_node = 2;
  EXPECT_EQ(m.scope(), Scope::InterNode);
}

TEST(LatencyRecord, InterComponentsSumToSojourn) {
  Milestones m{};
  const SimTime c = SimTime::from_ns(100);
  for (std::size_t k = 0; k < kLatencyComponents; ++k) m[k] = c + SimTime::from_ns(10.0 * (k + 1));
  auto r = LatencyRecord::from_milestones(1, Scope::InterNode, c, m);
  EXPECT_EQ(r.total(), m.back() - c);
  for (std::size_t k = 0; k < kLatencyComponents; ++k) EXPECT_EQ(r.components[k], SimTime::from_ns(10));
}

TEST(LatencyRecord, IntraLeavesNicStagesZero) {
  Milestones m{};
  const SimTime c = SimTime::from_ns(5);
  m[0] = SimTime::from_ns(8);
  m[1] = SimTime::from_ns(20);
  m[6] = SimTime::from_ns(21);
  auto r = LatencyRecord::from_milestones(1, Scope::IntraNode, c, m);
  EXPECT_EQ(r[LatencyComponent::SrcNic], SimTime::zero());
  EXPECT_EQ(r[LatencyComponent::InterNetwork], SimTime::zero());
  EXPECT_EQ(r[LatencyComponent::DstNic], SimTime::zero());
  EXPECT_EQ(r[LatencyComponent::DstIntraNetwork], SimTime::zero());
  EXPECT_EQ(r.total(), SimTime::from_ns(16));
}

TEST(LatencyRecord, OutOfOrderMilestonesAreClamped) {
  Milestones m{};
  const SimTime c = SimTime::from_ns(10);
  m = {SimTime::from_ns(30), SimTime::from_ns(20), SimTime::from_ns(40), SimTime::from_ns(35),
       SimTime::from_ns(50), SimTime::from_ns(45), SimTime::from_ns(60)};
  auto r = LatencyRecord::from_milestones(1, Scope::InterNode, c, m);
  EXPECT_EQ(r.total(), SimTime::from_ns(50));
  for (auto x : r.components) EXPECT_GE(x, SimTime::zero());
}
