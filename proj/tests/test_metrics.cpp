#include <gtest/gtest.h>

#include "fabricsim/metrics.hpp"

using namespace fabricsim;

namespace {

SweepResult point(double load, double offered, double delivered) {
  SweepResult r;
  r.load = load;
  r.offered_gbps = offered;
  r.total_gbps = delivered;
  return r;
}

}  // namespace

TEST(Saturation, LinearCurveNeverSaturates) {
  std::vector<SweepResult> c;
  for (int i = 1; i <= 10; ++i) c.push_back(point(i / 10.0, i * 100.0, i * 100.0));
  EXPECT_FALSE(saturation_point(c).has_value());
}

TEST(Saturation, FlatlineFromSeventyPercent) {
  std::vector<SweepResult> c;
  for (int i = 1; i <= 10; ++i) c.push_back(point(i / 10.0, i * 100.0, std::min(i, 7) * 100.0 * (i == 7 ? 0.94 : 1)));
  EXPECT_DOUBLE_EQ(*saturation_point(c), 0.7);
}

TEST(Saturation, DegenerateInputs) {
  EXPECT_THROW(saturation_point({point(1, 1, 1)}), std::invalid_argument);
  EXPECT_THROW(saturation_point({point(0.5, 1, 1), point(0.2, 1, 1), point(0.9, 1, 1)}),
               std::invalid_argument);
}

TEST(Reservoir, ExactQuantilesBelowCapacity) {
  Reservoir r(1000, 0);
  for (int i = 1; i <= 100; ++i) r.add(i);
  EXPECT_DOUBLE_EQ(r.quantile(0.99), 99);
  EXPECT_DOUBLE_EQ(r.quantile(0.5), 50);
  EXPECT_DOUBLE_EQ(r.quantile(1.0), 100);
}

TEST(Reservoir, BoundedAndRepresentativeAboveCapacity) {
  Reservoir r(2000, 1);
  for (int i = 0; i < 200000; ++i) r.add(i % 1000);
  EXPECT_EQ(r.size(), 2000u);
  EXPECT_EQ(r.seen(), 200000u);
  EXPECT_NEAR(r.quantile(0.5), 500, 40);
  EXPECT_NEAR(r.quantile(0.99), 990, 15);
}

TEST(Collector, WindowAndScopes) {
  MetricsCollector mc(SimTime::from_ns(100), SimTime::from_ns(1100));
  Message intra;
  intra.src_node = intra.dst_node = 0;
  intra.dst_acc = 1;
  intra.size_bytes = 4096;
  intra.created_at = SimTime::from_ns(200);
  Milestones m{};
  m[0] = SimTime::from_ns(210);
  m[1] = SimTime::from_ns(250);
  m[6] = SimTime::from_ns(300);
  auto rec = LatencyRecord::from_milestones(0, Scope::IntraNode, intra.created_at, m);
  mc.record_generated(4736, SimTime::from_ns(200));
  mc.record_generated(4736, SimTime::from_ns(50));  // warm-up, ignored
  mc.record_delivery(intra, rec, 4736, SimTime::from_ns(300));

  Message inter = intra;
  inter.dst_node = 1;
  Milestones mi{};
  for (std::size_t k = 0; k < kLatencyComponents; ++k) mi[k] = SimTime::from_ns(200 + 10.0 * (k + 1));
  auto rec2 = LatencyRecord::from_milestones(1, Scope::InterNode, inter.created_at, mi);
  mc.record_delivery(inter, rec2, 4736, SimTime::from_ns(270));

  auto r = mc.finalize(0.5);
  EXPECT_EQ(r.delivered_messages, 2u);
  EXPECT_NEAR(r.intra_gbps, 4736 * 8 / 1000.0, 1e-9);
  EXPECT_NEAR(r.inter_gbps, 4736 * 8 / 1000.0, 1e-9);
  EXPECT_DOUBLE_EQ(r.total_gbps, r.intra_gbps + r.inter_gbps);
  EXPECT_NEAR(r.offered_gbps, 4736 * 8 / 1000.0, 1e-9);
  EXPECT_NEAR(r.latency_total_mean_ns, (100 + 70) / 2.0, 1e-9);
  EXPECT_NEAR(r.latency_mean_ns[0], (10 + 10) / 2.0, 1e-9);
}

TEST(Collector, RejectsInconsistentRecords) {
  MetricsCollector mc(SimTime::zero(), SimTime::from_ns(1000));
  Message msg;
  msg.dst_acc = 1;
  msg.size_bytes = 1;
  Milestones m{};
  m[6] = SimTime::from_ns(10);
  auto rec = LatencyRecord::from_milestones(0, Scope::IntraNode, SimTime::zero(), m);
  EXPECT_THROW(mc.record_delivery(msg, rec, 148, SimTime::from_ns(11)), std::logic_error);
  rec.components[2] = SimTime::from_ns(1);
  rec.components[0] = rec.components[0] - SimTime::from_ns(1);
  EXPECT_THROW(mc.record_delivery(msg, rec, 148, SimTime::from_ns(10)), std::logic_error);
  EXPECT_THROW(MetricsCollector(SimTime::from_ns(5), SimTime::from_ns(5)), std::invalid_argument);
}
