#include <gtest/gtest.h>

#include "fabricsim/sweep.hpp"

using namespace fabricsim;

namespace {

FabricConfig four_points() {
  FabricConfig c;
  c.rlft = RlftSpec::for_nodes(8);
  c.node.accelerators_per_node = 2;
  c.pattern = TrafficPattern::named("C1");
  for (double l : {0.25, 0.5, 0.75, 1.0}) c.sweep.push_back(LoadPoint{l, SimTime::from_us(10)});
  return c;
}

}  // namespace

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  auto c = four_points();
  const auto one = run_sweep(c, 1);
  const auto four = run_sweep(c, 4);
  EXPECT_EQ(sweep_csv(one), sweep_csv(four));
  EXPECT_EQ(sweep_p99_csv(one), sweep_p99_csv(four));
}

TEST(Sweep, CsvLayout) {
  auto rows = run_sweep(four_points(), 2);
  const auto csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "load_pct,intra_gbps,inter_gbps,total_gbps,lat_src_acc_ns,lat_src_intra_ns,"
            "lat_src_nic_ns,lat_inter_ns,lat_dst_nic_ns,lat_dst_intra_ns,lat_dst_acc_ns,"
            "delivered_msgs");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find("\n25.00,"), std::string::npos);
  EXPECT_NE(csv.find("\n100.00,"), std::string::npos);
  const auto p99 = sweep_p99_csv(rows);
  EXPECT_EQ(p99.substr(0, p99.find('\n')), kSweepP99CsvHeader);
}

TEST(Sweep, P99Path) {
  EXPECT_EQ(p99_path("out/run.csv"), "out/run_p99.csv");
  EXPECT_EQ(p99_path("run"), "run_p99");
  EXPECT_EQ(p99_path("a.b/run"), "a.b/run_p99");
}

TEST(Sweep, SvgsAreWellFormed) {
  auto rows = run_sweep(four_points(), 1);
  for (const auto& svg : {throughput_svg(rows, "t"), latency_svg(rows, "l")}) {
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
}

TEST(Sweep, ErrorNamesTheFailingPoint) {
  SweepError e(3, 0.4, "boom");
  EXPECT_EQ(e.index(), 3u);
  EXPECT_DOUBLE_EQ(e.load(), 0.4);
  EXPECT_NE(std::string(e.what()).find("load point 3"), std::string::npos);
  auto c = four_points();
  c.sweep[2].load = 2.0;
  EXPECT_THROW(run_sweep(c), ConfigError);
}
