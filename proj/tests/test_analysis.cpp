#include <gtest/gtest.h>

#include <cmath>

#include "fabricsim/analysis.hpp"

using namespace fabricsim;
using namespace fabricsim::analysis;

TEST(Overhead, DefaultGeometryFactor) {
  PacketGeometry g;
  EXPECT_NEAR(traffic_overhead(g), 1.1382, 0.0005);
  EXPECT_NEAR(traffic_overhead(g), (148.0 / 128) / (4096.0 / 4032), 1e-12);
}

TEST(Overhead, ScaleInvariantPerTier) {
  PacketGeometry g, h;
  h.intra_header_bytes *= 3;
  h.intra_payload_bytes *= 3;
  h.inter_header_bytes *= 2;
  h.inter_payload_bytes *= 2;
  EXPECT_NEAR(traffic_overhead(g), traffic_overhead(h), 1e-12);
}

TEST(Overhead, ThroughputBoundInstantiation) {
  OverheadInputs in;
  const double bound = throughput_bound(in);
  EXPECT_NEAR(bound, 91980, 91980 * 0.005);
  EXPECT_NEAR(100 * bound / 524288, 17.54, 0.1);
  EXPECT_THROW(throughput_bound(16384, 1.14, 0, 128), std::domain_error);
  EXPECT_THROW(throughput_bound(16384, 0, 20, 128), std::domain_error);
}

TEST(Overhead, BoundIsMonotoneDecreasing) {
  double prev = 1e300;
  for (double pct = 1; pct <= 100; pct += 1) {
    double b = throughput_bound(16384, 1.14, pct, 32);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_GT(throughput_bound(16384, 1.0, 20, 32), throughput_bound(16384, 1.2, 20, 32));
}

TEST(Fit, PolynomialInterpolatesWithEnoughDegree) {
  std::vector<DataPoint> d = {{1, 2}, {2, -1}, {4, 3}, {5, 8}};
  auto f = fit_polynomial(d, 3);
  ASSERT_TRUE(f.ok);
  EXPECT_NEAR(f.sse, 0, 1e-9);
  for (auto p : d) EXPECT_NEAR(f.evaluate(p.x), p.y, 1e-8);
  EXPECT_FALSE(fit_polynomial({{1, 1}, {2, 2}}, 2).ok);
}

TEST(Fit, LinearRecoversLine) {
  std::vector<DataPoint> d;
  for (int x = 0; x < 10; ++x) d.push_back({double(x), 3.0 * x - 7});
  auto f = fit_polynomial(d, 1);
  EXPECT_NEAR(f.parameters[0], 3, 1e-10);
  EXPECT_NEAR(f.parameters[1], -7, 1e-10);
  EXPECT_NEAR(f.r_squared, 1, 1e-12);
}

TEST(Fit, PowerLawRecoversNoiseFreeParameters) {
  std::vector<DataPoint> d;
  for (double x : {5.0, 10.0, 15.0, 20.0, 30.0, 50.0}) d.push_back({x, 98765.4 * std::pow(x, -0.987)});
  auto f = fit_power_law(d);
  ASSERT_TRUE(f.ok);
  EXPECT_NEAR(f.parameters[0], 98765.4, 98765.4 * 1e-6);
  EXPECT_NEAR(f.parameters[1], -0.987, 1e-6);
  auto rep = fit_models(d);
  EXPECT_EQ(rep.best().model, ModelKind::PowerLaw);
}

TEST(Fit, PowerLawRejectsNonPositiveData) {
  EXPECT_FALSE(fit_power_law({{0, 1}, {1, 2}, {2, 3}}).ok);
  EXPECT_FALSE(fit_power_law({{1, -1}, {2, 2}}).ok);
}

TEST(Fit, ReportRanksBySseAndFailuresLast) {
  std::vector<DataPoint> d = {{-1, 1}, {0, 0}, {1, 1}, {2, 4}, {3, 9}};
  auto rep = fit_models(d);
  ASSERT_EQ(rep.fits.size(), 4u);
  EXPECT_FALSE(rep.fits.back().ok);  // power law cannot take x <= 0
  for (std::size_t i = 1; i + 1 < rep.fits.size(); ++i) EXPECT_LE(rep.fits[i - 1].sse, rep.fits[i].sse);
  EXPECT_THROW(fit_models({{1, 1}, {2, 2}}), std::invalid_argument);
}

TEST(Fit, SingularSystemReported) {
  std::vector<DataPoint> d(5, {2.0, 3.0});
  EXPECT_FALSE(fit_polynomial(d, 2).ok);
}
