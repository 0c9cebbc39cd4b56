#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "fabricsim/fabric.hpp"
#include "fabricsim/rng.hpp"

using namespace fabricsim;
using Mask = IslipArbiter::Mask;

TEST(Link, SerializationAndPropagation) {
  LinkParams l{512.0, 2.0, 25.0};
  EXPECT_EQ(l.serialization(148), SimTime::from_ns(148 * 8 / 512.0));
  EXPECT_EQ(l.propagation(), SimTime::from_ns(50));
  auto t = transmit(4096, LinkParams{400.0, 0.3, 25.0});
  EXPECT_NEAR(t.serialization.ns(), 81.92, 1e-6);
  EXPECT_NEAR(t.propagation.ns(), 7.5, 1e-9);
  EXPECT_THROW((LinkParams{0.0, 1, 1}).validate(), std::invalid_argument);
}

TEST(Arbitration, ParseAndPrint) {
  EXPECT_EQ(parse_arbitration("round_robin"), Arbitration::RoundRobin);
  EXPECT_EQ(parse_arbitration(to_string(Arbitration::AgeBased)), Arbitration::AgeBased);
  EXPECT_THROW(parse_arbitration("lottery"), std::invalid_argument);
}

TEST(SwitchParams, Validation) {
  SwitchParams p;
  p.radix = 9;
  EXPECT_NO_THROW(p.validate(148));
  EXPECT_EQ(p.voq_limit(), 65536u);
  p.voq_limit_bytes = 0;
  EXPECT_EQ(p.voq_limit(), p.input_buffer_bytes);
  p.input_buffer_bytes = 100;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  p = {};
  p.voq_limit_bytes = p.input_buffer_bytes + 1;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  p = {};
  p.radix = 65;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  p = {};
  p.islip_iterations = 0;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  p = {};
  p.crossbar_speedup = 0.5;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  p.crossbar_speedup = 1.0;
  EXPECT_NO_THROW(p.validate(148));
}

TEST(CreditState, SliceAndPoolLimits) {
  CreditState c(4, 300, 500);
  EXPECT_TRUE(c.can_send(0, 300));
  c.consume(0, 300);
  EXPECT_FALSE(c.can_send(0, 1));
  EXPECT_TRUE(c.can_send(1, 200));
  EXPECT_FALSE(c.can_send(1, 201));  // pool holds only 200 more
  EXPECT_EQ(c.available(1), 200);
  c.consume(1, 200);
  EXPECT_THROW(c.consume(2, 1), std::logic_error);
  c.restore(0, 300);
  c.restore(1, 200);
  EXPECT_EQ(c.total_available(), 500);
  EXPECT_THROW(c.restore(0, 1), std::logic_error);
}

TEST(CreditState, RandomOperationsNeverBreakBounds) {
  CreditState c(8, 1000, 3000);
  std::vector<std::int64_t> held(8, 0);
  CounterRng r(RunSeed{4}, 0);
  for (int i = 0; i < 100000; ++i) {
    auto s = static_cast<std::uint32_t>(r.below(8));
    Bytes w = 1 + static_cast<Bytes>(r.below(200));
    if (r.uniform() < 0.55) {
      if (c.can_send(s, w)) {
        c.consume(s, w);
        held[s] += w;
      }
    } else if (held[s] >= static_cast<std::int64_t>(w)) {
      c.restore(s, w);
      held[s] -= w;
    }
    std::int64_t total = 0;
    for (int k = 0; k < 8; ++k) {
      ASSERT_LE(held[k], 1000);
      total += held[k];
    }
    ASSERT_LE(total, 3000);
    ASSERT_EQ(c.total_available(), 3000 - total);
  }
}

namespace {

void expect_valid_matching(const std::vector<Mask>& req,
                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& m) {
  Mask ins = 0, outs = 0;
  for (auto [i, o] : m) {
    EXPECT_TRUE(req[i] >> o & 1) << "matched pair was not requested";
    EXPECT_FALSE(ins >> i & 1) << "input matched twice";
    EXPECT_FALSE(outs >> o & 1) << "output matched twice";
    ins |= Mask{1} << i;
    outs |= Mask{1} << o;
  }
}

}  // namespace

TEST(Islip, MatchingsAreValidForRandomRequests) {
  for (auto policy : {Arbitration::RoundRobin, Arbitration::AgeBased})
    for (std::uint32_t iters : {1u, 2u, 9u}) {
      IslipArbiter arb(9, policy, iters);
      CounterRng r(RunSeed{iters}, static_cast<std::uint64_t>(policy));
      for (int round = 0; round < 2000; ++round) {
        std::vector<Mask> req(9);
        for (auto& m : req) m = r.next_u64() & 0x1FF;
        auto age = [&](std::uint32_t i, std::uint32_t o) {
          return AgeKey{SimTime{static_cast<std::int64_t>((i * 31 + o * 17) % 23)}, i};
        };
        auto m = arb.match(req, age);
        expect_valid_matching(req, m);
        // With as many iterations as ports the matching is maximal.
        if (iters == 9) {
          Mask ins = 0, outs = 0;
          for (auto [i, o] : m) ins |= Mask{1} << i, outs |= Mask{1} << o;
          int leftovers = 0;
          for (std::uint32_t i = 0; i < 9; ++i)
            if (!(ins >> i & 1) && (req[i] & ~outs & 0x1FF)) ++leftovers;
          EXPECT_EQ(leftovers, 0);
        }
      }
    }
}

TEST(Islip, FullLoadDesynchronizesToPerfectMatching) {
  const std::uint32_t n = 8;
  IslipArbiter arb(n, Arbitration::RoundRobin, 1);
  std::vector<Mask> req(n, (Mask{1} << n) - 1);
  std::size_t last = 0;
  for (int round = 0; round < 64; ++round) last = arb.match(req).size();
  EXPECT_EQ(last, n);
}

TEST(Islip, RoundRobinPointersAdvancePastGrant) {
  IslipArbiter arb(4, Arbitration::RoundRobin, 1);
  std::vector<Mask> req = {0b0001, 0b0001, 0, 0};
  auto m = arb.match(req);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].first, 0u);
  EXPECT_EQ(arb.grant_pointer(0), 1u);
  EXPECT_EQ(arb.accept_pointer(0), 1u);
  m = arb.match(req);
  EXPECT_EQ(m[0].first, 1u);
  EXPECT_EQ(arb.grant_pointer(0), 2u);
}

// Every persistently requesting input wins a contended output within N^2
// rounds: the output's grant pointer stays on an input until it accepts,
// which its accept pointer guarantees within N rounds.
TEST(Islip, RoundRobinIsStarvationFreeWithinWindow) {
  const std::uint32_t n = 16;
  IslipArbiter arb(n, Arbitration::RoundRobin, 1);
  CounterRng r(RunSeed{21}, 0);
  std::vector<int> since(n, 0);
  for (int round = 0; round < 20000; ++round) {
    std::vector<Mask> req(n);
    // Output 0 is requested by everyone; other requests are random noise.
    for (auto& m : req) m = 1 | (r.next_u64() & ((Mask{1} << n) - 2));
    auto m = arb.match(req);
    for (std::uint32_t i = 0; i < n; ++i) ++since[i];
    for (auto [i, o] : m)
      if (o == 0) since[i] = 0;
    for (std::uint32_t i = 0; i < n; ++i) ASSERT_LE(since[i], static_cast<int>(n * n)) << "input " << i;
  }
}

// With a single contended output the service is a strict rotation.
TEST(Islip, RoundRobinRotatesOnSingleHotOutput) {
  const std::uint32_t n = 8;
  IslipArbiter arb(n, Arbitration::RoundRobin, 1);
  std::vector<Mask> req(n, 1);
  for (std::uint32_t round = 0; round < 3 * n; ++round) {
    auto m = arb.match(req);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].first, round % n);
  }
}

TEST(Islip, AgeGrantsOldestRequest) {
  IslipArbiter arb(4, Arbitration::AgeBased, 1);
  std::vector<Mask> req = {0b0001, 0b0001, 0b0001, 0};
  std::map<std::uint32_t, AgeKey> ages = {{0, {SimTime{30}, 5}}, {1, {SimTime{10}, 9}},
                                          {2, {SimTime{10}, 7}}};
  auto m = arb.match(req, [&](std::uint32_t i, std::uint32_t) { return ages[i]; });
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].first, 2u);  // same time, lower message id wins
}

TEST(Islip, AgeAcceptsOldestGrant) {
  IslipArbiter arb(3, Arbitration::AgeBased, 1);
  std::vector<Mask> req = {0b011, 0, 0};
  auto m = arb.match(req, [](std::uint32_t, std::uint32_t o) {
    return AgeKey{SimTime{o == 1 ? 1 : 2}, o};
  });
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].second, 1u);
}
