#include <gtest/gtest.h>

#include <map>

#include "fabricsim/nic.hpp"
#include "fabricsim/rng.hpp"

using namespace fabricsim;

TEST(NicParams, ValidationAndPacking) {
  NicParams p;
  EXPECT_NO_THROW(p.validate(4096));
  p.input_buffer_bytes = 100;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  p = {};
  p.conversion_delay_ns = -1;
  EXPECT_THROW(p.validate(148), std::invalid_argument);
  EXPECT_EQ(parse_packing("per_message"), PackingPolicy::PerMessage);
  EXPECT_EQ(parse_packing(to_string(PackingPolicy::AcrossMessages)), PackingPolicy::AcrossMessages);
  EXPECT_THROW(parse_packing("zip"), std::invalid_argument);
}

TEST(Aggregation, CutsFullPacketsAcrossMessages) {
  AggregationBuffer agg(4, 4032, PackingPolicy::AcrossMessages);
  std::vector<InterPayload> out;
  for (Bytes off = 0; off < 4096; off += 128) agg.ingest(2, {1, off, 128}, 4096, SimTime{}, out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].payload_bytes, 4032u);
  EXPECT_EQ(out[0].dst_node, 2u);
  ASSERT_EQ(out[0].spans.size(), 1u);
  EXPECT_EQ(out[0].spans[0], (Span{1, 0, 4032}));
  EXPECT_EQ(agg.staged_bytes(2), 64u);
  // A second message fills the same staging area.
  for (Bytes off = 0; off < 4096; off += 128) agg.ingest(2, {2, off, 128}, 4096, SimTime{}, out);
  ASSERT_EQ(out.size(), 2u);
  ASSERT_EQ(out[1].spans.size(), 2u);
  EXPECT_EQ(out[1].spans[0], (Span{1, 4032, 64}));
  EXPECT_EQ(out[1].spans[1], (Span{2, 0, 3968}));
  EXPECT_TRUE(agg.flush(2, out));
  EXPECT_EQ(out.back().payload_bytes, 128u);
  EXPECT_FALSE(agg.flush(2, out));
  EXPECT_EQ(agg.total_staged(), 0u);
}

TEST(Aggregation, PerMessageNeverMixesMessages) {
  AggregationBuffer agg(2, 4032, PackingPolicy::PerMessage);
  std::vector<InterPayload> out;
  for (MessageId m = 0; m < 3; ++m)
    for (Bytes off = 0; off < 300; off += 128)
      agg.ingest(1, {m, off, std::min<Bytes>(128, 300 - off)}, 300, SimTime{}, out);
  ASSERT_EQ(out.size(), 3u);
  for (MessageId m = 0; m < 3; ++m) {
    ASSERT_EQ(out[m].spans.size(), 1u);
    EXPECT_EQ(out[m].spans[0], (Span{m, 0, 300}));
  }
}

TEST(Aggregation, RearmSignalsAndEpochs) {
  AggregationBuffer agg(1, 4032, PackingPolicy::AcrossMessages);
  std::vector<InterPayload> out;
  auto e0 = agg.epoch(0);
  EXPECT_TRUE(agg.ingest(0, {1, 0, 128}, 4096, SimTime::from_ns(5), out));
  EXPECT_GT(agg.epoch(0), e0);
  EXPECT_EQ(agg.oldest_arrival(0), SimTime::from_ns(5));
  auto e1 = agg.epoch(0);
  EXPECT_FALSE(agg.ingest(0, {1, 128, 128}, 4096, SimTime::from_ns(6), out));
  EXPECT_EQ(agg.epoch(0), e1);
  EXPECT_EQ(agg.oldest_arrival(0), SimTime::from_ns(5));
}

TEST(Split, FragmentsFollowEachMessageGrid) {
  PacketGeometry g;
  auto f = split_inter({{7, 4032, 64}, {8, 0, 300}}, g);
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], (IntraFragment{7, 4032, 64, 20}));
  EXPECT_EQ(f[1], (IntraFragment{8, 0, 128, 20}));
  EXPECT_EQ(f[2], (IntraFragment{8, 128, 128, 20}));
  EXPECT_EQ(f[3], (IntraFragment{8, 256, 44, 20}));
  // A span starting mid-grid is cut at the next grid line.
  f = split_inter({{9, 100, 100}}, g);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].payload_bytes, 28u);
  EXPECT_EQ(f[1].offset_bytes, 128u);
}

// Packetize, aggregate and split random messages. Every message arrives
// whole, without overlap, and no fragment straddles a source packet.
TEST(Split, RoundTripCoversEveryMessageOnItsGrid) {
  PacketGeometry g;
  CounterRng r(RunSeed{8}, 0);
  for (auto policy : {PackingPolicy::AcrossMessages, PackingPolicy::PerMessage}) {
    AggregationBuffer agg(1, g.inter_payload_bytes, policy);
    std::vector<InterPayload> packets;
    std::map<MessageId, Bytes> size;
    std::map<MessageId, std::vector<IntraFragment>> received;
    for (MessageId m = 0; m < 200; ++m) {
      Message msg;
      msg.id = m;
      msg.size_bytes = 1 + static_cast<Bytes>(r.below(10000));
      size[m] = msg.size_bytes;
      for (const auto& f : packetize(msg, g))
        agg.ingest(0, {m, f.offset_bytes, f.payload_bytes}, msg.size_bytes, SimTime{}, packets);
    }
    agg.flush(0, packets);
    std::size_t cut_fragments = 0;
    for (const auto& p : packets) {
      EXPECT_LE(p.payload_bytes, g.inter_payload_bytes);
      for (const auto& f : split_inter(p.spans, g)) received[f.message_id].push_back(f);
    }
    ASSERT_EQ(received.size(), size.size());
    for (auto& [m, frags] : received) {
      Bytes next = 0;
      for (const auto& f : frags) {
        EXPECT_EQ(f.offset_bytes, next);
        EXPECT_EQ(f.offset_bytes / 128, (f.offset_bytes + f.payload_bytes - 1) / 128);
        EXPECT_EQ(f.header_bytes, g.intra_header_bytes);
        cut_fragments += f.payload_bytes < 128 && f.offset_bytes + f.payload_bytes != size[m];
        next += f.payload_bytes;
      }
      EXPECT_EQ(next, size[m]);
    }
    // Only packet boundaries create short fragments mid-message.
    EXPECT_LE(cut_fragments, 2 * packets.size());
  }
}
