#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fabricsim/engine.hpp"
#include "fabricsim/model.hpp"

namespace fabricsim {

enum class PackingPolicy : std::uint8_t { AcrossMessages, PerMessage };

inline std::string_view to_string(PackingPolicy p) {
  return p == PackingPolicy::AcrossMessages ? "across_messages" : "per_message";
}
inline PackingPolicy parse_packing(std::string_view s) {
  if (s == "across_messages") return PackingPolicy::AcrossMessages;
  if (s == "per_message") return PackingPolicy::PerMessage;
  throw std::invalid_argument("unknown packing policy '" + std::string(s) + "'");
}

struct NicParams {
  // NIC service time per intra-node packet converted, in either direction.
  double conversion_delay_ns = 9.0;
  double flush_timeout_ns = 1000.0;
  PackingPolicy packing = PackingPolicy::AcrossMessages;
  // Each of the two NIC input buffers (from the intra switch and from the leaf).
  Bytes input_buffer_bytes = 16384;

  void validate(Bytes max_wire_packet) const {
    if (conversion_delay_ns < 0 || flush_timeout_ns < 0)
      throw std::invalid_argument("NIC delays must be non-negative");
    if (input_buffer_bytes < max_wire_packet)
      throw std::invalid_argument("NIC input buffer cannot hold one maximum packet");
  }
};

// Payload of one inter-node packet on its way out of the source NIC.
struct InterPayload {
  std::uint32_t dst_node = 0;
  std::vector<Span> spans;
  Bytes payload_bytes = 0;
};

// Per-destination-node staging of stripped intra-node payloads. Spans leave
// in FIFO order; a packet is cut as soon as a full inter payload is staged.
class AggregationBuffer {
 public:
  AggregationBuffer() = default;
  AggregationBuffer(std::uint32_t nodes, Bytes inter_payload_bytes, PackingPolicy packing)
      : staging_(nodes), capacity_(inter_payload_bytes), packing_(packing) {
    if (inter_payload_bytes == 0) throw std::invalid_argument("inter payload must be positive");
  }

  Bytes staged_bytes(std::uint32_t dst) const { return staging_[dst].bytes; }
  std::uint64_t epoch(std::uint32_t dst) const { return staging_[dst].epoch; }
  bool empty(std::uint32_t dst) const { return staging_[dst].spans.empty(); }
  // Arrival time of the oldest staged byte toward `dst`.
  SimTime oldest_arrival(std::uint32_t dst) const { return staging_[dst].spans.front().arrival; }
  std::uint64_t total_staged() const {
    std::uint64_t t = 0;
    for (const auto& s : staging_) t += s.bytes;
    return t;
  }

  // Stages one span and appends every packet it completes to `out`. Returns
  // true when the staging area toward `dst` went from empty to non-empty or
  // its oldest byte changed, i.e. when the flush deadline must be re-armed.
  bool ingest(std::uint32_t dst, const Span& span, Bytes message_size, SimTime now,
              std::vector<InterPayload>& out) {
    if (span.length == 0) throw std::invalid_argument("empty span");
    Staging& st = staging_[dst];
    bool rearm = false;
    if (packing_ == PackingPolicy::PerMessage && !st.spans.empty() &&
        st.spans.back().span.message_id != span.message_id) {
      flush(dst, out);
      rearm = true;
    }
    if (st.spans.empty()) rearm = true;
    auto& back = st.spans;
    if (!back.empty() && back.back().span.message_id == span.message_id &&
        back.back().span.offset + back.back().span.length == span.offset) {
      back.back().span.length += span.length;
    } else {
      back.push_back({span, now});
    }
    st.bytes += span.length;
    while (st.bytes >= capacity_) {
      cut(dst, capacity_, out);
      rearm = true;
    }
    if (packing_ == PackingPolicy::PerMessage && span.offset + span.length == message_size &&
        st.bytes > 0) {
      flush(dst, out);
      rearm = true;
    }
    if (rearm) ++st.epoch;
    return rearm && !st.spans.empty();
  }

  // Emits whatever is staged toward `dst` as one (possibly short) packet.
  bool flush(std::uint32_t dst, std::vector<InterPayload>& out) {
    Staging& st = staging_[dst];
    if (st.bytes == 0) return false;
    cut(dst, st.bytes, out);
    ++st.epoch;
    return true;
  }

 private:
  struct StagedSpan {
    Span span;
    SimTime arrival;
  };
  struct Staging {
    std::deque<StagedSpan> spans;
    Bytes bytes = 0;
    std::uint64_t epoch = 0;
  };

  void cut(std::uint32_t dst, Bytes amount, std::vector<InterPayload>& out) {
    Staging& st = staging_[dst];
    InterPayload pkt;
    pkt.dst_node = dst;
    Bytes need = amount;
    while (need > 0) {
      StagedSpan& front = st.spans.front();
      if (front.span.length <= need) {
        pkt.spans.push_back(front.span);
        need -= front.span.length;
        st.spans.pop_front();
      } else {
        pkt.spans.push_back({front.span.message_id, front.span.offset, need});
        front.span.offset += need;
        front.span.length -= need;
        need = 0;
      }
    }
    pkt.payload_bytes = amount;
    st.bytes -= amount;
    out.push_back(std::move(pkt));
  }

  std::vector<Staging> staging_;
  Bytes capacity_ = 4032;
  PackingPolicy packing_ = PackingPolicy::AcrossMessages;
};

// Regenerates intra-node packets from the spans of one inter-node packet.
// Fragment boundaries follow each message's own payload grid, so a fragment
// never merges bytes of two messages or of two source packets. A source
// packet cut by an inter packet boundary arrives as two fragments.
inline std::vector<IntraFragment> split_inter(const std::vector<Span>& spans,
                                              const PacketGeometry& geom) {
  std::vector<IntraFragment> out;
  const Bytes mps = geom.intra_payload_bytes;
  for (const Span& s : spans) {
    Bytes cur = s.offset;
    const Bytes end = s.offset + s.length;
    while (cur < end) {
      Bytes boundary = (cur / mps + 1) * mps;
      Bytes next = boundary < end ? boundary : end;
      out.push_back({s.message_id, cur, next - cur, geom.intra_header_bytes});
      cur = next;
    }
  }
  return out;
}

}  // namespace fabricsim
