#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fabricsim/engine.hpp"

namespace fabricsim {

using Bytes = std::uint32_t;
using MessageId = std::uint64_t;

// Header/payload sizes of the two network tiers.
struct PacketGeometry {
  Bytes intra_header_bytes = 20;
  Bytes intra_payload_bytes = 128;
  Bytes inter_header_bytes = 64;
  Bytes inter_payload_bytes = 4032;

  void validate() const {
    if (intra_header_bytes == 0 || intra_payload_bytes == 0 || inter_header_bytes == 0 ||
        inter_payload_bytes == 0)
      throw std::invalid_argument("packet geometry fields must be strictly positive");
  }

  Bytes max_intra_wire() const { return intra_header_bytes + intra_payload_bytes; }
  Bytes max_inter_wire() const { return inter_header_bytes + inter_payload_bytes; }

  std::uint64_t intra_packets_for(std::uint64_t message_bytes) const {
    return (message_bytes + intra_payload_bytes - 1) / intra_payload_bytes;
  }
  // Total intra-tier wire bytes a message occupies after packetization.
  std::uint64_t intra_wire_bytes(std::uint64_t message_bytes) const {
    return message_bytes + intra_packets_for(message_bytes) * intra_header_bytes;
  }
};

enum class Scope : std::uint8_t { IntraNode, InterNode };

struct Message {
  MessageId id = 0;
  std::uint32_t src_node = 0;
  std::uint32_t src_acc = 0;
  std::uint32_t dst_node = 0;
  std::uint32_t dst_acc = 0;
  Bytes size_bytes = 0;
  SimTime created_at{};

  Scope scope() const { return src_node == dst_node ? Scope::IntraNode : Scope::InterNode; }

  void validate() const {
    if (size_bytes == 0) throw std::invalid_argument("message size must be positive");
    if (src_node == dst_node && src_acc == dst_acc)
      throw std::invalid_argument("message source and destination coincide");
  }
};

// One intra-tier fragment of a message. Payload content is never modelled,
// only its position and length.
struct IntraFragment {
  MessageId message_id = 0;
  Bytes offset_bytes = 0;
  Bytes payload_bytes = 0;
  Bytes header_bytes = 0;

  Bytes wire_bytes() const { return header_bytes + payload_bytes; }
  bool operator==(const IntraFragment&) const = default;
};

inline std::vector<IntraFragment> packetize(const Message& msg, const PacketGeometry& geom) {
  if (msg.size_bytes == 0) throw std::invalid_argument("cannot packetize an empty message");
  std::vector<IntraFragment> out;
  out.reserve(geom.intra_packets_for(msg.size_bytes));
  for (Bytes off = 0; off < msg.size_bytes; off += geom.intra_payload_bytes) {
    Bytes len = std::min<Bytes>(geom.intra_payload_bytes, msg.size_bytes - off);
    out.push_back({msg.id, off, len, geom.intra_header_bytes});
  }
  return out;
}

// Span of one message's payload carried inside an inter-tier packet.
struct Span {
  MessageId message_id = 0;
  Bytes offset = 0;
  Bytes length = 0;
  bool operator==(const Span&) const = default;
};

// Seven-way decomposition of a message's sojourn time, ordered along the
// path the last byte of the message takes.
enum class LatencyComponent : std::uint8_t {
  SrcAccelerator,
  SrcIntraNetwork,
  SrcNic,
  InterNetwork,
  DstNic,
  DstIntraNetwork,
  DstAccelerator,
};
inline constexpr std::size_t kLatencyComponents = 7;

inline constexpr std::array<std::string_view, kLatencyComponents> kLatencyComponentNames = {
    "src_acc", "src_intra", "src_nic", "inter", "dst_nic", "dst_intra", "dst_acc"};

// Timestamps of the last byte of a message crossing each stage boundary.
// Index k is the end of component k. Unused stages stay zero.
using Milestones = std::array<SimTime, kLatencyComponents>;

struct LatencyRecord {
  MessageId message_id = 0;
  Scope scope = Scope::IntraNode;
  std::array<SimTime, kLatencyComponents> components{};

  SimTime total() const {
    SimTime t{};
    for (auto c : components) t += c;
    return t;
  }
  SimTime operator[](LatencyComponent c) const { return components[static_cast<std::size_t>(c)]; }

  // Builds the decomposition from stage milestones. Intra-node messages only
  // cross the src_acc, src_intra and dst_acc boundaries; the NIC and
  // inter-network components stay zero. Milestones are clamped to be
  // non-decreasing so the components always sum to delivered - created.
  static LatencyRecord from_milestones(MessageId id, Scope scope, SimTime created,
                                       const Milestones& m) {
    LatencyRecord r;
    r.message_id = id;
    r.scope = scope;
    auto used = [scope](std::size_t k) {
      if (scope == Scope::InterNode) return true;
      return k == 0 || k == 1 || k == kLatencyComponents - 1;
    };
    SimTime prev = created;
    for (std::size_t k = 0; k < kLatencyComponents; ++k) {
      if (!used(k)) continue;
      SimTime at = max(m[k], prev);
      r.components[k] = at - prev;
      prev = at;
    }
    return r;
  }
};

}  // namespace fabricsim
