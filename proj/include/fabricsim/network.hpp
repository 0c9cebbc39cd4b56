#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabricsim/engine.hpp"
#include "fabricsim/fabric.hpp"
#include "fabricsim/fabric_config.hpp"
#include "fabricsim/metrics.hpp"
#include "fabricsim/model.hpp"
#include "fabricsim/nic.hpp"
#include "fabricsim/rng.hpp"
#include "fabricsim/topology.hpp"
#include "fabricsim/traffic.hpp"

namespace fabricsim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-message timing exposed to delivery observers.
struct DeliveryTrace {
  Message message;
  Milestones milestones{};
  SimTime first_injection{};
  SimTime delivered_at{};
};

// End-of-run accounting, all in payload bytes unless noted.
struct NetworkStats {
  std::uint64_t generated_messages = 0;
  std::uint64_t suppressed_messages = 0;
  std::uint64_t delivered_messages = 0;
  std::uint64_t generated_bytes = 0;
  std::uint64_t suppressed_bytes = 0;
  std::uint64_t sunk_bytes = 0;          // reached a destination accelerator
  std::uint64_t source_queued_bytes = 0;  // not yet injected
  std::uint64_t in_packets_bytes = 0;     // carried by live packets
  std::uint64_t staged_bytes = 0;         // waiting in NIC aggregation buffers
  std::uint64_t nic_ingested_bytes = 0;   // stripped at source NICs
  std::uint64_t nic_aggregated_bytes = 0; // packed into inter packets
  std::uint64_t nic_split_bytes = 0;      // regenerated at destination NICs
  std::uint64_t nic_split_wire_bytes = 0; // intra wire bytes regenerated
  std::uint64_t nic_received_inter_bytes = 0;  // inter payload fully split
  std::uint64_t nic_splitting_bytes = 0;  // already regenerated from packets still being split
  std::uint64_t credit_violations = 0;
  double max_buffer_fill = 0;  // highest occupancy / capacity seen at any input
  std::uint64_t events = 0;

  std::uint64_t accounted_bytes() const {
    return sunk_bytes + source_queued_bytes + in_packets_bytes + staged_bytes;
  }
};

// Packet-level model of the whole system: accelerators and one intra-node
// switch per node, a NIC gateway per node, and the fat-tree between NICs.
class Network {
 public:
  using DeliveryObserver = std::function<void(const DeliveryTrace&)>;

  explicit Network(const FabricConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    build();
  }

  const FabricConfig& config() const { return cfg_; }
  SimTime now() const { return engine_.now(); }
  std::size_t pending_events() const { return engine_.pending(); }

  void set_metrics(MetricsCollector* m) { metrics_ = m; }
  void set_observer(DeliveryObserver obs) { observer_ = std::move(obs); }

  // Starts a Poisson source on every accelerator.
  void attach_poisson(const TrafficPattern& pattern, double load, RunSeed seed) {
    pattern.validate();
    const std::uint32_t a = cfg_.node.accelerators_per_node;
    for (std::uint32_t g = 0; g < accs_.size(); ++g) {
      Acc& acc = accs_[g];
      acc.source.emplace(g / a, g % a, cfg_.nodes(), a, pattern, load, cfg_.node.acc_link_gbps,
                         cfg_.load_reference, seed);
      acc.message_bytes = pattern.message_bytes;
      MessageDraw d = acc.source->next();
      acc.pending_dst = d.destination;
      engine_.schedule(engine_.now() + d.interarrival, kGenerate, g);
    }
  }

  // Queues one message at its source accelerator at time `at`.
  void post(SimTime at, std::uint32_t src_node, std::uint32_t src_acc, std::uint32_t dst_node,
            std::uint32_t dst_acc, Bytes size) {
    const std::uint32_t a = cfg_.node.accelerators_per_node;
    if (src_node >= cfg_.nodes() || dst_node >= cfg_.nodes() || src_acc >= a || dst_acc >= a)
      throw std::out_of_range("posted message endpoint outside the system");
    Message m;
    m.src_node = src_node;
    m.src_acc = src_acc;
    m.dst_node = dst_node;
    m.dst_acc = dst_acc;
    m.size_bytes = size;
    m.validate();
    posted_.push_back(m);
    engine_.schedule(at, kPost, src_node * a + src_acc, posted_.size() - 1);
  }

  SimTime run_until(SimTime horizon) {
    try {
      engine_.run_until(horizon, [this](const Event& e) { dispatch(e); });
    } catch (const SimulationError&) {
      throw;
    } catch (const std::logic_error& e) {
      throw SimulationError(std::string("integrity failure: ") + e.what());
    }
    return engine_.now();
  }

  NetworkStats stats() const {
    NetworkStats s = stats_;
    s.events = engine_.dispatched();
    for (const Acc& acc : accs_) {
      bool head = true;
      for (std::uint32_t slot : acc.queue) {
        s.source_queued_bytes += msgs_[slot].msg.size_bytes - (head ? acc.head_offset : 0);
        head = false;
      }
    }
    for (const Packet& p : packets_)
      if (p.live) s.in_packets_bytes += p.payload;
    for (const Nic& nic : nics_) {
      s.staged_bytes += nic.agg.total_staged();
      // Fragments already cut from the inter packet being split are live
      // packets of their own.
      if (nic.split_active)
        for (std::size_t k = 0; k < nic.frag_next; ++k) {
          s.in_packets_bytes -= nic.frags[k].payload_bytes;
          s.nic_splitting_bytes += nic.frags[k].payload_bytes;
        }
    }
    return s;
  }

  // Throws when bytes were lost or created anywhere in the system.
  void check_conservation() const {
    NetworkStats s = stats();
    if (s.generated_bytes != s.accounted_bytes()) {
      std::ostringstream os;
      os << "byte conservation violated: generated " << s.generated_bytes << " but sunk "
         << s.sunk_bytes << " + queued " << s.source_queued_bytes << " + in flight "
         << s.in_packets_bytes << " + staged " << s.staged_bytes;
      throw SimulationError(os.str());
    }
    if (s.nic_ingested_bytes != s.nic_aggregated_bytes + s.staged_bytes)
      throw SimulationError("NIC aggregation lost or duplicated payload bytes");
    if (s.nic_split_bytes != s.nic_received_inter_bytes + s.nic_splitting_bytes)
      throw SimulationError("NIC splitting lost or duplicated payload bytes");
    if (s.credit_violations) throw SimulationError("input buffer occupancy exceeded its capacity");
  }

 private:
  static constexpr std::uint32_t kNil = std::numeric_limits<std::uint32_t>::max();

  enum EventKind : std::uint16_t {
    kGenerate,
    kPost,
    kAccTxFree,
    kArriveSwitch,
    kArbitrate,
    kCreditWake,
    kArriveIngest,
    kIngestDone,
    kUpTxFree,
    kFlush,
    kArriveInbound,
    kSplitStep,
    kDownTxFree,
    kDeliver,
  };

  struct MsgState {
    Message msg;
    Milestones m{};
    SimTime first_injection{};
    Bytes received = 0;
    bool live = false;
  };

  struct Packet {
    std::uint32_t next = kNil;
    Bytes wire = 0;
    Bytes payload = 0;
    Bytes header = 0;
    Bytes offset = 0;
    std::uint32_t slot = 0;  // owning message for intra packets
    std::uint32_t dst_node = 0;
    std::uint32_t dst_acc = 0;
    bool inter = false;
    bool live = false;
    bool ack_after = false;  // a DLLP follows this packet on links that carry them
    SimTime tail_in{};       // tail arrival at the current buffer
    AgeKey age{};
    std::vector<Span> spans;  // inter packets; Span::message_id holds the message slot
  };

  enum class Down : std::uint8_t { SwitchIn, NicIngest, NicInbound, Sink };
  enum class Owner : std::uint8_t { Acc, SwitchOut, NicUp, NicDown };

  // One direction of a link plus the sender's view of the receiver's buffer.
  struct Channel {
    double fs_per_byte = 0;
    SimTime prop{};
    std::int64_t dllp_fs = 0;
    std::uint32_t ack_factor = 1;
    SimTime busy_until{};
    CreditState credit;
    bool credited = true;
    // Credits travelling back from the receiver, in arrival order. They are
    // applied when the sender next looks at its credit; a wake-up event is
    // only scheduled while the sender is blocked.
    struct Return {
      SimTime at;
      std::uint32_t slice;
      Bytes bytes;
    };
    std::deque<Return> returns;
    bool blocked = false;
    bool wake_scheduled = false;

    void drain(SimTime now) {
      while (!returns.empty() && returns.front().at <= now) {
        credit.restore(returns.front().slice, returns.front().bytes);
        returns.pop_front();
      }
    }
    Down down = Down::Sink;
    std::uint32_t down_id = 0;
    std::uint32_t down_port = 0;
    Owner owner = Owner::Acc;
    std::uint32_t owner_id = 0;
    std::uint32_t owner_port = 0;

    SimTime ser(std::uint64_t bytes) const {
      return SimTime{static_cast<std::int64_t>(static_cast<double>(bytes) * fs_per_byte + 0.5)};
    }
  };

  struct Voq {
    std::uint32_t head = kNil;
    std::uint32_t tail = kNil;
  };

  struct Switch {
    std::uint32_t radix = 0;
    bool intra = false;
    std::uint32_t node = 0;   // intra switches
    std::uint32_t local = 0;  // fat-tree switch id
    Bytes buffer_bytes = 0;
    Bytes voq_limit = 0;
    double speedup = 1.0;
    IslipArbiter arbiter;
    std::vector<std::uint32_t> in_channel;
    std::vector<std::uint32_t> out_channel;
    std::vector<SimTime> in_busy;
    std::vector<Voq> voq;                         // input * radix + output
    std::vector<std::uint64_t> in_mask;           // per input: outputs with queued packets
    std::vector<std::uint64_t> out_mask;          // per output: inputs with queued packets
    std::vector<std::int64_t> occupancy;          // per input
    std::vector<std::int64_t> voq_bytes;          // input * radix + output
    std::vector<char> arb_on_in_free;             // arbitration pending for when the port frees
    std::vector<char> arb_on_out_free;
    SimTime arb_at = SimTime{-1};
    std::vector<std::uint64_t> requests;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> matches;
  };

  struct Acc {
    std::optional<TrafficSource> source;
    std::optional<Destination> pending_dst;
    Bytes message_bytes = 0;
    std::uint32_t channel = 0;
    std::deque<std::uint32_t> queue;
    Bytes head_offset = 0;
  };

  struct Fifo {
    std::uint32_t head = kNil;
    std::uint32_t tail = kNil;
    bool empty() const { return head == kNil; }
  };

  struct Nic {
    std::uint32_t from_switch = 0;  // channel feeding the ingest buffer
    std::uint32_t from_leaf = 0;    // channel feeding the inbound buffer
    std::uint32_t up = 0;           // channel to the leaf
    std::uint32_t down = 0;         // channel to the intra-node switch
    Fifo ingest;
    bool ingest_busy = false;
    AggregationBuffer agg;
    std::deque<std::uint32_t> outbound;
    Fifo inbound;
    bool split_active = false;
    bool split_stalled = false;
    std::vector<IntraFragment> frags;
    std::size_t frag_next = 0;
    std::deque<std::uint32_t> down_queue;
    std::vector<InterPayload> scratch;
  };

  // ---- construction ---------------------------------------------------

  std::uint32_t add_channel(const LinkParams& l) {
    Channel c;
    c.fs_per_byte = 8.0 * SimTime::kTicksPerNs / l.bandwidth_gbps;
    c.prop = l.propagation();
    c.dllp_fs = l.dllp_bytes ? c.ser(l.dllp_bytes).ticks() : 0;
    c.ack_factor = l.ack_factor;
    channels_.push_back(c);
    return static_cast<std::uint32_t>(channels_.size() - 1);
  }

  void connect_to_switch(std::uint32_t ch, std::uint32_t sw, std::uint32_t port) {
    Channel& c = channels_[ch];
    Switch& s = switches_[sw];
    c.down = Down::SwitchIn;
    c.down_id = sw;
    c.down_port = port;
    c.credit = CreditState(s.radix, s.voq_limit, s.buffer_bytes);
    s.in_channel[port] = ch;
  }

  void init_switch(Switch& s, const SwitchParams& p) {
    s.radix = p.radix;
    s.buffer_bytes = p.input_buffer_bytes;
    s.voq_limit = p.voq_limit();
    s.speedup = p.crossbar_speedup;
    s.arbiter = IslipArbiter(p.radix, p.arbitration, p.islip_iterations);
    s.in_channel.assign(p.radix, kNil);
    s.out_channel.assign(p.radix, kNil);
    s.in_busy.assign(p.radix, SimTime{});
    s.voq.assign(static_cast<std::size_t>(p.radix) * p.radix, Voq{});
    s.in_mask.assign(p.radix, 0);
    s.out_mask.assign(p.radix, 0);
    s.occupancy.assign(p.radix, 0);
    s.voq_bytes.assign(static_cast<std::size_t>(p.radix) * p.radix, 0);
    s.requests.assign(p.radix, 0);
    s.arb_on_in_free.assign(p.radix, 0);
    s.arb_on_out_free.assign(p.radix, 0);
  }

  void build() {
    const std::uint32_t n = cfg_.nodes();
    const std::uint32_t a = cfg_.node.accelerators_per_node;
    const RlftSpec& spec = cfg_.rlft;
    const std::uint32_t h = spec.half();
    intra_link_ = cfg_.intra_link();

    switches_.resize(n + spec.switches());
    for (std::uint32_t i = 0; i < n; ++i) {
      init_switch(switches_[i], cfg_.intra_switch_params());
      switches_[i].intra = true;
      switches_[i].node = i;
    }
    for (std::uint32_t s = 0; s < spec.switches(); ++s) {
      init_switch(switches_[n + s], cfg_.inter_switch_params());
      switches_[n + s].local = s;
    }

    accs_.resize(static_cast<std::size_t>(n) * a);
    nics_.resize(n);
    for (std::uint32_t node = 0; node < n; ++node) {
      Switch& sw = switches_[node];
      for (std::uint32_t k = 0; k < a; ++k) {
        const std::uint32_t g = node * a + k;
        std::uint32_t up = add_channel(intra_link_);
        channels_[up].owner = Owner::Acc;
        channels_[up].owner_id = g;
        connect_to_switch(up, node, k);
        accs_[g].channel = up;

        std::uint32_t down = add_channel(intra_link_);
        Channel& c = channels_[down];
        c.owner = Owner::SwitchOut;
        c.owner_id = node;
        c.owner_port = k;
        c.down = Down::Sink;
        c.down_id = g;
        c.credited = false;
        sw.out_channel[k] = down;
      }
      Nic& nic = nics_[node];
      nic.agg = AggregationBuffer(n, cfg_.geometry.inter_payload_bytes, cfg_.nic.packing);

      std::uint32_t to_nic = add_channel(intra_link_);
      {
        Channel& c = channels_[to_nic];
        c.owner = Owner::SwitchOut;
        c.owner_id = node;
        c.owner_port = a;
        c.down = Down::NicIngest;
        c.down_id = node;
        c.credit = CreditState(1, cfg_.nic.input_buffer_bytes);
        switches_[node].out_channel[a] = to_nic;
        nic.from_switch = to_nic;
      }
      std::uint32_t from_nic = add_channel(intra_link_);
      channels_[from_nic].owner = Owner::NicDown;
      channels_[from_nic].owner_id = node;
      connect_to_switch(from_nic, node, a);
      nic.down = from_nic;

      std::uint32_t leaf = n + node / h;
      std::uint32_t nic_up = add_channel(cfg_.nic_link());
      channels_[nic_up].owner = Owner::NicUp;
      channels_[nic_up].owner_id = node;
      connect_to_switch(nic_up, leaf, node % h);
      nic.up = nic_up;

      std::uint32_t leaf_down = add_channel(cfg_.nic_link());
      {
        Channel& c = channels_[leaf_down];
        c.owner = Owner::SwitchOut;
        c.owner_id = leaf;
        c.owner_port = node % h;
        c.down = Down::NicInbound;
        c.down_id = node;
        c.credit = CreditState(1, cfg_.nic.input_buffer_bytes);
        switches_[leaf].out_channel[node % h] = leaf_down;
        nic.from_leaf = leaf_down;
      }
    }
    for (std::uint32_t l = 0; l < spec.leaves(); ++l) {
      for (std::uint32_t s = 0; s < spec.spines(); ++s) {
        const std::uint32_t leaf = n + l, spine = n + spec.leaves() + s;
        std::uint32_t up = add_channel(cfg_.switch_link());
        channels_[up].owner = Owner::SwitchOut;
        channels_[up].owner_id = leaf;
        channels_[up].owner_port = h + s;
        connect_to_switch(up, spine, l);
        switches_[leaf].out_channel[h + s] = up;

        std::uint32_t down = add_channel(cfg_.switch_link());
        channels_[down].owner = Owner::SwitchOut;
        channels_[down].owner_id = spine;
        channels_[down].owner_port = l;
        connect_to_switch(down, leaf, h + s);
        switches_[spine].out_channel[l] = down;
      }
    }
    for (const Switch& s : switches_)
      for (std::uint32_t p = 0; p < s.radix; ++p)
        if (s.in_channel[p] == kNil || s.out_channel[p] == kNil)
          throw std::logic_error("unconnected switch port");
  }

  // ---- helpers ----------------------------------------------------------

  std::uint32_t out_port(const Switch& s, const Packet& p) const {
    if (s.intra) return p.dst_node == s.node && !p.inter ? p.dst_acc : s.radix - 1;
    return dmodk_port(cfg_.rlft, s.local, p.dst_node);
  }

  // Credit slice of the receiver's buffer that `p` will occupy.
  std::uint32_t slice_for(const Channel& c, const Packet& p) const {
    if (c.down != Down::SwitchIn) return 0;
    const Switch& s = switches_[c.down_id];
    return out_port(s, p);
  }

  std::uint32_t alloc_packet() {
    std::uint32_t id;
    if (!free_packets_.empty()) {
      id = free_packets_.back();
      free_packets_.pop_back();
    } else {
      id = static_cast<std::uint32_t>(packets_.size());
      packets_.emplace_back();
    }
    Packet& p = packets_[id];
    p.next = kNil;
    p.live = true;
    p.inter = false;
    p.ack_after = false;
    p.spans.clear();
    return id;
  }
  void free_packet(std::uint32_t id) {
    packets_[id].live = false;
    free_packets_.push_back(id);
  }

  std::uint32_t alloc_msg() {
    std::uint32_t id;
    if (!free_msgs_.empty()) {
      id = free_msgs_.back();
      free_msgs_.pop_back();
    } else {
      id = static_cast<std::uint32_t>(msgs_.size());
      msgs_.emplace_back();
    }
    MsgState& m = msgs_[id];
    m = MsgState{};
    m.live = true;
    return id;
  }

  static void push(Fifo& f, std::vector<Packet>& pk, std::uint32_t id) {
    pk[id].next = kNil;
    if (f.tail == kNil)
      f.head = id;
    else
      pk[f.tail].next = id;
    f.tail = id;
  }
  static std::uint32_t pop(Fifo& f, std::vector<Packet>& pk) {
    std::uint32_t id = f.head;
    f.head = pk[id].next;
    if (f.head == kNil) f.tail = kNil;
    return id;
  }

  bool ack_point(Bytes offset, Bytes payload, Bytes size, std::uint32_t factor) const {
    const std::uint64_t idx = offset / cfg_.geometry.intra_payload_bytes;
    return offset + payload == size || (idx + 1) % factor == 0;
  }

  // Puts packet `id` on channel `ch` at the current time. The tail cannot
  // leave before `tail_floor` (cut-through from a slower or later input).
  // Returns the time the tail leaves the sender.
  SimTime send(std::uint32_t ch, std::uint32_t id, SimTime tail_floor) {
    Channel& c = channels_[ch];
    Packet& p = packets_[id];
    const SimTime now = engine_.now();
    const SimTime tail_leave = max(now + c.ser(p.wire), tail_floor);
    c.busy_until = tail_leave;
    if (c.dllp_fs && p.ack_after) c.busy_until += SimTime{c.dllp_fs};
    const SimTime header_at = now + c.ser(p.header) + c.prop;
    const SimTime tail_at = tail_leave + c.prop;
    if (c.credited) c.credit.consume(slice_for(c, p), p.wire);
    p.tail_in = tail_at;
    switch (c.down) {
      case Down::SwitchIn:
        engine_.schedule(header_at, kArriveSwitch, c.down_id, id, static_cast<std::uint16_t>(c.down_port));
        break;
      case Down::NicIngest:
        engine_.schedule(header_at, kArriveIngest, c.down_id, id);
        break;
      case Down::NicInbound:
        engine_.schedule(header_at, kArriveInbound, c.down_id, id);
        break;
      case Down::Sink:
        sink(id, header_at, tail_at);
        break;
    }
    return tail_leave;
  }

  void return_credit(std::uint32_t ch, std::uint32_t slice, Bytes bytes, SimTime at) {
    Channel& c = channels_[ch];
    const SimTime arrive = at + c.prop;
    if (!c.returns.empty() && c.returns.back().at > arrive)
      throw std::logic_error("credit returns out of order");
    c.returns.push_back({arrive, slice, bytes});
    if (c.blocked && !c.wake_scheduled) {
      c.wake_scheduled = true;
      engine_.schedule(arrive, kCreditWake, ch);
    }
  }

  // True when `ch` has room for `wire` bytes in `slice` now. Otherwise arms a
  // wake-up for the next returning credit.
  bool credit_ok(std::uint32_t ch, std::uint32_t slice, Bytes wire) {
    Channel& c = channels_[ch];
    if (!c.credited) return true;
    c.drain(engine_.now());
    if (c.credit.can_send(slice, wire)) return true;
    c.blocked = true;
    if (!c.wake_scheduled && !c.returns.empty()) {
      c.wake_scheduled = true;
      engine_.schedule(c.returns.front().at, kCreditWake, ch);
    }
    return false;
  }

  // ---- dispatch -----------------------------------------------------------

  void dispatch(const Event& e) {
    switch (e.kind) {
      case kGenerate: on_generate(e.target); break;
      case kPost: on_post(e.target, e.arg); break;
      case kAccTxFree: try_inject(e.target); break;
      case kArriveSwitch: on_arrive_switch(e.target, e.aux, static_cast<std::uint32_t>(e.arg)); break;
      case kArbitrate: arbitrate(e.target); break;
      case kCreditWake: on_credit_wake(e.target); break;
      case kArriveIngest: on_arrive_ingest(e.target, static_cast<std::uint32_t>(e.arg)); break;
      case kIngestDone: on_ingest_done(e.target); break;
      case kUpTxFree: try_send_up(e.target); break;
      case kFlush: on_flush(e.target, e.aux, e.arg); break;
      case kArriveInbound: on_arrive_inbound(e.target, static_cast<std::uint32_t>(e.arg)); break;
      case kSplitStep: on_split_step(e.target); break;
      case kDownTxFree: try_send_down(e.target); break;
      case kDeliver: on_deliver(static_cast<std::uint32_t>(e.arg)); break;
      default: throw std::logic_error("unknown event kind");
    }
  }

  // ---- accelerators -----------------------------------------------------

  void create_message(std::uint32_t g, const Message& proto) {
    const std::uint32_t slot = alloc_msg();
    MsgState& ms = msgs_[slot];
    ms.msg = proto;
    ms.msg.id = next_message_id_++;
    ms.msg.created_at = engine_.now();
    ++stats_.generated_messages;
    stats_.generated_bytes += ms.msg.size_bytes;
    if (metrics_) metrics_->record_generated(cfg_.load_reference.wire_bytes(ms.msg.size_bytes), engine_.now());
    accs_[g].queue.push_back(slot);
    if (accs_[g].queue.size() == 1) try_inject(g);
  }

  void on_generate(std::uint32_t g) {
    Acc& acc = accs_[g];
    const std::uint32_t a = cfg_.node.accelerators_per_node;
    if (acc.pending_dst) {
      Message m;
      m.src_node = g / a;
      m.src_acc = g % a;
      m.dst_node = acc.pending_dst->node;
      m.dst_acc = acc.pending_dst->acc;
      m.size_bytes = acc.message_bytes;
      create_message(g, m);
    } else {
      ++stats_.suppressed_messages;
      stats_.suppressed_bytes += acc.message_bytes;
    }
    MessageDraw d = acc.source->next();
    acc.pending_dst = d.destination;
    engine_.schedule(engine_.now() + d.interarrival, kGenerate, g);
  }

  void on_post(std::uint32_t g, std::uint64_t idx) { create_message(g, posted_[idx]); }

  void try_inject(std::uint32_t g) {
    Acc& acc = accs_[g];
    Channel& c = channels_[acc.channel];
    const SimTime now = engine_.now();
    if (c.busy_until > now || acc.queue.empty()) return;
    const std::uint32_t slot = acc.queue.front();
    MsgState& ms = msgs_[slot];
    const Bytes size = ms.msg.size_bytes;
    const Bytes off = acc.head_offset;
    const Bytes payload = std::min<Bytes>(cfg_.geometry.intra_payload_bytes, size - off);
    const Bytes wire = payload + cfg_.geometry.intra_header_bytes;
    const Switch& sw = switches_[c.down_id];
    const bool local = ms.msg.dst_node == ms.msg.src_node;
    const std::uint32_t slice = local ? ms.msg.dst_acc : sw.radix - 1;
    if (!credit_ok(acc.channel, slice, wire)) return;

    const std::uint32_t id = alloc_packet();
    Packet& p = packets_[id];
    p.wire = wire;
    p.payload = payload;
    p.header = cfg_.geometry.intra_header_bytes;
    p.offset = off;
    p.slot = slot;
    p.dst_node = ms.msg.dst_node;
    p.dst_acc = ms.msg.dst_acc;
    p.age = AgeKey{ms.msg.created_at, ms.msg.id};
    p.ack_after = ack_point(off, payload, size, c.ack_factor);
    if (off == 0) ms.first_injection = now;
    acc.head_offset += payload;
    if (acc.head_offset == size) {
      ms.m[0] = now;
      acc.queue.pop_front();
      acc.head_offset = 0;
    }
    send(acc.channel, id, now);
    engine_.schedule(c.busy_until, kAccTxFree, g);
  }

  void sink(std::uint32_t id, SimTime header_at, SimTime tail_at) {
    Packet& p = packets_[id];
    MsgState& ms = msgs_[p.slot];
    if (!ms.live) throw std::logic_error("packet delivered for an unknown message");
    const bool inter = ms.msg.scope() == Scope::InterNode;
    SimTime& head_mark = ms.m[inter ? 5 : 1];
    head_mark = max(head_mark, header_at);
    ms.m[6] = max(ms.m[6], tail_at);
    ms.received += p.payload;
    stats_.sunk_bytes += p.payload;
    if (ms.received > ms.msg.size_bytes) throw std::logic_error("message received more bytes than it holds");
    if (ms.received == ms.msg.size_bytes) engine_.schedule(ms.m[6], kDeliver, 0, p.slot);
    free_packet(id);
  }

  void on_deliver(std::uint32_t slot) {
    MsgState& ms = msgs_[slot];
    const SimTime now = engine_.now();
    ++stats_.delivered_messages;
    if (metrics_) {
      LatencyRecord rec = LatencyRecord::from_milestones(ms.msg.id, ms.msg.scope(), ms.msg.created_at, ms.m);
      metrics_->record_delivery(ms.msg, rec, cfg_.load_reference.wire_bytes(ms.msg.size_bytes), now);
    }
    if (observer_) observer_(DeliveryTrace{ms.msg, ms.m, ms.first_injection, now});
    ms.live = false;
    free_msgs_.push_back(slot);
  }

  // ---- switches ---------------------------------------------------------

  void request_arbitration(std::uint32_t sw, SimTime at) {
    Switch& s = switches_[sw];
    if (s.arb_at == at) return;
    s.arb_at = at;
    engine_.schedule(at, kArbitrate, sw);
  }

  bool head_sendable(const Switch& s, std::uint32_t in, std::uint32_t out) {
    const std::uint32_t ch = s.out_channel[out];
    const Channel& c = channels_[ch];
    if (c.busy_until > engine_.now()) return false;
    if (!c.credited) return true;
    const Packet& p = packets_[s.voq[in * s.radix + out].head];
    return credit_ok(ch, slice_for(c, p), p.wire);
  }

  void on_arrive_switch(std::uint32_t sw, std::uint32_t in, std::uint32_t id) {
    Switch& s = switches_[sw];
    Packet& p = packets_[id];
    const std::uint32_t out = out_port(s, p);
    std::int64_t& occ = s.occupancy[in];
    std::int64_t& vq = s.voq_bytes[in * s.radix + out];
    occ += p.wire;
    vq += p.wire;
    if (occ > s.buffer_bytes || vq > s.voq_limit) ++stats_.credit_violations;
    stats_.max_buffer_fill = std::max(stats_.max_buffer_fill, static_cast<double>(occ) / s.buffer_bytes);
    Voq& q = s.voq[in * s.radix + out];
    p.next = kNil;
    if (q.tail == kNil)
      q.head = id;
    else
      packets_[q.tail].next = id;
    q.tail = id;
    s.in_mask[in] |= std::uint64_t{1} << out;
    s.out_mask[out] |= std::uint64_t{1} << in;
    const SimTime now = engine_.now();
    const SimTime in_free = s.in_busy[in];
    const SimTime out_free = channels_[s.out_channel[out]].busy_until;
    if (in_free <= now && out_free <= now) {
      if (head_sendable(s, in, out)) request_arbitration(sw, now);
      return;
    }
    // A port is busy: make sure an arbitration runs once both are free.
    if (in_free >= out_free) {
      if (!s.arb_on_in_free[in]) {
        s.arb_on_in_free[in] = true;
        request_arbitration(sw, in_free);
      }
    } else if (!s.arb_on_out_free[out]) {
      s.arb_on_out_free[out] = true;
      request_arbitration(sw, out_free);
    }
  }

  void arbitrate(std::uint32_t sw) {
    Switch& s = switches_[sw];
    const SimTime now = engine_.now();
    bool any = false;
    for (std::uint32_t i = 0; i < s.radix; ++i) {
      std::uint64_t req = 0;
      if (s.in_busy[i] <= now) {
        for (std::uint64_t m = s.in_mask[i]; m; m &= m - 1) {
          const auto o = static_cast<std::uint32_t>(std::countr_zero(m));
          if (head_sendable(s, i, o)) req |= std::uint64_t{1} << o;
        }
      }
      s.requests[i] = req;
      any |= req != 0;
    }
    if (!any) return;
    s.arbiter.match_into(
        s.requests,
        [&](std::uint32_t i, std::uint32_t o) { return packets_[s.voq[i * s.radix + o].head].age; },
        s.matches);
    for (auto [i, o] : s.matches) forward(sw, i, o);
  }

  void forward(std::uint32_t sw, std::uint32_t in, std::uint32_t out) {
    Switch& s = switches_[sw];
    Voq& q = s.voq[in * s.radix + out];
    const std::uint32_t id = q.head;
    q.head = packets_[id].next;
    if (q.head == kNil) {
      q.tail = kNil;
      s.in_mask[in] &= ~(std::uint64_t{1} << out);
      s.out_mask[out] &= ~(std::uint64_t{1} << in);
    }
    Packet& p = packets_[id];
    const Bytes wire = p.wire;
    const SimTime now = engine_.now();
    const SimTime tail_in = p.tail_in;
    const SimTime tail_leave = send(s.out_channel[out], id, tail_in);
    // The crossbar reads the packet out of the input buffer `speedup` times
    // faster than the output drains it, but never before the tail is in.
    const auto read = static_cast<std::int64_t>(static_cast<double>((tail_leave - now).ticks()) / s.speedup);
    const SimTime in_free = max(now + SimTime{read}, tail_in);
    s.in_busy[in] = in_free;
    s.occupancy[in] -= wire;
    s.voq_bytes[in * s.radix + out] -= wire;
    return_credit(s.in_channel[in], out, wire, in_free);
    const SimTime out_free = channels_[s.out_channel[out]].busy_until;
    s.arb_on_in_free[in] = s.in_mask[in] != 0;
    s.arb_on_out_free[out] = s.out_mask[out] != 0;
    if (s.arb_on_in_free[in]) request_arbitration(sw, in_free);
    if (s.arb_on_out_free[out]) request_arbitration(sw, out_free);
  }

  void on_credit_wake(std::uint32_t ch) {
    Channel& c = channels_[ch];
    c.wake_scheduled = false;
    c.blocked = false;
    c.drain(engine_.now());
    switch (c.owner) {
      case Owner::Acc: try_inject(c.owner_id); break;
      case Owner::SwitchOut: {
        const Switch& s = switches_[c.owner_id];
        if (s.out_mask[c.owner_port] && c.busy_until <= engine_.now())
          request_arbitration(c.owner_id, engine_.now());
        break;
      }
      case Owner::NicUp: try_send_up(c.owner_id); break;
      case Owner::NicDown: try_send_down(c.owner_id); break;
    }
  }

  // ---- NIC: intra -> inter -------------------------------------------------

  SimTime conversion() const { return SimTime::from_ns(cfg_.nic.conversion_delay_ns); }

  void on_arrive_ingest(std::uint32_t node, std::uint32_t id) {
    Packet& p = packets_[id];
    if (p.dst_node == node) throw std::logic_error("intra-node packet routed to its own NIC");
    push(nics_[node].ingest, packets_, id);
    try_ingest(node);
  }

  void try_ingest(std::uint32_t node) {
    Nic& nic = nics_[node];
    if (nic.ingest_busy || nic.ingest.empty() || !nic.outbound.empty()) return;
    nic.ingest_busy = true;
    const Packet& p = packets_[nic.ingest.head];
    engine_.schedule(max(engine_.now() + conversion(), p.tail_in), kIngestDone, node);
  }

  void on_ingest_done(std::uint32_t node) {
    Nic& nic = nics_[node];
    const SimTime now = engine_.now();
    const std::uint32_t id = pop(nic.ingest, packets_);
    Packet& p = packets_[id];
    MsgState& ms = msgs_[p.slot];
    ms.m[1] = max(ms.m[1], p.tail_in);
    return_credit(nic.from_switch, 0, p.wire, now);
    stats_.nic_ingested_bytes += p.payload;
    nic.scratch.clear();
    const std::uint32_t dst = p.dst_node;
    const bool rearm = nic.agg.ingest(dst, Span{p.slot, p.offset, p.payload}, ms.msg.size_bytes, now, nic.scratch);
    free_packet(id);
    emit_inter(node, nic.scratch);
    if (rearm && !nic.agg.empty(dst))
      engine_.schedule(nic.agg.oldest_arrival(dst) + SimTime::from_ns(cfg_.nic.flush_timeout_ns), kFlush,
                       node, nic.agg.epoch(dst), static_cast<std::uint16_t>(dst));
    nic.ingest_busy = false;
    try_send_up(node);
    try_ingest(node);
  }

  void emit_inter(std::uint32_t node, std::vector<InterPayload>& out) {
    Nic& nic = nics_[node];
    for (InterPayload& ip : out) {
      const std::uint32_t id = alloc_packet();
      Packet& p = packets_[id];
      p.inter = true;
      p.payload = ip.payload_bytes;
      p.header = cfg_.geometry.inter_header_bytes;
      p.wire = p.payload + p.header;
      p.dst_node = ip.dst_node;
      p.spans = std::move(ip.spans);
      const MsgState& first = msgs_[static_cast<std::uint32_t>(p.spans.front().message_id)];
      p.age = AgeKey{first.msg.created_at, first.msg.id};
      stats_.nic_aggregated_bytes += p.payload;
      nic.outbound.push_back(id);
    }
    out.clear();
  }

  void on_flush(std::uint32_t node, std::uint32_t dst, std::uint64_t epoch) {
    Nic& nic = nics_[node];
    if (nic.agg.epoch(dst) != epoch || nic.agg.empty(dst)) return;
    nic.scratch.clear();
    nic.agg.flush(dst, nic.scratch);
    emit_inter(node, nic.scratch);
    try_send_up(node);
  }

  void try_send_up(std::uint32_t node) {
    Nic& nic = nics_[node];
    Channel& c = channels_[nic.up];
    const SimTime now = engine_.now();
    if (c.busy_until > now || nic.outbound.empty()) return;
    const std::uint32_t id = nic.outbound.front();
    Packet& p = packets_[id];
    if (!credit_ok(nic.up, slice_for(c, p), p.wire)) return;
    nic.outbound.pop_front();
    for (const Span& s : p.spans) {
      MsgState& ms = msgs_[static_cast<std::uint32_t>(s.message_id)];
      ms.m[2] = max(ms.m[2], now);
    }
    send(nic.up, id, now);
    engine_.schedule(c.busy_until, kUpTxFree, node);
    try_ingest(node);
  }

  // ---- NIC: inter -> intra -------------------------------------------------

  void on_arrive_inbound(std::uint32_t node, std::uint32_t id) {
    if (packets_[id].dst_node != node) throw std::logic_error("inter packet delivered to the wrong NIC");
    push(nics_[node].inbound, packets_, id);
    start_split(node);
  }

  void start_split(std::uint32_t node) {
    Nic& nic = nics_[node];
    if (nic.split_active || nic.split_stalled || nic.inbound.empty()) return;
    Packet& p = packets_[nic.inbound.head];
    nic.split_active = true;
    nic.split_stalled = false;
    nic.frags = split_inter(p.spans, cfg_.geometry);
    nic.frag_next = 0;
    for (const Span& s : p.spans) {
      MsgState& ms = msgs_[static_cast<std::uint32_t>(s.message_id)];
      ms.m[3] = max(ms.m[3], p.tail_in);
    }
    engine_.schedule(max(engine_.now(), p.tail_in) + conversion(), kSplitStep, node);
  }

  void on_split_step(std::uint32_t node) {
    Nic& nic = nics_[node];
    const IntraFragment& f = nic.frags[nic.frag_next++];
    const std::uint32_t slot = static_cast<std::uint32_t>(f.message_id);
    const MsgState& ms = msgs_[slot];
    if (!ms.live) throw std::logic_error("inter packet references an unknown message");
    const std::uint32_t id = alloc_packet();
    Packet& p = packets_[id];
    p.wire = f.wire_bytes();
    p.payload = f.payload_bytes;
    p.header = f.header_bytes;
    p.offset = f.offset_bytes;
    p.slot = slot;
    p.dst_node = ms.msg.dst_node;
    p.dst_acc = ms.msg.dst_acc;
    p.age = AgeKey{ms.msg.created_at, ms.msg.id};
    p.ack_after = ack_point(p.offset, p.payload, ms.msg.size_bytes, channels_[nic.down].ack_factor);
    p.tail_in = engine_.now();
    stats_.nic_split_bytes += p.payload;
    stats_.nic_split_wire_bytes += p.wire;
    nic.down_queue.push_back(id);

    if (nic.frag_next == nic.frags.size()) {
      const std::uint32_t in_id = pop(nic.inbound, packets_);
      const Packet& ip = packets_[in_id];
      stats_.nic_received_inter_bytes += ip.payload;
      return_credit(nic.from_leaf, 0, ip.wire, engine_.now());
      free_packet(in_id);
      nic.split_active = false;
    }
    try_send_down(node);
    if (!nic.down_queue.empty()) {
      nic.split_stalled = true;
      return;
    }
    continue_split(node);
  }

  void continue_split(std::uint32_t node) {
    Nic& nic = nics_[node];
    nic.split_stalled = false;
    if (nic.split_active)
      engine_.schedule(engine_.now() + conversion(), kSplitStep, node);
    else
      start_split(node);
  }

  void try_send_down(std::uint32_t node) {
    Nic& nic = nics_[node];
    Channel& c = channels_[nic.down];
    const SimTime now = engine_.now();
    if (c.busy_until > now || nic.down_queue.empty()) return;
    const std::uint32_t id = nic.down_queue.front();
    Packet& p = packets_[id];
    if (!credit_ok(nic.down, slice_for(c, p), p.wire)) return;
    nic.down_queue.pop_front();
    MsgState& ms = msgs_[p.slot];
    ms.m[4] = max(ms.m[4], now);
    send(nic.down, id, now);
    engine_.schedule(c.busy_until, kDownTxFree, node);
    if (nic.split_stalled && nic.down_queue.empty()) continue_split(node);
  }

  FabricConfig cfg_;
  LinkParams intra_link_{};
  Engine engine_;
  std::vector<Channel> channels_;
  std::vector<Switch> switches_;
  std::vector<Acc> accs_;
  std::vector<Nic> nics_;
  std::vector<Packet> packets_;
  std::vector<std::uint32_t> free_packets_;
  std::vector<MsgState> msgs_;
  std::vector<std::uint32_t> free_msgs_;
  std::vector<Message> posted_;
  MessageId next_message_id_ = 0;
  MetricsCollector* metrics_ = nullptr;
  DeliveryObserver observer_;
  NetworkStats stats_;
};


// One independent simulation of `point` under `cfg`.
inline SweepResult run_load_point(const FabricConfig& cfg, const LoadPoint& point, RunSeed seed,
                                  NetworkStats* stats_out = nullptr) {
  point.validate();
  Network net(cfg);
  const SimTime warmup = SimTime{static_cast<std::int64_t>(
      static_cast<double>(point.duration.ticks()) * cfg.warmup_fraction)};
  MetricsCollector metrics(warmup, point.duration);
  net.set_metrics(&metrics);
  net.attach_poisson(cfg.pattern, point.load, seed);
  net.run_until(point.duration);
  net.check_conservation();
  if (stats_out) *stats_out = net.stats();
  return metrics.finalize(point.load);
}

}  // namespace fabricsim
