#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fabricsim/engine.hpp"
#include "fabricsim/model.hpp"

namespace fabricsim {

struct LinkParams {
  double bandwidth_gbps = 400.0;
  double length_m = 2.0;
  double propagation_ns_per_m = 25.0;
  // When non-zero the link also carries one DLLP of this many bytes after
  // every `ack_factor` packets of a message and after its final packet.
  Bytes dllp_bytes = 0;
  std::uint32_t ack_factor = 4;

  void validate() const {
    if (!(bandwidth_gbps > 0)) throw std::invalid_argument("link bandwidth must be positive");
    if (length_m < 0) throw std::invalid_argument("link length must be non-negative");
    if (propagation_ns_per_m < 0) throw std::invalid_argument("propagation delay must be >= 0");
    if (ack_factor == 0) throw std::invalid_argument("link ack factor must be >= 1");
  }

  SimTime serialization(std::uint64_t bytes) const {
    return SimTime{static_cast<std::int64_t>(
        static_cast<double>(bytes) * 8.0 * SimTime::kTicksPerNs / bandwidth_gbps + 0.5)};
  }
  SimTime propagation() const { return SimTime::from_ns(length_m * propagation_ns_per_m); }
};

struct TransmitTiming {
  SimTime serialization;
  SimTime propagation;
};

inline TransmitTiming transmit(Bytes wire_bytes, const LinkParams& link) {
  return {link.serialization(wire_bytes), link.propagation()};
}

enum class Arbitration : std::uint8_t { RoundRobin, AgeBased };

inline std::string_view to_string(Arbitration a) {
  return a == Arbitration::RoundRobin ? "round_robin" : "age";
}
inline Arbitration parse_arbitration(std::string_view s) {
  if (s == "round_robin" || s == "rr") return Arbitration::RoundRobin;
  if (s == "age" || s == "age_based") return Arbitration::AgeBased;
  throw std::invalid_argument("unknown arbitration '" + std::string(s) + "'");
}

struct SwitchParams {
  std::uint32_t radix = 2;
  Bytes input_buffer_bytes = 131072;
  // Most bytes one virtual output queue may hold in its input buffer; 0 lets
  // any queue use the whole buffer.
  Bytes voq_limit_bytes = 65536;
  Arbitration arbitration = Arbitration::RoundRobin;
  std::uint32_t islip_iterations = 1;
  // Crossbar transfer rate as a multiple of the link rate. An input is free
  // again once the crossbar has read the packet, while the output still
  // serializes at link rate. 1 is a plain input-queued crossbar.
  double crossbar_speedup = 2.0;

  static constexpr std::uint32_t kMaxRadix = 64;

  void validate(Bytes max_wire_packet) const {
    if (radix < 2 || radix > kMaxRadix)
      throw std::invalid_argument("switch radix must be in [2, 64]");
    if (islip_iterations < 1) throw std::invalid_argument("iSlip needs at least one iteration");
    if (!(crossbar_speedup >= 1.0) || !std::isfinite(crossbar_speedup))
      throw std::invalid_argument("crossbar speedup must be a finite value >= 1");
    if (input_buffer_bytes < max_wire_packet)
      throw std::invalid_argument("switch input buffer cannot hold one maximum packet");
    if (voq_limit_bytes > input_buffer_bytes)
      throw std::invalid_argument("VOQ limit exceeds the input buffer");
    if (voq_limit() < max_wire_packet)
      throw std::invalid_argument("VOQ limit cannot hold one maximum packet");
  }

  Bytes voq_limit() const { return voq_limit_bytes ? voq_limit_bytes : input_buffer_bytes; }
};

// Upstream view of the free space in one downstream input buffer: a shared
// byte pool plus a per-queue limit.
class CreditState {
 public:
  CreditState() = default;
  CreditState(std::uint32_t slices, std::int64_t slice_limit, std::int64_t total)
      : available_(slices, slice_limit), slice_limit_(slice_limit), total_(total),
        total_available_(total) {}
  CreditState(std::uint32_t slices, std::int64_t bytes_per_slice)
      : CreditState(slices, bytes_per_slice, bytes_per_slice * slices) {}

  std::uint32_t slices() const { return static_cast<std::uint32_t>(available_.size()); }
  std::int64_t slice_limit() const { return slice_limit_; }
  std::int64_t total() const { return total_; }
  std::int64_t available(std::uint32_t slice) const {
    return std::min(available_[slice], total_available_);
  }
  std::int64_t total_available() const { return total_available_; }
  bool can_send(std::uint32_t slice, Bytes wire) const {
    return available_[slice] >= wire && total_available_ >= wire;
  }

  void consume(std::uint32_t slice, Bytes wire) {
    if (!can_send(slice, wire)) throw std::logic_error("credit underflow");
    available_[slice] -= wire;
    total_available_ -= wire;
  }
  void restore(std::uint32_t slice, Bytes wire) {
    available_[slice] += wire;
    total_available_ += wire;
    if (available_[slice] > slice_limit_ || total_available_ > total_)
      throw std::logic_error("credit overflow");
  }

 private:
  std::vector<std::int64_t> available_;
  std::int64_t slice_limit_ = 0;
  std::int64_t total_ = 0;
  std::int64_t total_available_ = 0;
};

// Ordering key for age-based arbitration: older message first, then lower
// message id.
struct AgeKey {
  SimTime created;
  MessageId message = 0;
  auto operator<=>(const AgeKey&) const = default;
};

// iSlip request-grant-accept matcher over a radix x radix crossbar.
// `requests[i]` is the bitmask of outputs input i may send to right now.
class IslipArbiter {
 public:
  using Mask = std::uint64_t;

  IslipArbiter() = default;
  IslipArbiter(std::uint32_t radix, Arbitration policy, std::uint32_t iterations)
      : radix_(radix), policy_(policy), iterations_(iterations), grant_ptr_(radix, 0),
        accept_ptr_(radix, 0) {}

  std::uint32_t radix() const { return radix_; }
  std::uint32_t grant_pointer(std::uint32_t output) const { return grant_ptr_[output]; }
  std::uint32_t accept_pointer(std::uint32_t input) const { return accept_ptr_[input]; }

  // Returns the matched (input, output) pairs. `age(i, o)` yields the AgeKey
  // of input i's head packet toward output o; it is only consulted by the
  // age-based policy.
  template <class AgeFn>
  std::vector<std::pair<std::uint32_t, std::uint32_t>> match(const std::vector<Mask>& requests,
                                                             AgeFn&& age) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> matched;
    match_into(requests, age, matched);
    return matched;
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> match(const std::vector<Mask>& requests) {
    return match(requests, [](std::uint32_t, std::uint32_t) { return AgeKey{}; });
  }

  template <class AgeFn>
  void match_into(const std::vector<Mask>& requests, AgeFn&& age,
                  std::vector<std::pair<std::uint32_t, std::uint32_t>>& matched) {
    matched.clear();
    Mask inputs_free = radix_ == 64 ? ~Mask{0} : ((Mask{1} << radix_) - 1);
    Mask outputs_free = inputs_free;
    // Transpose: per output, the inputs requesting it.
    Mask requesters[SwitchParams::kMaxRadix];
    Mask requested = 0;
    for (std::uint32_t i = 0; i < radix_; ++i) requested |= requests[i];
    for (Mask m = requested; m; m &= m - 1) requesters[std::countr_zero(m)] = 0;
    for (std::uint32_t i = 0; i < radix_; ++i)
      for (Mask m = requests[i]; m; m &= m - 1) requesters[std::countr_zero(m)] |= Mask{1} << i;
    for (std::uint32_t iter = 0; iter < iterations_; ++iter) {
      Mask grants_to_input[SwitchParams::kMaxRadix];
      Mask granted_inputs = 0;
      for (Mask m = requested & outputs_free; m; m &= m - 1) {
        const auto o = static_cast<std::uint32_t>(std::countr_zero(m));
        const Mask req = requesters[o] & inputs_free;
        if (!req) continue;
        std::uint32_t pick = policy_ == Arbitration::RoundRobin
                                 ? round_robin_pick(req, grant_ptr_[o])
                                 : oldest_pick(req, [&](std::uint32_t i) { return age(i, o); });
        const Mask bit = Mask{1} << pick;
        if (!(granted_inputs & bit)) grants_to_input[pick] = 0;
        granted_inputs |= bit;
        grants_to_input[pick] |= Mask{1} << o;
      }
      if (!granted_inputs) break;
      for (Mask m = granted_inputs; m; m &= m - 1) {
        const auto i = static_cast<std::uint32_t>(std::countr_zero(m));
        const Mask grants = grants_to_input[i];
        std::uint32_t o = policy_ == Arbitration::RoundRobin
                              ? round_robin_pick(grants, accept_ptr_[i])
                              : oldest_pick(grants, [&](std::uint32_t out) { return age(i, out); });
        matched.emplace_back(i, o);
        inputs_free &= ~(Mask{1} << i);
        outputs_free &= ~(Mask{1} << o);
        // Pointers only move on first-iteration matches.
        if (iter == 0 && policy_ == Arbitration::RoundRobin) {
          grant_ptr_[o] = (i + 1) % radix_;
          accept_ptr_[i] = (o + 1) % radix_;
        }
      }
    }
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t round_robin_pick(Mask candidates, std::uint32_t pointer) const {
    Mask upper = candidates & (~Mask{0} << pointer);
    return static_cast<std::uint32_t>(std::countr_zero(upper ? upper : candidates));
  }

  template <class KeyFn>
  std::uint32_t oldest_pick(Mask candidates, KeyFn&& key) const {
    std::uint32_t best = kNone;
    AgeKey best_key{};
    for (Mask m = candidates; m; m &= m - 1) {
      auto idx = static_cast<std::uint32_t>(std::countr_zero(m));
      AgeKey k = key(idx);
      if (best == kNone || k < best_key) {
        best = idx;
        best_key = k;
      }
    }
    return best;
  }

  std::uint32_t radix_ = 0;
  Arbitration policy_ = Arbitration::RoundRobin;
  std::uint32_t iterations_ = 1;
  std::vector<std::uint32_t> grant_ptr_;
  std::vector<std::uint32_t> accept_ptr_;
};

}  // namespace fabricsim
