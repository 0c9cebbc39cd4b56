#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fabricsim/engine.hpp"
#include "fabricsim/model.hpp"
#include "fabricsim/rng.hpp"

namespace fabricsim {

// One row of a sweep: throughput and latency statistics at one offered load.
struct SweepResult {
  double load = 0;
  double offered_gbps = 0;  // generated wire traffic in the window
  double intra_gbps = 0;
  double inter_gbps = 0;
  double total_gbps = 0;
  std::array<double, kLatencyComponents> latency_mean_ns{};
  std::array<double, kLatencyComponents> latency_p99_ns{};
  double latency_total_mean_ns = 0;
  std::uint64_t delivered_messages = 0;

  double delivered_ratio() const { return offered_gbps > 0 ? total_gbps / offered_gbps : 1.0; }
};

inline constexpr double kSaturationRatio = 0.95;

// Smallest load whose delivered/offered ratio drops below 0.95, or nothing
// when the curve never saturates.
inline std::optional<double> saturation_point(const std::vector<SweepResult>& curve) {
  if (curve.size() < 3) throw std::invalid_argument("saturation_point needs at least 3 load points");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].load < curve[i - 1].load)
      throw std::invalid_argument("saturation_point needs a curve sorted by load");
  for (const auto& r : curve)
    if (r.delivered_ratio() < kSaturationRatio) return r.load;
  return std::nullopt;
}

// Fixed-capacity uniform sample of a stream (Algorithm R) with a
// deterministic generator, used for percentiles.
class Reservoir {
 public:
  Reservoir() : Reservoir(1'000'000, 0) {}
  Reservoir(std::size_t capacity, std::uint64_t stream)
      : capacity_(capacity), rng_(RunSeed{0x5eed}, stream) {}

  void add(double v) {
    ++seen_;
    if (samples_.size() < capacity_) {
      samples_.push_back(v);
      return;
    }
    std::uint64_t j = rng_.below(seen_);
    if (j < capacity_) samples_[j] = v;
  }

  std::uint64_t seen() const { return seen_; }
  std::size_t size() const { return samples_.size(); }

  // Nearest-rank quantile over the retained samples.
  double quantile(double q) {
    if (samples_.empty()) return 0.0;
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples_.size())));
    if (rank == 0) rank = 1;
    auto nth = samples_.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(samples_.begin(), nth, samples_.end());
    return *nth;
  }

 private:
  std::size_t capacity_;
  CounterRng rng_;
  std::uint64_t seen_ = 0;
  std::vector<double> samples_;
};

// Per-run collector. Only activity inside [window_start, window_end] counts;
// the leading part of the run is warm-up.
class MetricsCollector {
 public:
  MetricsCollector(SimTime window_start, SimTime window_end,
                   std::size_t reservoir_capacity = 1'000'000)
      : start_(window_start), end_(window_end) {
    if (window_end <= window_start) throw std::invalid_argument("empty measurement window");
    for (std::size_t k = 0; k < kLatencyComponents; ++k)
      reservoirs_[k] = Reservoir(reservoir_capacity, k);
  }

  bool in_window(SimTime t) const { return t >= start_ && t <= end_; }

  void record_generated(std::uint64_t wire_bytes, SimTime at) {
    if (in_window(at)) generated_bytes_ += wire_bytes;
  }

  // Credits a fully delivered message. `wire_bytes` is the message's size
  // under the load reference framing.
  void record_delivery(const Message& msg, const LatencyRecord& rec, std::uint64_t wire_bytes,
                       SimTime now) {
    if (rec.total() != now - msg.created_at) {
      std::ostringstream os;
      os << "latency components of message " << msg.id << " sum to " << rec.total().ticks()
         << " fs but sojourn is " << (now - msg.created_at).ticks() << " fs";
      throw std::logic_error(os.str());
    }
    if (msg.scope() == Scope::IntraNode &&
        (rec[LatencyComponent::SrcNic] != SimTime::zero() ||
         rec[LatencyComponent::InterNetwork] != SimTime::zero() ||
         rec[LatencyComponent::DstNic] != SimTime::zero()))
      throw std::logic_error("intra-node message carries NIC or inter-network latency");
    if (!in_window(now)) return;
    if (msg.scope() == Scope::IntraNode)
      intra_bytes_ += wire_bytes;
    else
      inter_bytes_ += wire_bytes;
    ++delivered_;
    for (std::size_t k = 0; k < kLatencyComponents; ++k) {
      double ns = rec.components[k].ns();
      sums_[k] += ns;
      reservoirs_[k].add(ns);
    }
    total_sum_ += rec.total().ns();
  }

  std::uint64_t delivered() const { return delivered_; }

  SweepResult finalize(double load) {
    SweepResult r;
    r.load = load;
    const double window_ns = (end_ - start_).ns();
    r.offered_gbps = static_cast<double>(generated_bytes_) * 8.0 / window_ns;
    r.intra_gbps = static_cast<double>(intra_bytes_) * 8.0 / window_ns;
    r.inter_gbps = static_cast<double>(inter_bytes_) * 8.0 / window_ns;
    r.total_gbps = r.intra_gbps + r.inter_gbps;
    r.delivered_messages = delivered_;
    for (std::size_t k = 0; k < kLatencyComponents; ++k) {
      r.latency_mean_ns[k] = delivered_ ? sums_[k] / static_cast<double>(delivered_) : 0.0;
      r.latency_p99_ns[k] = reservoirs_[k].quantile(0.99);
    }
    r.latency_total_mean_ns = delivered_ ? total_sum_ / static_cast<double>(delivered_) : 0.0;
    return r;
  }

 private:
  SimTime start_, end_;
  std::uint64_t generated_bytes_ = 0;
  std::uint64_t intra_bytes_ = 0;
  std::uint64_t inter_bytes_ = 0;
  std::uint64_t delivered_ = 0;
  std::array<double, kLatencyComponents> sums_{};
  double total_sum_ = 0;
  std::array<Reservoir, kLatencyComponents> reservoirs_{};
};

}  // namespace fabricsim
