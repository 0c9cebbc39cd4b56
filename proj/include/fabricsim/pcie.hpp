#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fabricsim::pcie {

// Exact non-negative rational with 128-bit intermediates.
class Rational {
 public:
  using Int = __int128;

  constexpr Rational() = default;
  constexpr Rational(Int num, Int den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    Int g = gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr Int num() const { return num_; }
  constexpr Int den() const { return den_; }
  constexpr double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend constexpr Rational operator*(Rational a, Rational b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend constexpr Rational operator/(Rational a, Rational b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend constexpr bool operator==(Rational a, Rational b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr bool operator<(Rational a, Rational b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend constexpr bool operator<=(Rational a, Rational b) { return !(b < a); }

 private:
  static constexpr Int gcd(Int a, Int b) {
    while (b != 0) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  Int num_ = 0;
  Int den_ = 1;
};

// Parameters of the closed-form PCIe transfer model. DLLP size/overhead,
// TLP overhead and the ACK factor are configuration, not measured values.
struct PcieLinkParams {
  std::uint32_t width = 16;
  std::uint64_t datarate_bps = 8'000'000'000ULL;  // per lane
  std::uint32_t encoding_num = 128;
  std::uint32_t encoding_den = 130;
  std::uint32_t tlp_overhead_bytes = 20;
  std::uint32_t max_payload_bytes = 128;
  std::uint32_t dllp_overhead_bytes = 0;
  std::uint32_t dllp_size_bytes = 8;
  std::uint32_t ack_factor = 4;

  static PcieLinkParams gen3_x16() { return {}; }

  void validate() const {
    switch (width) {
      case 1: case 2: case 4: case 8: case 16: case 32: break;
      default: throw std::invalid_argument("PCIe width must be one of 1, 2, 4, 8, 16, 32");
    }
    if (encoding_num == 0 || encoding_den == 0 || encoding_num > encoding_den)
      throw std::invalid_argument("PCIe encoding must lie in (0, 1]");
    if (ack_factor < 1) throw std::invalid_argument("PCIe ack factor must be >= 1");
    if (max_payload_bytes == 0) throw std::invalid_argument("PCIe max payload must be > 0");
    if (datarate_bps == 0) throw std::invalid_argument("PCIe datarate must be > 0");
  }
};

// Width x Datarate x Encoding, in bytes per nanosecond.
inline Rational bytes_per_ns(const PcieLinkParams& p) {
  p.validate();
  return Rational(static_cast<Rational::Int>(p.width) * p.datarate_bps * p.encoding_num,
                  static_cast<Rational::Int>(p.encoding_den) * 8 * 1'000'000'000);
}

inline Rational tlp_time_ns(const PcieLinkParams& p) {
  return Rational(p.tlp_overhead_bytes + p.max_payload_bytes) / bytes_per_ns(p);
}

inline Rational dllp_time_ns(const PcieLinkParams& p) {
  return Rational(p.dllp_overhead_bytes + p.dllp_size_bytes) / bytes_per_ns(p);
}

inline std::uint64_t number_tlps(const PcieLinkParams& p, std::uint64_t message_bytes) {
  return (message_bytes + p.max_payload_bytes - 1) / p.max_payload_bytes;
}

inline std::uint64_t number_acks(const PcieLinkParams& p, std::uint64_t message_bytes) {
  return (number_tlps(p, message_bytes) + p.ack_factor - 1) / p.ack_factor;
}

// NumberTLPs * TLPTime + NumberACKs * DLLPTime, in nanoseconds.
inline Rational message_latency_ns(const PcieLinkParams& p, std::uint64_t message_bytes) {
  if (message_bytes == 0) throw std::invalid_argument("message size must be positive");
  Rational tlps(static_cast<Rational::Int>(number_tlps(p, message_bytes)));
  Rational acks(static_cast<Rational::Int>(number_acks(p, message_bytes)));
  return tlps * tlp_time_ns(p) + acks * dllp_time_ns(p);
}

// Effective data rate in Gbps (bits per ns).
inline double effective_gbps(const PcieLinkParams& p) { return bytes_per_ns(p).to_double() * 8.0; }

}  // namespace fabricsim::pcie
