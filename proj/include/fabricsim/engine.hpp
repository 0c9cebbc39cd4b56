#pragma once

#include <cassert>
#include <cstdint>
#include <compare>
#include <limits>
#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fabricsim {

// Simulated time. One tick is one femtosecond, so serialization times such as
// 148 B at 512 Gbps (2312.5 ps) are exact integers.
class SimTime {
 public:
  static constexpr std::int64_t kTicksPerPs = 1'000;
  static constexpr std::int64_t kTicksPerNs = 1'000'000;
  static constexpr std::int64_t kTicksPerUs = 1'000'000'000;

  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t ticks) : ticks_(ticks) {}

  static constexpr SimTime zero() { return SimTime{0}; }
  static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }
  static constexpr SimTime from_ns(double ns) {
    return SimTime{static_cast<std::int64_t>(ns * kTicksPerNs + (ns >= 0 ? 0.5 : -0.5))};
  }
  static constexpr SimTime from_us(double us) { return from_ns(us * 1e3); }

  constexpr std::int64_t ticks() const { return ticks_; }
  constexpr double ns() const { return static_cast<double>(ticks_) / kTicksPerNs; }
  constexpr double us() const { return static_cast<double>(ticks_) / kTicksPerUs; }

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(SimTime o) const { return SimTime{ticks_ + o.ticks_}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{ticks_ - o.ticks_}; }
  constexpr SimTime& operator+=(SimTime o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o) {
    ticks_ -= o.ticks_;
    return *this;
  }

 private:
  std::int64_t ticks_ = 0;
};

constexpr SimTime max(SimTime a, SimTime b) { return a < b ? b : a; }

// A scheduled event. `kind`, `target` and `arg` are opaque to the engine; the
// dispatcher owning the simulation interprets them.
struct Event {
  SimTime time;
  std::uint64_t sequence = 0;
  std::uint32_t target = 0;
  std::uint16_t kind = 0;
  std::uint16_t aux = 0;
  std::uint64_t arg = 0;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.sequence > b.sequence;
  }
};

// Single-threaded discrete-event scheduler. Events are dispatched in
// (time, sequence) order; sequence numbers are assigned at insertion so that
// same-time events run in insertion order.
class Engine {
 public:
  SimTime now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }
  std::uint64_t dispatched() const { return dispatched_; }

  void schedule(SimTime time, std::uint16_t kind, std::uint32_t target = 0, std::uint64_t arg = 0,
                std::uint16_t aux = 0) {
    if (time < now_) {
      std::ostringstream os;
      os << "event kind " << kind << " scheduled at " << time.ticks() << " fs, before current time "
         << now_.ticks() << " fs";
      throw std::logic_error(os.str());
    }
    push(Event{time, next_sequence_++, target, kind, aux, arg});
  }

  void schedule(const Event& e) { schedule(e.time, e.kind, e.target, e.arg, e.aux); }

  // Dispatches every event with time <= horizon, then leaves the clock at the
  // horizon. Returns the final simulation time.
  template <class Dispatch>
  SimTime run_until(SimTime horizon, Dispatch&& dispatch) {
    if (horizon < now_) throw std::logic_error("run_until horizon precedes current time");
    while (!heap_.empty() && heap_.front().time <= horizon) {
      Event e = pop();
#ifndef NDEBUG
      assert(e.time >= now_);
      assert(e.time > now_ || e.sequence > last_sequence_ || dispatched_ == 0);
      last_sequence_ = e.sequence;
#endif
      now_ = e.time;
      ++dispatched_;
      dispatch(e);
    }
    now_ = horizon;
    return now_;
  }

 private:
  // Implicit 4-ary min-heap on (time, sequence).
  static constexpr std::size_t kArity = 4;

  static bool earlier(const Event& a, const Event& b) {
    return a.time < b.time || (a.time == b.time && a.sequence < b.sequence);
  }

  void push(const Event& e) {
    std::size_t i = heap_.size();
    heap_.push_back(e);
    while (i > 0) {
      std::size_t parent = (i - 1) / kArity;
      if (!earlier(e, heap_[parent])) break;
      heap_[i] = heap_[parent];
      i = parent;
    }
    heap_[i] = e;
  }

  Event pop() {
    Event top = heap_.front();
    Event last = heap_.back();
    heap_.pop_back();
    const std::size_t n = heap_.size();
    if (n == 0) return top;
    std::size_t i = 0;
    for (;;) {
      std::size_t first = i * kArity + 1;
      if (first >= n) break;
      std::size_t best = first;
      std::size_t end = std::min(first + kArity, n);
      for (std::size_t c = first + 1; c < end; ++c)
        if (earlier(heap_[c], heap_[best])) best = c;
      if (!earlier(heap_[best], last)) break;
      heap_[i] = heap_[best];
      i = best;
    }
    heap_[i] = last;
    return top;
  }

  std::vector<Event> heap_;
  SimTime now_{};
  std::uint64_t next_sequence_ = 0;
  std::uint64_t dispatched_ = 0;
#ifndef NDEBUG
  std::uint64_t last_sequence_ = 0;
#endif
};

}  // namespace fabricsim
