#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fabricsim/metrics.hpp"
#include "fabricsim/network.hpp"

namespace fabricsim {

// A load point that failed, with its position in the sweep.
class SweepError : public SimulationError {
 public:
  SweepError(std::size_t index, double load, const std::string& what)
      : SimulationError("load point " + std::to_string(index) + " (load " + format(load) +
                        "): " + what),
        index_(index), load_(load) {}
  std::size_t index() const { return index_; }
  double load() const { return load_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
  std::size_t index_;
  double load_;
};

// Worker count from FABRICSIM_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("FABRICSIM_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs every load point of `cfg` as an independent simulation with its own
// derived seed. Results come back in sweep order whatever the worker count.
inline std::vector<SweepResult> run_sweep(const FabricConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  const std::size_t n = cfg.sweep.size();
  std::vector<SweepResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        results[i] = run_load_point(cfg, cfg.sweep[i], derive_seed(cfg.seed, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw SweepError(i, cfg.sweep[i].load, e.what());
    }
  }
  return results;
}

// ---- CSV --------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader =
    "load_pct,intra_gbps,inter_gbps,total_gbps,lat_src_acc_ns,lat_src_intra_ns,lat_src_nic_ns,"
    "lat_inter_ns,lat_dst_nic_ns,lat_dst_intra_ns,lat_dst_acc_ns,delivered_msgs";

inline constexpr const char* kSweepP99CsvHeader =
    "load_pct,lat_src_acc_ns,lat_src_intra_ns,lat_src_nic_ns,lat_inter_ns,lat_dst_nic_ns,"
    "lat_dst_intra_ns,lat_dst_acc_ns";

namespace detail {
inline void put(std::string& out, double v, const char* fmt = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  out += buf;
}
}  // namespace detail

inline std::string sweep_csv(const std::vector<SweepResult>& rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    detail::put(out, r.load * 100.0, "%.2f");
    for (double v : {r.intra_gbps, r.inter_gbps, r.total_gbps}) {
      out += ',';
      detail::put(out, v);
    }
    for (double v : r.latency_mean_ns) {
      out += ',';
      detail::put(out, v);
    }
    out += ',' + std::to_string(r.delivered_messages) + '\n';
  }
  return out;
}

inline std::string sweep_p99_csv(const std::vector<SweepResult>& rows) {
  std::string out = kSweepP99CsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    detail::put(out, r.load * 100.0, "%.2f");
    for (double v : r.latency_p99_ns) {
      out += ',';
      detail::put(out, v);
    }
    out += '\n';
  }
  return out;
}

// "x.csv" -> "x_p99.csv"
inline std::string p99_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + "_p99";
  return csv_path.substr(0, dot) + "_p99" + csv_path.substr(dot);
}

// ---- SVG --------------------------------------------------------------

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2"};

inline double nice_max(double v) {
  if (!(v > 0)) return 1.0;
  double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= v) return m * p;
  return 10 * p;
}

}  // namespace detail

// Throughput (intra, inter, total) against offered load.
inline std::string throughput_svg(const std::vector<SweepResult>& rows, const std::string& title) {
  using detail::num;
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double ymax = 0;
  for (const auto& r : rows) ymax = std::max(ymax, r.total_gbps);
  ymax = detail::nice_max(ymax);
  auto X = [&](double load) { return L + load * (W - L - R); };
  auto Y = [&](double v) { return H - B - v / ymax * (H - T - B); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  s << "<path d=\"M" << L << ' ' << T << " V" << H - B << " H" << W - R
    << "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double v = ymax * i / 5;
    s << "<text x=\"" << L - 5 << "\" y=\"" << num(Y(v) + 4) << "\" text-anchor=\"end\">"
      << num(v) << "</text>\n";
    s << "<text x=\"" << num(X(i / 5.0)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << i * 20 << "%</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">offered load</text>\n";
  s << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
    << ")\" text-anchor=\"middle\">Gbps</text>\n";
  const char* names[] = {"intra", "inter", "total"};
  for (int k = 0; k < 3; ++k) {
    s << "<path fill=\"none\" stroke=\"" << detail::kPalette[k] << "\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double v = k == 0 ? rows[i].intra_gbps : k == 1 ? rows[i].inter_gbps : rows[i].total_gbps;
      s << (i ? " L" : "M") << num(X(rows[i].load)) << ' ' << num(Y(v));
    }
    s << "\"/>\n";
    s << "<text x=\"" << L + 10 << "\" y=\"" << T + 14 * (k + 1) << "\" fill=\"" << detail::kPalette[k]
      << "\">" << names[k] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// Stacked mean latency components per load point.
inline std::string latency_svg(const std::vector<SweepResult>& rows, const std::string& title) {
  using detail::num;
  const double W = 640, H = 400, L = 70, R = 110, T = 40, B = 50;
  double ymax = 0;
  for (const auto& r : rows) {
    double sum = 0;
    for (double v : r.latency_mean_ns) sum += v;
    ymax = std::max(ymax, sum);
  }
  ymax = detail::nice_max(ymax);
  const double slot = rows.empty() ? 1 : (W - L - R) / static_cast<double>(rows.size());
  auto Y = [&](double v) { return H - B - v / ymax * (H - T - B); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  s << "<path d=\"M" << L << ' ' << T << " V" << H - B << " H" << W - R
    << "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 5; ++i)
    s << "<text x=\"" << L - 5 << "\" y=\"" << num(Y(ymax * i / 5) + 4) << "\" text-anchor=\"end\">"
      << num(ymax * i / 5) << "</text>\n";
  s << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
    << ")\" text-anchor=\"middle\">ns</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double x = L + slot * (static_cast<double>(i) + 0.15), base = 0;
    for (std::size_t k = 0; k < kLatencyComponents; ++k) {
      double v = rows[i].latency_mean_ns[k];
      if (v <= 0) continue;
      s << "<path fill=\"" << detail::kPalette[k] << "\" d=\"M" << num(x) << ' ' << num(Y(base))
        << " H" << num(x + slot * 0.7) << " V" << num(Y(base + v)) << " H" << num(x) << " Z\"/>\n";
      base += v;
    }
    s << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"middle\">" << num(rows[i].load * 100) << "</text>\n";
  }
  for (std::size_t k = 0; k < kLatencyComponents; ++k)
    s << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 14 * (k + 1) << "\" fill=\"" << detail::kPalette[k]
      << "\">" << kLatencyComponentNames[k] << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace fabricsim
