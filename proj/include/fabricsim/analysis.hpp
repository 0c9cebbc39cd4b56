#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fabricsim/model.hpp"

namespace fabricsim::analysis {

// Ratio of intra-tier to inter-tier wire bytes per payload byte.
inline double traffic_overhead(const PacketGeometry& g) {
  if (g.intra_payload_bytes == 0 || g.inter_payload_bytes == 0)
    throw std::domain_error("traffic overhead needs positive payload sizes");
  const double intra = static_cast<double>(g.intra_header_bytes) / g.intra_payload_bytes + 1.0;
  const double inter = static_cast<double>(g.inter_header_bytes) / g.inter_payload_bytes + 1.0;
  return intra / inter;
}

struct OverheadInputs {
  PacketGeometry geometry{};
  double traffic_inter_pct = 20.0;  // 0..100
  std::uint32_t num_nodes = 128;
  double model_adjustment = 16384.0;
};

// Expected aggregate throughput (Gbps) from a per-node adjustment constant
// divided by the overhead factor and the inter-node share in percent.
inline double throughput_bound(double model_adjustment, double overhead, double inter_pct,
                               std::uint32_t num_nodes) {
  if (!(inter_pct > 0)) throw std::domain_error("throughput bound is undefined without inter-node traffic");
  if (!(overhead > 0)) throw std::domain_error("traffic overhead must be positive");
  if (num_nodes < 1) throw std::domain_error("need at least one node");
  return model_adjustment / (overhead * inter_pct) * num_nodes;
}

inline double throughput_bound(const OverheadInputs& in) {
  return throughput_bound(in.model_adjustment, traffic_overhead(in.geometry), in.traffic_inter_pct,
                          in.num_nodes);
}

enum class ModelKind { Linear, Quadratic, Cubic, PowerLaw };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Quadratic: return "quadratic";
    case ModelKind::Cubic: return "cubic";
    case ModelKind::PowerLaw: return "power_law";
  }
  return "?";
}

struct DataPoint {
  double x = 0;
  double y = 0;
};

// Parameters are ordered as written: a*x + b, a*x^2 + b*x + c,
// a*x^3 + b*x^2 + c*x + d, a*x^b.
struct FitResult {
  ModelKind model = ModelKind::Linear;
  bool ok = false;
  std::string failure;
  std::vector<double> parameters;
  double sse = std::numeric_limits<double>::infinity();
  double r_squared = -std::numeric_limits<double>::infinity();

  double evaluate(double x) const {
    if (model == ModelKind::PowerLaw) return parameters[0] * std::pow(x, parameters[1]);
    double y = 0;
    for (double p : parameters) y = y * x + p;
    return y;
  }
};

struct FitReport {
  std::vector<FitResult> fits;  // sorted best first; failed models last
  const FitResult& best() const { return fits.front(); }
};

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Returns nothing when the system is numerically singular.
inline std::optional<std::vector<double>> solve(std::vector<std::vector<double>> a,
                                                std::vector<double> b) {
  const std::size_t n = b.size();
  double scale = 0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double eps = scale * 1e-13 * static_cast<double>(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (!(std::abs(a[piv][c]) > eps)) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = a[r][c] / a[c][c];
      if (f == 0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline void score(FitResult& f, const std::vector<DataPoint>& data) {
  double mean = 0;
  for (const auto& p : data) mean += p.y;
  mean /= static_cast<double>(data.size());
  double sse = 0, sst = 0;
  for (const auto& p : data) {
    double r = p.y - f.evaluate(p.x);
    sse += r * r;
    sst += (p.y - mean) * (p.y - mean);
  }
  f.sse = sse;
  f.r_squared = sst > 0 ? 1.0 - sse / sst : (sse == 0 ? 1.0 : 0.0);
  for (double p : f.parameters)
    if (!std::isfinite(p)) {
      f.ok = false;
      f.failure = "non-finite parameter";
    }
}

}  // namespace detail

// Least-squares polynomial of the given degree. Columns are scaled by
// max|x|^j before forming the normal equations.
inline FitResult fit_polynomial(const std::vector<DataPoint>& data, unsigned degree) {
  FitResult f;
  f.model = degree == 1 ? ModelKind::Linear : degree == 2 ? ModelKind::Quadratic : ModelKind::Cubic;
  const std::size_t m = degree + 1;
  if (data.size() < m) {
    f.failure = "fewer points than coefficients";
    return f;
  }
  double xmax = 0;
  for (const auto& p : data) xmax = std::max(xmax, std::abs(p.x));
  if (xmax == 0) xmax = 1;
  // Column j holds (x/xmax)^j, j = 0..degree.
  std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
  std::vector<double> aty(m, 0.0);
  for (const auto& p : data) {
    std::vector<double> row(m);
    double v = 1;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = v;
      v *= p.x / xmax;
    }
    for (std::size_t i = 0; i < m; ++i) {
      aty[i] += row[i] * p.y;
      for (std::size_t j = 0; j < m; ++j) ata[i][j] += row[i] * row[j];
    }
  }
  auto sol = detail::solve(ata, aty);
  if (!sol) {
    f.failure = "singular normal equations";
    return f;
  }
  // Undo scaling and order coefficients from the highest power down.
  f.parameters.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    f.parameters[degree - j] = (*sol)[j] / std::pow(xmax, static_cast<double>(j));
  f.ok = true;
  detail::score(f, data);
  return f;
}

// y = a * x^b: log-log regression for a start, then Gauss-Newton on the
// untransformed residuals.
inline FitResult fit_power_law(const std::vector<DataPoint>& data, int iterations = 50,
                               double rel_tol = 1e-10) {
  FitResult f;
  f.model = ModelKind::PowerLaw;
  if (data.size() < 2) {
    f.failure = "fewer points than coefficients";
    return f;
  }
  std::vector<DataPoint> logs;
  for (const auto& p : data) {
    if (!(p.x > 0) || !(p.y > 0)) {
      f.failure = "power law needs positive data";
      return f;
    }
    logs.push_back({std::log(p.x), std::log(p.y)});
  }
  FitResult seed = fit_polynomial(logs, 1);
  if (!seed.ok) {
    f.failure = "degenerate log-log regression";
    return f;
  }
  double a = std::exp(seed.parameters[1]);
  double b = seed.parameters[0];
  for (int it = 0; it < iterations; ++it) {
    double jaa = 0, jab = 0, jbb = 0, ga = 0, gb = 0;
    for (const auto& p : data) {
      double xb = std::pow(p.x, b);
      double r = p.y - a * xb;
      double da = xb;
      double db = a * xb * std::log(p.x);
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    double det = jaa * jbb - jab * jab;
    if (!(std::abs(det) > 0)) break;
    double step_a = (jbb * ga - jab * gb) / det;
    double step_b = (jaa * gb - jab * ga) / det;
    a += step_a;
    b += step_b;
    if (std::abs(step_a) <= rel_tol * std::abs(a) && std::abs(step_b) <= rel_tol * std::abs(b)) break;
  }
  f.parameters = {a, b};
  f.ok = true;
  detail::score(f, data);
  return f;
}

// Fits all four models and ranks them by SSE. Failed models sort last.
inline FitReport fit_models(const std::vector<DataPoint>& data) {
  if (data.size() < 5) throw std::invalid_argument("model fitting needs at least 5 data points");
  FitReport rep;
  rep.fits.push_back(fit_polynomial(data, 1));
  rep.fits.push_back(fit_polynomial(data, 2));
  rep.fits.push_back(fit_polynomial(data, 3));
  rep.fits.push_back(fit_power_law(data));
  std::stable_sort(rep.fits.begin(), rep.fits.end(), [](const FitResult& x, const FitResult& y) {
    if (x.ok != y.ok) return x.ok;
    return x.sse < y.sse;
  });
  return rep;
}

}  // namespace fabricsim::analysis
