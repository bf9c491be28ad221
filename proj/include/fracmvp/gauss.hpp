#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "rng.hpp"
#include "vec.hpp"

namespace fracmvp {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

/// m-point Gauss-Legendre rule, computed once per m by Newton iteration on P_m.
inline const GaussRule& gauss_legendre(int m) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  GaussRule g;
  if (m == 1) {
    g.x = {0.0};
    g.w = {2.0};
    return cache.emplace(m, std::move(g)).first->second;
  }
  g.x.resize(static_cast<std::size_t>(m));
  g.w.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    g.x[static_cast<std::size_t>(i)] = -z;
    g.x[static_cast<std::size_t>(m - 1 - i)] = z;
    g.w[static_cast<std::size_t>(i)] = wi;
    g.w[static_cast<std::size_t>(m - 1 - i)] = wi;
  }
  return cache.emplace(m, std::move(g)).first->second;
}

/// Controls the composite radial rules. Each mapped segment is covered by `panels` uniform
/// Gauss panels of `order` nodes, and the panel touching the singular end is further split
/// geometrically `levels` times by `ratio`.
struct RadialRule {
  int panels = 4;
  int order = 16;
  int levels = 8;
  double ratio = 0.2;
  double split = 0.5;        // where a segment with two singular ends is cut
  double tail_factor = 2.0;  // tail map starts at tail_factor * anchor

  RadialRule coarser() const {
    RadialRule c = *this;
    if (panels > 1) {
      c.panels = panels / 2;
    } else {
      c.order = std::max(2, order / 2);
    }
    return c;
  }
};

/// A radial node. gap_lo / gap_hi are the exact distances to the segment's anchors
/// (rho - alpha, beta - rho); callers use them instead of recomputing a difference of
/// nearly equal numbers.
struct RadialNode {
  double rho;
  double w;
  double gap_lo;
  double gap_hi;
};

namespace detail {

// Composite Gauss nodes on [v_lo, 1], graded geometrically toward v = 0.
inline void graded_unit(const RadialRule& rr, double v_lo, std::vector<std::pair<double, double>>& out) {
  const GaussRule& g = gauss_legendre(rr.order);
  std::vector<double> br;
  const double first = 1.0 / rr.panels;
  br.push_back(0.0);
  for (int l = rr.levels; l >= 1; --l) br.push_back(first * std::pow(rr.ratio, l));
  for (int p = 1; p <= rr.panels; ++p) br.push_back(static_cast<double>(p) / rr.panels);
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    double a = br[k], b = br[k + 1];
    if (b <= v_lo) continue;
    a = std::max(a, v_lo);
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (std::size_t i = 0; i < g.x.size(); ++i) out.emplace_back(m + h * g.x[i], h * g.w[i]);
  }
}

}  // namespace detail

inline constexpr double kNoAnchor = std::numeric_limits<double>::quiet_NaN();

/// End behaviour of a radial segment [a, b]. An anchor alpha <= a (beta >= b) marks a point
/// near which the integrand is singular or only Hoelder continuous; the segment is then
/// parametrized by rho - alpha = L u^q_lo (beta - rho = L u^q_hi). Choosing q = 1/(1-s)
/// cancels a (rho - alpha)^{-s} singularity against the Jacobian, and q = 1/s turns a
/// (rho - alpha)^s term into a linear one. For b = inf the integrand is assumed to decay like
/// rho^{-1-gamma}; the map rho = T sigma^{-1/gamma} makes that decay flat in sigma.
struct SegmentEnds {
  double alpha = kNoAnchor;
  double q_lo = 1.0;
  double beta = kNoAnchor;
  double q_hi = 1.0;
  double gamma = 1.0;
};

inline void radial_segment(const RadialRule& rr, double a, double b, const SegmentEnds& e,
                           std::vector<RadialNode>& out) {
  if (!(b > a)) return;
  std::vector<std::pair<double, double>> unit;
  const bool has_lo = !std::isnan(e.alpha);
  const bool has_hi = !std::isnan(e.beta) && std::isfinite(b);

  auto left_mapped = [&](double lo, double hi) {
    const double alpha = has_lo ? e.alpha : lo;
    const double L = hi - alpha;
    const double q = has_lo ? e.q_lo : 1.0;
    const double v_lo = std::pow((lo - alpha) / L, 1.0 / q);
    unit.clear();
    detail::graded_unit(rr, v_lo, unit);
    for (auto [v, wv] : unit) {
      const double gap = L * std::pow(v, q);
      const double rho = alpha + gap;
      const double w = wv * L * q * std::pow(v, q - 1.0);
      out.push_back({rho, w, has_lo ? gap : rho - a, has_hi ? e.beta - rho : kNoAnchor});
    }
  };
  auto right_mapped = [&](double lo, double hi) {
    const double beta = e.beta;
    const double L = beta - lo;
    const double q = e.q_hi;
    const double v_lo = std::pow((beta - hi) / L, 1.0 / q);
    unit.clear();
    detail::graded_unit(rr, v_lo, unit);
    for (auto [v, wv] : unit) {
      const double gap = L * std::pow(v, q);
      const double rho = beta - gap;
      const double w = wv * L * q * std::pow(v, q - 1.0);
      out.push_back({rho, w, has_lo ? rho - e.alpha : rho - a, gap});
    }
  };

  if (!std::isfinite(b)) {
    double t0 = has_lo ? std::max(a, rr.tail_factor * e.alpha) : a;
    if (!(t0 > 0.0)) t0 = 1.0;
    if (t0 > a) left_mapped(a, t0);
    const double gamma = e.gamma;
    unit.clear();
    detail::graded_unit(rr, 0.0, unit);
    for (auto [sig, ws] : unit) {
      const double rho = t0 * std::pow(sig, -1.0 / gamma);
      const double w = ws * (t0 / gamma) * std::pow(sig, -1.0 / gamma - 1.0);
      out.push_back({rho, w, has_lo ? rho - e.alpha : rho - a, kNoAnchor});
    }
    return;
  }
  if (has_hi && has_lo) {
    const double m = a + rr.split * (b - a);
    left_mapped(a, m);
    right_mapped(m, b);
  } else if (has_hi) {
    right_mapped(a, b);
  } else {
    left_mapped(a, b);
  }
}

/// Quadrature direction on S^{n-1}; weights sum to |S^{n-1}|.
struct Direction {
  Vec dir;
  double w;
};

/// Product rule on the sphere: trapezoid in the angle for n = 2, Gauss in cos(theta) times
/// trapezoid in phi for n = 3, fixed-seed Monte Carlo directions for n >= 4.
/// N is the number of azimuthal nodes.
inline std::vector<Direction> sphere_rule(int n, int N, std::uint64_t seed = 0x5eedULL) {
  std::vector<Direction> out;
  if (n == 1) {
    out.push_back({Vec{1.0}, 1.0});
    out.push_back({Vec{-1.0}, 1.0});
    return out;
  }
  if (n == 2) {
    const double h = 2.0 * std::numbers::pi / N;
    for (int i = 0; i < N; ++i) {
      const double a = (i + 0.5) * h;
      out.push_back({Vec{std::cos(a), std::sin(a)}, h});
    }
    return out;
  }
  if (n == 3) {
    const GaussRule& g = gauss_legendre(std::max(2, N / 2));
    const double h = 2.0 * std::numbers::pi / N;
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      const double t = g.x[j], st = std::sqrt(1.0 - t * t);
      for (int i = 0; i < N; ++i) {
        const double a = (i + 0.5) * h;
        out.push_back({Vec{st * std::cos(a), st * std::sin(a), t}, g.w[j] * h});
      }
    }
    return out;
  }
  const int M = N * N / 2;
  const double w = sphere_area(n) / M;
  for (int i = 0; i < M; ++i) {
    Stream st(seed, static_cast<std::uint64_t>(i));
    out.push_back({st.direction(n), w});
  }
  return out;
}

}  // namespace fracmvp
