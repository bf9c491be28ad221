#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "gauss.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "vec.hpp"

namespace fracmvp {

/// Resolution of the polar exterior rules. radial_nodes counts the nodes of the uniform part
/// of each mapped radial segment (Gauss panels of order 16); angular_nodes is the azimuthal
/// node count. The error estimate is the difference to the same rule with both counts halved.
struct ExteriorQuadScheme {
  int radial_nodes = 64;
  int angular_nodes = 128;
  double boundary_layer_split = 0.5;  // where a segment with two singular ends is cut
  double tail_start = 2.0;            // tail map starts at tail_start * r
  double boundary_q = 1.0;            // grading exponent at domain-boundary ends (1 = none)
  std::uint64_t seed = 0x5eedULL;     // Monte Carlo directions for n >= 4

  RadialRule radial() const {
    RadialRule rr;
    rr.order = std::min(16, radial_nodes);
    rr.panels = std::max(1, radial_nodes / 16);
    rr.split = boundary_layer_split;
    rr.tail_factor = tail_start;
    return rr;
  }
  ExteriorQuadScheme coarser() const {
    ExteriorQuadScheme c = *this;
    c.radial_nodes = std::max(4, radial_nodes / 2);
    c.angular_nodes = std::max(4, angular_nodes / 2);
    return c;
  }
  void validate() const {
    if (radial_nodes < 4 || angular_nodes < 4) throw DomainError("quadrature node counts must be >= 4");
    if (!(boundary_layer_split > 0.0 && boundary_layer_split < 1.0))
      throw DomainError("boundary_layer_split must lie in (0,1)");
  }
};

struct QuadResult {
  double value = 0.0;
  double err = 0.0;
};

/// Exterior region on which mu_r is integrated.
struct Region {
  enum class Kind { ComplementBall, ComplementDomain, DomainMinusBall };
  Kind kind = Kind::ComplementBall;
  std::optional<Domain> dom;

  static Region complement_ball() { return {}; }
  static Region complement_of(Domain d) { return {Kind::ComplementDomain, std::move(d)}; }
  static Region domain_minus_ball(Domain d) { return {Kind::DomainMinusBall, std::move(d)}; }
};

/// One radial piece of a ray, with the end behaviour used to build its nodes.
struct RaySegment {
  double a, b;
  SegmentEnds ends;
};

namespace detail {

// Coarse description of how a ray meets the integration set: number of pieces and, per piece,
// whether it starts at its anchor and whether it is unbounded. The angular integrand is
// smooth between angles where this changes.
template <class Segments>
std::vector<int> ray_signature(Segments&& segments, const Vec& dir) {
  std::vector<int> sig;
  for (const RaySegment& seg : segments(dir)) {
    const bool at_anchor = !std::isnan(seg.ends.alpha) && seg.a - seg.ends.alpha <= 1e-12 * (1.0 + std::abs(seg.a));
    sig.push_back(1 + (at_anchor ? 2 : 0) + (std::isfinite(seg.b) ? 0 : 4));
  }
  return sig;
}

// Planar angular rule: the circle is cut at the angles where the ray signature changes
// (located by bisection), and each arc gets composite Gauss panels graded toward both ends.
template <class Segments>
std::vector<Direction> planar_rule(const ExteriorQuadScheme& sch, Segments&& segments) {
  const int N = sch.angular_nodes;
  const double two_pi = 2.0 * std::numbers::pi;
  auto dir_of = [](double t) { return Vec{std::cos(t), std::sin(t)}; };
  const int M = std::max(64, 2 * N);
  std::vector<std::vector<int>> sigs(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) sigs[static_cast<std::size_t>(i)] = ray_signature(segments, dir_of(two_pi * i / M));
  std::vector<double> cuts;
  for (int i = 0; i < M; ++i) {
    const auto& s0 = sigs[static_cast<std::size_t>(i)];
    const auto& s1 = sigs[static_cast<std::size_t>((i + 1) % M)];
    if (s0 == s1) continue;
    double lo = two_pi * i / M, hi = two_pi * (i + 1) / M;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (ray_signature(segments, dir_of(mid)) == s0) lo = mid;
      else hi = mid;
    }
    cuts.push_back(0.5 * (lo + hi));
  }
  std::vector<Direction> out;
  if (cuts.empty()) {
    const double h = two_pi / N;
    for (int i = 0; i < N; ++i) out.push_back({dir_of((i + 0.5) * h), h});
    return out;
  }
  // Order and grading depth both grow with N, so the halved scheme used for the error
  // estimate is a genuinely different rule even on arcs that get a single panel.
  RadialRule rr;
  rr.order = std::clamp(N / 8, 4, 16);
  rr.levels = std::clamp(4 + static_cast<int>(std::lround(std::log2(N / 32.0))), 3, 10);
  rr.ratio = 0.2;
  std::vector<std::pair<double, double>> unit;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = k + 1 < cuts.size() ? cuts[k + 1] : cuts[0] + two_pi;
    const double len = b - a;
    if (!(len > 0.0)) continue;
    rr.panels = std::max(1, static_cast<int>(std::lround(len / two_pi * N / (2.0 * rr.order))));
    unit.clear();
    detail::graded_unit(rr, 0.0, unit);
    const double half = 0.5 * len;
    for (auto [v, wv] : unit) {
      out.push_back({dir_of(a + half * v), half * wv});
      out.push_back({dir_of(b - half * v), half * wv});
    }
  }
  return out;
}

}  // namespace detail

/// Integrates over R^n in polar coordinates about `center`:
///   sum over directions and radial nodes of  w_dir * w_rho * rho^{n-1} * eval(y, node).
/// segments(dir) lists the radial pieces of the integration set along each ray.
template <class Segments, class Eval>
double polar_sum(const Vec& center, const ExteriorQuadScheme& sch, int n, Segments&& segments, Eval&& eval) {
  const auto dirs = n == 2 ? detail::planar_rule(sch, segments) : sphere_rule(n, sch.angular_nodes, sch.seed);
  const RadialRule rr = sch.radial();
  auto per_dir = parallel_map<double>(dirs.size(), [&](std::size_t k) {
    const Direction& d = dirs[k];
    std::vector<RadialNode> nodes;
    for (const RaySegment& seg : segments(d.dir)) radial_segment(rr, seg.a, seg.b, seg.ends, nodes);
    double acc = 0.0;
    for (const RadialNode& nd : nodes) {
      const Vec y = center + nd.rho * d.dir;
      acc += nd.w * std::pow(nd.rho, n - 1) * eval(y, nd);
    }
    return acc * d.w;
  });
  double total = 0.0;
  for (double v : per_dir) total += v;
  return total;
}

/// polar_sum at the given scheme and at the halved scheme.
template <class Segments, class Eval>
QuadResult polar_integrate(const Vec& center, const ExteriorQuadScheme& sch, int n, Segments&& segments,
                           Eval&& eval) {
  sch.validate();
  const double fine = polar_sum(center, sch, n, segments, eval);
  const double coarse = polar_sum(center, sch.coarser(), n, segments, eval);
  return {fine, std::abs(fine - coarse)};
}

namespace detail {

// Pieces of [r, inf) along the ray t * dir belonging to the region.
inline std::vector<std::pair<double, double>> region_pieces(const Region& reg, double r, const Vec& dir) {
  std::vector<std::pair<double, double>> out;
  if (reg.kind == Region::Kind::ComplementBall) {
    out.emplace_back(r, INFINITY);
    return out;
  }
  const auto inside = ray_intervals(*reg.dom, Vec(dir.dim()), dir);
  // Pieces thinner than this are roundoff in r (r is usually a computed inradius); keeping
  // them would hide the angles where the region really changes shape.
  const double thin = 1e-13 * r;
  if (reg.kind == Region::Kind::DomainMinusBall) {
    for (auto [a, b] : inside) {
      a = std::max(a, r);
      if (b - a > thin) out.emplace_back(a, b);
    }
    return out;
  }
  double cur = r;
  for (auto [a, b] : inside) {
    if (a - cur > thin) out.emplace_back(cur, a);
    cur = std::max(cur, b);
  }
  out.emplace_back(cur, INFINITY);
  return out;
}

}  // namespace detail

/// Radial pieces for integrating against mu_r over a region: anchored at r with the
/// (rho - r)^{-s} map, graded at domain-boundary ends when sch.boundary_q > 1.
inline std::vector<RaySegment> mu_segments(const FracParams& p, double r, const Region& reg,
                                           const ExteriorQuadScheme& sch, const Vec& dir) {
  std::vector<RaySegment> segs;
  for (auto [a, b] : detail::region_pieces(reg, r, dir)) {
    SegmentEnds e;
    e.alpha = r;
    e.q_lo = 1.0 / (1.0 - p.s);
    e.gamma = 2.0 * p.s;
    if (std::isfinite(b) && sch.boundary_q > 1.0) {
      e.beta = b;
      e.q_hi = sch.boundary_q;
    }
    segs.push_back({a, b, e});
  }
  return segs;
}

namespace detail {

// Rejects integrands growing like |y|^{2s} or faster along a few sample rays.
inline void check_growth(const MuMeasure& m, const std::function<double(const Vec&)>& f) {
  const int n = m.params.n;
  const auto dirs = sphere_rule(n, 8, 7);
  for (std::size_t k = 0; k < dirs.size(); k += std::max<std::size_t>(1, dirs.size() / 4)) {
    double prev = NAN;
    double prev_slope = NAN;
    for (int e = 3; e <= 7; ++e) {
      const double rho = m.r * std::pow(10.0, e);
      const double v = std::abs(f(rho * dirs[k].dir));
      if (!std::isfinite(v)) throw DomainError("integrand is not finite far from the origin");
      const double lv = std::log10(std::max(v, 1e-300));
      if (!std::isnan(prev)) {
        const double slope = lv - prev;
        if (!std::isnan(prev_slope) && slope >= 2.0 * m.params.s - 0.02 &&
            prev_slope >= 2.0 * m.params.s - 0.02 && v > 1e-200)
          throw DomainError("integrand grows too fast for the mean-value measure to integrate it");
        prev_slope = slope;
      }
      prev = lv;
    }
  }
}

}  // namespace detail

/// Integral of f against mu_r over an exterior region, with an error estimate.
inline QuadResult integrate_mu(const MuMeasure& m, const Region& reg, const std::function<double(const Vec&)>& f,
                               const ExteriorQuadScheme& sch = {}) {
  const FracParams& p = m.params;
  const double r = m.r;
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  if (reg.dom) {
    if (dim(*reg.dom) != p.n) throw DomainError("domain dimension does not match n");
    const double inr = inradius_from_origin(*reg.dom);
    if (r > inr * (1.0 + 1e-12)) throw DomainError("region must lie outside the ball B_r (r exceeds the inradius)");
  }
  if (reg.kind != Region::Kind::DomainMinusBall) detail::check_growth(m, f);
  const double lc = std::log(p.c) + 2.0 * p.s * std::log(r);
  auto segs = [&](const Vec& dir) { return mu_segments(p, r, reg, sch, dir); };
  auto eval = [&](const Vec& y, const RadialNode& nd) {
    const double fy = f(y);
    if (fy == 0.0) return 0.0;
    return fy * std::exp(lc - p.s * (std::log(nd.gap_lo) + std::log(nd.rho + r)) - p.n * std::log(nd.rho));
  };
  QuadResult q = polar_integrate(Vec(p.n), sch, p.n, segs, eval);
  if (!std::isfinite(q.value)) throw NumericalError("mu integral is not finite", q.value);
  return q;
}

/// mu_r(region).
inline QuadResult mu_mass(const MuMeasure& m, const Region& reg, const ExteriorQuadScheme& sch = {}) {
  return integrate_mu(m, reg, [](const Vec&) { return 1.0; }, sch);
}

// ---------------------------------------------------------------------------
// Compact rules on a ball, for integrands supported in (or smooth on) a small ball.

struct PointRule {
  std::vector<Vec> y;
  std::vector<double> w;
};

/// Polar Gauss rule on B_radius(center): m_r radial nodes times the sphere rule with
/// N_a azimuthal nodes. Integrates smooth functions supported in the closed ball.
inline PointRule ball_rule(const Vec& center, double radius, int m_r, int N_a) {
  const int n = center.dim();
  const GaussRule& g = gauss_legendre(m_r);
  const auto dirs = sphere_rule(n, N_a);
  PointRule pr;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double rho = 0.5 * radius * (1.0 + g.x[i]);
    const double wr = 0.5 * radius * g.w[i] * std::pow(rho, n - 1);
    for (const auto& d : dirs) {
      pr.y.push_back(center + rho * d.dir);
      pr.w.push_back(wr * d.w);
    }
  }
  return pr;
}

}  // namespace fracmvp
