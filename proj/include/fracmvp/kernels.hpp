#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "error.hpp"
#include "gauss.hpp"
#include "geometry.hpp"
#include "vec.hpp"

namespace fracmvp {

struct FracParams {
  int n = 2;
  double s = 0.5;
  double c = 0.0;
};

namespace detail {

// I(s) = int_1^inf rho^{-1} (rho^2 - 1)^{-s} d rho with the singular and tail maps.
inline double unit_radial_integral(double s, const RadialRule& rr) {
  std::vector<RadialNode> nodes;
  SegmentEnds e;
  e.alpha = 1.0;
  e.q_lo = 1.0 / (1.0 - s);
  e.gamma = 2.0 * s;
  radial_segment(rr, 1.0, INFINITY, e, nodes);
  double acc = 0.0;
  for (const auto& nd : nodes) {
    acc += nd.w * std::exp(-std::log(nd.rho) - s * (std::log(nd.gap_lo) + std::log(nd.rho + 1.0)));
  }
  return acc;
}

}  // namespace detail

/// Chooses c so that the un-normalized mu_1 density integrates to one over the complement
/// of the unit ball. The density is radial, so the n-dimensional integral is |S^{n-1}| times
/// a one-dimensional singular/heavy-tailed integral. Throws NumericalError if halving the
/// radial resolution moves the result by more than tol (relative).
inline FracParams calibrate_constant(int n, double s, double tol = 1e-10) {
  if (n < 1 || n > kMaxDim) throw DomainError("dimension out of range: " + std::to_string(n));
  if (!(s > 0.0 && s < 1.0)) throw DomainError("order s must lie in (0,1)");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  static std::mutex mu;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find({n, s});
    if (it != cache.end()) return {n, s, it->second};
  }
  RadialRule fine;
  fine.panels = 8;
  fine.levels = 12;
  const double i_fine = detail::unit_radial_integral(s, fine);
  const double i_coarse = detail::unit_radial_integral(s, fine.coarser());
  const double rel = std::abs(i_fine - i_coarse) / i_fine;
  if (!(rel <= tol)) throw NumericalError("normalizing constant did not converge", rel);
  const double c = 1.0 / (sphere_area(n) * i_fine);
  std::lock_guard lock(mu);
  cache[{n, s}] = c;
  return {n, s, c};
}

/// The mean-value measure mu_r of the ball B_r(0).
struct MuMeasure {
  FracParams params;
  double r = 1.0;
};

namespace detail {
// log of c r^{2s} / ((|y|^2 - r^2)^s |y|^n), given |y| and the exact gap |y| - r.
inline double log_mu_density(const FracParams& p, double r, double ry, double gap) {
  return std::log(p.c) + 2.0 * p.s * std::log(r) - p.s * (std::log(gap) + std::log(ry + r)) -
         p.n * std::log(ry);
}
}  // namespace detail

inline double mu_density(const MuMeasure& m, const Vec& y) {
  const double ry = norm(y);
  if (!(ry > m.r)) throw DomainError("mu density is undefined on the closed ball of radius r");
  return std::exp(detail::log_mu_density(m.params, m.r, ry, ry - m.r));
}

/// Density of mu_rho centred at z, i.e. the exit law from B_rho(z); zero inside the ball.
inline double mu_density_at(const FracParams& p, const Vec& z, double rho, const Vec& y) {
  const double d = dist(y, z);
  if (!(d > rho)) return 0.0;
  return std::exp(detail::log_mu_density(p, rho, d, d - rho));
}

/// Poisson kernel of the ball B_R(center).
inline double poisson_ball(const FracParams& p, const Vec& center, double R, const Vec& x, const Vec& y) {
  const double rx = dist(x, center);
  const double ry = dist(y, center);
  if (!(rx < R)) throw DomainError("poisson_ball: x must lie inside the open ball");
  if (!(ry > R)) throw DomainError("poisson_ball: y must lie outside the closed ball");
  const double lg = std::log(p.c) + p.s * (std::log(R - rx) + std::log(R + rx)) -
                    p.s * (std::log(ry - R) + std::log(ry + R)) - p.n * std::log(dist(x, y));
  return std::exp(lg);
}

/// Poisson-like weight c / (|y|^n d^s (2 + d)^s), d = dist(y, boundary), without the
/// normalizing prefactor (that is applied by the boundary-limit code). The first form takes
/// the distance when the caller knows it more accurately than signed_dist can compute it.
inline double f_omega(const FracParams& p, const Vec& y, double d) {
  if (!(d > 0.0)) throw DomainError("f_omega: y must lie outside the closure of the domain");
  return std::exp(std::log(p.c) - p.n * std::log(norm(y)) - p.s * (std::log(d) + std::log(2.0 + d)));
}

inline double f_omega(const FracParams& p, const Domain& dom, const Vec& y) {
  return f_omega(p, y, signed_dist(dom, y));
}

}  // namespace fracmvp
