#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "exterior_data.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "vec.hpp"
#include "wos.hpp"

namespace fracmvp {

/// How the kernel is weighted before taking t -> 0:
///   WeightedDist: P(x0, q_t) |q_t|^n dist(q_t)^s   (compares with the Poisson-like weight)
///   Dist:         P(x0, q_t) dist(q_t)^s           (the quantity bracketed by tangent balls)
enum class ProfileNorm { WeightedDist, Dist };

struct LimitConfig {
  ProfileNorm norm = ProfileNorm::WeightedDist;
  WosConfig wos;
  bool force_walks = false;  // use walks even when the domain is a ball
};

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  bool vacuous_lower = false;  // the base of the lower bound was not positive
};

struct BoundaryLimitProfile {
  Vec p, nu;
  std::vector<double> t_grid, values, errs;
  double extrapolated_limit = 0.0;
  double limit_err = 0.0;
  Bracket bracket;  // already multiplied by |p|^n for WeightedDist
  bool closed_form = false;
  bool flagged = false;  // statistical error above 5% of the limit
};

namespace detail {

// The domain as a single ball, when it is one.
inline std::optional<Ball> single_ball(const Domain& d) {
  if (const auto* b = std::get_if<Ball>(&d.v)) return *b;
  if (const auto* sb = std::get_if<ShiftedBall>(&d.v)) return as_ball(*sb);
  if (const auto* u = std::get_if<BallUnion>(&d.v); u && u->parts.size() == 1) return u->parts.front();
  if (const auto* dl = std::get_if<Dilated>(&d.v)) {
    if (auto b = single_ball(*dl->base)) return Ball{b->center * dl->lambda, b->radius * dl->lambda};
  }
  return std::nullopt;
}

inline double richardson(double t1, double v1, double t2, double v2) { return (t1 * v2 - t2 * v1) / (t1 - t2); }

}  // namespace detail

/// Two-sided bounds for lim P(x0, p + t nu) t^s from the interior and exterior tangent balls at p.
inline Bracket tangent_bracket(const FracParams& prm, const Domain& dom, const Vec& x0, const Vec& p) {
  if (!(dist(x0, p) > 0.0)) throw DomainError("tangent_bracket: x0 must differ from p");
  if (!(signed_dist(dom, x0) < 0.0)) throw DomainError("tangent_bracket: x0 must be interior");
  const TangentBalls tb = tangent_balls(dom, p);
  const double s = prm.s;
  const double dxp = dist(x0, p);
  const double nd = dot(tb.nu, p - x0);
  const double dn = std::pow(dxp, prm.n);
  Bracket b;
  const double base_lo = 2.0 * tb.r_int * nd - dxp * dxp;
  if (base_lo > 0.0) {
    b.lower = prm.c / (std::pow(2.0, s) * std::pow(tb.r_int, s) * dn) * std::pow(base_lo, s);
  } else {
    b.vacuous_lower = true;
  }
  b.upper = prm.c / (std::pow(2.0, s) * std::pow(tb.r_ext, s) * dn) * std::pow(2.0 * tb.r_ext * nd + dxp * dxp, s);
  return b;
}

/// Psi(t) = P(x0, p + t nu) times the chosen weight, on a decreasing grid of t, and the
/// two-point Richardson limit from the two smallest t (first-order correction assumed).
/// Balls use the closed-form kernel; other domains use the walk estimate of the kernel
/// smoothed by a mollifier of sharpness ceil(4/t).
inline BoundaryLimitProfile boundary_profile(const FracParams& prm, const Domain& dom, const Vec& x0, const Vec& p,
                                             const std::vector<double>& t_grid, const LimitConfig& cfg = {}) {
  if (t_grid.size() < 2) throw DomainError("boundary_profile: need at least two t values");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw DomainError("boundary_profile: t values must be positive");
    if (i > 0 && !(t_grid[i] < t_grid[i - 1])) throw DomainError("boundary_profile: t grid must decrease");
  }
  if (!(signed_dist(dom, x0) < 0.0)) throw DomainError("boundary_profile: x0 must be interior");
  BoundaryLimitProfile prof;
  prof.p = p;
  prof.nu = normal(dom, p);
  prof.t_grid = t_grid;
  prof.bracket = tangent_bracket(prm, dom, x0, p);
  const auto ball = detail::single_ball(dom);
  prof.closed_form = ball.has_value() && !cfg.force_walks;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const Vec q = p + t * prof.nu;
    const double d = signed_dist(dom, q);
    if (!(d > 0.0)) throw DomainError("boundary_profile: t grid point lands inside the domain");
    const double w = std::pow(d, prm.s) * (cfg.norm == ProfileNorm::WeightedDist ? std::pow(norm(q), prm.n) : 1.0);
    if (prof.closed_form) {
      prof.values.push_back(poisson_ball(prm, ball->center, ball->radius, x0, q) * w);
      prof.errs.push_back(0.0);
    } else {
      const int k = static_cast<int>(std::ceil(4.0 / t));
      WosConfig wc = cfg.wos;
      wc.seed = cfg.wos.seed + i;
      const WosEstimate e = exit_density(prm, dom, x0, Mollifier{q, k}, wc);
      if (!e.valid) throw StatisticalError("boundary_profile: too many walks hit the jump cap");
      prof.values.push_back(e.mean * w);
      prof.errs.push_back(e.stderr * w);
    }
  }
  const std::size_t m = t_grid.size();
  const double t1 = t_grid[m - 2], t2 = t_grid[m - 1];
  prof.extrapolated_limit = detail::richardson(t1, prof.values[m - 2], t2, prof.values[m - 1]);
  prof.limit_err = std::hypot(t1 * prof.errs[m - 1], t2 * prof.errs[m - 2]) / (t1 - t2);
  if (cfg.norm == ProfileNorm::WeightedDist) {
    const double pn = std::pow(norm(p), prm.n);
    prof.bracket.lower *= pn;
    prof.bracket.upper *= pn;
  }
  prof.flagged = prof.limit_err > 0.05 * std::abs(prof.extrapolated_limit);
  return prof;
}

/// Integral over C dom of the Poisson-like weight c / (|y|^n d^s (2 + d)^s). The domain must
/// have inradius 1 about the origin; rays are split at the boundary, where the weight blows up
/// like d^{-s}.
inline QuadResult c_frak(const FracParams& prm, const Domain& dom, const ExteriorQuadScheme& sch = {}) {
  if (dim(dom) != prm.n) throw DomainError("c_frak: dimension mismatch");
  const double r = inradius_from_origin(dom);
  if (std::abs(r - 1.0) > 1e-9)
    throw DomainError("c_frak: the domain must have inradius 1 about the origin; rescale it first");
  const double q = 1.0 / (1.0 - prm.s);
  auto segs = [&](const Vec& dir) {
    std::vector<RaySegment> out;
    const auto inside = ray_intervals(dom, Vec(prm.n), dir);
    for (std::size_t i = 0; i < inside.size(); ++i) {
      const double a = inside[i].second;
      const double b = i + 1 < inside.size() ? inside[i + 1].first : INFINITY;
      SegmentEnds e;
      e.alpha = a;
      e.q_lo = q;
      e.gamma = 2.0 * prm.s;
      if (std::isfinite(b)) {
        e.beta = b;
        e.q_hi = q;
      }
      out.push_back({a, b, e});
    }
    return out;
  };
  // Close to a crossing, |y| - 1 style differences lose all digits, so the distance is taken
  // from the node's exact gap to the crossing, projected on the boundary normal there.
  auto eval = [&](const Vec& y, const RadialNode& nd) {
    const double rho = norm(y);
    const Vec dir = y * (1.0 / rho);
    double gap = nd.gap_lo;
    double sign = 1.0;
    if (std::isfinite(nd.gap_hi) && nd.gap_hi < gap) gap = nd.gap_hi, sign = -1.0;
    double d;
    if (gap < 1e-4 * rho) {
      const Vec p = y - sign * gap * dir;
      d = gap * std::abs(dot(normal(dom, p), dir));
    } else {
      d = signed_dist(dom, y);
    }
    if (!(d > 0.0)) return 0.0;
    return f_omega(prm, y, d);
  };
  return polar_integrate(Vec(prm.n), sch, prm.n, segs, eval);
}

struct DetectPoint {
  Vec p;
  double limit = 0.0;
  double err = 0.0;
  bool matches = false;
};

struct BallVerdict {
  bool consistent = false;
  double target = 0.0;  // c / 2^s
  double tolerance = 0.0;
  std::vector<DetectPoint> points;
  double mu_excess = 0.0, mu_excess_err = 0.0;  // mu_1(dom \ B_1)
  std::string caveat =
      "a boundary limit that is the same at every point does not by itself force a ball: "
      "B_R(x0) with |x0| = R - 1 has a constant limit c (2R-1)^s / (2R)^s";
};

struct DetectConfig {
  LimitConfig limit;
  std::vector<double> t_grid = {0.1, 0.05, 0.025};
  int extra_points = 8;
  double rel_tol = 0.01;
  double mass_tol = 1e-6;
  ExteriorQuadScheme quad;
};

/// Boundary limits of P(0, q)|q|^n dist^s at a point of the boundary touching B_1 and at
/// extra_points further boundary points, compared with c/2^s; plus mu_1(dom \ B_1).
inline BallVerdict ball_detect(const FracParams& prm, const Domain& dom, const DetectConfig& cfg = {}) {
  const int n = prm.n;
  const double r = inradius_from_origin(dom);
  if (std::abs(r - 1.0) > 1e-9) throw DomainError("ball_detect: the domain must have inradius 1; rescale it first");
  const Vec origin(n);
  auto first_exit = [&](const Vec& dir) {
    const auto iv = ray_intervals(dom, origin, dir);
    return iv.empty() ? 0.0 : iv.front().second;
  };
  std::vector<Vec> dirs;
  if (n == 1) {
    dirs = {Vec{1.0}, Vec{-1.0}};
  } else if (n == 2) {
    for (int i = 0; i < 720; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 720.0;
      dirs.push_back(Vec{std::cos(a), std::sin(a)});
    }
  } else {
    for (const auto& d : sphere_rule(n, 48)) dirs.push_back(d.dir);
  }
  std::size_t touch = dirs.size();
  double best = INFINITY;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double t = first_exit(dirs[i]);
    if (t < best) best = t, touch = i;
  }
  if (touch == dirs.size() || std::abs(best - 1.0) > 1e-6)
    throw NumericalError("ball_detect: no boundary point on the unit sphere was found", best - 1.0);

  BallVerdict v;
  v.target = prm.c / std::pow(2.0, prm.s);
  std::vector<Vec> pts{best * dirs[touch]};
  const int extra = std::max(0, cfg.extra_points);
  for (int j = 1; j <= extra && n > 1; ++j) {
    const Vec& d = dirs[(touch + static_cast<std::size_t>(j) * dirs.size() / static_cast<std::size_t>(extra + 1)) % dirs.size()];
    pts.push_back(first_exit(d) * d);
  }
  if (n == 1) pts.push_back(first_exit(dirs[1 - touch]) * dirs[1 - touch]);
  LimitConfig lc = cfg.limit;
  lc.norm = ProfileNorm::WeightedDist;
  bool all = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    lc.wos.seed = cfg.limit.wos.seed + 1000 * i;
    const auto prof = boundary_profile(prm, dom, origin, pts[i], cfg.t_grid, lc);
    DetectPoint dp{pts[i], prof.extrapolated_limit, prof.limit_err, false};
    dp.matches = std::abs(dp.limit - v.target) <= 3.0 * dp.err + cfg.rel_tol * v.target;
    all = all && dp.matches;
    v.points.push_back(dp);
  }
  const QuadResult ex = mu_mass({prm, 1.0}, Region::domain_minus_ball(dom), cfg.quad);
  v.mu_excess = ex.value;
  v.mu_excess_err = ex.err;
  v.tolerance = cfg.rel_tol * v.target;
  v.consistent = all && ex.value <= cfg.mass_tol + ex.err;
  return v;
}

}  // namespace fracmvp
