#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "vec.hpp"

namespace fracmvp {

struct Domain;

struct Ball {
  Vec center;
  double radius = 1.0;
};

struct BallUnion {
  std::vector<Ball> parts;
};

/// B_R(x0) with x0 = (R - 1) e_1, so that dist(0, boundary) = 1.
struct ShiftedBall {
  double R = 2.0;
  int dim = 2;
};

/// Smoothed (B_r u {|x_n| >= 1.5 delta}) n B_{1.5/delta}: the slit |x_n| < 1.5 delta is cut
/// out of the big ball except inside B_r, and the four edges of the meridian profile are
/// rounded by circular fillets of radius fillet * delta.
struct SlabComplement {
  double r = 1.0;
  double delta = 0.2;
  int dim = 2;
  double fillet = 0.25;
};

/// User-supplied exact signed distance function.
struct Implicit {
  std::function<double(const Vec&)> phi;
  double bounding_radius = 1.0;
  int dim = 2;
};

/// lambda * base.
struct Dilated {
  std::shared_ptr<const Domain> base;
  double lambda = 1.0;
};

struct Domain {
  std::variant<Ball, BallUnion, ShiftedBall, SlabComplement, Implicit, Dilated> v;
};

inline Domain make_ball(Vec center, double radius) { return {Ball{std::move(center), radius}}; }
inline Domain make_union(std::vector<Ball> parts) { return {BallUnion{std::move(parts)}}; }
inline Domain make_shifted_ball(double R, int dim = 2) { return {ShiftedBall{R, dim}}; }
inline Domain make_slab(double r, double delta, int dim = 2, double fillet = 0.25) {
  return {SlabComplement{r, delta, dim, fillet}};
}
inline Domain dilate(const Domain& d, double lambda) {
  return {Dilated{std::make_shared<const Domain>(d), lambda}};
}

/// Ball part of a ShiftedBall.
inline Ball as_ball(const ShiftedBall& b) { return {Vec::axis(b.dim, 0, b.R - 1.0), b.R}; }

// ---------------------------------------------------------------------------
// Smoothed slab complement: meridian profile in (rho, z) with rho = |x'|, z = |x_n|.

namespace detail {

struct P2 {
  double x, y;
};
inline double len(P2 a) { return std::hypot(a.x, a.y); }
inline P2 sub(P2 a, P2 b) { return {a.x - b.x, a.y - b.y}; }

struct Arc {
  P2 c;
  double rad, a0, sweep;  // ccw from angle a0 through `sweep`
  double dist(P2 p) const {
    const P2 d = sub(p, c);
    double ang = std::atan2(d.y, d.x) - a0;
    ang -= 2.0 * std::numbers::pi * std::floor(ang / (2.0 * std::numbers::pi));
    if (ang <= sweep) return std::abs(len(d) - rad);
    const P2 e0{c.x + rad * std::cos(a0), c.y + rad * std::sin(a0)};
    const P2 e1{c.x + rad * std::cos(a0 + sweep), c.y + rad * std::sin(a0 + sweep)};
    return std::min(len(sub(p, e0)), len(sub(p, e1)));
  }
};

struct SlabProfile {
  double r, h, Ro, a;
  P2 C1, C2;
  double rho1, rho2;
  Arc outer, fil2, fil1, inner;

  explicit SlabProfile(const SlabComplement& sc) {
    r = sc.r;
    h = 1.5 * sc.delta;
    Ro = 1.5 / sc.delta;
    a = sc.fillet * sc.delta;
    if (!(sc.delta > 0.0 && sc.delta < 0.5) || !(sc.r > 0.0) || !(sc.fillet > 0.0))
      throw DomainError("slab_complement: need delta in (0,0.5), r > 0, fillet > 0");
    if (!(h + a < r)) throw DomainError("slab_complement: slit too wide for the inner ball (need 1.5 delta + fillet < r)");
    if (!(r + a < Ro - a)) throw DomainError("slab_complement: inner ball does not fit inside the outer ball");
    rho1 = std::sqrt((r + a) * (r + a) - (h - a) * (h - a));
    rho2 = std::sqrt((Ro - a) * (Ro - a) - (h + a) * (h + a));
    C1 = {rho1, h - a};
    C2 = {rho2, h + a};
    const double al1 = std::atan2(C1.y, C1.x);
    const double al2 = std::atan2(C2.y, C2.x);
    outer = {{0.0, 0.0}, Ro, al2, 0.5 * std::numbers::pi - al2};
    fil2 = {C2, a, -0.5 * std::numbers::pi, al2 + 0.5 * std::numbers::pi};
    fil1 = {C1, a, 0.5 * std::numbers::pi, 0.5 * std::numbers::pi + al1};
    inner = {{0.0, 0.0}, r, 0.0, al1};
  }

  bool inside(P2 p) const {
    const double R = len(p);
    const bool raw = R < r || (p.y > h && R < Ro);
    const bool pocket1 = p.y <= h && R >= r && p.x <= rho1 && len(sub(p, C1)) >= a &&
                         C1.x * p.y - C1.y * p.x >= 0.0;
    const bool pocket2 = p.y >= h && R <= Ro && p.x >= rho2 && len(sub(p, C2)) >= a &&
                         C2.x * p.y - C2.y * p.x <= 0.0;
    return (raw || pocket1) && !pocket2;
  }

  double boundary_dist(P2 p) const {
    double d = std::min({outer.dist(p), fil2.dist(p), fil1.dist(p), inner.dist(p)});
    const double xs = std::clamp(p.x, rho1, rho2);
    return std::min(d, std::hypot(p.x - xs, p.y - h));
  }
};

inline P2 meridian(const Vec& x) {
  const int n = x.dim();
  double r2 = 0.0;
  for (int i = 0; i + 1 < n; ++i) r2 += x[i] * x[i];
  return {std::sqrt(r2), std::abs(x[n - 1])};
}

// Distance from an interior point x to the boundary of a union of balls.
inline double union_depth(const BallUnion& u, const Vec& x) {
  const int n = x.dim();
  const double scale = 1.0 + norm(x);
  auto covered_except = [&](const Vec& pt, std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < u.parts.size(); ++k) {
      if (k == i || k == j) continue;
      if (dist(pt, u.parts[k].center) < u.parts[k].radius - 1e-13 * scale) return true;
    }
    return false;
  };
  double best = INFINITY;
  if (n == 1) {
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      for (double sg : {-1.0, 1.0}) {
        Vec e{u.parts[i].center[0] + sg * u.parts[i].radius};
        if (!covered_except(e, i, i)) best = std::min(best, std::abs(e[0] - x[0]));
      }
    }
    return best;
  }
  for (std::size_t i = 0; i < u.parts.size(); ++i) {
    const Ball& bi = u.parts[i];
    Vec d = x - bi.center;
    const double l = norm(d);
    const Vec dir = l > 0.0 ? d / l : Vec::axis(n, 0);
    const Vec proj = bi.center + bi.radius * dir;
    if (!covered_except(proj, i, i)) {
      best = std::min(best, std::abs(bi.radius - l));
      continue;
    }
    for (std::size_t j = 0; j < u.parts.size(); ++j) {
      if (j == i) continue;
      const Ball& bj = u.parts[j];
      const Vec cc = bj.center - bi.center;
      const double D = norm(cc);
      if (!(D > 0.0) || D >= bi.radius + bj.radius || D <= std::abs(bi.radius - bj.radius)) continue;
      const Vec e = cc / D;
      const double t = (D * D + bi.radius * bi.radius - bj.radius * bj.radius) / (2.0 * D);
      const double ac = std::sqrt(std::max(0.0, bi.radius * bi.radius - t * t));
      const Vec m = bi.center + t * e;
      const Vec xm = x - m;
      const double al = dot(xm, e);
      Vec w = xm - al * e;
      const double lw = norm(w);
      std::vector<Vec> cands;
      if (n == 2) {
        const Vec perp{-e[1], e[0]};
        cands = {m + ac * perp, m - ac * perp};
      } else if (lw > 1e-14 * scale) {
        cands = {m + ac * (w / lw)};
      }
      bool found = false;
      for (const Vec& c : cands) {
        if (!covered_except(c, i, j)) {
          best = std::min(best, dist(x, c));
          found = true;
        }
      }
      if (!found && n >= 3) {
        // nearest circle point is covered by a third ball: scan the circle
        Vec u1 = lw > 1e-14 * scale ? w / lw : Vec(n);
        if (!(lw > 1e-14 * scale)) {
          for (int k = 0; k < n; ++k) {
            Vec t2 = Vec::axis(n, k);
            t2 -= dot(t2, e) * e;
            if (norm(t2) > 0.5) {
              u1 = normalized(t2);
              break;
            }
          }
        }
        Vec u2 = Vec::axis(n, 0);
        for (int k = 0; k < n; ++k) {
          Vec t2 = Vec::axis(n, k);
          t2 -= dot(t2, e) * e + dot(t2, u1) * u1;
          if (norm(t2) > 0.5) {
            u2 = normalized(t2);
            break;
          }
        }
        for (int k = 0; k < 2048; ++k) {
          const double ang = 2.0 * std::numbers::pi * k / 2048.0;
          const Vec c = m + ac * (std::cos(ang) * u1 + std::sin(ang) * u2);
          if (!covered_except(c, i, j)) best = std::min(best, dist(x, c));
        }
      }
    }
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int dim(const Domain& d) {
  return std::visit(
      [](const auto& g) -> int {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Ball>) return g.center.dim();
        else if constexpr (std::is_same_v<T, BallUnion>) return g.parts.empty() ? 0 : g.parts.front().center.dim();
        else if constexpr (std::is_same_v<T, Dilated>) return dim(*g.base);
        else return g.dim;
      },
      d.v);
}

/// Radius of a ball about the origin containing the domain.
inline double bounding_radius(const Domain& d) {
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Ball>) return norm(g.center) + g.radius;
        else if constexpr (std::is_same_v<T, BallUnion>) {
          double m = 0.0;
          for (const auto& b : g.parts) m = std::max(m, norm(b.center) + b.radius);
          return m;
        } else if constexpr (std::is_same_v<T, ShiftedBall>) return 2.0 * g.R - 1.0;
        else if constexpr (std::is_same_v<T, SlabComplement>) return 1.5 / g.delta;
        else if constexpr (std::is_same_v<T, Implicit>) return g.bounding_radius;
        else return g.lambda * bounding_radius(*g.base);
      },
      d.v);
}

/// Negative inside, positive outside; |value| is the distance to the boundary.
inline double signed_dist(const Domain& d, const Vec& x) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return dist(x, g.center) - g.radius;
        } else if constexpr (std::is_same_v<T, BallUnion>) {
          double m = INFINITY;
          for (const auto& b : g.parts) m = std::min(m, dist(x, b.center) - b.radius);
          if (m >= 0.0) return m;
          return -detail::union_depth(g, x);
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          const Ball b = as_ball(g);
          return dist(x, b.center) - b.radius;
        } else if constexpr (std::is_same_v<T, SlabComplement>) {
          const detail::SlabProfile prof(g);
          const detail::P2 p = detail::meridian(x);
          const double bd = prof.boundary_dist(p);
          return prof.inside(p) ? -bd : bd;
        } else if constexpr (std::is_same_v<T, Implicit>) {
          return g.phi(x);
        } else {
          return g.lambda * signed_dist(*g.base, x / g.lambda);
        }
      },
      d.v);
}

inline bool contains(const Domain& d, const Vec& x) { return signed_dist(d, x) < 0.0; }

/// r = dist(0, boundary); the origin must be interior.
inline double inradius_from_origin(const Domain& d) {
  const double sd = signed_dist(d, Vec(dim(d)));
  if (!(sd < 0.0)) throw DomainError("the origin is not an interior point of the domain");
  return -sd;
}

/// Outward unit normal at (or near) a boundary point.
inline Vec normal(const Domain& d, const Vec& p) {
  if (const auto* b = std::get_if<Ball>(&d.v)) return normalized(p - b->center);
  if (const auto* sb = std::get_if<ShiftedBall>(&d.v)) return normalized(p - as_ball(*sb).center);
  if (const auto* u = std::get_if<BallUnion>(&d.v)) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t i = 0; i < u->parts.size(); ++i) {
      const double e = std::abs(dist(p, u->parts[i].center) - u->parts[i].radius);
      if (e < bd) bd = e, best = i;
    }
    return normalized(p - u->parts[best].center);
  }
  const int n = p.dim();
  const double h = 1e-6 * bounding_radius(d);
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    Vec a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (signed_dist(d, a) - signed_dist(d, b)) / (2.0 * h);
  }
  return normalized(g);
}

/// Parameter intervals [t0, t1] (t >= 0) on which o + t dir lies in the domain; sorted, disjoint.
/// dir must be a unit vector.
inline std::vector<std::pair<double, double>> ray_intervals(const Domain& d, const Vec& o, const Vec& dir);

namespace detail {

inline std::optional<std::pair<double, double>> ray_ball(const Ball& b, const Vec& o, const Vec& dir) {
  const Vec oc = o - b.center;
  const double bq = dot(oc, dir);
  const double cq = (norm(oc) - b.radius) * (norm(oc) + b.radius);
  const double disc = bq * bq - cq;
  if (!(disc > 0.0)) return std::nullopt;
  const double sq = std::sqrt(disc);
  // stable roots
  const double q = bq >= 0.0 ? -(bq + sq) : -(bq - sq);
  double t0 = q, t1 = q != 0.0 ? cq / q : 0.0;
  if (t0 > t1) std::swap(t0, t1);
  if (t1 <= 0.0) return std::nullopt;
  return std::make_pair(std::max(t0, 0.0), t1);
}

inline std::vector<std::pair<double, double>> merge(std::vector<std::pair<double, double>> iv) {
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& p : iv) {
    if (!out.empty() && p.first <= out.back().second) {
      out.back().second = std::max(out.back().second, p.second);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

// Sphere tracing with an exact signed distance; crossings refined by bisection.
inline std::vector<std::pair<double, double>> trace(const Domain& d, const Vec& o, const Vec& dir) {
  const double R = bounding_radius(d);
  const double tmax = norm(o) + R * 1.01 + 1e-9;
  const double floor_step = 1e-7 * R;
  auto sd = [&](double t) { return signed_dist(d, o + t * dir); };
  auto refine = [&](double a, double b) {
    const bool ina = sd(a) < 0.0;
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + b); ++it) {
      const double m = 0.5 * (a + b);
      if ((sd(m) < 0.0) == ina) a = m;
      else b = m;
    }
    return 0.5 * (a + b);
  };
  std::vector<std::pair<double, double>> out;
  double t = 0.0;
  double v = sd(t);
  bool in = v < 0.0;
  double start = 0.0;
  while (t < tmax) {
    const double step = std::max(std::abs(v), floor_step);
    const double tn = std::min(t + step, tmax);
    const double vn = sd(tn);
    const bool inn = vn < 0.0;
    if (inn != in) {
      const double tc = refine(t, tn);
      if (in) out.emplace_back(start, tc);
      else start = tc;
      in = inn;
    }
    t = tn;
    v = vn;
    if (tn >= tmax) break;
  }
  if (in) out.emplace_back(start, tmax);
  return out;
}

}  // namespace detail

inline std::vector<std::pair<double, double>> ray_intervals(const Domain& d, const Vec& o, const Vec& dir) {
  if (const auto* b = std::get_if<Ball>(&d.v)) {
    auto r = detail::ray_ball(*b, o, dir);
    if (r) return {*r};
    return {};
  }
  if (const auto* sb = std::get_if<ShiftedBall>(&d.v)) {
    auto r = detail::ray_ball(as_ball(*sb), o, dir);
    if (r) return {*r};
    return {};
  }
  if (const auto* u = std::get_if<BallUnion>(&d.v)) {
    std::vector<std::pair<double, double>> iv;
    for (const auto& b : u->parts) {
      if (auto r = detail::ray_ball(b, o, dir)) iv.push_back(*r);
    }
    return detail::merge(std::move(iv));
  }
  if (const auto* dl = std::get_if<Dilated>(&d.v)) {
    auto iv = ray_intervals(*dl->base, o / dl->lambda, dir);
    for (auto& p : iv) p.first *= dl->lambda, p.second *= dl->lambda;
    return iv;
  }
  return detail::trace(d, o, dir);
}

// ---------------------------------------------------------------------------

struct TangentBalls {
  Vec p;
  Vec nu;
  double r_int = 0.0;
  double r_ext = 0.0;
  Vec x_int;
  Vec x_ext;
};

/// Largest interior and exterior balls tangent at the boundary point p, found by bisection on
/// the nested family B_rho(p -+ rho nu). The exterior radius is capped at 10 times the
/// bounding radius.
inline TangentBalls tangent_balls(const Domain& d, const Vec& p) {
  const double R = bounding_radius(d);
  const double tol = 1e-8 * R;
  if (std::abs(signed_dist(d, p)) > tol) throw DomainError("tangent_balls: point is not on the boundary");
  const Vec nu = normal(d, p);
  const double slack = 1e-9 * R;
  auto int_ok = [&](double rho) { return signed_dist(d, p - rho * nu) <= -rho + slack; };
  auto ext_ok = [&](double rho) { return signed_dist(d, p + rho * nu) >= rho - slack; };
  const double probe = 1e-5 * R;
  if (!int_ok(probe) || !ext_ok(probe)) throw DomainError("tangent_balls: boundary is not smooth at this point");
  auto largest = [&](auto ok, double hi) {
    if (ok(hi)) return hi;
    double lo = probe;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * R; ++it) {
      const double m = 0.5 * (lo + hi);
      if (ok(m)) lo = m;
      else hi = m;
    }
    return lo;
  };
  TangentBalls tb;
  tb.p = p;
  tb.nu = nu;
  tb.r_int = largest(int_ok, 2.0 * R);
  tb.r_ext = largest(ext_ok, 10.0 * R);
  tb.x_int = p - tb.r_int * nu;
  tb.x_ext = p + tb.r_ext * nu;
  return tb;
}

}  // namespace fracmvp
