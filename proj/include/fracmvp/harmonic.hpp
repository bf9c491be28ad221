#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
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

using Field = std::function<double(const Vec&)>;

namespace detail {

// Local rule sizes (radial, azimuthal) for integrating one bump against a smooth kernel.
inline std::pair<int, int> bump_rule_size(int n, bool coarse) {
  if (n == 1) return coarse ? std::pair{32, 2} : std::pair{64, 2};
  if (n == 2) return coarse ? std::pair{16, 24} : std::pair{32, 48};
  return coarse ? std::pair{12, 12} : std::pair{24, 24};
}

// Integral of a bump term against kernel(y), fine value and |fine - coarse|.
template <class K>
QuadResult bump_integral(const DataTerm& t, K&& kernel) {
  const int n = t.center.dim();
  QuadResult q;
  double vals[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    const auto [mr, na] = bump_rule_size(n, lvl == 1);
    const PointRule pr = ball_rule(t.center, t.radius, mr, na);
    double acc = 0.0;
    for (std::size_t j = 0; j < pr.y.size(); ++j) {
      const double g = t(pr.y[j]);
      if (g != 0.0) acc += pr.w[j] * g * kernel(pr.y[j]);
    }
    vals[lvl] = acc;
  }
  q.value = vals[0];
  q.err = std::abs(vals[0] - vals[1]);
  return q;
}

// True if the bump can be integrated with the local rule: its support stays at least half a
// radius away from the sphere |y - center| = R where the kernel is singular.
inline bool bump_clear_of_sphere(const DataTerm& t, const Vec& center, double R) {
  return t.kind == DataTerm::Kind::Bump && dist(t.center, center) - t.radius - R >= 0.5 * t.radius;
}

// Bumps near the sphere |y| = R: polar rule about the origin over the rays that meet the
// support, graded toward |y| = R where (|y|^2 - R^2)^{-s} blows up. gap = |y| - R.
struct SectorNode {
  Vec y;
  double w, gap;
};

inline std::vector<SectorNode> bump_sector_rule(const DataTerm& t, double R, double s,
                                                const ExteriorQuadScheme& sch) {
  const int n = t.center.dim();
  const double rc = norm(t.center);
  std::vector<Direction> dirs;
  if (n == 2 && rc > t.radius) {
    const double th = std::atan2(t.center[1], t.center[0]);
    const double hw = std::asin(t.radius / rc);
    const int panels = std::max(2, sch.angular_nodes / 32);
    const GaussRule& gl = gauss_legendre(16);
    const double h = 2.0 * hw / panels;
    for (int k = 0; k < panels; ++k) {
      for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const double a = th - hw + h * (k + 0.5 * (1.0 + gl.x[i]));
        dirs.push_back({Vec{std::cos(a), std::sin(a)}, 0.5 * h * gl.w[i]});
      }
    }
  } else {
    dirs = sphere_rule(n, sch.angular_nodes, sch.seed);
  }
  const RadialRule rr = sch.radial();
  SegmentEnds e;
  e.alpha = R;
  e.q_lo = 1.0 / (1.0 - s);
  std::vector<RadialNode> nodes;
  std::vector<SectorNode> out;
  for (const Direction& d : dirs) {
    // chord of the support ball along the ray
    const double b = dot(d.dir, t.center);
    const double disc = b * b - (rc * rc - t.radius * t.radius);
    if (!(disc > 0.0)) continue;
    const double lo = std::max(R, b - std::sqrt(disc));
    const double hi = b + std::sqrt(disc);
    if (!(hi > lo)) continue;
    nodes.clear();
    radial_segment(rr, lo, hi, e, nodes);
    for (const RadialNode& nd : nodes) out.push_back({nd.rho * d.dir, d.w * nd.w * std::pow(nd.rho, n - 1), nd.gap_lo});
  }
  return out;
}

}  // namespace detail

/// Poisson extension to B_R(0) of the data g. Constant terms are reproduced exactly (the
/// kernel has unit mass). Bumps clear of the sphere use a compact rule on their support; since
/// P(x, y) = c (R^2 - |x|^2)^s (|y|^2 - R^2)^{-s} |x - y|^{-n}, the y-only factor is folded into
/// the node weights once. Remaining terms go through the polar exterior rule at every x.
class PoissonExtension {
 public:
  PoissonExtension(const FracParams& p, double R, ExteriorData g, ExteriorQuadScheme sch = {})
      : p_(p), R_(R), sch_(sch) {
    if (!(R > 0.0)) throw DomainError("poisson_extend: radius must be positive");
    const Vec origin(p.n);
    for (const auto& t : g.terms) {
      if (t.center.dim() != 0 && t.center.dim() != p.n) throw DomainError("poisson_extend: dimension mismatch");
      if (t.kind == DataTerm::Kind::Constant) {
        constant_ += t.height;
      } else if (detail::bump_clear_of_sphere(t, origin, R)) {
        add_nodes(t, false, fine_);
        add_nodes(t, true, coarse_);
      } else if (t.kind == DataTerm::Kind::Bump) {
        add_sector_nodes(t, sch_, fine_);
        add_sector_nodes(t, sch_.coarser(), coarse_);
      } else {
        rest_.terms.push_back(t);
        // jumps of sharp concentric shells become segment breaks
        if (t.kind == DataTerm::Kind::Shell && t.width == 0.0 && norm(t.center) == 0.0) {
          for (double b : {t.radius, t.outer})
            if (b > R && std::isfinite(b)) breaks_.push_back(b);
        }
      }
    }
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
  }

  QuadResult eval_q(const Vec& x) const {
    const int n = p_.n;
    if (x.dim() != n) throw DomainError("poisson_extend: dimension mismatch");
    const double rx = norm(x);
    if (!(rx < R_)) throw DomainError("poisson_extend: x must lie inside the ball");
    const double lx = std::log(p_.c) + p_.s * (std::log(R_ - rx) + std::log(R_ + rx));
    const double pref = std::exp(lx);
    QuadResult out;
    out.value = constant_;
    const double f = sum(fine_, x) * pref;
    out.value += f;
    if (!coarse_.a.empty()) out.err += std::abs(f - sum(coarse_, x) * pref);
    if (!rest_.terms.empty()) {
      auto segs = [&](const Vec&) {
        SegmentEnds e;
        e.alpha = R_;
        e.q_lo = 1.0 / (1.0 - p_.s);
        e.gamma = 2.0 * p_.s;
        std::vector<RaySegment> out;
        double a = R_;
        for (double b : breaks_) {
          out.push_back({a, b, e});
          a = b;
        }
        out.push_back({a, INFINITY, e});
        return out;
      };
      auto ev = [&](const Vec& y, const RadialNode& nd) {
        const double gy = rest_(y);
        if (gy == 0.0) return 0.0;
        return gy * std::exp(lx - p_.s * (std::log(nd.gap_lo) + std::log(nd.rho + R_)) - n * std::log(dist(x, y)));
      };
      const QuadResult q = polar_integrate(Vec(n), sch_, n, segs, ev);
      out.value += q.value;
      out.err += q.err;
    }
    return out;
  }
  double operator()(const Vec& x) const { return eval_q(x).value; }

 private:
  struct Nodes {
    std::vector<double> xyz;
    std::vector<double> a;  // w_j g(y_j) (|y_j|^2 - R^2)^{-s}
  };

  void add_nodes(const DataTerm& t, bool coarse, Nodes& out) const {
    const auto [mr, na] = detail::bump_rule_size(p_.n, coarse);
    const PointRule pr = ball_rule(t.center, t.radius, mr, na);
    for (std::size_t j = 0; j < pr.y.size(); ++j) {
      const double g = t(pr.y[j]);
      if (g == 0.0) continue;
      const double ry = norm(pr.y[j]);
      for (int i = 0; i < p_.n; ++i) out.xyz.push_back(pr.y[j][i]);
      out.a.push_back(pr.w[j] * g * std::exp(-p_.s * (std::log(ry - R_) + std::log(ry + R_))));
    }
  }

  void add_sector_nodes(const DataTerm& t, const ExteriorQuadScheme& sch, Nodes& out) const {
    for (const auto& nd : detail::bump_sector_rule(t, R_, p_.s, sch)) {
      const double g = t(nd.y);
      if (g == 0.0) continue;
      for (int i = 0; i < p_.n; ++i) out.xyz.push_back(nd.y[i]);
      out.a.push_back(nd.w * g * std::exp(-p_.s * (std::log(nd.gap) + std::log(norm(nd.y) + R_))));
    }
  }

  // sum_j a_j |x - y_j|^{-n}
  double sum(const Nodes& nd, const Vec& x) const {
    const int n = p_.n;
    double acc = 0.0;
    const double* X = nd.xyz.data();
    for (std::size_t j = 0; j < nd.a.size(); ++j, X += n) {
      double d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double t = X[i] - x[i];
        d2 += t * t;
      }
      double k;
      if (n == 2) k = 1.0 / d2;
      else if (n == 1) k = 1.0 / std::sqrt(d2);
      else if (n == 3) k = 1.0 / (d2 * std::sqrt(d2));
      else k = std::pow(d2, -0.5 * n);
      acc += nd.a[j] * k;
    }
    return acc;
  }

  FracParams p_;
  double R_;
  ExteriorQuadScheme sch_;
  double constant_ = 0.0;
  Nodes fine_, coarse_;
  ExteriorData rest_;
  std::vector<double> breaks_;
};

/// Poisson extension to B_R(0) of g evaluated at x, with quadrature error estimate.
inline QuadResult poisson_extend_q(const FracParams& p, double R, const ExteriorData& g, const Vec& x,
                                   const ExteriorQuadScheme& sch = {}) {
  return PoissonExtension(p, R, g, sch).eval_q(x);
}

inline double poisson_extend(const FracParams& p, double R, const ExteriorData& g, const Vec& x,
                             const ExteriorQuadScheme& sch = {}) {
  return poisson_extend_q(p, R, g, x, sch).value;
}

/// u = Poisson extension of g inside B_R(0), u = g outside.
inline Field poisson_field(const FracParams& p, double R, const ExteriorData& g, ExteriorQuadScheme sch = {}) {
  auto ext = std::make_shared<const PoissonExtension>(p, R, g, sch);
  return [ext, R, g](const Vec& x) {
    if (norm(x) < R) return (*ext)(x);
    return g(x);
  };
}

/// Integral of the data g against mu_r over the complement of dom (r <= inradius).
inline QuadResult integrate_data_mu(const MuMeasure& m, const Domain& dom, const ExteriorData& g,
                                    const ExteriorQuadScheme& sch = {}) {
  const FracParams& p = m.params;
  const Vec origin(p.n);
  QuadResult out;
  ExteriorData rest;
  for (const auto& t : g.terms) {
    const bool outside = t.kind == DataTerm::Kind::Bump && signed_dist(dom, t.center) > t.radius;
    if (outside && detail::bump_clear_of_sphere(t, origin, m.r)) {
      const QuadResult q = detail::bump_integral(t, [&](const Vec& y) { return mu_density(m, y); });
      out.value += q.value;
      out.err += q.err;
    } else if (outside) {
      // mu_r density with the (|y|^2 - r^2)^{-s} factor taken from the node gap
      double v[2];
      for (int lvl = 0; lvl < 2; ++lvl) {
        double acc = 0.0;
        for (const auto& nd : detail::bump_sector_rule(t, m.r, p.s, lvl == 0 ? sch : sch.coarser())) {
          const double g = t(nd.y);
          if (g == 0.0) continue;
          const double ry = norm(nd.y);
          acc += nd.w * g *
                 std::exp(std::log(p.c) + 2.0 * p.s * std::log(m.r) -
                          p.s * (std::log(nd.gap) + std::log(ry + m.r)) - p.n * std::log(ry));
        }
        v[lvl] = acc;
      }
      out.value += v[0];
      out.err += std::abs(v[0] - v[1]);
    } else {
      rest.terms.push_back(t);
    }
  }
  if (!rest.terms.empty()) {
    const QuadResult q = integrate_mu(m, Region::complement_of(dom), [&](const Vec& y) { return rest(y); }, sch);
    out.value += q.value;
    out.err += q.err;
  }
  return out;
}

struct MvpCheck {
  double residual = 0.0;  // |u(0) - integral| + quadrature error
  double u0 = 0.0;
  double integral = 0.0;
  double quad_err = 0.0;
};

/// Checks u(0) = int_{C B_r} u dmu_r for u s-harmonic in `harm`. Rays are split where they
/// leave `harm`; the inside pieces are graded toward that crossing, where u is only
/// Hoelder continuous. r may equal the inradius of `harm`. If the exterior data g of u is
/// supplied, the part outside `harm` is integrated from g directly (compact rules for bumps);
/// otherwise u itself is integrated there.
inline MvpCheck verify_mvp(const FracParams& p, const Domain& harm, const Field& u, double r,
                           const ExteriorQuadScheme& sch = {}, const ExteriorData* exterior = nullptr) {
  if (dim(harm) != p.n) throw DomainError("verify_mvp: dimension mismatch");
  const double inr = inradius_from_origin(harm);
  if (!(r > 0.0)) throw DomainError("verify_mvp: r must be positive");
  if (r > inr * (1.0 + 1e-12)) throw DomainError("verify_mvp: r exceeds the inradius of the harmonicity domain");
  const double lc = std::log(p.c) + 2.0 * p.s * std::log(r);
  SegmentEnds base;
  base.alpha = r;
  base.q_lo = 1.0 / (1.0 - p.s);
  base.gamma = 2.0 * p.s;
  auto segs = [&](const Vec& dir) {
    std::vector<RaySegment> out;
    double cur = r;
    for (auto [a, b] : ray_intervals(harm, Vec(p.n), dir)) {
      if (b - r <= 1e-13 * r) continue;
      a = std::max(a, r);
      if (a > cur && !exterior) out.push_back({cur, a, base});
      SegmentEnds in = base;
      in.beta = b;
      in.q_hi = 1.0 / p.s;
      out.push_back({a, b, in});
      cur = b;
    }
    if (!exterior) out.push_back({cur, INFINITY, base});
    return out;
  };
  auto eval = [&](const Vec& y, const RadialNode& nd) {
    const double uy = u(y);
    if (uy == 0.0) return 0.0;
    return uy * std::exp(lc - p.s * (std::log(nd.gap_lo) + std::log(nd.rho + r)) - p.n * std::log(nd.rho));
  };
  QuadResult q = polar_integrate(Vec(p.n), sch, p.n, segs, eval);
  if (exterior) {
    const QuadResult qe = integrate_data_mu({p, r}, harm, *exterior, sch);
    q.value += qe.value;
    q.err += qe.err;
  }
  MvpCheck c;
  c.u0 = u(Vec(p.n));
  c.integral = q.value;
  c.quad_err = q.err;
  c.residual = std::abs(c.u0 - q.value) + q.err;
  return c;
}

/// u_{k,p}(x) = int phi_{k,p}(y) P_varpi(x, y) dy by walk-on-spheres.
inline WosEstimate mollified_poisson(const FracParams& p, const Domain& varpi, const Mollifier& moll, const Vec& x,
                                     const WosConfig& cfg) {
  require_support_outside(varpi, moll.term(), "mollified_poisson");
  return exit_density(p, varpi, x, moll, cfg);
}

/// |int_{C dom} phi_{k,p}(y) / ((|y|^2 - r^2)^s |y|^n) dy - 1/((|p|^2 - r^2)^s |p|^n)|, r the inradius.
inline double averaged_identity_check(const FracParams& p, const Domain& dom, const Mollifier& moll,
                                      const ExteriorQuadScheme& sch = {}) {
  const double r = inradius_from_origin(dom);
  const double rp = norm(moll.p);
  if (!(rp > r)) throw DomainError("averaged_identity_check: need |p| > r");
  if (!(signed_dist(dom, moll.p) > 0.0)) throw DomainError("averaged_identity_check: p must lie outside the domain");
  const MuMeasure m{p, r};
  const double scale = p.c * std::pow(r, 2.0 * p.s);
  const QuadResult q = integrate_data_mu(m, dom, moll.data(), sch);
  const double target = std::exp(-p.s * (std::log(rp - r) + std::log(rp + r)) - p.n * std::log(rp));
  return std::abs(q.value / scale - target);
}

}  // namespace fracmvp
