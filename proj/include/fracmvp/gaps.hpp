#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "exterior_data.hpp"
#include "geometry.hpp"
#include "harmonic.hpp"
#include "kernels.hpp"
#include "lp.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "vec.hpp"
#include "wos.hpp"

namespace fracmvp {

enum class GapKind { G, Gstar, Gcal };

inline std::string to_string(GapKind k) {
  switch (k) {
    case GapKind::G: return "G";
    case GapKind::Gstar: return "Gstar";
    case GapKind::Gcal: return "Gcal";
  }
  return "?";
}

inline GapKind parse_gap_kind(const std::string& s) {
  if (s == "G") return GapKind::G;
  if (s == "Gstar") return GapKind::Gstar;
  if (s == "Gcal") return GapKind::Gcal;
  throw DomainError("unknown gap kind '" + s + "' (expected G, Gstar or Gcal)");
}

struct GapConfig {
  WosConfig wos;  // paths for the first-jump estimate of u(0)
  ExteriorQuadScheme quad;
  // constraint grid for |u| <= 1, in units of the inradius for the band width
  int grid_interior = 500;
  int grid_boundary = 100;
  double boundary_band = 0.05;
  std::int64_t grid_paths = 1000;
  // sup-norm check of single witnesses for Gcal
  int check_points = 64;
  std::int64_t check_paths = 2000;
};

/// u is s-harmonic in `harm` (B_r c harm c dom) and equals g outside `harm`.
struct GapWitness {
  Domain harm;
  ExteriorData g;
  std::string label;
  double k = 0.0;  // mollifier sharpness, 0 if none
};

struct GapMeasures {
  double r = 0.0;
  QuadResult mu_comp;  // mu_r(C dom)
  QuadResult mu_gap;   // mu_r(dom \ B_r)
};

inline GapMeasures gap_measures(const FracParams& p, const Domain& dom, const ExteriorQuadScheme& sch = {}) {
  GapMeasures m;
  m.r = inradius_from_origin(dom);
  const MuMeasure mu{p, m.r};
  m.mu_comp = mu_mass(mu, Region::complement_of(dom), sch);
  m.mu_gap = mu_mass(mu, Region::domain_minus_ball(dom), sch);
  return m;
}

struct GapValue {
  GapKind kind = GapKind::G;
  double value = 0.0;
  double err = 0.0;           // one standard error plus quadrature error
  double u0 = 0.0, u0_err = 0.0;
  double ext = 0.0, ext_err = 0.0;  // int_{C dom} u dmu_r
  double scale = 1.0;         // factor applied to g before evaluation (Gcal normalization)
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (tag + 1) + 0xD1B54A32D192ED03ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, x = 0.0;
  while (i > 0) {
    x += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return x;
}

// Halton points of the bounding box that lie in dom: `interior` points anywhere inside and
// `boundary` points within distance band of the boundary.
inline std::vector<Vec> sample_grid(const Domain& dom, int interior, int boundary, double band) {
  static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const int n = dim(dom);
  const double R = bounding_radius(dom);
  std::vector<Vec> in, near;
  for (std::uint64_t i = 1; i < 4000000 && (static_cast<int>(in.size()) < interior ||
                                            static_cast<int>(near.size()) < boundary);
       ++i) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = R * (2.0 * radical_inverse(i, primes[d]) - 1.0);
    const double sd = signed_dist(dom, x);
    if (!(sd < 0.0)) continue;
    if (static_cast<int>(in.size()) < interior) in.push_back(x);
    else if (sd > -band && static_cast<int>(near.size()) < boundary) near.push_back(x);
  }
  if (static_cast<int>(near.size()) < boundary) throw NumericalError("sample_grid: boundary band too thin", band);
  in.insert(in.end(), near.begin(), near.end());
  return in;
}

// Constant terms of g are handled exactly; the rest goes through quadrature and walks.
inline double constant_part(const ExteriorData& g) {
  double c = 0.0;
  for (const auto& t : g.terms)
    if (t.kind == DataTerm::Kind::Constant) c += t.height;
  return c;
}
inline ExteriorData varying_part(const ExteriorData& g) {
  ExteriorData out;
  for (const auto& t : g.terms)
    if (t.kind != DataTerm::Kind::Constant) out.terms.push_back(t);
  return out;
}

// M_d = int_{dom \ B_r} u_d dmu_r for each data set, estimated by one exact jump from the
// origin with radius r followed by walk-on-spheres in harm. Landings in C dom score 0 (that
// part is integrated deterministically), landings in dom \ harm score g.
inline std::vector<WosEstimate> first_jump(const FracParams& p, const Domain& dom, const Domain& harm,
                                           const std::vector<ExteriorData>& data, double r,
                                           const WosConfig& cfg) {
  const WosSolver solver(p, harm, data, cfg);
  const std::size_t k = data.size();
  const Vec origin(p.n);
  auto acc = parallel_blocks<MultiAcc>(cfg.n_paths, [&](std::int64_t lo, std::int64_t hi, MultiAcc& a) {
    a.m.resize(k);
    std::vector<double> sc(k);
    for (std::int64_t i = lo; i < hi; ++i) {
      Stream st(cfg.seed, static_cast<std::uint64_t>(i));
      const Vec y = sample_exit(p, origin, r, st);
      int jumps = 1;
      bool capped = false;
      std::fill(sc.begin(), sc.end(), 0.0);
      if (signed_dist(dom, y) < 0.0) {
        if (signed_dist(harm, y) < 0.0) {
          const auto res = solver.path(y, st, sc);
          jumps += res.jumps;
          capped = res.capped;
        } else {
          for (std::size_t d = 0; d < k; ++d) sc[d] = data[d](y);
        }
      }
      for (std::size_t d = 0; d < k; ++d) a.m[d].add(sc[d]);
      a.jumps.add(jumps);
      a.capped += capped ? 1 : 0;
    }
  });
  return finish(acc, cfg, k);
}

struct GapInputs {
  double c0 = 0.0;  // constant part of g
  QuadResult a;     // int_{C dom} (g - c0) dmu_r
  WosEstimate m;    // int_{dom \ B_r} (u - c0) dmu_r
};

// value(mu_comp, a, m) for one kind; u(0) = c0 + a + m and int_{C dom} u = c0 mu_comp + a.
inline double gap_formula(GapKind kind, double c0, double mc, double a, double m) {
  const double u0 = c0 + a + m;
  const double ext = c0 * mc + a;
  switch (kind) {
    case GapKind::G:
    case GapKind::Gstar: return std::abs(u0 - ext / mc) / std::abs(u0);
    case GapKind::Gcal: return std::abs(mc * u0 - ext);
  }
  return 0.0;
}

inline GapValue assemble(GapKind kind, const GapInputs& in, const GapMeasures& meas) {
  const double mc = meas.mu_comp.value;
  GapValue v;
  v.kind = kind;
  v.u0 = in.c0 + in.a.value + in.m.mean;
  v.u0_err = in.a.err + in.m.stderr;
  v.ext = in.c0 * mc + in.a.value;
  v.ext_err = std::abs(in.c0) * meas.mu_comp.err + in.a.err;
  if (kind == GapKind::Gstar && std::abs(v.u0) < 10.0 * v.u0_err)
    throw NumericalError("Gstar: denominator |int u dmu_r| is below ten times its error", v.u0_err / std::abs(v.u0));
  if (kind != GapKind::Gcal && v.u0 == 0.0) throw NumericalError("gap quotient: zero denominator", 0.0);
  const double f = gap_formula(kind, in.c0, mc, in.a.value, in.m.mean);
  const double dm = gap_formula(kind, in.c0, mc, in.a.value, in.m.mean + in.m.stderr) - f;
  const double da = gap_formula(kind, in.c0, mc, in.a.value + in.a.err, in.m.mean) - f;
  const double dc = gap_formula(kind, in.c0, mc + meas.mu_comp.err, in.a.value, in.m.mean) - f;
  v.value = f;
  v.err = std::abs(dm) + std::abs(da) + std::abs(dc);
  return v;
}

inline void check_witness(const Domain& dom, const GapWitness& w, double r) {
  if (dim(w.harm) != dim(dom)) throw DomainError("gap witness: dimension mismatch");
  if (inradius_from_origin(w.harm) < r * (1.0 - 1e-9))
    throw DomainError("gap witness: the harmonicity domain must contain B_r");
}

// max over sample points of |u| + 3 stderr (u = g where the point is outside harm).
inline double sup_estimate(const FracParams& p, const Domain& dom, const GapWitness& w, const GapConfig& cfg) {
  const double r = inradius_from_origin(dom);
  const auto pts = sample_grid(dom, cfg.check_points * 4 / 5, cfg.check_points - cfg.check_points * 4 / 5,
                               cfg.boundary_band * r);
  WosConfig wc = cfg.wos;
  wc.n_paths = cfg.check_paths;
  const WosSolver solver(p, w.harm, {w.g}, wc);
  double sup = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (signed_dist(w.harm, pts[i]) >= 0.0) {
      sup = std::max(sup, std::abs(w.g(pts[i])));
      continue;
    }
    const auto e = wos_solve_all(solver, pts[i]).front();
    sup = std::max(sup, std::abs(e.mean) + 3.0 * e.stderr);
  }
  return sup;
}

}  // namespace detail

/// Gap quotient or difference for one witness u. The exterior integral over C dom uses g
/// directly; the dom \ B_r part of int_{C B_r} u dmu_r comes from walks (see first_jump), and
/// u(0) is that same integral by the mean value property on B_r c harm.
/// G requires g >= 0, so that |u| = u. For Gcal the witness must satisfy |u| <= 1 on dom,
/// checked on a sample grid unless check_bound is false.
inline GapValue gap_value(GapKind kind, const FracParams& p, const Domain& dom, const GapWitness& w,
                          const GapConfig& cfg, const GapMeasures* meas_in = nullptr, bool check_bound = true) {
  const GapMeasures meas = meas_in ? *meas_in : gap_measures(p, dom, cfg.quad);
  detail::check_witness(dom, w, meas.r);
  if (kind == GapKind::G && !w.g.nonnegative())
    throw DomainError("gap G: witness data must be nonnegative so that |u| = u");
  if (kind == GapKind::Gcal && check_bound) {
    const double sup = detail::sup_estimate(p, dom, w, cfg);
    if (sup > 1.0 + 1e-12) throw DomainError("gap Gcal: witness violates |u| <= 1 on the domain");
  }
  detail::GapInputs in;
  in.c0 = detail::constant_part(w.g);
  const ExteriorData gv = detail::varying_part(w.g);
  if (!gv.terms.empty()) {
    in.a = integrate_data_mu({p, meas.r}, dom, gv, cfg.quad);
    in.m = detail::first_jump(p, dom, w.harm, {gv}, meas.r, cfg.wos).front();
    if (!in.m.valid) throw StatisticalError("gap: too many walks hit the jump cap");
  }
  return detail::assemble(kind, in, meas);
}

enum class FamilyKind { TouchPoint, FarBumpLadder, LpBounded };

inline std::string to_string(FamilyKind f) {
  switch (f) {
    case FamilyKind::TouchPoint: return "touch-point";
    case FamilyKind::FarBumpLadder: return "far-bump-ladder";
    case FamilyKind::LpBounded: return "lp-bounded";
  }
  return "?";
}

inline FamilyKind parse_family(const std::string& s) {
  if (s == "touch-point" || s == "touch") return FamilyKind::TouchPoint;
  if (s == "far-bump-ladder" || s == "ladder") return FamilyKind::FarBumpLadder;
  if (s == "lp-bounded" || s == "lp") return FamilyKind::LpBounded;
  throw DomainError("unknown witness family '" + s + "'");
}

struct WitnessFamily {
  FamilyKind kind = FamilyKind::TouchPoint;
  int steps = 4;       // touch point: approach points p_j; ladder: distances 2^j R_out
  int directions = 12; // lp: basis bumps per layer (n = 2: angles; n = 3: Fibonacci points)
};

struct GapCandidate {
  std::string label;
  double value = 0.0;
  double err = 0.0;
  double k = 0.0;
  double lp_objective = std::numeric_limits<double>::quiet_NaN();
  double upper_bound = std::numeric_limits<double>::quiet_NaN();  // Gcal: 2 mu_r(dom \ B_r)
  bool within_upper = true;
};

struct GapReport {
  GapKind kind = GapKind::G;
  FamilyKind family = FamilyKind::TouchPoint;
  double lower_bound = 0.0;
  double lower_err = 0.0;
  std::string witness;
  double r = 0.0;
  double mu_gap = 0.0, mu_gap_err = 0.0;
  double mu_comp = 0.0, mu_comp_err = 0.0;
  bool flagged = false;  // statistical error above 20% of the bound
  std::vector<GapCandidate> candidates;
};

/// Touch-point witnesses: a ball B* in dom \ closure(B_r) touching the boundary at the point
/// p* of the boundary farthest from the origin; varpi = B_r u B*; mollifiers at
/// p_j = p* + d_j nu with d_j shrinking by 4. Falls back to varpi = dom when dom \ B_r is empty.
inline std::vector<GapWitness> touch_point_witnesses(const FracParams& p, const Domain& dom, int steps) {
  const int n = p.n;
  const double r = inradius_from_origin(dom);
  const Vec origin(n);
  const auto dirs = n == 2 ? std::vector<Direction>{} : sphere_rule(n, 64);
  double best = -1.0;
  Vec pstar(n);
  auto consider = [&](const Vec& dir) {
    const auto iv = ray_intervals(dom, origin, dir);
    if (iv.empty()) return;
    const double t = iv.back().second;
    if (t > best) best = t, pstar = t * dir;
  };
  if (n == 1) {
    consider(Vec{1.0});
    consider(Vec{-1.0});
  } else if (n == 2) {
    for (int i = 0; i < 1440; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 1440.0;
      consider(Vec{std::cos(a), std::sin(a)});
    }
  } else {
    for (const auto& d : dirs) consider(d.dir);
  }
  const Vec nu = normal(dom, pstar);
  Domain harm = dom;
  double rho = 0.5 * r;
  if (best - r > 1e-6 * r) {
    const TangentBalls tb = tangent_balls(dom, pstar);
    rho = std::min(tb.r_int, 0.45 * (best - r));
    const Vec q = pstar - rho * nu;
    if (-signed_dist(dom, q) < rho * (1.0 - 1e-6) || norm(q) - rho <= r)
      throw NumericalError("touch-point family: could not place the touching ball", rho);
    harm = make_union({Ball{origin, r}, Ball{q, rho}});
  }
  std::vector<GapWitness> out;
  for (int j = 1; j <= steps; ++j) {
    const double d = 0.5 * rho * std::pow(0.25, j - 1);
    const Vec pj = pstar + d * nu;
    const int k = static_cast<int>(std::ceil(2.0 / d));
    const Mollifier moll{pj, k};
    require_support_outside(dom, moll.term(), "touch-point family");
    out.push_back({harm, moll.data(), "mollifier j=" + std::to_string(j) + " k=" + std::to_string(k), double(k)});
  }
  return out;
}

/// Bumps at 2^j R_out along the direction of the farthest boundary point; u s-harmonic in dom.
inline std::vector<GapWitness> far_bump_witnesses(const FracParams& p, const Domain& dom, int steps) {
  const double R = bounding_radius(dom);
  std::vector<GapWitness> out;
  for (int j = 1; j <= steps; ++j) {
    const double d = std::ldexp(R, j);
    DataTerm t = bump_term(Vec::axis(p.n, 0, d), 0.25 * d, 1.0);
    require_support_outside(dom, t, "far-bump ladder");
    out.push_back({dom, ExteriorData{{t}}, "far bump j=" + std::to_string(j), 0.0});
  }
  return out;
}

/// Nonnegative bump basis in C closure(dom): a near layer hugging the boundary and a far layer.
inline std::vector<ExteriorData> lp_basis(const Domain& dom, int directions) {
  const int n = dim(dom);
  const double R = bounding_radius(dom);
  const double r = inradius_from_origin(dom);
  const Vec origin(n);
  std::vector<Vec> dirs;
  if (n == 1) {
    dirs = {Vec{1.0}, Vec{-1.0}};
  } else if (n == 2) {
    for (int i = 0; i < directions; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + 0.5) / directions;
      dirs.push_back(Vec{std::cos(a), std::sin(a)});
    }
  } else {
    const int m = std::max(directions, 6);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / m;
      const double rr = std::sqrt(1.0 - z * z);
      Vec d(n);
      d[0] = rr * std::cos(golden * i);
      d[1] = rr * std::sin(golden * i);
      d[2] = z;
      dirs.push_back(d);
    }
  }
  std::vector<ExteriorData> out;
  const double rho = 0.15 * r;
  for (const Vec& d : dirs) {
    // smallest t beyond the last exit with signed distance 2 rho
    const auto iv = ray_intervals(dom, origin, d);
    double lo = iv.empty() ? 0.0 : iv.back().second, hi = lo + 4.0 * rho;
    while (signed_dist(dom, hi * d) < 2.0 * rho) hi += 2.0 * rho;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (lo + hi);
      if (signed_dist(dom, m * d) < 2.0 * rho) lo = m;
      else hi = m;
    }
    out.push_back(ExteriorData{{bump_term(hi * d, rho, 1.0)}});
  }
  for (const Vec& d : dirs) out.push_back(ExteriorData{{bump_term(2.5 * R * d, 0.5 * R, 1.0)}});
  return out;
}

namespace detail {

inline GapReport base_report(GapKind kind, FamilyKind fam, const GapMeasures& meas) {
  GapReport rep;
  rep.kind = kind;
  rep.family = fam;
  rep.r = meas.r;
  rep.mu_gap = meas.mu_gap.value;
  rep.mu_gap_err = meas.mu_gap.err;
  rep.mu_comp = meas.mu_comp.value;
  rep.mu_comp_err = meas.mu_comp.err;
  return rep;
}

// Best candidate; ties (within roundoff) keep the earlier one, which has the smaller k.
inline void pick_best(GapReport& rep) {
  const GapCandidate* best = nullptr;
  for (const auto& c : rep.candidates)
    if (!best || c.value > best->value * (1.0 + 1e-12) + 1e-300) best = &c;
  if (!best) return;
  rep.lower_bound = best->value;
  rep.lower_err = best->err;
  rep.witness = best->label;
  rep.flagged = best->err > 0.2 * std::abs(best->value);
}

inline GapReport lp_family(const FracParams& p, const Domain& dom, const WitnessFamily& fam, const GapConfig& cfg,
                           const GapMeasures& meas) {
  GapReport rep = base_report(GapKind::Gcal, fam.kind, meas);
  const double r = meas.r;
  const double mc = meas.mu_comp.value;
  const auto basis = lp_basis(dom, fam.directions);
  const std::size_t m = basis.size();

  // linear functional: Gcal(sum a_i g_i) = |sum a_i l_i|
  std::vector<double> A(m), M(m), ell(m);
  const auto mj = first_jump(p, dom, dom, basis, r, cfg.wos);
  for (std::size_t i = 0; i < m; ++i) {
    A[i] = integrate_data_mu({p, r}, dom, basis[i], cfg.quad).value;
    M[i] = mj[i].mean;
    ell[i] = mc * (A[i] + M[i]) - A[i];
  }

  // |u| <= 1 at grid points and at the origin
  const auto pts = sample_grid(dom, cfg.grid_interior, cfg.grid_boundary, cfg.boundary_band * r);
  std::vector<std::vector<double>> U;
  WosConfig gc = cfg.wos;
  gc.n_paths = cfg.grid_paths;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    gc.seed = derive_seed(cfg.wos.seed, 1, k);
    const WosSolver solver(p, dom, basis, gc);
    const auto est = wos_solve_all(solver, pts[k]);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) row[i] = est[i].mean;
    U.push_back(std::move(row));
  }
  {
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) row[i] = A[i] + M[i];
    U.push_back(std::move(row));
  }

  struct Sub {
    std::string name;
    std::size_t lo, hi;
  };
  const std::size_t half = m / 2;
  const std::vector<Sub> subsets = {{"near", 0, half}, {"all", 0, m}};
  int cand = 0;
  for (const auto& sub : subsets) {
    for (int sign : {+1, -1}) {
      const std::size_t k = sub.hi - sub.lo;
      std::vector<double> c(k);
      for (std::size_t i = 0; i < k; ++i) c[i] = sign * ell[sub.lo + i];
      std::vector<std::vector<double>> rows;
      std::vector<double> b;
      for (const auto& u : U) {
        std::vector<double> row(u.begin() + static_cast<std::ptrdiff_t>(sub.lo),
                                u.begin() + static_cast<std::ptrdiff_t>(sub.hi));
        rows.push_back(row);
        for (auto& x : row) x = -x;
        rows.push_back(std::move(row));
        b.push_back(1.0);
        b.push_back(1.0);
      }
      const LpResult lp = lp_maximize(c, rows, b);
      ExteriorData g;
      for (std::size_t i = 0; i < k; ++i)
        if (lp.x[i] != 0.0) g = g + basis[sub.lo + i].scaled(lp.x[i]);
      GapCandidate cd;
      cd.label = "lp " + sub.name + (sign > 0 ? " +" : " -");
      cd.lp_objective = lp.objective;
      if (!g.terms.empty()) {
        GapConfig ec = cfg;
        ec.wos.seed = derive_seed(cfg.wos.seed, 2, static_cast<std::uint64_t>(cand));
        const GapValue v = gap_value(GapKind::Gcal, p, dom, {dom, g, cd.label, 0.0}, ec, &meas, false);
        cd.value = v.value;
        cd.err = v.err;
      }
      cd.upper_bound = 2.0 * meas.mu_gap.value;
      cd.within_upper = cd.value <= cd.upper_bound + 3.0 * (cd.err + 2.0 * meas.mu_gap.err);
      rep.candidates.push_back(cd);
      ++cand;
    }
  }
  pick_best(rep);
  return rep;
}

}  // namespace detail

/// Largest gap value over a witness family. All values are lower bounds for the supremum.
inline GapReport estimate_gap_lower_bound(GapKind kind, const FracParams& p, const Domain& dom,
                                          const WitnessFamily& fam, const GapConfig& cfg,
                                          const GapMeasures* meas_in = nullptr) {
  if (dim(dom) != p.n) throw DomainError("gap: domain dimension does not match n");
  const GapMeasures meas = meas_in ? *meas_in : gap_measures(p, dom, cfg.quad);
  if (fam.kind == FamilyKind::LpBounded) {
    if (kind != GapKind::Gcal) throw DomainError("the lp-bounded family applies to Gcal only");
    return detail::lp_family(p, dom, fam, cfg, meas);
  }
  if (fam.steps < 1) throw DomainError("witness family needs at least one step");
  const auto ws = fam.kind == FamilyKind::TouchPoint ? touch_point_witnesses(p, dom, fam.steps)
                                                     : far_bump_witnesses(p, dom, fam.steps);
  GapReport rep = detail::base_report(kind, fam.kind, meas);
  for (std::size_t j = 0; j < ws.size(); ++j) {
    GapWitness w = ws[j];
    GapConfig c = cfg;
    c.wos.seed = detail::derive_seed(cfg.wos.seed, 3, j);
    double scale = 1.0;
    if (kind == GapKind::Gcal) {
      // normalize so that |u| <= 1 on the sample grid
      const double sup = detail::sup_estimate(p, dom, w, c);
      if (sup > 0.0) scale = 1.0 / sup;
      w.g = w.g.scaled(scale);
    }
    const GapValue v = gap_value(kind, p, dom, w, c, &meas, false);
    GapCandidate cd;
    cd.label = w.label;
    cd.value = v.value;
    cd.err = v.err;
    cd.k = w.k;
    if (kind == GapKind::Gcal) {
      cd.upper_bound = 2.0 * meas.mu_gap.value;
      cd.within_upper = cd.value <= cd.upper_bound + 3.0 * (cd.err + 2.0 * meas.mu_gap.err);
    }
    rep.candidates.push_back(cd);
  }
  detail::pick_best(rep);
  return rep;
}

struct SlabRow {
  double delta = 0.0;
  double mu_comp = 0.0, mu_comp_err = 0.0;
  double target_bound = 0.0, target_err = 0.0;  // 1/mu_r(C dom) - 1
  double best_witness_value = 0.0, stderr = 0.0;
};

/// For each delta: the smoothed slab domain, mu_r(C dom), the lower bound 1/mu_r(C dom) - 1 for
/// Gstar, and the best Gstar value of the far-bump ladder (ladder_steps = 0 skips the walks).
inline std::vector<SlabRow> slab_blowup_experiment(const FracParams& p, double r, const std::vector<double>& deltas,
                                                   const GapConfig& cfg, int ladder_steps = 1,
                                                   double fillet = 0.25) {
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < 0.5)) throw DomainError("slab sweep: each delta must lie in (0, 0.5)");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw DomainError("slab sweep: deltas must decrease");
  }
  std::vector<SlabRow> rows;
  for (double d : deltas) {
    const Domain dom = make_slab(r, d, p.n, fillet);
    SlabRow row;
    row.delta = d;
    GapMeasures meas;
    meas.r = inradius_from_origin(dom);
    meas.mu_comp = mu_mass({p, meas.r}, Region::complement_of(dom), cfg.quad);
    meas.mu_gap = {1.0 - meas.mu_comp.value, meas.mu_comp.err};
    row.mu_comp = meas.mu_comp.value;
    row.mu_comp_err = meas.mu_comp.err;
    row.target_bound = 1.0 / row.mu_comp - 1.0;
    row.target_err = row.mu_comp_err / (row.mu_comp * row.mu_comp);
    if (ladder_steps > 0) {
      const GapReport rep =
          estimate_gap_lower_bound(GapKind::Gstar, p, dom, {FamilyKind::FarBumpLadder, ladder_steps, 0}, cfg, &meas);
      row.best_witness_value = rep.lower_bound;
      row.stderr = rep.lower_err;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fracmvp
