#pragma once

#include <cmath>
#include <mutex>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "gauss.hpp"
#include "geometry.hpp"
#include "vec.hpp"

namespace fracmvp {

/// exp(1 - 1/(1 - t^2)) on |t| < 1, zero outside; equals 1 at t = 0.
inline double bump_profile(double t) {
  const double q = 1.0 - t * t;
  if (!(q > 0.0)) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

/// Integral of bump_profile(|x|) over the unit ball of R^n.
inline double bump_mass(int n) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  // composite Gauss; the profile is flat at t = 1, so 64 panels of 16 nodes are ample
  const GaussRule& g = gauss_legendre(16);
  double acc = 0.0;
  const int P = 64;
  for (int p = 0; p < P; ++p) {
    const double a = static_cast<double>(p) / P, h = 0.5 / P;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double t = a + h * (1.0 + g.x[i]);
      acc += h * g.w[i] * bump_profile(t) * std::pow(t, n - 1);
    }
  }
  const double m = sphere_area(n) * acc;
  cache[n] = m;
  return m;
}

/// One summand of the exterior data.
struct DataTerm {
  enum class Kind { Bump, Shell, Constant };
  Kind kind = Kind::Constant;
  Vec center;             // Bump, Shell
  double radius = 0.0;    // Bump: support radius; Shell: inner radius
  double height = 1.0;
  double outer = INFINITY;  // Shell only
  double width = 0.0;       // Shell only: smoothing width (0 = sharp)

  double operator()(const Vec& y) const {
    switch (kind) {
      case Kind::Constant:
        return height;
      case Kind::Bump:
        return height * bump_profile(dist(y, center) / radius);
      case Kind::Shell: {
        const double d = dist(y, center);
        if (width <= 0.0) return (d >= radius && d <= outer) ? height : 0.0;
        double v = smooth_step((d - radius) / width);
        if (std::isfinite(outer)) v *= smooth_step((outer - d) / width);
        return height * v;
      }
    }
    return 0.0;
  }

  /// Integral over R^n (bumps only).
  double mass(int n) const { return height * std::pow(radius, n) * bump_mass(n); }
};

inline DataTerm bump_term(Vec center, double radius, double height) {
  if (!(radius > 0.0)) throw DomainError("bump radius must be positive");
  DataTerm t;
  t.kind = DataTerm::Kind::Bump;
  t.center = std::move(center);
  t.radius = radius;
  t.height = height;
  return t;
}
inline DataTerm constant_term(double height) {
  DataTerm t;
  t.height = height;
  return t;
}
inline DataTerm shell_term(Vec center, double inner, double outer, double width, double height) {
  if (!(inner >= 0.0) || !(outer > inner) || !(width >= 0.0)) throw DomainError("invalid shell term");
  DataTerm t;
  t.kind = DataTerm::Kind::Shell;
  t.center = std::move(center);
  t.radius = inner;
  t.outer = outer;
  t.width = width;
  t.height = height;
  return t;
}

/// Exterior (Dirichlet) data g = sum of terms, defined on the complement of the domain.
struct ExteriorData {
  std::vector<DataTerm> terms;

  double operator()(const Vec& y) const {
    double s = 0.0;
    for (const auto& t : terms) s += t(y);
    return s;
  }
  ExteriorData scaled(double a) const {
    ExteriorData o = *this;
    for (auto& t : o.terms) t.height *= a;
    return o;
  }
  bool nonnegative() const {
    for (const auto& t : terms)
      if (t.height < 0.0) return false;
    return true;
  }
};

inline ExteriorData operator+(ExteriorData a, const ExteriorData& b) {
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return a;
}

/// phi_{k,p}(y) = k^n profile(k (y - p)) with the unit-mass exponential bump profile.
struct Mollifier {
  Vec p;
  int k = 1;

  double radius() const { return 1.0 / k; }
  DataTerm term() const {
    const int n = p.dim();
    return bump_term(p, 1.0 / k, std::pow(static_cast<double>(k), n) / bump_mass(n));
  }
  ExteriorData data() const { return {{term()}}; }
  double operator()(const Vec& y) const { return term()(y); }
};

/// Throws unless the support of the term lies outside the closure of the domain.
inline void require_support_outside(const Domain& dom, const DataTerm& t, const std::string& what) {
  if (t.kind != DataTerm::Kind::Bump) throw DomainError(what + ": only bump terms have compact support");
  if (!(signed_dist(dom, t.center) > t.radius))
    throw DomainError(what + ": support meets the closure of the domain");
}

}  // namespace fracmvp
