#pragma once

// Independent reference values shared by the unit tests and the acceptance runner. Everything
// here uses Boost quadrature and closed forms, never the library's own rules.

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>

#include "fracmvp/exterior_data.hpp"
#include "fracmvp/kernels.hpp"

namespace oracle {

using fracmvp::DataTerm;
using fracmvp::FracParams;
using fracmvp::Vec;

// mu_1(B1 u B_0.6((1.3,0)) \ B_1) for n = 2, s = 1/2. The radial integral of
// c / ((rho^2 - 1)^{1/2} rho) is c arcsec(rho); what remains is an angular integral over the
// part of the small ball outside B_1, split where the ray passes through the crease.
inline double two_ball_gap_mass() {
  auto arcsec = [](double x) { return std::acos(1.0 / x); };
  const double D = 1.3, a = 0.6;
  const double th_max = std::asin(a / D);
  const double th_c = std::acos((1.0 + D * D - a * a) / (2.0 * D));
  auto g = [&](double th) {
    const double b = D * std::cos(th);
    const double disc = std::sqrt(std::max(0.0, b * b - (D * D - a * a)));
    return arcsec(b + disc) - arcsec(std::max(1.0, b - disc));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return 2.0 / (std::numbers::pi * std::numbers::pi) * (ts.integrate(g, 0.0, th_c) + ts.integrate(g, th_c, th_max));
}

// int phi(y) P_{B_R(c)}(x, y) dy for a 2D bump phi, polar about the bump centre.
inline double ball_poisson_of_bump(const FracParams& p, const Vec& c, double R, const DataTerm& b, const Vec& x) {
  auto ang = [&](double th) {
    auto rad = [&](double t) {
      const Vec y = b.center + t * Vec{std::cos(th), std::sin(th)};
      return t * b(y) * fracmvp::poisson_ball(p, c, R, x, y);
    };
    return boost::math::quadrature::gauss<double, 30>::integrate(rad, 0.0, b.radius);
  };
  return boost::math::quadrature::trapezoidal(ang, 0.0, 2.0 * std::numbers::pi, 1e-10);
}

// Lower bound for G of a nonnegative bump g supported in C(dom), for u s-harmonic in
// B_1 u B* with B* = B_rho(q) disjoint from closure(B_1) and g = u outside. With T1 = int g dmu_1
// and T2 = int_{B*} P_{B_1}(0, z) (P_{B*} g)(z) dz (first term of the Neumann series of the
// union), u(0) >= T1 + T2, and whenever T1 <= mu_c (T1 + T2),
//   G = 1 - T1 / (mu_c u(0)) >= 1 - T1 / (mu_c (T1 + T2)).
struct TouchBound {
  double t1 = 0.0, t2 = 0.0, g_lower = 0.0;
};

inline TouchBound touch_point_lower_bound(const FracParams& p, const Vec& q, double rho, const DataTerm& g,
                                          double mu_comp) {
  const Vec origin(2);
  TouchBound out;
  {
    auto ang = [&](double th) {
      auto rad = [&](double t) {
        const Vec y = g.center + t * Vec{std::cos(th), std::sin(th)};
        return t * g(y) * fracmvp::poisson_ball(p, origin, 1.0, origin, y);
      };
      return boost::math::quadrature::gauss<double, 30>::integrate(rad, 0.0, g.radius);
    };
    out.t1 = boost::math::quadrature::trapezoidal(ang, 0.0, 2.0 * std::numbers::pi, 1e-10);
  }
  // z = q + t (cos phi, sin phi); phi measured from the direction of the bump centre
  const Vec e = fracmvp::normalized(g.center - q);
  const Vec e2{-e[1], e[0]};
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::gauss_kronrod<double, 31> gk;
  auto shell = [&](double phi) {
    const Vec dir = std::cos(phi) * e + std::sin(phi) * e2;
    auto rad = [&](double t) {
      const Vec z = q + t * dir;
      // points rounded onto the sphere drop out, which only lowers the bound
      if (!(fracmvp::dist(z, q) < rho)) return 0.0;
      return t * fracmvp::poisson_ball(p, origin, 1.0, origin, z) * ball_poisson_of_bump(p, q, rho, g, z);
    };
    return ts.integrate(rad, 0.0, rho);
  };
  // symmetric about phi = 0
  out.t2 = 2.0 * gk.integrate(shell, 0.0, std::numbers::pi, 8, 1e-7);
  out.g_lower = 1.0 - out.t1 / (mu_comp * (out.t1 + out.t2));
  return out;
}

// int_{C B_R(a e_1)} c / (|y|^n d^s (2 + d)^s) dy, d = |y - a e_1| - R, for n = 2 or 3 and
// R - a = 1. Polar about the origin; along a ray at angle th the boundary crossings are the
// roots t_- < 0 < t_+ of t^2 - 2 a t cos(th) + a^2 - R^2, so d = (t - t_+)(t - t_-) / (|y - c| + R)
// keeps full relative accuracy when tanh-sinh hands over the exact gap t - t_+.
inline double shifted_ball_weight_integral(const FracParams& p, double R) {
  const double a = R - 1.0, s = p.s;
  const int n = p.n;
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::gauss_kronrod<double, 31> gk;
  auto ray = [&](double th) {
    const double ct = std::cos(th);
    const double disc = std::sqrt(a * a * ct * ct - a * a + R * R);
    const double tp = a * ct + disc, tm = a * ct - disc;
    auto w = [&](double t, double gap) {
      const double yc = std::sqrt(t * t - 2.0 * a * t * ct + a * a);
      const double d = gap * (t - tm) / (yc + R);
      return p.c * std::pow(t, -1.0) * std::pow(d, -s) * std::pow(2.0 + d, -s);
    };
    // t^{n-1} |y|^{-n} = 1 / t in every dimension
    // Boost passes tc = tp - t (< 0) on the left half of the interval
    const double near = ts.integrate([&](double t, double tc) { return w(t, tc < 0.0 ? -tc : t - tp); }, tp, tp + 1.0);
    const double far = ts.integrate([&](double t) { return w(t, t - tp); }, tp + 1.0, std::numeric_limits<double>::infinity());
    return near + far;
  };
  if (n == 2) return 2.0 * gk.integrate(ray, 0.0, std::numbers::pi, 10, 1e-12);
  // n = 3: axisymmetric about e_1
  return 2.0 * std::numbers::pi * gk.integrate([&](double th) { return std::sin(th) * ray(th); }, 0.0, std::numbers::pi, 10, 1e-12);
}

}  // namespace oracle
