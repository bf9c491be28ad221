#include <gtest/gtest.h>

#include <cmath>

#include "fracmvp/limits.hpp"
#include "oracles.hpp"

using namespace fracmvp;

TEST(BoundaryLimit, UnitBallClosedForm) {
  for (auto [n, s] : {std::pair{2, 0.5}, {3, 0.3}}) {
    const FracParams p = calibrate_constant(n, s);
    const Domain b1 = make_ball(Vec(n), 1.0);
    const Vec pt = Vec::axis(n, 1, 1.0);
    const auto prof = boundary_profile(p, b1, Vec(n), pt, {0.01, 0.001, 0.0001});
    EXPECT_TRUE(prof.closed_form);
    EXPECT_NEAR(prof.extrapolated_limit, p.c / std::pow(2.0, s), 1e-6 * p.c);
    EXPECT_NEAR(prof.nu[1], 1.0, 1e-12);
  }
}

// B_R((R-1) e_1) seen from the origin: P(0, q)|q|^n d^s -> c ((2R-1)/(2R))^s at every point.
TEST(BoundaryLimit, ShiftedBallIsConstantAlongTheBoundary) {
  const FracParams p = calibrate_constant(2, 0.5);
  const Domain d = make_shifted_ball(2.0, 2);
  const double want = p.c * std::sqrt(3.0) / 2.0;
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 8.0;
    const Vec dir{std::cos(a), std::sin(a)};
    const Vec pt = ray_intervals(d, Vec(2), dir).front().second * dir;
    const auto prof = boundary_profile(p, d, Vec(2), pt, {0.01, 0.001, 0.0001});
    EXPECT_NEAR(prof.extrapolated_limit, want, 1e-6 * want) << "i=" << i;
  }
}

TEST(BoundaryLimit, WalksReproduceTheBallLimit) {
  const FracParams p = calibrate_constant(2, 0.5);
  LimitConfig cfg;
  cfg.force_walks = true;
  cfg.wos.n_paths = 100000;
  const auto prof = boundary_profile(p, make_ball(Vec(2), 1.0), Vec(2), Vec{1.0, 0.0}, {0.2, 0.1}, cfg);
  EXPECT_FALSE(prof.closed_form);
  // the mollifier smooths the kernel over a ball of radius t/4, a few percent at these t
  EXPECT_NEAR(prof.extrapolated_limit, p.c / std::sqrt(2.0), 0.05 * p.c / std::sqrt(2.0) + 3.0 * prof.limit_err);
}

TEST(BoundaryLimit, RejectsBadGrids) {
  const FracParams p = calibrate_constant(2, 0.5);
  const Domain b1 = make_ball(Vec(2), 1.0);
  EXPECT_THROW(boundary_profile(p, b1, Vec(2), Vec{1.0, 0.0}, {0.1}), DomainError);
  EXPECT_THROW(boundary_profile(p, b1, Vec(2), Vec{1.0, 0.0}, {0.01, 0.1}), DomainError);
  EXPECT_THROW(boundary_profile(p, b1, Vec(2), Vec{1.0, 0.0}, {0.1, -0.01}), DomainError);
  EXPECT_THROW(boundary_profile(p, b1, Vec{2.0, 0.0}, Vec{1.0, 0.0}, {0.1, 0.01}), DomainError);
}

// For the unit ball the lower tangent bound is attained, but the exterior ball can be taken
// arbitrarily large and the upper bound tends to c |p - x0|^{-n} (2 nu.(p - x0))^s / 2^s, not
// to the limit: the bracket does not collapse.
TEST(TangentBracket, UnitBallLowerIsSharpUpperIsNot) {
  const FracParams p = calibrate_constant(2, 0.5);
  const Domain b1 = make_ball(Vec(2), 1.0);
  const Bracket b = tangent_bracket(p, b1, Vec(2), Vec{0.0, 1.0});
  // r_int comes from a numerical search
  EXPECT_NEAR(b.lower, p.c / std::sqrt(2.0), 1e-8 * p.c);
  EXPECT_FALSE(b.vacuous_lower);
  // r_ext is capped at 10: upper = c sqrt(21/20); as r_ext grows it only falls to c
  EXPECT_NEAR(b.upper, p.c * std::sqrt(21.0 / 20.0), 1e-8 * p.c);
  EXPECT_GT(b.upper / b.lower, std::sqrt(2.0));
}

// The upper bound is decreasing in the exterior radius: larger tangent balls give tighter bounds.
TEST(TangentBracket, UpperDecreasesWithExteriorRadius) {
  const FracParams p = calibrate_constant(2, 0.5);
  const Vec x0{0.3, 0.2};
  const Vec pt{1.0, 0.0};
  auto upper = [&](double rext) {
    const double dxp = dist(x0, pt), nd = pt[0] - x0[0];
    return p.c / (std::sqrt(2.0 * rext) * dxp * dxp) * std::sqrt(2.0 * rext * nd + dxp * dxp);
  };
  // the unit ball (r_ext capped at 10) against the explicit formula
  EXPECT_NEAR(tangent_bracket(p, make_ball(Vec(2), 1.0), x0, pt).upper, upper(10.0), 1e-8 * upper(10.0));
  for (double r : {0.1, 0.5, 1.0, 3.0}) EXPECT_GT(upper(r), upper(2.0 * r));
}

TEST(TangentBracket, BracketsTheTwoBallLimitAtTheFarPoint) {
  const FracParams p = calibrate_constant(2, 0.5);
  const Domain u = make_union({{Vec(2), 1.0}, {Vec{1.3, 0.0}, 0.6}});
  const Bracket b = tangent_bracket(p, u, Vec(2), Vec{1.9, 0.0});
  // lower: r_int = 0.6, nu.(p - x0) = 1.9, base 2 * 0.6 * 1.9 - 1.9^2 < 0
  EXPECT_TRUE(b.vacuous_lower);
  EXPECT_GT(b.upper, 0.0);
  const Bracket back = tangent_bracket(p, u, Vec(2), Vec{-1.0, 0.0});
  EXPECT_FALSE(back.vacuous_lower);
  EXPECT_LT(back.lower, back.upper);
}

TEST(CFrak, UnitBallIsOne) {
  for (auto [n, s] : {std::pair{2, 0.5}, {3, 0.25}, {3, 0.75}, {2, 0.9}}) {
    const FracParams p = calibrate_constant(n, s);
    const QuadResult q = c_frak(p, make_ball(Vec(n), 1.0));
    EXPECT_NEAR(q.value, 1.0, 1e-7) << n << " " << s;
    EXPECT_LT(q.err, 1e-6);
  }
}

TEST(CFrak, ShiftedBallAgainstIndependentQuadrature) {
  for (auto [n, s, R] : {std::tuple{2, 0.5, 2.0}, {3, 0.4, 1.5}, {2, 0.75, 3.0}}) {
    const FracParams p = calibrate_constant(n, s);
    const QuadResult q = c_frak(p, make_shifted_ball(R, n));
    const double want = oracle::shifted_ball_weight_integral(p, R);
    EXPECT_NEAR(q.value, want, 1e-7) << n << " " << s << " " << R;
    EXPECT_GT(q.value, 1.0 / 3.0);
    EXPECT_LT(q.value, 1.0);
  }
  const FracParams p = calibrate_constant(2, 0.5);
  EXPECT_NEAR(c_frak(p, make_shifted_ball(2.0, 2)).value, 0.7420256548, 1e-9);
}

TEST(CFrak, RequiresUnitInradius) {
  const FracParams p = calibrate_constant(2, 0.5);
  EXPECT_THROW(c_frak(p, make_ball(Vec(2), 2.0)), DomainError);
  EXPECT_THROW(c_frak(p, make_ball(Vec(3), 1.0)), DomainError);
}

TEST(BallDetect, UnitBallIsConsistent) {
  const FracParams p = calibrate_constant(2, 0.5);
  const BallVerdict v = ball_detect(p, make_ball(Vec(2), 1.0));
  EXPECT_TRUE(v.consistent);
  EXPECT_EQ(v.points.size(), 9u);
  EXPECT_NEAR(v.mu_excess, 0.0, 1e-12);
  EXPECT_FALSE(v.caveat.empty());
}

TEST(BallDetect, ShiftedBallIsNot) {
  const FracParams p = calibrate_constant(2, 0.5);
  const BallVerdict v = ball_detect(p, make_shifted_ball(2.0, 2));
  EXPECT_FALSE(v.consistent);
  // every point has the same limit c sqrt(3)/2, off the target c/sqrt(2)
  for (const auto& pt : v.points) {
    // extrapolated from the detector's coarse default t grid
    EXPECT_NEAR(pt.limit, p.c * std::sqrt(3.0) / 2.0, 1e-3 * p.c);
    EXPECT_FALSE(pt.matches);
  }
  EXPECT_GT(v.mu_excess, 0.1);
}

TEST(BallDetect, RequiresUnitInradius) {
  const FracParams p = calibrate_constant(2, 0.5);
  EXPECT_THROW(ball_detect(p, make_ball(Vec(2), 0.5)), DomainError);
}
