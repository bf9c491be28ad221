#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

#include "fracmvp/gauss.hpp"
#include "fracmvp/lp.hpp"
#include "fracmvp/parallel.hpp"
#include "fracmvp/rng.hpp"
#include "fracmvp/vec.hpp"

using namespace fracmvp;

TEST(Vec, ArithmeticAndNorms) {
  const Vec a{3.0, 4.0};
  const Vec b{1.0, -2.0};
  EXPECT_DOUBLE_EQ(norm(a), 5.0);
  EXPECT_DOUBLE_EQ(dot(a, b), -5.0);
  EXPECT_DOUBLE_EQ(dist(a, b), std::sqrt(4.0 + 36.0));
  const Vec c = 2.0 * a - b;
  EXPECT_DOUBLE_EQ(c[0], 5.0);
  EXPECT_DOUBLE_EQ(c[1], 10.0);
  EXPECT_EQ(Vec::axis(3, 2, 7.0)[2], 7.0);
}

TEST(Vec, RejectsBadDimension) {
  EXPECT_THROW(Vec(0), std::invalid_argument);
  EXPECT_THROW(Vec(kMaxDim + 1), std::invalid_argument);
}

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, ReproducibleAndIndependent) {
  Stream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_NE(x, d.uniform());
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Stream, UniformMoments) {
  Moments m;
  Stream st(1, 0);
  for (int i = 0; i < 200000; ++i) m.add(st.uniform());
  EXPECT_NEAR(m.mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 200000));
  EXPECT_NEAR(m.variance(), 1.0 / 12.0, 2e-3);
}

TEST(Stream, DirectionsAreUnitAndCentred) {
  for (int n : {2, 3, 5}) {
    Stream st(9, static_cast<std::uint64_t>(n));
    Vec mean(n);
    const int N = 50000;
    for (int i = 0; i < N; ++i) {
      const Vec v = st.direction(n);
      EXPECT_NEAR(norm(v), 1.0, 1e-12);
      mean += v;
    }
    EXPECT_LT(norm(mean) / N, 5.0 / std::sqrt(N));
  }
}

TEST(Moments, MergeMatchesSequential) {
  Moments all, left, right;
  Stream st(3, 3);
  for (int i = 0; i < 1000; ++i) {
    const double x = st.normal();
    all.add(x);
    (i < 377 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_EQ(left.count, all.count);
  EXPECT_NEAR(left.mean, all.mean, 1e-14);
  EXPECT_NEAR(left.variance(), all.variance(), 1e-12);
}

namespace {
struct SumAcc {
  Moments m;
  void merge(const SumAcc& o) { m.merge(o.m); }
};

SumAcc run_blocks() {
  return parallel_blocks<SumAcc>(100000, [](std::int64_t lo, std::int64_t hi, SumAcc& a) {
    for (std::int64_t i = lo; i < hi; ++i) {
      Stream st(11, static_cast<std::uint64_t>(i));
      a.m.add(st.uniform());
    }
  });
}
}  // namespace

TEST(Parallel, BitIdenticalAcrossThreadCounts) {
  const char* old = std::getenv("FRAC_THREADS");
  const std::string saved = old ? old : "";
  setenv("FRAC_THREADS", "1", 1);
  const SumAcc one = run_blocks();
  setenv("FRAC_THREADS", "7", 1);
  const SumAcc seven = run_blocks();
  if (old) setenv("FRAC_THREADS", saved.c_str(), 1);
  else unsetenv("FRAC_THREADS");
  EXPECT_EQ(one.m.count, 100000);
  EXPECT_EQ(one.m.mean, seven.m.mean);
  EXPECT_EQ(one.m.m2, seven.m.m2);
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(parallel_map<int>(100,
                                 [](std::size_t i) -> int {
                                   if (i == 57) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
}

TEST(GaussLegendre, ExactForPolynomials) {
  for (int m : {2, 5, 16, 33}) {
    const GaussRule& g = gauss_legendre(m);
    for (int deg = 0; deg <= 2 * m - 1; ++deg) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * std::pow(g.x[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(acc, exact, 1e-13) << "m=" << m << " deg=" << deg;
    }
  }
}

TEST(SphereRule, WeightsSumToArea) {
  for (int n : {2, 3, 4}) {
    double w = 0.0;
    for (const auto& d : sphere_rule(n, 32)) w += d.w;
    EXPECT_NEAR(w, sphere_area(n), 1e-12 * sphere_area(n));
  }
  EXPECT_NEAR(sphere_area(2), 2.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4.0 * std::numbers::pi, 1e-14);
}

TEST(SphereRule, IntegratesQuadraticsOnS2) {
  // int_{S^2} z^2 = 4 pi / 3
  double acc = 0.0;
  for (const auto& d : sphere_rule(3, 16)) acc += d.w * d.dir[2] * d.dir[2];
  EXPECT_NEAR(acc, 4.0 * std::numbers::pi / 3.0, 1e-12);
}

TEST(RadialSegment, SingularEndpoint) {
  // int_1^2 (rho - 1)^{-0.7} d rho = 1 / 0.3
  RadialRule rr;
  SegmentEnds e;
  e.alpha = 1.0;
  e.q_lo = 1.0 / 0.3;
  std::vector<RadialNode> nodes;
  radial_segment(rr, 1.0, 2.0, e, nodes);
  double acc = 0.0;
  for (const auto& nd : nodes) acc += nd.w * std::pow(nd.gap_lo, -0.7);
  EXPECT_NEAR(acc, 1.0 / 0.3, 1e-10);
}

TEST(RadialSegment, HeavyTail) {
  // int_1^inf rho^{-1-gamma} d rho = 1 / gamma
  for (double gamma : {0.3, 1.0, 1.7}) {
    RadialRule rr;
    SegmentEnds e;
    e.gamma = gamma;
    std::vector<RadialNode> nodes;
    radial_segment(rr, 1.0, INFINITY, e, nodes);
    double acc = 0.0;
    for (const auto& nd : nodes) acc += nd.w * std::pow(nd.rho, -1.0 - gamma);
    EXPECT_NEAR(acc, 1.0 / gamma, 1e-10 / gamma);
  }
}

TEST(Lp, SmallProblemWithKnownOptimum) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3  ->  (3, 1), objective 11
  const auto r = lp_maximize({3.0, 2.0}, {{1, 1}, {1, 3}, {1, 0}}, {4, 6, 3});
  EXPECT_NEAR(r.x[0], 3.0, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
  EXPECT_NEAR(r.objective, 11.0, 1e-12);
}

TEST(Lp, FreeVariablesTakeNegativeValues) {
  // max -x s.t. -x <= 2, x <= 5  ->  x = -2
  const auto r = lp_maximize({-1.0}, {{-1.0}, {1.0}}, {2.0, 5.0});
  EXPECT_NEAR(r.x[0], -2.0, 1e-12);
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
}

TEST(Lp, BoxConstraintsFromAbsoluteValues) {
  // |a_i . x| <= 1 on a fan of m directions: a regular 2m-gon of inradius 1
  const int m = 12;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (int i = 0; i < m; ++i) {
    const double t = std::numbers::pi * i / m;
    A.push_back({std::cos(t), std::sin(t)});
    A.push_back({-std::cos(t), -std::sin(t)});
    b.push_back(1.0);
    b.push_back(1.0);
  }
  const auto r = lp_maximize({1.0, 0.0}, A, b);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);
  // towards a vertex of the 2m-gon the optimum is its circumradius
  const double v = std::numbers::pi / (2 * m);
  const auto r2 = lp_maximize({std::cos(v), std::sin(v)}, A, b);
  EXPECT_NEAR(r2.objective, 1.0 / std::cos(v), 1e-12);
}

TEST(Lp, DegenerateProblemTerminates) {
  // many redundant constraints through the origin
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (int i = 0; i < 60; ++i) {
    A.push_back({1.0, static_cast<double>(i % 5) - 2.0, 1.0});
    b.push_back(i < 50 ? 0.0 : 1.0);
  }
  A.push_back({1.0, 0.0, 0.0});
  b.push_back(1.0);
  A.push_back({0.0, 1.0, 0.0});
  b.push_back(1.0);
  A.push_back({0.0, -1.0, 0.0});
  b.push_back(1.0);
  A.push_back({0.0, 0.0, -1.0});
  b.push_back(3.0);
  const auto r = lp_maximize({1.0, 0.0, 0.0}, A, b);
  for (std::size_t i = 0; i < A.size(); ++i) {
    double ax = 0.0;
    for (int j = 0; j < 3; ++j) ax += A[i][j] * r.x[j];
    EXPECT_LE(ax, b[i] + 1e-9);
  }
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
}

TEST(Lp, Errors) {
  EXPECT_THROW(lp_maximize({1.0}, {{-1.0}}, {1.0}), NumericalError);  // unbounded
  EXPECT_THROW(lp_maximize({1.0}, {{1.0}}, {-1.0}), DomainError);
  EXPECT_THROW(lp_maximize({1.0, 2.0}, {{1.0}}, {1.0}), DomainError);
}
