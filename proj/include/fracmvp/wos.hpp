#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "error.hpp"
#include "exterior_data.hpp"
#include "gauss.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace fracmvp {

/// Radial part of the exit law from a ball. If y ~ mu_rho(center), then
/// u = |y - center| / rho has density proportional to u^{-1} (u^2 - 1)^{-s} on (1, inf),
/// independently of n. The sampler tabulates F (from the left) and S = 1 - F (from the right)
/// of eps = u - 1 on a log grid, each by its own cumulative quadrature so both stay accurate
/// in relative terms, and inverts by linear interpolation of log(eps) against logit(S).
/// Beyond the grid the exact power laws F ~ eps^{1-s} and S ~ eps^{-2s} are used.
class ExitSampler {
 public:
  static constexpr int kGrid = 16384;
  static constexpr double kLogEpsMin = -12.0 * 2.302585092994046;
  static constexpr double kLogEpsMax = 12.0 * 2.302585092994046;

  explicit ExitSampler(double s) : s_(s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("exit sampler: s must lie in (0,1)");
    const double q = 1.0 / (1.0 - s);
    auto h = [s](const RadialNode& nd) {
      return std::exp(-std::log(nd.rho) - s * (std::log(nd.gap_lo) + std::log(nd.rho + 1.0)));
    };
    auto integrate = [&](double a, double b, const RadialRule& rr) {
      std::vector<RadialNode> nodes;
      SegmentEnds e;
      e.alpha = 1.0;
      e.q_lo = q;
      e.gamma = 2.0 * s;
      radial_segment(rr, a, b, e, nodes);
      double acc = 0.0;
      for (const auto& nd : nodes) acc += nd.w * h(nd);
      return acc;
    };
    x_.resize(kGrid);
    std::vector<double> eps(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      x_[i] = kLogEpsMin + (kLogEpsMax - kLogEpsMin) * i / (kGrid - 1);
      eps[i] = std::exp(x_[i]);
    }
    RadialRule end_rule;
    end_rule.panels = 2;
    end_rule.levels = 10;
    RadialRule step_rule;
    step_rule.panels = 1;
    step_rule.order = 8;
    step_rule.levels = 0;
    std::vector<double> inc(kGrid - 1);
    for (int i = 0; i + 1 < kGrid; ++i) inc[i] = integrate(1.0 + eps[i], 1.0 + eps[i + 1], step_rule);
    std::vector<double> F(kGrid), S(kGrid);
    F[0] = integrate(1.0, 1.0 + eps[0], end_rule);
    for (int i = 1; i < kGrid; ++i) F[i] = F[i - 1] + inc[i - 1];
    S[kGrid - 1] = integrate(1.0 + eps[kGrid - 1], INFINITY, end_rule);
    for (int i = kGrid - 2; i >= 0; --i) S[i] = S[i + 1] + inc[i];
    total_ = F[kGrid - 1] + S[kGrid - 1];
    RadialRule ref;
    ref.panels = 8;
    ref.levels = 12;
    const double reference = detail::unit_radial_integral(s, ref);
    const double rel = std::abs(total_ - reference) / reference;
    if (!(rel < 1e-10)) throw NumericalError("exit-law tabulation did not converge", rel);
    y_.resize(kGrid);
    for (int i = 0; i < kGrid; ++i) y_[i] = std::log(S[i]) - std::log(F[i]);
  }

  double s() const { return s_; }

  /// eps = |y - center|/rho - 1 for a uniform U in (0,1), read as the survival probability.
  double eps_from_uniform(double U) const {
    const double yt = std::log(U) - std::log1p(-U);
    double x;
    if (yt >= y_.front()) {
      x = x_.front() - (yt - y_.front()) / (1.0 - s_);
    } else if (yt <= y_.back()) {
      x = x_.back() - (yt - y_.back()) / (2.0 * s_);
    } else {
      // y_ is decreasing
      const auto it = std::lower_bound(y_.begin(), y_.end(), yt, [](double a, double b) { return a > b; });
      const std::size_t j = static_cast<std::size_t>(it - y_.begin());
      const double y0 = y_[j - 1], y1 = y_[j];
      x = x_[j - 1] + (yt - y0) * (x_[j] - x_[j - 1]) / (y1 - y0);
    }
    return std::exp(x);
  }

  /// P(u - 1 > eps) by interpolation in the table (for diagnostics).
  double survival(double eps) const {
    const double x = std::log(eps);
    double yt;
    if (x <= x_.front()) yt = y_.front() - (1.0 - s_) * (x - x_.front());
    else if (x >= x_.back()) yt = y_.back() - 2.0 * s_ * (x - x_.back());
    else {
      const double pos = (x - kLogEpsMin) / (kLogEpsMax - kLogEpsMin) * (kGrid - 1);
      const std::size_t j = std::min<std::size_t>(kGrid - 2, static_cast<std::size_t>(pos));
      const double f = pos - j;
      yt = y_[j] + f * (y_[j + 1] - y_[j]);
    }
    return 1.0 / (1.0 + std::exp(-yt));
  }

 private:
  double s_;
  double total_ = 0.0;
  std::vector<double> x_, y_;
};

/// Shared, lazily built sampler for order s.
inline const ExitSampler& exit_sampler(double s) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<ExitSampler>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[s];
  if (!slot) slot = std::make_unique<ExitSampler>(s);
  return *slot;
}

/// A draw from mu_rho(center): the exit point of the 2s-stable process started at center from
/// the ball B_rho(center).
inline Vec sample_exit(const FracParams& p, const Vec& center, double rho, Stream& st) {
  if (!(rho > 0.0)) throw DomainError("sample_exit: radius must be positive");
  const double eps = exit_sampler(p.s).eps_from_uniform(st.uniform());
  const Vec dir = st.direction(p.n);
  return center + (rho * (1.0 + eps)) * dir;
}

struct WosConfig {
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 1;
  int max_jumps = 10000;
  double shrink_factor = 0.9;
  // Add the expected contribution of compactly supported bump data at every jump instead of
  // waiting for the path to land in the (possibly tiny) support.
  bool next_event = true;

  void validate() const {
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    if (!(shrink_factor >= 0.5 && shrink_factor < 1.0)) throw DomainError("shrink_factor must lie in [0.5,1)");
    if (max_jumps < 1) throw DomainError("max_jumps must be >= 1");
  }
};

struct WosEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  std::int64_t n_paths = 0;
  double mean_jumps = 0.0;
  std::uint64_t seed = 0;
  std::int64_t capped = 0;
  bool valid = true;
};

/// Walk-on-spheres for (-Delta)^s u = 0 in dom, u = g outside, for several data sets at once
/// (all share the same paths).
class WosSolver {
 public:
  struct PathResult {
    int jumps = 0;
    bool capped = false;
  };

  WosSolver(const FracParams& p, Domain dom, std::vector<ExteriorData> data, WosConfig cfg)
      : p_(p), dom_(std::move(dom)), data_(std::move(data)), cfg_(cfg) {
    cfg_.validate();
    if (dim(dom_) != p_.n) throw DomainError("domain dimension does not match n");
    exit_sampler(p_.s);
    for (std::size_t d = 0; d < data_.size(); ++d) {
      for (std::size_t t = 0; t < data_[d].terms.size(); ++t) {
        const DataTerm& term = data_[d].terms[t];
        const bool eligible = cfg_.next_event && p_.n <= 3 && term.kind == DataTerm::Kind::Bump &&
                              signed_dist(dom_, term.center) > term.radius;
        if (eligible) {
          ne_.push_back(make_ne(d, term));
        } else {
          at_exit_.push_back({d, t});
        }
      }
    }
  }

  std::size_t size() const { return data_.size(); }
  const WosConfig& config() const { return cfg_; }
  const Domain& domain() const { return dom_; }
  const FracParams& params() const { return p_; }

  /// One path from the interior point x; scores[d] receives the score for data set d.
  PathResult path(const Vec& x, Stream& st, std::vector<double>& scores) const {
    scores.assign(data_.size(), 0.0);
    std::vector<char> covered(ne_.size(), 0);
    Vec z = x;
    double sdz = signed_dist(dom_, z);
    PathResult res;
    if (!(sdz < 0.0)) throw DomainError("walk-on-spheres: start point must be interior");
    for (;;) {
      const double rho = cfg_.shrink_factor * (-sdz);
      for (std::size_t k = 0; k < ne_.size(); ++k) {
        const NeTerm& t = ne_[k];
        const double eta = dist(z, t.center) - t.radius - rho;
        const int tier = eta >= 16.0 * t.radius ? 0 : eta >= 4.0 * t.radius ? 1 : eta >= 0.5 * t.radius ? 2 : -1;
        covered[k] = tier >= 0;
        if (tier >= 0) scores[t.data] += expected_bump(t.rules[static_cast<std::size_t>(tier)], z, rho);
      }
      const Vec y = sample_exit(p_, z, rho, st);
      ++res.jumps;
      const double sdy = signed_dist(dom_, y);
      if (sdy >= 0.0) {
        for (auto [d, t] : at_exit_) scores[d] += data_[d].terms[t](y);
        for (std::size_t k = 0; k < ne_.size(); ++k)
          if (!covered[k]) scores[ne_[k].data] += ne_[k].term(y);
        return res;
      }
      if (res.jumps >= cfg_.max_jumps) {
        res.capped = true;
        std::fill(scores.begin(), scores.end(), 0.0);
        return res;
      }
      z = y;
      sdz = sdy;
    }
  }

 private:
  // Precomputed quadrature of one bump term: node coordinates (packed) and w_j * g(y_j).
  struct PackedRule {
    std::vector<double> xyz;
    std::vector<double> v;
  };
  struct NeTerm {
    std::size_t data;
    DataTerm term;
    Vec center;
    double radius;
    std::array<PackedRule, 3> rules;  // very far, far, near
  };

  // Sum_j v_j * mu_rho^z(y_j), i.e. the integral of the bump against the exit law of B_rho(z).
  double expected_bump(const PackedRule& r, const Vec& z, double rho) const {
    const int n = p_.n;
    const double rho2 = rho * rho;
    const double s = p_.s;
    double acc = 0.0;
    const std::size_t m = r.v.size();
    const double* X = r.xyz.data();
    for (std::size_t j = 0; j < m; ++j, X += n) {
      double d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double t = X[i] - z[i];
        d2 += t * t;
      }
      const double base = d2 - rho2;
      double w = s == 0.5 ? 1.0 / std::sqrt(base) : std::exp(-s * std::log(base));
      if (n == 2) w /= d2;
      else if (n == 3) w /= d2 * std::sqrt(d2);
      else w /= std::sqrt(d2);
      acc += r.v[j] * w;
    }
    return acc * p_.c * std::pow(rho, 2.0 * s);
  }

  NeTerm make_ne(std::size_t d, const DataTerm& term) const {
    NeTerm t{d, term, term.center, term.radius, {}};
    auto pack = [&](const PointRule& pr) {
      PackedRule out;
      for (std::size_t j = 0; j < pr.y.size(); ++j) {
        const double v = pr.w[j] * term(pr.y[j]);
        if (v == 0.0) continue;
        for (int i = 0; i < p_.n; ++i) out.xyz.push_back(pr.y[j][i]);
        out.v.push_back(v);
      }
      return out;
    };
    const Vec& c = term.center;
    const double R = term.radius;
    if (p_.n == 1) {
      for (auto& r : t.rules) r = pack(ball_rule(c, R, 48, 2));
    } else if (p_.n == 2) {
      t.rules = {pack(ball_rule(c, R, 16, 6)), pack(ball_rule(c, R, 24, 10)), pack(ball_rule(c, R, 24, 32))};
    } else {
      t.rules = {pack(ball_rule(c, R, 16, 4)), pack(ball_rule(c, R, 16, 8)), pack(ball_rule(c, R, 16, 16))};
    }
    return t;
  }

  FracParams p_;
  Domain dom_;
  std::vector<ExteriorData> data_;
  WosConfig cfg_;
  std::vector<NeTerm> ne_;
  std::vector<std::pair<std::size_t, std::size_t>> at_exit_;
};

namespace detail {

struct MultiAcc {
  std::vector<Moments> m;
  Moments jumps;
  std::int64_t capped = 0;
  void merge(const MultiAcc& o) {
    if (m.size() < o.m.size()) m.resize(o.m.size());
    for (std::size_t i = 0; i < o.m.size(); ++i) m[i].merge(o.m[i]);
    jumps.merge(o.jumps);
    capped += o.capped;
  }
};

inline std::vector<WosEstimate> finish(const MultiAcc& acc, const WosConfig& cfg, std::size_t k) {
  std::vector<WosEstimate> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    WosEstimate& e = out[i];
    e.mean = acc.m.size() > i ? acc.m[i].mean : 0.0;
    e.stderr = acc.m.size() > i ? acc.m[i].stderr_of_mean() : 0.0;
    e.n_paths = cfg.n_paths;
    e.mean_jumps = acc.jumps.mean;
    e.seed = cfg.seed;
    e.capped = acc.capped;
    e.valid = static_cast<double>(acc.capped) <= 1e-3 * static_cast<double>(cfg.n_paths);
  }
  return out;
}

}  // namespace detail

/// Estimates for every data set of the solver at the interior point x.
inline std::vector<WosEstimate> wos_solve_all(const WosSolver& solver, const Vec& x) {
  const WosConfig& cfg = solver.config();
  const std::size_t k = solver.size();
  auto acc = parallel_blocks<detail::MultiAcc>(cfg.n_paths, [&](std::int64_t lo, std::int64_t hi, detail::MultiAcc& a) {
    a.m.resize(k);
    std::vector<double> sc;
    for (std::int64_t i = lo; i < hi; ++i) {
      Stream st(cfg.seed, static_cast<std::uint64_t>(i));
      const auto r = solver.path(x, st, sc);
      for (std::size_t d = 0; d < k; ++d) a.m[d].add(sc[d]);
      a.jumps.add(r.jumps);
      a.capped += r.capped ? 1 : 0;
    }
  });
  return detail::finish(acc, cfg, k);
}

/// u(x) for (-Delta)^s u = 0 in dom with u = g outside.
inline WosEstimate wos_solve(const FracParams& p, const Domain& dom, const ExteriorData& g, const Vec& x,
                             const WosConfig& cfg) {
  WosSolver solver(p, dom, {g}, cfg);
  return wos_solve_all(solver, x).front();
}

/// E[phi_{k,p}(exit point)]: the Poisson kernel P_dom(x, .) smoothed by the probe.
inline WosEstimate exit_density(const FracParams& p, const Domain& dom, const Vec& x, const Mollifier& probe,
                                const WosConfig& cfg) {
  require_support_outside(dom, probe.term(), "exit_density");
  return wos_solve(p, dom, probe.data(), x, cfg);
}

}  // namespace fracmvp
